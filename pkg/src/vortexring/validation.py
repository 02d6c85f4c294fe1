"""Self-checks run by ``vortexring validate``.

Each check returns a :class:`Check` with the measured residual and the threshold
it was held to.  Random samples come from ``numpy.random.default_rng(seed)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, List

import numpy as np

from . import kernels
from .profile import moment, rotation_energy_integral, solve_profile
from .reynolds import AntidivergenceRule, CompatibilityError, antidivergence, divergence_fd

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    threshold: float

    def to_dict(self):
        return asdict(self)


def _check(name, residual, threshold):
    residual = float(residual)
    return Check(name, bool(math.isfinite(residual) and residual <= threshold), residual, threshold)


# ---------------------------------------------------------------------------
# synthetic compatible forcings, supported in B(x0, 0.8 c)

SYNTHETIC_FIELDS = ("dipole_pair", "rotated_dipole", "curl")


def _bump(xi, radius=0.8):
    q = np.sum(xi * xi, axis=-1) / radius ** 2
    inside = q < 1
    b = np.where(inside, (1 - q) ** 4, 0.0)
    db = np.where(inside, -4 * (1 - q) ** 3, 0.0)[..., None] * 2 * xi / radius ** 2
    return b, db


def synthetic_field(kind: str, x0, c: float) -> Callable:
    """Compatible test forcing.

    ``dipole_pair`` and ``rotated_dipole`` are ``div(b P)`` for a constant symmetric
    traceless ``P``; ``curl`` is the perpendicular gradient of the odd stream
    function ``b xi_1``, whose zero mean makes the moment condition hold.
    """
    x0 = np.asarray(x0, dtype=float)
    if kind not in SYNTHETIC_FIELDS:
        raise ValueError(f"unknown synthetic field {kind!r}")
    angle = 0.35 if kind == "rotated_dipole" else 0.0
    p11, p12 = math.cos(2 * angle), math.sin(2 * angle)

    def f(pts):
        xi = (np.atleast_2d(pts) - x0) / c
        b, db = _bump(xi)
        if kind == "curl":
            out = np.stack([-db[:, 1] * xi[:, 0], db[:, 0] * xi[:, 0] + b], axis=-1)
        else:
            out = np.stack([p11 * db[:, 0] + p12 * db[:, 1], p12 * db[:, 0] - p11 * db[:, 1]], axis=-1)
        return out / c

    return f


def random_disk_points(rng, x0, c, n, frac=0.9):
    rad = frac * c * np.sqrt(rng.random(n))
    th = TWO_PI * rng.random(n)
    return np.column_stack([x0[0] + rad * np.cos(th), x0[1] + rad * np.sin(th)])


def antidivergence_residual(kind: str, x0, c: float, pts, rule=AntidivergenceRule()):
    """``max |div R f - f| / max |f|`` at ``pts`` and ``max |R f|`` just outside the disk."""
    f = synthetic_field(kind, x0, c)
    R = antidivergence(f, x0, c, rule)
    div = divergence_fd(R, pts, 1e-3 * c)
    fv = f(pts)
    grid = np.linspace(-1, 1, 201)
    fmax = np.max(np.abs(f(np.column_stack([x0[0] + c * grid, np.full(201, x0[1])]))))
    fmax = max(fmax, np.max(np.abs(fv)))
    ring = np.column_stack([x0[0] + 1.0001 * c * np.cos(grid * math.pi), x0[1] + 1.0001 * c * np.sin(grid * math.pi)])
    outside = float(np.max(np.abs(R(ring))))
    return float(np.max(np.abs(div - fv)) / fmax), outside, R, fmax


# ---------------------------------------------------------------------------
# the suite

def check_profile_moments(gamma: float) -> List[Check]:
    p = solve_profile(gamma)
    return [_check("profile_circulation", abs(TWO_PI * moment(p, 1) - gamma) / abs(gamma), 1e-10),
            _check("profile_third_moment", abs(moment(p, 3)) / abs(gamma), 1e-10)]


def admissible_profiles(gamma: float):
    return [solve_profile(gamma),
            solve_profile(gamma, lambda r: 0.3 * r * r * (1 - r) ** 2),
            solve_profile(gamma, lambda r: 0.1 * np.sin(math.pi * r) ** 2)]


def check_rotation_energy(gamma: float) -> Check:
    vals = np.array([rotation_energy_integral(p) for p in admissible_profiles(gamma)])
    return _check("rotation_energy_invariance", np.ptp(vals) / np.max(np.abs(vals)), 1e-8)


def check_kernels(tol: float, rng) -> List[Check]:
    s = np.logspace(-8, -2, 20)
    g, h = kernels.G(s), kernels.H(s)
    a = np.abs(g - 1 / s) / np.abs(np.log(s))
    b = np.abs(h + 0.25 * np.log(s))
    spread = max(np.max(a) / np.median(a), np.max(b) / np.median(b))
    out = [_check("kernel_small_s_asymptotics", spread, 3.0)]
    sa = np.logspace(-6, 3, 10)
    aux = max(max(abs(kernels.aux_exact_1(x) - kernels.aux_quadrature_1(x)) / kernels.aux_exact_1(x),
                  abs(kernels.aux_exact_2(x) - kernels.aux_quadrature_2(x)) / kernels.aux_exact_2(x)) for x in sa)
    out.append(_check("kernel_aux_closed_forms", aux, 1e-10))
    table = kernels.kernel_table(tol)
    st = np.exp(rng.uniform(math.log(1e-6), math.log(1e4), 40))
    gt, ht = table(st)
    ge, he = kernels.G(st), kernels.H(st)
    err = max(np.max(np.abs(gt - ge) / np.abs(ge)), np.max(np.abs(ht - he) / np.maximum(1.0, np.abs(he))))
    out.append(_check("kernel_table", err, 1e-9))
    worst = 0.0
    for _ in range(3):
        zeta = (rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        zp = (rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
        k = kernels.K_ax(zeta, zp, table)
        ref = kernels.ring_velocity_3d(zeta, zp)
        worst = max(worst, np.max(np.abs(k - ref)) / np.max(np.abs(ref)))
    out.append(_check("kernel_3d_biot_savart", worst, 1e-6))
    return out


def check_mean_value(rng, n: int = 100) -> Check:
    worst = 0.0
    for _ in range(n):
        rho, rho_p = rng.uniform(0.05, 1.0, 2)
        exact = kernels.mean_value_circle(rho, rho_p)
        worst = max(worst, abs(kernels.mean_value_circle_quadrature(rho, rho_p) - exact))
    return _check("mean_value_circle", worst, 1e-10)


def check_antidivergence(rng, n: int = 10) -> List[Check]:
    x0, c = np.array([2.0, 0.3]), 0.5
    pts = random_disk_points(rng, x0, c, n)
    div_err, outside = 0.0, 0.0
    for kind in SYNTHETIC_FIELDS:
        e, o, _, _ = antidivergence_residual(kind, x0, c, pts)
        div_err, outside = max(div_err, e), max(outside, o)
    out = [_check("antidivergence_divergence", div_err, 1e-2),
           _check("antidivergence_support", outside, 0.0)]
    try:
        antidivergence(lambda p: np.tile([1.0, 0.0], (np.atleast_2d(p).shape[0], 1)), x0, c)
        rejected = 1.0
    except CompatibilityError:
        rejected = 0.0
    out.append(_check("antidivergence_rejects_incompatible", rejected, 0.0))
    return out


def kernel_rows(n: int = 61):
    """Rows ``(s, G, H, G - 1/s, H + log(s)/4)`` on a log grid over ``[1e-8, 1e4]``."""
    s = np.logspace(-8, 4, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        g, h = kernels.G(s), kernels.H(s)
    return np.column_stack([s, g, h, g - 1 / s, h + 0.25 * np.log(s)])


def run_all(gamma: float = 1.0, tol: float = 1e-8, seed: int = 0) -> List[Check]:
    rng = np.random.default_rng(seed)
    checks: List[Check] = []
    with warnings.catch_warnings():
        # raw quadrature in the closed-form comparisons reports harmless roundoff
        warnings.simplefilter("ignore")
        checks += check_profile_moments(gamma)
        checks.append(check_rotation_energy(gamma))
        checks += check_kernels(tol, rng)
    checks.append(check_mean_value(rng))
    checks += check_antidivergence(rng)
    return checks
