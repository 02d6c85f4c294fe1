"""Kinetic energy of the ring flow and the Reynolds-stress energy.

    E_v = (1/2) int |v|^2 dx = pi int_H r |v|^2 dzeta
    E_R = (3/2) int lambda_max(R - tr(R)/3 I) dx

The half-plane integral is taken in polar coordinates about the core centre,
with radial panels doubling from the core size out to the truncation circle.
Beyond it the field is a dipole, ``|v| <= sqrt(M) |x|^-3``, so the remainder is
at most ``2 pi M / (3 R^3)``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .biotsavart import velocity_many
from .profile import VorticityProfile
from .quadrature import composite
from .reynolds import PressureCorrector, disk_rule, reynolds_field
from .ring import RingParams, height, thickness

TAIL_SAFETY = 2.0


@dataclass(frozen=True)
class KineticEnergy:
    value: float
    tail_bound: float
    truncation_radius: float
    n_points: int

    def __float__(self):
        return self.value


def _exit_distance(x0, phi, radius):
    """Distance from ``x0`` along ``phi`` to the boundary of ``{r > 0, |zeta| < radius}``."""
    e = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    b = e @ x0
    circle = -b + np.sqrt(b * b - x0 @ x0 + radius * radius)
    with np.errstate(divide="ignore"):
        axis = np.where(e[:, 0] < 0, -x0[0] / e[:, 0], np.inf)
    return np.minimum(circle, axis)


def energy_nodes(L: float, h: float, c: float, truncation_radius: float, order: int = 8,
                 angular_panels: int = 3):
    """Points ``(N, 2)`` and weights for ``int_H r f dzeta`` over the truncated half-plane."""
    x0 = np.array([L, h])
    # directions from the core centre to the two ends of the truncation arc on the axis
    upper = math.atan2(truncation_radius - h, -L)
    lower = math.atan2(-truncation_radius - h, -L) + 2.0 * math.pi
    breaks = np.unique(np.concatenate([
        np.linspace(lower - 2.0 * math.pi, upper, 4 * angular_panels + 1),
        np.linspace(upper, lower, 2 * angular_panels + 1)]))
    phi, wphi = composite(breaks, order)
    reach = _exit_distance(x0, phi, truncation_radius)
    pts, wts = [], []
    for k in range(phi.size):
        edges = [0.0, 0.5 * c, c]
        while edges[-1] * 2.0 < reach[k]:
            edges.append(edges[-1] * 2.0)
        edges[-1] = reach[k] if edges[-1] * 2.0 >= reach[k] else edges[-1]
        if edges[-1] < reach[k]:
            edges.append(reach[k])
        sig, ws = composite(np.array(edges), order)
        e = np.array([math.cos(phi[k]), math.sin(phi[k])])
        p = x0[None, :] + sig[:, None] * e[None, :]
        pts.append(p)
        wts.append(p[:, 0] * sig * ws * wphi[k])
    return np.concatenate(pts), np.concatenate(wts)


def tail_bound(params: RingParams, profile: VorticityProfile, t: float, truncation_radius: float,
               tol: float = 1e-8, n: int = 64, workers: int = 1) -> float:
    """``2 pi M / (3 R^3)`` with ``M`` the largest ``|v|^2 |x|^6`` on the truncation arc."""
    ang = (np.arange(n) + 0.5) / n * math.pi - 0.5 * math.pi
    r = truncation_radius * np.cos(ang)
    z = truncation_radius * np.sin(ang)
    v = velocity_many(params, profile, t, r, z, tol, workers)
    m = float(np.max(np.sum(v * v, axis=1))) * truncation_radius ** 6
    return TAIL_SAFETY * 2.0 * math.pi * m / (3.0 * truncation_radius ** 3)


def kinetic_energy(params: RingParams, profile: VorticityProfile, t: float,
                   truncation_radius: Optional[float] = None, tol: float = 1e-8,
                   workers: int = 1) -> KineticEnergy:
    radius = 10.0 * params.L if truncation_radius is None else float(truncation_radius)
    if radius < 10.0 * params.L:
        raise ValueError("truncation radius must be at least 10 L")
    c = thickness(params, t)
    pts, w = energy_nodes(params.L, height(params, t), c, radius)
    v = velocity_many(params, profile, t, pts[:, 0], pts[:, 1], tol, workers)
    value = math.pi * float(np.dot(w, np.sum(v * v, axis=1)))
    return KineticEnergy(value, tail_bound(params, profile, t, radius, tol, workers=workers), radius, len(w))


def energy_slope_fit(params: RingParams, profile: VorticityProfile, t_list: Sequence[float],
                     truncation_radius: Optional[float] = None, tol: float = 1e-8, workers: int = 1,
                     energies: Optional[Sequence[float]] = None) -> float:
    """Least-squares slope of ``E_v`` against ``log c``."""
    t = np.asarray(sorted(float(x) for x in t_list))
    if t.size < 5 or np.any(t <= 0) or np.unique(t).size != t.size:
        raise ValueError("need at least 5 distinct positive times")
    steps = np.diff(np.log(t))
    if not np.allclose(steps, steps[0], rtol=1e-6):
        raise ValueError("times must be log-spaced")
    logc = 0.5 * np.log(params.nu_tur * t)
    if np.any(np.exp(logc) >= params.L / 20):
        raise ValueError("every time must satisfy c < L/20")
    if energies is None:
        energies = [kinetic_energy(params, profile, ti, truncation_radius, tol, workers).value for ti in t]
    slope, _ = np.polyfit(logc, np.asarray(energies, dtype=float), 1)
    return float(slope)


def lambda_max_traceless(R) -> float:
    """Largest eigenvalue of the traceless part of the 3D lift ``diag(R, 0)``."""
    R = np.asarray(R, dtype=float)
    if R.shape == (2, 2):
        R = np.array([R[0, 0], 0.5 * (R[0, 1] + R[1, 0]), R[1, 1]])
    return float(lambda_max_array(R[None, :])[0])


def lambda_max_array(comp) -> np.ndarray:
    """Vectorized :func:`lambda_max_traceless` on rows ``(Rrr, Rrz, Rzz)``."""
    comp = np.atleast_2d(comp)
    a, b, d = comp[:, 0], comp[:, 1], comp[:, 2]
    third = (a + d) / 3.0
    top = 0.5 * (a + d) + np.hypot(0.5 * (a - d), b)
    return np.maximum(top - third, -third)


def reynolds_energy_bound(params: RingParams, profile: VorticityProfile, corr: PressureCorrector, t: float,
                          tol: float = 1e-8, workers: int = 1, order: int = 8, n_beta: int = 32) -> float:
    R = reynolds_field(params, profile, corr, t, tol, workers)
    pts, w = disk_rule(R.x0, R.c, order, n_beta)
    lam = lambda_max_array(R(pts))
    return float(1.5 * 2.0 * math.pi * np.sum(w * pts[:, 0] * lam))


@dataclass(frozen=True)
class EnergyReport:
    t: float
    c: float
    E_v: float
    E_R_bound: float
    tail_bound: float
    truncation_radius: float
    slope_fit: Optional[float] = None

    @property
    def E_sub(self) -> float:
        return self.E_v + self.E_R_bound

    def to_json(self) -> str:
        d = asdict(self)
        d["E_sub"] = self.E_sub
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EnergyReport":
        d = json.loads(text)
        d.pop("E_sub", None)
        return cls(**d)


def total_subsolution_energy(params: RingParams, profile: VorticityProfile, corr: PressureCorrector, t: float,
                             truncation_radius: Optional[float] = None, tol: float = 1e-8,
                             workers: int = 1) -> EnergyReport:
    ke = kinetic_energy(params, profile, t, truncation_radius, tol, workers)
    er = reynolds_energy_bound(params, profile, corr, t, tol, workers)
    return EnergyReport(t, thickness(params, t), ke.value, er, ke.tail_bound, ke.truncation_radius)


def is_decreasing(reports: Sequence[EnergyReport]) -> bool:
    """``E_sub`` strictly decreasing in ``t`` along the given reports."""
    ordered = sorted(reports, key=lambda rep: rep.t)
    return all(a.E_sub > b.E_sub for a, b in zip(ordered, ordered[1:]))


def write_energy_scan(path, reports: Sequence[EnergyReport]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "c", "E_v", "E_R", "tail_bound"])
        for rep in reports:
            w.writerow([format(float(x), ".17g") for x in (rep.t, rep.c, rep.E_v, rep.E_R_bound, rep.tail_bound)])
