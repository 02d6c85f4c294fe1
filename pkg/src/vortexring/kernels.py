"""Scalar kernels of the axisymmetric Biot-Savart law.

    G(s) = int_0^pi cos(phi) / (2(1 - cos phi) + s)^(3/2) dphi
    H(s) = int_0^pi (1 - cos phi) / (2(1 - cos phi) + s)^(3/2) dphi

Both integrands concentrate in an O(sqrt(s)) window around phi = 0.  The
substitution phi = sqrt(s) sinh(tau) spreads that window over an O(1) range of
tau, after which plain Gauss-Legendre panels converge geometrically.

The hot path uses :class:`KernelTable`, a cubic Hermite table over log(s) of
regularized versions of G and H (exact derivatives, so the interpolant is
fourth-order accurate).
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from ._accel import HAS_NUMBA, njit
from .quadrature import composite, periodic_trapezoid

INV_TWO_PI = 1.0 / (2.0 * math.pi)
_S_MIN = 1e-16
_S_MAX = 1e10


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)) or np.any(~np.isfinite(s)):
        raise ValueError("kernel argument s must be positive and finite")
    return s


def _denominator(phi, s):
    # 2(1 - cos phi) written without cancellation
    return 4.0 * np.sin(0.5 * phi) ** 2 + s


def _tau_integrand(numerator, power):
    def f(tau, s):
        rs = math.sqrt(s)
        phi = rs * math.sinh(tau)
        if phi > math.pi:
            return 0.0
        return numerator(phi) * rs * math.cosh(tau) / _denominator(phi, s) ** power
    return f


_G_INTEGRAND = _tau_integrand(math.cos, 1.5)
_H_INTEGRAND = _tau_integrand(lambda p: 2.0 * math.sin(0.5 * p) ** 2, 1.5)


def _adaptive(integrand, s):
    tmax = math.asinh(math.pi / math.sqrt(s))
    # panel edges at integer tau keep the peak (tau ~ 0..2) on its own panels
    pts = [float(k) for k in range(1, int(tmax)) if k < tmax]
    val, _ = integrate.quad(integrand, 0.0, tmax, args=(s,), epsabs=0.0, epsrel=1e-13,
                            limit=400, points=pts or None)
    return val


# Above this threshold the integral of cos(phi) cancels to ~s*eps in double
# precision, so both kernels switch to their convergent expansion in 2/(s+2).
SERIES_THRESHOLD = 100.0


def _cos_power_integral(m: int) -> float:
    if m % 2:
        return 0.0
    val = math.pi
    for j in range(1, m, 2):
        val *= j / (j + 1.0)
    return val


_SERIES_TERMS = 16
_SERIES_COEF = np.array([math.gamma(k + 1.5) / (math.gamma(1.5) * math.factorial(k)) * 2.0 ** k
                         for k in range(_SERIES_TERMS)])
_SERIES_G = _SERIES_COEF * [_cos_power_integral(k + 1) for k in range(_SERIES_TERMS)]
_SERIES_H = _SERIES_COEF * [_cos_power_integral(k) - _cos_power_integral(k + 1) for k in range(_SERIES_TERMS)]


def large_s_series(s):
    """G, H, dG/ds, dH/ds from the binomial expansion of ``(s + 2 - 2 cos phi)^(-3/2)``."""
    a = np.asarray(s, dtype=float)[..., None] + 2.0
    k = np.arange(_SERIES_TERMS)
    powers = a ** (-1.5 - k)
    dpowers = -(1.5 + k) * powers / a
    return (np.sum(_SERIES_G * powers, -1), np.sum(_SERIES_H * powers, -1),
            np.sum(_SERIES_G * dpowers, -1), np.sum(_SERIES_H * dpowers, -1))


def _kernel(integrand, column, s):
    s = _check_s(s)

    def one(x):
        if x >= SERIES_THRESHOLD:
            return float(large_s_series(x)[column])
        return _adaptive(integrand, x)

    out = np.vectorize(one, otypes=[float])(s)
    return float(out) if out.ndim == 0 else out


def G(s):
    """G(s): adaptive Gauss-Kronrod quadrature below ``SERIES_THRESHOLD``, series above."""
    return _kernel(_G_INTEGRAND, 0, s)


def H(s):
    """H(s): adaptive Gauss-Kronrod quadrature below ``SERIES_THRESHOLD``, series above."""
    return _kernel(_H_INTEGRAND, 1, s)


def G_quadrature(s: float) -> float:
    """Pure quadrature value of G (no series switch); loses accuracy for large s."""
    return _adaptive(_G_INTEGRAND, float(_check_s(s)))


def H_quadrature(s: float) -> float:
    return _adaptive(_H_INTEGRAND, float(_check_s(s)))


def aux_exact_1(s):
    """``int_0^pi (phi^2 + s)^(-3/2) dphi`` in closed form."""
    s = _check_s(s)
    return math.pi / (s * np.sqrt(s + math.pi ** 2))


def aux_exact_2(s):
    """``int_0^pi phi^2 (phi^2 + s)^(-3/2) dphi`` in closed form."""
    s = _check_s(s)
    return np.arcsinh(math.pi / np.sqrt(s)) - math.pi / np.sqrt(s + math.pi ** 2)


def aux_quadrature_1(s: float) -> float:
    s = float(_check_s(s))
    f = lambda t: math.sqrt(s) * math.cosh(t) / (s * math.cosh(t) ** 2) ** 1.5
    val, _ = integrate.quad(f, 0.0, math.asinh(math.pi / math.sqrt(s)), epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def aux_quadrature_2(s: float) -> float:
    s = float(_check_s(s))
    rs = math.sqrt(s)
    f = lambda t: (rs * math.sinh(t)) ** 2 * rs * math.cosh(t) / (s * math.cosh(t) ** 2) ** 1.5
    val, _ = integrate.quad(f, 0.0, math.asinh(math.pi / rs), epsabs=0.0, epsrel=1e-13, limit=200)
    return val


# ---------------------------------------------------------------------------
# vectorized fixed-rule evaluation (table construction)

def _fixed_rule_values(s, order=16, width=0.5):
    """G, H, G', H' at every entry of ``s`` with composite rules in tau."""
    s = np.asarray(s, dtype=float)
    out = np.empty((4, s.size))
    for i, si in enumerate(s.ravel()):
        if si >= SERIES_THRESHOLD:
            out[:, i] = large_s_series(si)
            continue
        tmax = math.asinh(math.pi / math.sqrt(si))
        npan = max(1, int(math.ceil(tmax / width)))
        tau, w = composite(np.linspace(0.0, tmax, npan + 1), order)
        rs = math.sqrt(si)
        phi = rs * np.sinh(tau)
        jac = rs * np.cosh(tau) * w
        half = np.sin(0.5 * phi) ** 2
        d = 4.0 * half + si
        d15 = d ** -1.5
        d25 = d15 / d
        cphi = np.cos(phi)
        out[0, i] = np.dot(cphi * d15, jac)
        out[1, i] = np.dot(2.0 * half * d15, jac)
        out[2, i] = -1.5 * np.dot(cphi * d25, jac)
        out[3, i] = -1.5 * np.dot(2.0 * half * d25, jac)
    return out


def _regularize(s, g, h, dg, dh):
    """Map (G, H) and their s-derivatives to smooth O(1) functions of log(s)."""
    a = (1.0 + s) ** 1.5
    da = 1.5 * np.sqrt(1.0 + s)
    b = 1.0 + 0.25 * np.log1p(1.0 / s)
    db = -0.25 / (s * (s + 1.0))
    gr = g * s * a
    dgr = dg * s * a + g * a + g * s * da
    hr = h * a / b
    dhr = (dh * a + h * da) / b - h * a * db / b ** 2
    # d/dx with x = log(s)
    return gr, dgr * s, hr, dhr * s


class KernelTable:
    """Hermite table of the regularized kernels on a uniform log(s) grid."""

    def __init__(self, step: float = 0.01):
        self.step = float(step)
        self.x0 = math.log(_S_MIN)
        n = int(math.ceil((math.log(_S_MAX) - self.x0) / self.step)) + 1
        x = self.x0 + self.step * np.arange(n)
        s = np.exp(x)
        g, h, dg, dh = _fixed_rule_values(s)
        gr, dgr, hr, dhr = _regularize(s, g, h, dg, dh)
        self.data = np.ascontiguousarray(np.stack([gr, dgr * self.step, hr, dhr * self.step]))
        self.data.setflags(write=False)
        # constant term of H = -log(s)/4 + C0 below the table
        self.h_const = float(h[0] + 0.25 * math.log(s[0]))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        g, h = table_eval_vector(s.ravel(), self)
        return g.reshape(s.shape), h.reshape(s.shape)


@lru_cache(maxsize=4)
def kernel_table(tol: float = 1e-10) -> KernelTable:
    """Shared table; ``tol`` selects the log-spacing (memoized per tolerance)."""
    if tol > 1e-8:
        # Hermite error falls like step^4; 0.02 already sits near 1e-12
        step = min(1.0, 0.02 * (tol / 1e-8) ** 0.25)
    else:
        step = 0.02 if tol == 1e-8 else (0.01 if tol >= 1e-11 else 0.005)
    return KernelTable(step)


@njit
def _table_eval(s, data, x0, step, h_const):
    if s < 1e-16:
        return 1.0 / s, -0.25 * math.log(s) + h_const
    if s > 1e10:
        # leading terms of the large-s expansion; the next ones are below 1e-20
        a = s + 2.0
        pre = a ** -1.5
        ia = 1.0 / a
        g = pre * math.pi * (1.5 * ia + 105.0 / 16.0 * ia * ia * ia)
        h = pre * math.pi * (1.0 - 1.5 * ia + 3.75 * ia * ia - 105.0 / 16.0 * ia * ia * ia)
        return g, h
    u = (math.log(s) - x0) / step
    i = int(u)
    n = data.shape[1]
    if i > n - 2:
        i = n - 2
    t = u - i
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    gr = h00 * data[0, i] + h10 * data[1, i] + h01 * data[0, i + 1] + h11 * data[1, i + 1]
    hr = h00 * data[2, i] + h10 * data[3, i] + h01 * data[2, i + 1] + h11 * data[3, i + 1]
    a = (1.0 + s) ** 1.5
    b = 1.0 + 0.25 * math.log1p(1.0 / s)
    return gr / (s * a), hr * b / a


@njit
def _table_eval_array(s, data, x0, step, h_const):
    g = np.empty(s.shape[0])
    h = np.empty(s.shape[0])
    for k in range(s.shape[0]):
        g[k], h[k] = _table_eval(s[k], data, x0, step, h_const)
    return g, h


def _table_eval_numpy(s, data, x0, step, h_const):
    """Array version of :func:`_table_eval` for the pure-numpy backend."""
    s = np.asarray(s, dtype=float)
    sc = np.clip(s, _S_MIN, _S_MAX)
    u = (np.log(sc) - x0) / step
    i = np.minimum(u.astype(np.int64), data.shape[1] - 2)
    t = u - i
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    gr = h00 * data[0, i] + h10 * data[1, i] + h01 * data[0, i + 1] + h11 * data[1, i + 1]
    hr = h00 * data[2, i] + h10 * data[3, i] + h01 * data[2, i + 1] + h11 * data[3, i + 1]
    a = (1.0 + sc) ** 1.5
    g = gr / (sc * a)
    h = hr * (1.0 + 0.25 * np.log1p(1.0 / sc)) / a
    small = s < _S_MIN
    if np.any(small):
        g = np.where(small, 1.0 / s, g)
        h = np.where(small, -0.25 * np.log(np.where(small, s, 1.0)) + h_const, h)
    big = s > _S_MAX
    if np.any(big):
        ia = 1.0 / (s[big] + 2.0)
        pre = ia ** 1.5 * math.pi
        g[big] = pre * (1.5 * ia + 105.0 / 16.0 * ia ** 3)
        h[big] = pre * (1.0 - 1.5 * ia + 3.75 * ia ** 2 - 105.0 / 16.0 * ia ** 3)
    return g, h


def table_eval_vector(s, table: KernelTable):
    """Interpolated ``(G, H)`` on a 1-D array through the active backend."""
    s = np.ascontiguousarray(s, dtype=float)
    if HAS_NUMBA:
        return _table_eval_array(s, table.data, table.x0, table.step, table.h_const)
    return _table_eval_numpy(s, table.data, table.x0, table.step, table.h_const)


# ---------------------------------------------------------------------------
# assembled kernels

def _as_point(p):
    if isinstance(p, complex):
        return p.real, p.imag
    r, z = p
    return float(r), float(z)


def K_ax(zeta, zeta_prime, table: KernelTable | None = None):
    """Meridional velocity at ``zeta`` from a unit-flux ring through ``zeta_prime``.

    Returns ``(v_r, v_z)``.  Uses the interpolated kernels.
    """
    r, z = _as_point(zeta)
    rp, zp = _as_point(zeta_prime)
    if r <= 0 or rp <= 0:
        raise ValueError("points must satisfy r > 0")
    if r == rp and z == zp:
        raise ValueError("coincident points")
    table = table or kernel_table()
    q2 = r * rp
    s = ((r - rp) ** 2 + (z - zp) ** 2) / q2
    g, h = _table_eval(s, table.data, table.x0, table.step, table.h_const)
    q = math.sqrt(q2)
    pre = INV_TWO_PI / r
    return np.array([pre * (z - zp) * g / q, pre * (math.sqrt(rp / r) * h - (r - rp) * g / q)])


def K_ax_parts(zeta, zeta_prime, table: KernelTable | None = None):
    """``(rotation, vertical)`` split of :func:`K_ax` into its G and H terms."""
    r, z = _as_point(zeta)
    rp, zp = _as_point(zeta_prime)
    table = table or kernel_table()
    q2 = r * rp
    s = ((r - rp) ** 2 + (z - zp) ** 2) / q2
    g, h = _table_eval(s, table.data, table.x0, table.step, table.h_const)
    q = math.sqrt(q2)
    pre = INV_TWO_PI / r
    return (np.array([pre * (z - zp) * g / q, -pre * (r - rp) * g / q]),
            np.array([0.0, pre * math.sqrt(rp / r) * h]))


def K_2d(zeta):
    """Planar point-vortex kernel ``i / (2 pi conj(zeta))`` as ``(x, y)``."""
    x, y = _as_point(zeta)
    m2 = x * x + y * y
    if m2 == 0:
        raise ValueError("K_2d is singular at the origin")
    return np.array([-y, x]) * (INV_TWO_PI / m2)


def ring_velocity_3d(zeta, zeta_prime, n: int = 4096):
    """Independent check of :func:`K_ax`: integrate the 3D Biot-Savart law around the ring.

    The unit-flux ring sits at radius ``r'`` and height ``z'``; the target is at
    azimuth 0.  Periodic trapezoid in the ring angle.
    """
    r, z = _as_point(zeta)
    rp, zp = _as_point(zeta_prime)
    th, w = periodic_trapezoid(n)
    xs = np.stack([rp * np.cos(th), rp * np.sin(th), np.full(n, zp)], axis=1)
    tang = np.stack([-np.sin(th), np.cos(th), np.zeros(n)], axis=1)
    d = np.array([r, 0.0, z])[None, :] - xs
    dist3 = np.sum(d * d, axis=1) ** 1.5
    integrand = np.cross(d, tang) / dist3[:, None]
    v = -(rp / (4.0 * math.pi)) * np.sum(integrand * w[:, None], axis=0)
    return np.array([v[0], v[2]])


def mean_value_circle(rho: float, rho_prime: float) -> float:
    """Closed form of ``(1/2pi) int_0^2pi d a / (rho - rho' e^{-ia})``: ``1/rho`` if rho > rho'."""
    if rho <= 0 or rho_prime <= 0:
        raise ValueError("radii must be positive")
    if rho == rho_prime:
        raise ValueError("singular for equal radii")
    return 1.0 / rho if rho > rho_prime else 0.0


def mean_value_circle_quadrature(rho: float, rho_prime: float, tol: float = 1e-13) -> complex:
    """Periodic trapezoid, doubled until two successive values agree to ``tol``.

    The integrand is analytic with geometric convergence rate ``min(rho, rho')/max``,
    so close radii simply need more nodes.
    """
    if rho <= 0 or rho_prime <= 0:
        raise ValueError("radii must be positive")
    if rho == rho_prime:
        raise ValueError("singular for equal radii")
    n = 64
    prev = None
    while n <= 1 << 22:
        a = 2.0 * math.pi * np.arange(n) / n
        val = np.mean(1.0 / (rho - rho_prime * np.exp(-1j * a)))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return complex(val)
        prev = val
        n *= 2
    raise RuntimeError("mean-value quadrature did not converge")
