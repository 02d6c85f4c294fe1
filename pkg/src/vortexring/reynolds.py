"""Forcing, pressure corrector and compactly supported Reynolds stress.

Inside the core the momentum defect is

    F = r (omega (dgamma/dt - v)^perp + grad q1)

and the Reynolds stress is ``R = -(1/r) Rop(F)`` where ``Rop`` is a right
inverse of the divergence on symmetric tensors that keeps the support of its
argument.  ``Rop`` needs ``int F = 0`` and ``int F . (zeta - zeta0)^perp = 0``;
the corrector ``q1`` is chosen to enforce both.

Vectors are ``(r, z)`` pairs and ``u^perp = (-u_z, u_r)`` (multiplication by i).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import exp1

from ._accel import HAS_NUMBA, njit
from .biotsavart import QuadratureRule, TWO_PI, asymptotic_leading, velocity_many, velocity_on_ring
from .kernels import K_2d
from .profile import VorticityProfile, closed_form_gamma_rho, eval_profile, gamma_rho
from .quadrature import _leggauss, composite, graded_breaks
from .ring import (RingParams, angle, dgamma_dt, height, height_rate, thickness, thickness_rate,
                   vorticity_flux_array)
from .biotsavart import source_nodes

KAPPA1 = 30.0 / math.pi
KAPPA2 = 105.0 / (2.0 * math.pi)


def perp(v):
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


# ---------------------------------------------------------------------------
# quadrature on a disk

@lru_cache(maxsize=16)
def _disk_rule_unit(order: int, n_beta: int, levels: int):
    rho, wr = composite(graded_breaks(0.0, 1.0, ratio=0.2, levels=levels, uniform=2), order)
    beta = TWO_PI * (np.arange(n_beta) + 0.5) / n_beta
    return rho, wr, beta


def disk_rule(x0, c: float, order: int = 12, n_beta: int = 64, levels: int = 4):
    """Points ``(N, 2)`` and area weights covering the disk ``|x - x0| < c``."""
    rho, wr, beta = _disk_rule_unit(order, n_beta, levels)
    rr = c * rho[:, None]
    pts = np.stack([x0[0] + rr * np.cos(beta)[None, :], x0[1] + rr * np.sin(beta)[None, :]], axis=-1)
    w = (c * c * rho * wr)[:, None] * np.full(n_beta, TWO_PI / n_beta)[None, :]
    return pts.reshape(-1, 2), w.ravel()


# ---------------------------------------------------------------------------
# velocity inside the core

def _barycentric_weights(nodes):
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


class CoreVelocity:
    """Residual velocity ``v - leading terms`` tabulated on a polar grid of the core.

    ``rho`` uses Gauss panels graded toward the centre, the angle ``theta`` (measured
    about ``zeta0``, i.e. ``alpha + a``) is uniform.  Off-grid values come from Lagrange
    interpolation inside each radial panel and trigonometric interpolation in angle.
    """

    def __init__(self, params: RingParams, profile: VorticityProfile, t: float, tol: float = 1e-8,
                 order: int = 8, n_theta: int = 32, workers: int = 1):
        self.params, self.profile, self.t = params, profile, t
        self.c = thickness(params, t)
        self.h = height(params, t)
        self.x0 = np.array([params.L, self.h])
        self.order = order
        self.breaks = graded_breaks(0.0, 1.0, ratio=0.2, levels=4, uniform=2)
        self.rho, self.w_rho = composite(self.breaks, order)
        self.theta = TWO_PI * np.arange(n_theta) / n_theta
        rr = self.c * self.rho[:, None]
        r = params.L + rr * np.cos(self.theta)[None, :]
        z = self.h + rr * np.sin(self.theta)[None, :]
        v = velocity_many(params, profile, t, r.ravel(), z.ravel(), tol=tol, workers=workers)
        self.velocity = v.reshape(self.rho.size, n_theta, 2)
        self.leading = self._leading(self.rho[:, None], self.theta[None, :])
        self.residual = self.velocity - self.leading
        self._coef = np.fft.rfft(self.residual, axis=1) / n_theta
        x, _ = _leggauss(order)
        self._bary = _barycentric_weights(x)
        self._xref = x

    def _leading(self, rho, theta):
        """``-(i rho Gamma_rho / 2 pi c) e^{i theta} - (i Gamma / 4 pi L) log c`` on arrays."""
        gr = gamma_rho(self.profile, np.clip(rho, 0.0, 1.0))
        spin = rho * gr / (TWO_PI * self.c)
        drift = -self.params.gamma / (4.0 * math.pi * self.params.L) * math.log(self.c)
        spin, theta = np.broadcast_arrays(spin, theta)
        return np.stack([spin * np.sin(theta), -spin * np.cos(theta) + drift], axis=-1)

    def residual_at(self, rho, theta):
        """Interpolated residual at arrays ``rho`` in [0, 1] and ``theta``; shape ``(n, 2)``."""
        rho = np.asarray(rho, dtype=float).ravel()
        theta = np.asarray(theta, dtype=float).ravel()
        out = np.empty((rho.size, 2))
        for s in range(0, rho.size, 8192):
            out[s:s + 8192] = self._residual_chunk(rho[s:s + 8192], theta[s:s + 8192])
        return out

    def _residual_chunk(self, rho, theta):
        n = self.order
        panel = np.clip(np.searchsorted(self.breaks, rho, side="right") - 1, 0, self.breaks.size - 2)
        a, b = self.breaks[panel], self.breaks[panel + 1]
        x = (2.0 * rho - a - b) / (b - a)
        diff = x[:, None] - self._xref[None, :]
        exact = np.isclose(diff, 0.0, atol=1e-15, rtol=0)
        diff[exact] = 1.0
        lw = self._bary[None, :] / diff
        lw /= lw.sum(axis=1, keepdims=True)
        hit = exact.any(axis=1)
        if np.any(hit):
            lw[hit] = exact[hit].astype(float)
        idx = panel[:, None] * n + np.arange(n)[None, :]
        coef = np.einsum("pi,pikc->pkc", lw, self._coef[idx])
        nt = self.theta.size
        k = np.arange(coef.shape[1])
        mult = np.where((k == 0) | ((nt % 2 == 0) & (k == nt // 2)), 1.0, 2.0)
        phase = np.exp(1j * theta[:, None] * k[None, :]) * mult[None, :]
        return np.einsum("pk,pkc->pc", phase, coef).real

    def discrepancy_at(self, rho, theta):
        """``dgamma/dt - v`` in the cancelled form ``cdot rho e^{i theta} - residual``."""
        rho = np.asarray(rho, dtype=float).ravel()
        theta = np.asarray(theta, dtype=float).ravel()
        cdot = thickness_rate(self.params, self.t)
        lead = np.stack([cdot * rho * np.cos(theta), cdot * rho * np.sin(theta)], axis=-1)
        return lead - self.residual_at(rho, theta)

    def grid_discrepancy(self):
        cdot = thickness_rate(self.params, self.t)
        rho, th = self.rho[:, None], self.theta[None, :]
        lead = np.stack(np.broadcast_arrays(cdot * rho * np.cos(th), cdot * rho * np.sin(th)), axis=-1)
        return lead - self.residual


@lru_cache(maxsize=8)
def core_velocity(params: RingParams, profile: VorticityProfile, t: float, tol: float = 1e-8,
                  workers: int = 1) -> CoreVelocity:
    return CoreVelocity(params, profile, t, tol, workers=workers)


def discrepancy(params: RingParams, profile: VorticityProfile, t: float, rho: float, alpha: float,
                tol: float = 1e-8, include_height: bool = True) -> np.ndarray:
    """``dgamma/dt - v`` at ``gamma(t, rho, alpha)``.

    ``include_height=False`` drops the vertical drift ``i hdot`` from ``dgamma/dt``,
    which exposes the ``|log c|`` self-induced velocity that the height law cancels.
    """
    dg = dgamma_dt(params, profile, t, rho, alpha)
    if not include_height:
        dg = dg - np.array([0.0, height_rate(params, t)])
    return dg - velocity_on_ring(params, profile, t, rho, alpha, tol).v


# ---------------------------------------------------------------------------
# pressure corrector

@dataclass(frozen=True)
class PressureCorrector:
    c1: float
    c2: float
    t: float
    c: float
    A1: tuple = (0.0, 0.0)
    A2: float = 0.0
    kappa1: float = KAPPA1
    kappa2: float = KAPPA2

    def check_axial(self, rtol: float = 1e-4, atol: float = 1e-8) -> bool:
        """The mean ``A1`` should point along ``e_r``."""
        return abs(self.A1[1]) <= rtol * abs(self.A1[0]) + atol


class QuadratureError(RuntimeError):
    pass


def q1_coefficients(params: RingParams, profile: VorticityProfile, t: float, tol: float = 1e-8,
                    workers: int = 1, core: Optional[CoreVelocity] = None) -> PressureCorrector:
    core = core or core_velocity(params, profile, t, tol, workers)
    c = core.c
    w = core.grid_discrepancy()
    rho, th = core.rho[:, None], core.theta[None, :]
    om = eval_profile(profile, core.rho)[:, None] / (c * c)
    r = params.L + c * rho * np.cos(th)
    area = (c * c * core.rho * core.w_rho)[:, None] * (TWO_PI / core.theta.size)
    wt = r * om * area
    a1 = np.array([np.sum(wt * -w[..., 1]), np.sum(wt * w[..., 0])])
    xr, xz = c * rho * np.cos(th), c * rho * np.sin(th)
    a2 = float(np.sum(wt * (w[..., 0] * xr + w[..., 1] * xz)))
    if not np.all(np.isfinite(a1)) or not math.isfinite(a2):
        raise QuadratureError("core integrals did not produce finite values")
    return PressureCorrector(float(a1[0]), -2.0 * a2 / c, t, c, (float(a1[0]), float(a1[1])), a2)


def _bump(rho, kappa, power):
    """``kappa rho^power (1 - rho)^2`` and its derivative."""
    one = 1.0 - rho
    val = kappa * rho ** power * one * one
    der = kappa * (power * rho ** (power - 1) * one * one - 2.0 * rho ** power * one)
    return val, der


def q1_array(params: RingParams, corr: PressureCorrector, t: float, pts):
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    c = thickness(params, t)
    X = pts[:, 0] - params.L
    Y = pts[:, 1] - height(params, t)
    rho = np.hypot(X, Y) / c
    inside = rho < 1.0
    rho = np.where(inside, rho, 0.0)
    p1, _ = _bump(rho, corr.kappa1, 2)
    p2, _ = _bump(rho, corr.kappa2, 1)  # phi2(rho) sin(theta) = kappa2 rho (1-rho)^2 * Y / c
    val = (corr.c1 * p1 + corr.c2 * p2 * Y / c) / (c * c)
    return np.where(inside, val, 0.0)


def grad_q1_array(params: RingParams, corr: PressureCorrector, t: float, pts):
    """Analytic gradient of ``q1`` at ``pts`` ``(N, 2)``; zero off the core."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    c = thickness(params, t)
    X = pts[:, 0] - params.L
    Y = pts[:, 1] - height(params, t)
    d = np.hypot(X, Y)
    rho = d / c
    inside = rho < 1.0
    rho = np.where(inside, rho, 0.5)
    safe = np.where(d > 0, d, 1.0)
    er = np.stack([np.where(d > 0, X / safe, 0.0), np.where(d > 0, Y / safe, 0.0)], axis=-1)
    _, d1 = _bump(rho, corr.kappa1, 2)
    p2, d2 = _bump(rho, corr.kappa2, 1)
    g = (corr.c1 * d1 / c)[:, None] * er
    g += (corr.c2 * d2 * Y / (c * c))[:, None] * er
    g[:, 1] += corr.c2 * p2 / c
    g /= c * c
    return np.where(inside[:, None], g, 0.0)


def grad_q1(params: RingParams, profile: VorticityProfile, corr: PressureCorrector, t: float, zeta) -> np.ndarray:
    return grad_q1_array(params, corr, t, np.array([tuple(zeta)]))[0]


# ---------------------------------------------------------------------------
# forcing

class ForcingField:
    """``F = r (omega (dgamma/dt - v)^perp + grad q1)`` supported on the core disk."""

    def __init__(self, params, profile, corr: PressureCorrector, t: float, core: CoreVelocity):
        self.params, self.profile, self.corr, self.t, self.core = params, profile, corr, t, core
        self.c = core.c
        self.x0 = core.x0

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        X = pts[:, 0] - self.x0[0]
        Y = pts[:, 1] - self.x0[1]
        rho = np.hypot(X, Y) / self.c
        out = np.zeros((pts.shape[0], 2))
        inside = rho < 1.0
        if not np.any(inside):
            return out
        p = pts[inside]
        w = self.core.discrepancy_at(rho[inside], np.arctan2(Y[inside], X[inside]))
        om = eval_profile(self.profile, rho[inside]) / (self.c * self.c)
        val = om[:, None] * perp(w) + grad_q1_array(self.params, self.corr, self.t, p)
        out[inside] = p[:, 0:1] * val
        return out

    def compatibility(self, order: int = 16, n_beta: int = 96):
        """``(int F, int F . (zeta - zeta0)^perp, int |F|)`` by an independent disk rule."""
        return compatibility_integrals(self, self.x0, self.c, order, n_beta)


def compatibility_integrals(f: Callable, x0, c: float, order: int = 16, n_beta: int = 96):
    pts, w = disk_rule(x0, c, order, n_beta)
    vals = f(pts)
    mean = vals.T @ w
    rel = pts - np.asarray(x0)[None, :]
    moment = float(np.sum(w * np.einsum("ij,ij->i", vals, perp(rel))))
    l1 = float(np.sum(w * np.hypot(vals[:, 0], vals[:, 1])))
    return mean, moment, l1


def forcing(params: RingParams, profile: VorticityProfile, corr: PressureCorrector, t: float,
            tol: float = 1e-8, workers: int = 1, core: Optional[CoreVelocity] = None) -> ForcingField:
    return ForcingField(params, profile, corr, t, core or core_velocity(params, profile, t, tol, workers))


# ---------------------------------------------------------------------------
# antidivergence

class CompatibilityError(ValueError):
    """The field violates one of the two solvability conditions of the antidivergence."""

    def __init__(self, mean_residual, moment_residual, l1):
        self.mean_residual = np.asarray(mean_residual, dtype=float)
        self.moment_residual = float(moment_residual)
        self.l1 = float(l1)
        super().__init__(f"compatibility violated: int f = {self.mean_residual.tolist()}, "
                         f"int f.(x-x0)^perp = {self.moment_residual:.3e}, |f|_1 = {self.l1:.3e}")


def mollifier_norm(c: float) -> float:
    """Normalization of ``exp(-1 / (1 - |y|^2 / c^2))`` to unit mass on the disk."""
    return 1.0 / (c * c * math.pi * (math.exp(-1.0) - exp1(1.0)))


def mollifier(y, x0, c: float):
    d = np.asarray(y, dtype=float) - np.asarray(x0)
    q = np.sum(d * d, axis=-1) / (c * c)
    inside = q < 1.0
    qs = np.where(inside, q, 0.0)
    return np.where(inside, mollifier_norm(c) * np.exp(-1.0 / (1.0 - qs)), 0.0)


def _mollifier_and_grad(y, x0, c, norm):
    d = y - x0
    q = np.sum(d * d, axis=-1) / (c * c)
    inside = q < 1.0
    one = np.where(inside, 1.0 - q, 1.0)
    val = np.where(inside, norm * np.exp(-1.0 / one), 0.0)
    grad = (val * (-2.0 / (c * c)) / (one * one))[..., None] * d
    return val, grad


def _chord(p, e, x0, c):
    """Distance from ``p`` along unit ``e`` to the circle ``|x - x0| = c`` (``p`` inside)."""
    d = p - x0
    b = np.sum(d * e, axis=-1)
    cc = np.sum(d * d, axis=-1) - c * c
    return -b + np.sqrt(np.maximum(b * b - cc, 0.0))


@dataclass
class SymTensorField:
    """Symmetric 2x2 field ``(Rrr, Rrz, Rzz)``, structurally zero outside ``|x - x0| >= c``."""

    evaluate_inside: Callable
    x0: np.ndarray
    c: float
    scale: Optional[Callable] = None

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros((pts.shape[0], 3))
        inside = np.hypot(pts[:, 0] - self.x0[0], pts[:, 1] - self.x0[1]) < self.c
        if np.any(inside):
            vals = self.evaluate_inside(pts[inside])
            if self.scale is not None:
                vals = vals * self.scale(pts[inside])[:, None]
            out[inside] = vals
        return out

    def matrix(self, pt) -> np.ndarray:
        a, b, d = self(np.array([pt]))[0]
        return np.array([[a, b], [b, d]])


@dataclass(frozen=True)
class AntidivergenceRule:
    n_beta: int = 64
    order: int = 24
    panels: int = 2


def antidivergence(f: Callable, x0, c: float, rule: AntidivergenceRule = AntidivergenceRule(),
                   check: bool = True, rtol: float = 1e-4) -> SymTensorField:
    """Symmetric ``R`` with ``div R = f`` and support in the disk ``B(x0, c)``.

    Mollified radial-integration construction.  With ``e`` a direction, ``u`` the
    distance from ``x`` back to the mollification centre ``y = x - u e`` and ``s``
    the distance forward to the source point ``x + s e``, the three terms reduce to

        R0 = -int dbeta int int phi(y) (u + s) (e (x) f + f (x) e)
        R1 = 1/2 int dbeta int int (e . grad phi)(y) (u + s)^2 (e (x) f + f (x) e)
        R2 = -int dbeta int int (u + s)^2 (grad phi(y) . f) e (x) e

    with ``f`` evaluated at ``x + s e``.  Both line integrals factor into moments along
    the ray, so each point costs ``n_beta`` pairs of 1-D rules.
    """
    x0 = np.asarray(x0, dtype=float)
    if check:
        mean, moment, l1 = compatibility_integrals(f, x0, c)
        if np.hypot(*mean) > rtol * l1 or abs(moment) > rtol * c * l1:
            raise CompatibilityError(mean, moment, l1)
    norm = mollifier_norm(c)
    beta = TWO_PI * (np.arange(rule.n_beta) + 0.5) / rule.n_beta
    e = np.stack([np.cos(beta), np.sin(beta)], axis=-1)
    gx, gw = _leggauss(rule.order)
    wb = TWO_PI / rule.n_beta

    def evaluate(pts):
        out = np.empty((pts.shape[0], 3))
        step = max(1, 4096 // (rule.n_beta * rule.order * rule.panels))
        for s0 in range(0, pts.shape[0], step):
            out[s0:s0 + step] = _antidiv_batch(f, pts[s0:s0 + step], x0, c, norm, e, gx, gw, wb, rule.panels)
        return out

    return SymTensorField(evaluate, x0, c)


def _ray_rule(length, gx, gw, panels, mid=None):
    """Gauss nodes on ``[0, length]`` per ray (broadcast over leading axes)."""
    frac = (np.arange(panels + 1) / panels)
    if mid is None:
        edges = length[..., None] * frac
    else:
        # split at the closest approach to the centre when it lies on the ray
        m = np.clip(mid, 0.0, length)
        half = panels // 2 or 1
        left = m[..., None] * (np.arange(half + 1) / half)
        right = m[..., None] + (length - m)[..., None] * (np.arange(1, half + 1) / half)
        edges = np.concatenate([left, right], axis=-1)
    a = edges[..., :-1, None]
    hl = 0.5 * np.diff(edges, axis=-1)[..., None]
    nodes = (a + hl * (gx + 1.0)).reshape(*length.shape, -1)
    weights = (hl * gw).reshape(*length.shape, -1)
    return nodes, weights


def _antidiv_batch(f, pts, x0, c, norm, e, gx, gw, wb, panels):
    P, B = pts.shape[0], e.shape[0]
    x = pts[:, None, :]
    ee = e[None, :, :]
    umax = _chord(x, -ee, x0, c)
    sext = _chord(x, ee, x0, c)
    u, wu = _ray_rule(umax, gx, gw, panels)
    closest = np.sum((x0 - x) * ee, axis=-1)
    s, ws = _ray_rule(sext, gx, gw, max(2, panels), closest)
    ylist = x[:, :, None, :] - u[..., None] * ee[:, :, None, :]
    phi, gphi = _mollifier_and_grad(ylist, x0, c, norm)
    wlist = x[:, :, None, :] + s[..., None] * ee[:, :, None, :]
    fv = f(wlist.reshape(-1, 2)).reshape(P, B, -1, 2)
    # moments along the forward ray
    M = [np.einsum("pbn,pbnc->pbc", ws * s ** m, fv) for m in range(3)]
    # moments along the backward ray
    Phi = [np.sum(wu * u ** m * phi, axis=-1) for m in range(2)]
    edphi = np.einsum("pbnc,bc->pbn", gphi, e)
    Pm = [np.sum(wu * u ** m * edphi, axis=-1) for m in range(3)]
    Q = [np.einsum("pbn,pbnc->pbc", wu * u ** m, gphi) for m in range(3)]
    v0 = Phi[1][..., None] * M[0] + Phi[0][..., None] * M[1]
    v1 = Pm[2][..., None] * M[0] + 2.0 * Pm[1][..., None] * M[1] + Pm[0][..., None] * M[2]
    sc = (np.sum(Q[2] * M[0], -1) + 2.0 * np.sum(Q[1] * M[1], -1) + np.sum(Q[0] * M[2], -1))
    vec = 0.5 * v1 - v0  # coefficient of the symmetrized e (x) v
    ex, ey = e[None, :, 0], e[None, :, 1]
    rrr = np.sum(2.0 * ex * vec[..., 0] - ex * ex * sc, axis=1)
    rrz = np.sum(ex * vec[..., 1] + ey * vec[..., 0] - ex * ey * sc, axis=1)
    rzz = np.sum(2.0 * ey * vec[..., 1] - ey * ey * sc, axis=1)
    return wb * np.stack([rrr, rrz, rzz], axis=-1)


def reynolds_field(params: RingParams, profile: VorticityProfile, corr: PressureCorrector, t: float,
                   tol: float = 1e-8, workers: int = 1, force: Optional[ForcingField] = None,
                   rule: AntidivergenceRule = AntidivergenceRule()) -> SymTensorField:
    """``R = -(1/r) Rop(F)``, supported in the closed core disk."""
    force = force or forcing(params, profile, corr, t, tol, workers)
    base = antidivergence(force, force.x0, force.c, rule)
    return SymTensorField(base.evaluate_inside, base.x0, base.c, scale=lambda p: -1.0 / p[:, 0])


def diagnostics(corr: PressureCorrector, force: ForcingField) -> dict:
    mean, moment, l1 = force.compatibility()
    return {"A1": [corr.A1[0], corr.A1[1]], "A2": corr.A2, "c1": corr.c1, "c2": corr.c2,
            "compat_mean": [float(mean[0]), float(mean[1])], "compat_moment": moment}


def write_diagnostics(path, diag: dict):
    with open(path, "w") as fh:
        json.dump(diag, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_reynolds_csv(path, pts, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "z", "Rrr", "Rrz", "Rzz"])
        for p, v in zip(pts, values):
            w.writerow([format(float(x), ".17g") for x in (*p, *v)])


# ---------------------------------------------------------------------------
# finite-difference checks

def divergence_fd(field: Callable, pts, eta: float, weight: Optional[Callable] = None):
    """Central-difference row divergence of a ``(Rrr, Rrz, Rzz)`` field, optionally of ``weight * R``."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.zeros((pts.shape[0], 2))
    for k in range(2):
        d = np.zeros(2)
        d[k] = eta
        hi, lo = field(pts + d), field(pts - d)
        if weight is not None:
            hi = hi * weight(pts + d)[:, None]
            lo = lo * weight(pts - d)[:, None]
        diff = (hi - lo) / (2.0 * eta)
        # row i of [[Rrr, Rrz], [Rrz, Rzz]] differentiated along column k
        if k == 0:
            out[:, 0] += diff[:, 0]
            out[:, 1] += diff[:, 1]
        else:
            out[:, 0] += diff[:, 1]
            out[:, 1] += diff[:, 2]
    return out


def lift_tensor(R2: Callable, x3):
    """3x3 Cartesian tensors of the axisymmetric lift at Cartesian points ``x3`` ``(N, 3)``."""
    x3 = np.atleast_2d(x3)
    r = np.hypot(x3[:, 0], x3[:, 1])
    comp = R2(np.stack([r, x3[:, 2]], axis=-1))
    er = np.stack([x3[:, 0] / r, x3[:, 1] / r, np.zeros_like(r)], axis=-1)
    ez = np.array([0.0, 0.0, 1.0])
    T = comp[:, 0, None, None] * np.einsum("ni,nj->nij", er, er)
    T += comp[:, 1, None, None] * (np.einsum("ni,j->nij", er, ez) + np.einsum("i,nj->nij", ez, er))
    T += comp[:, 2, None, None] * ez[None, :, None] * ez[None, None, :]
    return T


@dataclass
class LiftReport:
    points: np.ndarray
    div3d: np.ndarray
    div_axi: np.ndarray
    mismatch: np.ndarray
    passed: bool

    def to_dict(self):
        return {"max_mismatch": float(np.max(self.mismatch)) if self.mismatch.size else 0.0,
                "passed": self.passed, "n_points": int(self.points.shape[0])}


def verify_axisymmetric_lift(R2: Callable, points, eta: float = 1e-5, rtol: float = 1e-2,
                             min_r: Optional[float] = None) -> LiftReport:
    """Compare the Cartesian divergence of the lifted tensor with ``(1/r) div(r R)``.

    Both are evaluated at azimuth 0, where ``e_r = e_1`` and the 3D divergence has no
    ``e_2`` component.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    min_r = 100.0 * eta if min_r is None else min_r
    if np.any(pts[:, 0] <= min_r):
        raise ValueError(f"sample points must satisfy r > {min_r:g}")
    x3 = np.stack([pts[:, 0], np.zeros(len(pts)), pts[:, 1]], axis=-1)
    div3 = np.zeros((len(pts), 3))
    for k in range(3):
        d = np.zeros(3)
        d[k] = eta
        diff = (lift_tensor(R2, x3 + d) - lift_tensor(R2, x3 - d)) / (2.0 * eta)
        div3 += diff[:, :, k]
    axi = divergence_fd(R2, pts, eta, weight=lambda p: p[:, 0]) / pts[:, 0:1]
    ref = np.stack([axi[:, 0], np.zeros(len(pts)), axi[:, 1]], axis=-1)
    scale = max(float(np.max(np.abs(ref))), 1e-300)
    mismatch = np.max(np.abs(div3 - ref), axis=1) / np.maximum(np.max(np.abs(ref), axis=1), 1e-3 * scale)
    if not np.any(ref):
        mismatch = np.max(np.abs(div3), axis=1)
    return LiftReport(pts, div3, ref, mismatch, bool(np.all(mismatch <= rtol)))


# ---------------------------------------------------------------------------
# planar pressure potential

def q00_potential(params: RingParams, profile: VorticityProfile, t: float, zeta, tol: float = 1e-8) -> float:
    """``-int K_2d(zeta - gamma) . dgamma/dt varpi rho d rho d alpha`` (diagnostic)."""
    r, z = zeta
    c = thickness(params, t)
    h = height(params, t)
    rule = QuadratureRule.for_tolerance(tol)
    dr, dz, w = source_nodes(profile, c, params.L, h, float(r), float(z), rule)
    X = r + dr - params.L
    Y = z + dz - h
    rho = np.minimum(np.hypot(X, Y) / c, 1.0)
    th = np.arctan2(Y, X)
    cdot = thickness_rate(params, t)
    spin = -c * rho * gamma_rho(profile, rho) / (TWO_PI * c * c)  # c rho adot
    gt_r = cdot * rho * np.cos(th) - spin * np.sin(th)
    gt_z = height_rate(params, t) + cdot * rho * np.sin(th) + spin * np.cos(th)
    # K_2d(zeta - zeta') with zeta - zeta' = -(dr, dz)
    m2 = dr * dr + dz * dz
    keep = m2 > 0
    kx = dz[keep] / (TWO_PI * m2[keep])
    ky = -dr[keep] / (TWO_PI * m2[keep])
    return float(-np.sum(w[keep] * (kx * gt_r[keep] + ky * gt_z[keep])))
