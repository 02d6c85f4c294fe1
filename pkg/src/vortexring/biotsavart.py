"""Meridional velocity induced by the ring core.

    v(zeta) = int K_ax(zeta, zeta') omega(zeta') dzeta'

with ``omega = varpi(rho') / c^2`` on the core disk.  The internal rotation
only relabels points of the disk, so the velocity depends on ``t`` through
``zeta0`` and ``c`` alone.

Three quadrature layouts are used, keyed to ``delta = |zeta - zeta0| / c``:

* ``delta >= 2``: disk polar coordinates about ``zeta0``; Gauss in ``rho'`` and
  the periodic trapezoid in the source angle, which converges like
  ``delta^-n``.
* ``1 <= delta < 2``: polar coordinates about the target.  Rays cover the cone
  of half-angle ``arcsin(1/delta)``; the substitution
  ``sin(Delta) = sin(psi) / delta`` removes the square-root endpoints.
* ``delta < 1``: polar coordinates about the target over the full circle.  The
  area element ``sigma d sigma`` cancels the ``1/sigma`` kernel singularity.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ._accel import HAS_NUMBA, njit
from .kernels import INV_TWO_PI, KernelTable, _table_eval, kernel_table, table_eval_vector
from .profile import VorticityProfile, eval_profile, gamma_rho
from .quadrature import _leggauss, composite, graded_breaks
from .ring import HalfPlanePoint, RingParams, angle, gamma, height, thickness

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuadratureRule:
    """Node budget of the core integral."""

    order: int = 8
    angular_panels: int = 4
    far_tol: float = 1e-10

    @classmethod
    def for_tolerance(cls, tol: float) -> "QuadratureRule":
        if tol >= 1e-8:
            return cls(8, 4, min(1e-10, 1e-2 * tol))
        if tol >= 1e-11:
            return cls(12, 6, 1e-13)
        return cls(16, 8, 1e-15)


@dataclass
class VelocitySample:
    point: HalfPlanePoint
    v: np.ndarray
    rot: Optional[np.ndarray] = None
    up: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# summation kernels

@njit
def _accumulate(r, z, dr, dz, w, data, x0, step, h_const):
    rot_r = 0.0
    rot_z = 0.0
    up_z = 0.0
    for j in range(dr.shape[0]):
        rp = r + dr[j]
        if rp <= 0.0 or w[j] == 0.0:
            continue
        q2 = r * rp
        d2 = dr[j] * dr[j] + dz[j] * dz[j]
        if d2 == 0.0:
            continue
        g, h = _table_eval(d2 / q2, data, x0, step, h_const)
        gq = w[j] * g / math.sqrt(q2)
        rot_r -= dz[j] * gq
        rot_z += dr[j] * gq
        up_z += w[j] * math.sqrt(rp / r) * h
    pre = 0.5 / (math.pi * r)
    return rot_r * pre, rot_z * pre, up_z * pre


def _accumulate_numpy(r, z, dr, dz, w, table: KernelTable):
    rp = r + dr
    d2 = dr * dr + dz * dz
    keep = (rp > 0) & (w != 0) & (d2 > 0)
    rp, dr, dz, w, d2 = rp[keep], dr[keep], dz[keep], w[keep], d2[keep]
    q2 = r * rp
    g, h = table_eval_vector(d2 / q2, table)
    gq = w * g / np.sqrt(q2)
    pre = INV_TWO_PI / r
    return (-np.dot(dz, gq) * pre, np.dot(dr, gq) * pre, np.dot(w, np.sqrt(rp / r) * h) * pre)


def accumulate(r: float, z: float, dr, dz, w, table: KernelTable):
    """``(rot_r, rot_z, up_z)`` of ``sum_j w_j K_ax(zeta, zeta + d_j)`` through the active backend."""
    if HAS_NUMBA:
        return _accumulate(r, z, dr, dz, w, table.data, table.x0, table.step, table.h_const)
    return _accumulate_numpy(r, z, dr, dz, w, table)


# ---------------------------------------------------------------------------
# node generation

@lru_cache(maxsize=8)
def _disk_radial_rule(order: int):
    x, w = composite(graded_breaks(0.0, 1.0, ratio=0.2, levels=4, uniform=2), order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


# rays passing this close (in angle) to the core centre see the log factor of the profile
_CENTRE_ANGLE_SCALE = 1e-5


def _graded_toward(a: float, b: float, scale: float, ratio: float = 0.2):
    """Breaks on [a, b] refined geometrically toward ``a`` down to ``scale``."""
    length = b - a
    if length <= 0:
        return np.array([a, b])
    if scale >= 0.5 * length:
        return np.array([a, b])
    levels = int(math.ceil(math.log(scale / length) / math.log(ratio)))
    return graded_breaks(a, b, ratio=ratio, levels=levels, uniform=1)


def _weights_from_offsets(profile, c, L, h, r, z, dr, dz, area):
    rho = np.hypot(r + dr - L, z + dz - h) / c
    return eval_profile(profile, np.minimum(rho, 1.0)) * area / (c * c)


def _far_nodes(profile, c, L, h, r, z, delta, rule: QuadratureRule):
    rho, wr = _disk_radial_rule(rule.order)
    nb = int(math.ceil(math.log(rule.far_tol) / -math.log(delta))) + 4
    nb = max(16, 4 * ((nb + 3) // 4))
    beta = TWO_PI * np.arange(nb) / nb
    cr = c * rho[:, None]
    dr = (L - r) + cr * np.cos(beta)[None, :]
    dz = (h - z) + cr * np.sin(beta)[None, :]
    w = (eval_profile(profile, rho) * rho * wr)[:, None] * np.full(nb, TWO_PI / nb)[None, :]
    return dr.ravel(), dz.ravel(), w.ravel()


def _graded_pair(lo, mid, hi, scale, ratio=0.2):
    """Breaks on [lo, hi] refined geometrically from both sides toward ``mid``."""
    left = mid - _graded_toward(0.0, mid - lo, scale, ratio)[::-1] if mid > lo else np.array([mid])
    right = mid + _graded_toward(0.0, hi - mid, scale, ratio) if hi > mid else np.array([mid])
    return np.concatenate([left[:-1], right])


@njit
def _push_graded(out, n, a, b, scale, ratio, toward_a):
    """Append the breaks of [a, b] refined toward one end (excluding ``a``) to ``out[n:]``."""
    length = b - a
    levels = 0
    if scale < 0.5 * length:
        levels = int(math.ceil(math.log(scale / length) / math.log(ratio)))
    if toward_a:
        for k in range(levels, 0, -1):
            out[n] = a + length * ratio ** k
            n += 1
    else:
        for k in range(1, levels + 1):
            out[n] = b - length * ratio ** k
            n += 1
    out[n] = b
    return n + 1


@njit
def _ray_breaks(lo, hi, mid, miss, grade_lo, out):
    """Radial panel breaks along one ray; returns the count written to ``out``."""
    out[0] = lo
    n = 1
    if lo < mid < hi:
        scale = max(miss, _MISS_FLOOR * (hi - lo))
        if grade_lo:
            half = 0.5 * (lo + mid)
            n = _push_graded(out, n, lo, half, _SELF_SCALE * (mid - lo), 0.25, True)
            n = _push_graded(out, n, half, mid, scale, 0.2, False)
        else:
            n = _push_graded(out, n, lo, mid, scale, 0.2, False)
        n = _push_graded(out, n, mid, hi, scale, 0.2, True)
    elif grade_lo:
        n = _push_graded(out, n, lo, hi, _SELF_SCALE * (hi - lo), 0.25, True)
    else:
        out[n] = hi
        n += 1
    return n


_MISS_FLOOR = 1e-5
_SELF_SCALE = 1e-3
_MAX_BREAKS = 128


@dataclass
class RayLayout:
    """Rays leaving the target: direction, radial extent, closest approach to the core centre."""

    cos_phi: np.ndarray
    sin_phi: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    mid: np.ndarray
    miss: np.ndarray
    weight: np.ndarray
    grade_lo: bool


def _near_rays(c, L, h, r, z, d, rule: QuadratureRule) -> RayLayout:
    """Exterior target with ``1 <= delta < 2``: rays through the disk, psi-substituted."""
    u = math.atan2(h - z, L - r)
    edges = np.unique(np.concatenate([
        np.linspace(-0.5 * math.pi, 0.5 * math.pi, 2 * rule.angular_panels + 1),
        _graded_pair(-0.5 * math.pi, 0.0, 0.5 * math.pi, _CENTRE_ANGLE_SCALE)]))
    psi, wpsi = composite(edges, rule.order)
    ratio = c / d
    sin_delta = ratio * np.sin(psi)
    cos_delta = np.sqrt(1.0 - sin_delta ** 2)
    half = c * np.cos(psi)
    centre = d * cos_delta
    phi = u + np.arcsin(sin_delta)
    return RayLayout(np.cos(phi), np.sin(phi), centre - half, centre + half, centre,
                     d * np.abs(sin_delta), wpsi * ratio * np.cos(psi) / cos_delta, False)


def _interior_angle_breaks(delta: float, panels: int):
    """Angular breaks about the direction to the centre, graded near +-pi/2 when delta -> 1."""
    base = np.concatenate([np.linspace(-math.pi, math.pi, 2 * panels + 1),
                           _graded_pair(-0.5 * math.pi, 0.0, 0.5 * math.pi, _CENTRE_ANGLE_SCALE)])
    if delta <= 0.5:
        return np.unique(base)
    eps = math.sqrt(max(1.0 - delta * delta, 1e-300))
    extra = []
    for pole in (-0.5 * math.pi, 0.5 * math.pi):
        scale = 0.5 * eps
        while scale < 0.25 * math.pi / panels:
            extra.extend([pole - scale, pole + scale])
            scale *= 4.0
    return np.unique(np.concatenate([base, [-0.5 * math.pi, 0.5 * math.pi], extra]))


def _interior_rays(c, L, h, r, z, d, rule: QuadratureRule) -> RayLayout:
    u = math.atan2(h - z, L - r) if d > 0 else 0.0
    dphi, wphi = composite(_interior_angle_breaks(d / c, rule.angular_panels), rule.order)
    cos_d = np.cos(dphi)
    reach = d * cos_d + np.sqrt(np.maximum(c * c - (d * np.sin(dphi)) ** 2, 0.0))
    phi = u + dphi
    return RayLayout(np.cos(phi), np.sin(phi), np.zeros_like(dphi), reach, d * cos_d,
                     d * np.abs(np.sin(dphi)), wphi, True)


def ray_layout(c, L, h, r, z, rule: QuadratureRule) -> Optional[RayLayout]:
    """Target-centred rays, or ``None`` when the disk-polar far rule applies."""
    d = math.hypot(r - L, z - h)
    if d >= 2.0 * c:
        return None
    if d >= c:
        return _near_rays(c, L, h, r, z, d, rule)
    return _interior_rays(c, L, h, r, z, d, rule)


def _ray_nodes(rays: RayLayout, order: int):
    out_s, out_w, out_k = [], [], []
    buf = np.empty(_MAX_BREAKS)
    for k in range(rays.lo.size):
        if rays.hi[k] <= rays.lo[k]:
            continue
        nb = _ray_breaks(rays.lo[k], rays.hi[k], rays.mid[k], rays.miss[k], rays.grade_lo, buf)
        sig, ws = composite(buf[:nb], order)
        out_s.append(sig)
        out_w.append(sig * ws * rays.weight[k])
        out_k.append(np.full(sig.size, k))
    sig = np.concatenate(out_s)
    k = np.concatenate(out_k)
    return sig * rays.cos_phi[k], sig * rays.sin_phi[k], np.concatenate(out_w)


def source_nodes(profile: VorticityProfile, c: float, L: float, h: float, r: float, z: float,
                 rule: QuadratureRule = QuadratureRule()):
    """Offsets ``zeta' - zeta`` and weights ``omega(zeta') dA`` for the target ``(r, z)``."""
    rays = ray_layout(c, L, h, r, z, rule)
    if rays is None:
        return _far_nodes(profile, c, L, h, r, z, math.hypot(r - L, z - h) / c, rule)
    dr, dz, area = _ray_nodes(rays, rule.order)
    return dr, dz, _weights_from_offsets(profile, c, L, h, r, z, dr, dz, area)


@njit
def _profile_value(rho, gam, c1, c2):
    if rho <= 1e-300 or rho >= 1.0:
        return 0.0
    b = rho * (1.0 - rho)
    return gam * c1 * b * (1.0 - c2 * (1.0 + math.log(rho)))


@njit
def _rays_velocity(r, z, L, h, c, cos_phi, sin_phi, lo, hi, mid, miss, weight, grade_lo,
                   gx, gw, gam, c1, c2, data, x0, step, h_const):
    """Fused radial quadrature and kernel sum over all rays (unperturbed profile family)."""
    buf = np.empty(_MAX_BREAKS)
    rot_r = 0.0
    rot_z = 0.0
    up_z = 0.0
    inv_c2 = 1.0 / (c * c)
    for k in range(lo.shape[0]):
        if hi[k] <= lo[k]:
            continue
        nb = _ray_breaks(lo[k], hi[k], mid[k], miss[k], grade_lo, buf)
        for p in range(nb - 1):
            a = buf[p]
            half = 0.5 * (buf[p + 1] - a)
            for m in range(gx.shape[0]):
                sig = a + half * (gx[m] + 1.0)
                dr = sig * cos_phi[k]
                dz = sig * sin_phi[k]
                rho = math.sqrt((r + dr - L) ** 2 + (z + dz - h) ** 2) / c
                if rho >= 1.0:
                    continue
                w = _profile_value(rho, gam, c1, c2) * inv_c2 * sig * half * gw[m] * weight[k]
                rp = r + dr
                if rp <= 0.0 or w == 0.0:
                    continue
                q2 = r * rp
                d2 = dr * dr + dz * dz
                if d2 == 0.0:
                    continue
                g, hh = _table_eval(d2 / q2, data, x0, step, h_const)
                gq = w * g / math.sqrt(q2)
                rot_r -= dz * gq
                rot_z += dr * gq
                up_z += w * math.sqrt(rp / r) * hh
    pre = 0.5 / (math.pi * r)
    return rot_r * pre, rot_z * pre, up_z * pre


# ---------------------------------------------------------------------------
# public operations

def _check_point(zeta):
    r, z = zeta
    if not r > 0:
        raise ValueError("velocity needs r > 0")
    return float(r), float(z)


def velocity_parts_at(profile: VorticityProfile, c: float, L: float, h: float, r: float, z: float,
                      rule: QuadratureRule = QuadratureRule(), table: Optional[KernelTable] = None):
    """``(rot, up)`` velocity parts at ``(r, z)`` for a core of radius ``c`` centred at ``L + ih``."""
    table = table or kernel_table()
    rays = ray_layout(c, L, h, r, z, rule) if HAS_NUMBA and profile.perturbation is None else None
    if rays is not None:
        gx, gw = _leggauss(rule.order)
        rr, rz, uz = _rays_velocity(r, z, L, h, c, rays.cos_phi, rays.sin_phi, rays.lo, rays.hi, rays.mid,
                                    rays.miss, rays.weight, rays.grade_lo, gx, gw, profile.gamma,
                                    profile.c1, profile.c2, table.data, table.x0, table.step, table.h_const)
    else:
        dr, dz, w = source_nodes(profile, c, L, h, r, z, rule)
        rr, rz, uz = accumulate(r, z, dr, dz, w, table)
    return np.array([rr, rz]), np.array([0.0, uz])


def velocity(params: RingParams, profile: VorticityProfile, t: float, zeta, tol: float = 1e-8) -> VelocitySample:
    r, z = _check_point(zeta)
    c = thickness(params, t)
    rot, up = velocity_parts_at(profile, c, params.L, height(params, t), r, z, QuadratureRule.for_tolerance(tol))
    return VelocitySample(HalfPlanePoint(r, z), rot + up, rot, up)


def velocity_many(params: RingParams, profile: VorticityProfile, t: float, r, z, tol: float = 1e-8,
                  workers: int = 1) -> np.ndarray:
    """Velocities at many points, shape ``(n, 2)``; identical for every worker count."""
    r = np.asarray(r, dtype=float).ravel()
    z = np.asarray(z, dtype=float).ravel()
    if np.any(~(r > 0)):
        raise ValueError("velocity needs r > 0")
    c = thickness(params, t)
    h = height(params, t)
    rule = QuadratureRule.for_tolerance(tol)
    table = kernel_table()

    def one(i):
        rot, up = velocity_parts_at(profile, c, params.L, h, r[i], z[i], rule, table)
        return rot + up

    if workers <= 1 or r.size < 2:
        rows = [one(i) for i in range(r.size)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(r.size), chunksize=max(1, r.size // (8 * workers))))
    return np.array(rows).reshape(r.size, 2)


def velocity_on_ring(params: RingParams, profile: VorticityProfile, t: float, rho: float, alpha: float,
                     tol: float = 1e-8) -> VelocitySample:
    return velocity(params, profile, t, gamma(params, profile, t, rho, alpha), tol)


def asymptotic_leading(params: RingParams, profile: VorticityProfile, t: float, rho: float, alpha: float) -> np.ndarray:
    """Rotation term ``-(i rho Gamma_rho / 2 pi c) e^{i theta}`` plus the self-induced drift."""
    c = thickness(params, t)
    theta = alpha + math.fmod(angle(params, profile, t, rho), TWO_PI)
    spin = rho * gamma_rho(profile, rho) / (TWO_PI * c)
    drift = -params.gamma / (4.0 * math.pi * params.L) * math.log(c)
    return np.array([spin * math.sin(theta), -spin * math.cos(theta) + drift])


def residual(params: RingParams, profile: VorticityProfile, t: float, rho: float, alpha: float,
             tol: float = 1e-8) -> np.ndarray:
    return velocity_on_ring(params, profile, t, rho, alpha, tol).v - asymptotic_leading(params, profile, t, rho, alpha)


@dataclass(frozen=True)
class GridSpec:
    rmin: float
    rmax: float
    zmin: float
    zmax: float
    nr: int
    nz: int

    def __post_init__(self):
        if not self.rmin > 0:
            raise ValueError("grid must stay in r > 0")
        if self.nr < 1 or self.nz < 1 or self.rmax < self.rmin or self.zmax < self.zmin:
            raise ValueError("degenerate grid")

    def points(self):
        """Row-major in ``(z, r)``: ``r`` varies fastest."""
        rs = np.linspace(self.rmin, self.rmax, self.nr)
        zs = np.linspace(self.zmin, self.zmax, self.nz)
        zz, rr = np.meshgrid(zs, rs, indexing="ij")
        return rr.ravel(), zz.ravel()


def velocity_field_grid(params: RingParams, profile: VorticityProfile, t: float, grid: GridSpec,
                        tol: float = 1e-8, workers: int = 1) -> np.ndarray:
    """Rows ``(r, z, vr, vz)``."""
    r, z = grid.points()
    v = velocity_many(params, profile, t, r, z, tol, workers)
    return np.column_stack([r, z, v])


def write_field_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format(float(x), ".17g") for x in row])


def write_velocity_csv(path, rows):
    write_field_csv(path, ["r", "z", "vr", "vz"], rows)
