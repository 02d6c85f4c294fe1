"""Geometry and time evolution of the ring core.

The core cross-section at time ``t`` is the disk of radius ``c = sqrt(nu t)``
around ``zeta0 = L + i h(t)``.  Internal polar coordinates ``(rho, alpha)``
map into it through

    gamma(t, rho, alpha) = zeta0 + c rho exp(i (alpha + a(t, rho)))

where ``a`` is the accumulated internal rotation of the layer ``rho``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .profile import VorticityProfile, eval_profile, gamma_rho

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HalfPlanePoint:
    """Meridional point ``zeta = r + i z`` with ``r > 0``."""

    r: float
    z: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"half-plane points need r > 0, got r={self.r}")

    def __iter__(self):
        yield self.r
        yield self.z

    @property
    def zeta(self) -> complex:
        return complex(self.r, self.z)

    @classmethod
    def from_complex(cls, zeta: complex) -> "HalfPlanePoint":
        return cls(zeta.real, zeta.imag)


@dataclass(frozen=True)
class RingParams:
    L: float = 1.0
    gamma: float = 1.0
    nu_tur: float = 1.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("ring radius L must be positive")
        if self.gamma == 0 or not math.isfinite(self.gamma):
            raise ValueError("circulation must be finite and nonzero")
        if not self.nu_tur > 0:
            raise ValueError("turbulence viscosity must be positive")

    @property
    def re_tur(self) -> float:
        """Turbulence Reynolds number ``|Gamma| / nu_tur``."""
        return abs(self.gamma) / self.nu_tur

    @classmethod
    def from_reynolds(cls, L: float, gamma: float, re_tur: float) -> "RingParams":
        if not re_tur > 0:
            raise ValueError("turbulence Reynolds number must be positive")
        return cls(L, gamma, abs(gamma) / re_tur)

    def check_reynolds(self, re_tur: float, rtol: float = 1e-12) -> bool:
        return math.isclose(self.nu_tur, abs(self.gamma) / re_tur, rel_tol=rtol)


def _check_t(t):
    if not t > 0 or not math.isfinite(t):
        raise ValueError("time must be positive and finite")


def thickness(params: RingParams, t: float) -> float:
    _check_t(t)
    return math.sqrt(params.nu_tur * t)


def thickness_rate(params: RingParams, t: float) -> float:
    return params.nu_tur / (2.0 * thickness(params, t))


def height(params: RingParams, t: float) -> float:
    c = thickness(params, t)
    return params.gamma / (8.0 * math.pi * params.L) * (1.0 - 2.0 * math.log(c)) * t


def height_rate(params: RingParams, t: float) -> float:
    """Exact time derivative of :func:`height`, ``-(Gamma / 4 pi L) log c``."""
    return -params.gamma / (4.0 * math.pi * params.L) * math.log(thickness(params, t))


def angle(params: RingParams, profile: VorticityProfile, t: float, rho):
    """Unreduced rotation angle ``a(t, rho) = -Gamma_rho log(t) / (2 pi nu)``."""
    _check_t(t)
    return -gamma_rho(profile, rho) * math.log(t) / (TWO_PI * params.nu_tur)


def angle_rate(params: RingParams, profile: VorticityProfile, t: float, rho):
    c = thickness(params, t)
    return -gamma_rho(profile, rho) / (TWO_PI * c * c)


@dataclass(frozen=True)
class RingState:
    t: float
    c: float
    h: float
    L: float
    gamma: float
    nu_tur: float

    def __post_init__(self):
        if not self.c < self.L / 4:
            raise ValueError(f"core thickness c={self.c:g} is outside the validity window c < L/4")

    @property
    def center(self) -> HalfPlanePoint:
        return HalfPlanePoint(self.L, self.h)

    @property
    def params(self) -> RingParams:
        return RingParams(self.L, self.gamma, self.nu_tur)

    def to_json(self) -> str:
        return json.dumps({"t": self.t, "c": self.c, "h": self.h, "L": self.L,
                           "gamma": self.gamma, "nu_tur": self.nu_tur})

    @classmethod
    def from_json(cls, text: str) -> "RingState":
        d = json.loads(text)
        state = cls(**{k: float(d[k]) for k in ("t", "c", "h", "L", "gamma", "nu_tur")})
        if not math.isclose(state.c * state.c, state.nu_tur * state.t, rel_tol=1e-12):
            raise ValueError("inconsistent state: c^2 != nu_tur * t")
        return state


def ring_state(params: RingParams, t: float) -> RingState:
    return RingState(t, thickness(params, t), height(params, t), params.L, params.gamma, params.nu_tur)


def gamma(params: RingParams, profile: VorticityProfile, t: float, rho: float, alpha: float) -> HalfPlanePoint:
    if not 0.0 <= rho <= 1.0:
        raise ValueError("internal radius must lie in [0, 1]")
    c = thickness(params, t)
    if c >= params.L:
        raise ValueError("core reaches the symmetry axis")
    theta = alpha + math.fmod(angle(params, profile, t, rho), TWO_PI)
    return HalfPlanePoint(params.L + c * rho * math.cos(theta), height(params, t) + c * rho * math.sin(theta))


def dgamma_dt(params: RingParams, profile: VorticityProfile, t: float, rho: float, alpha: float) -> np.ndarray:
    """``i hdot + cdot rho e^{i theta} + i c rho adot e^{i theta}`` as ``(r, z)`` components."""
    c = thickness(params, t)
    cdot = params.nu_tur / (2.0 * c)
    theta = alpha + math.fmod(angle(params, profile, t, rho), TWO_PI)
    w = cdot * rho + 1j * c * rho * angle_rate(params, profile, t, rho)
    v = 1j * height_rate(params, t) + w * complex(math.cos(theta), math.sin(theta))
    return np.array([v.real, v.imag])


def invert_gamma(params: RingParams, profile: VorticityProfile, t: float, zeta) -> Optional[tuple]:
    """``(rho, alpha)`` with ``gamma(rho, alpha) = zeta``; ``None`` outside the closed core."""
    r, z = zeta
    c = thickness(params, t)
    dr, dz = r - params.L, z - height(params, t)
    dist = math.hypot(dr, dz)
    if dist > c:
        return None
    if dist == 0.0:
        return 0.0, 0.0
    rho = min(dist / c, 1.0)
    alpha = (math.atan2(dz, dr) - math.fmod(angle(params, profile, t, rho), TWO_PI)) % TWO_PI
    return rho, alpha


def vorticity_flux(params: RingParams, profile: VorticityProfile, t: float, zeta) -> float:
    """Azimuthal vorticity ``varpi(rho) / c^2`` at ``zeta``; zero off the core."""
    r, z = zeta
    return float(vorticity_flux_array(params, profile, t, np.asarray(r), np.asarray(z)))


def vorticity_flux_array(params: RingParams, profile: VorticityProfile, t: float, r, z):
    c = thickness(params, t)
    rho = np.hypot(np.asarray(r, dtype=float) - params.L, np.asarray(z, dtype=float) - height(params, t)) / c
    return eval_profile(profile, rho) / (c * c)
