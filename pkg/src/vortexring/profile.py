"""Radial vorticity density of the ring core.

The default density is

    varpi(rho) = Gamma * c1 * rho * (1 - rho) * (1 - c2 * log(e * rho)),   0 <= rho <= 1,

extended by zero.  ``c1`` and ``c2`` are fixed by two moment constraints: the
circulation ``2 pi int varpi rho = Gamma`` and the vanishing third moment
``int varpi rho^3 = 0``.  A user density can be added on top; the solver then
re-projects the two free coefficients onto the constraints.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .quadrature import graded_unit_rule

TWO_PI = 2.0 * math.pi
_TINY = 1e-300


def _basis1(rho):
    return rho * (1.0 - rho)


def _basis2(rho):
    rho = np.asarray(rho, dtype=float)
    safe = np.where(rho > _TINY, rho, 1.0)
    return np.where(rho > _TINY, rho * (1.0 - rho) * (1.0 + np.log(safe)), 0.0)


def _basis1_moment(k: int) -> float:
    return 1.0 / (k + 2) - 1.0 / (k + 3)


def _basis2_moment(k: int) -> float:
    # int_0^1 rho^(k+1) (1 - rho) log(rho) = -1/(k+2)^2 + 1/(k+3)^2
    return _basis1_moment(k) - 1.0 / (k + 2) ** 2 + 1.0 / (k + 3) ** 2


@dataclass(frozen=True)
class VorticityProfile:
    """Immutable core density; ``perturbation`` is an extra shape in units of ``gamma``."""

    gamma: float
    c1: float
    c2: float
    perturbation: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, rho):
        return eval_profile(self, rho)

    def to_json(self) -> str:
        if self.perturbation is not None:
            raise ValueError("profiles with a perturbation term are not serializable")
        return json.dumps({"gamma": self.gamma, "c1": self.c1, "c2": self.c2})

    @classmethod
    def from_json(cls, text: str) -> "VorticityProfile":
        d = json.loads(text)
        return cls(float(d["gamma"]), float(d["c1"]), float(d["c2"]))


def solve_profile(strength: float, perturbation=None) -> VorticityProfile:
    """Fix ``c1, c2`` so that both moment constraints hold.

    With a perturbation ``p`` the density is ``Gamma (c1 b1 - c1 c2 b2 + p)`` and the
    same two constraints are imposed on the sum.
    """
    if strength == 0 or not np.isfinite(strength):
        raise ValueError("circulation must be finite and nonzero")
    a = np.array([[_basis1_moment(1), _basis2_moment(1)],
                  [_basis1_moment(3), _basis2_moment(3)]])
    rhs = np.array([1.0 / TWO_PI, 0.0])
    if perturbation is not None:
        rhs -= [_quad_moment(perturbation, 1), _quad_moment(perturbation, 3)]
    det = np.linalg.det(a)
    assert abs(det) > 1e-6, "moment system is singular"
    x1, x2 = np.linalg.solve(a, rhs)
    if x1 == 0:
        raise ValueError("perturbation cancels the leading coefficient")
    return VorticityProfile(float(strength), float(x1), float(-x2 / x1), perturbation)


def eval_profile(p: VorticityProfile, rho):
    """Density at internal radius ``rho`` (scalar or array); zero outside (0, 1)."""
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr < 0) or np.any(np.isnan(rho_arr)):
        raise ValueError("internal radius must be nonnegative")
    inside = (rho_arr > _TINY) & (rho_arr < 1.0)
    r = np.where(inside, rho_arr, 0.5)
    val = p.c1 * _basis1(r) - p.c1 * p.c2 * _basis2(r)
    if p.perturbation is not None:
        val = val + np.asarray(p.perturbation(r), dtype=float)
    out = np.where(inside, p.gamma * val, 0.0)
    return float(out) if out.ndim == 0 else out


def _quad_moment(fun, k):
    val, _ = integrate.quad(lambda x: float(fun(np.asarray(x))) * x ** k, 0.0, 1.0,
                            epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def moment(p: VorticityProfile, k: int) -> float:
    """``int_0^1 varpi(rho) rho^k d rho`` by adaptive quadrature."""
    if k < 0 or int(k) != k:
        raise ValueError("moment order must be a nonnegative integer")
    # QUADPACK's extrapolation handles the log factor at the origin
    val, _ = integrate.quad(lambda x: eval_profile(p, x) * x ** k, 0.0, 1.0,
                            epsabs=1e-14 * abs(p.gamma), epsrel=1e-13, limit=200)
    return val


def gamma_rho(p: VorticityProfile, rho):
    """Layer circulation ``2 pi int_0^1 varpi(rho lam) lam d lam``; vectorized in ``rho``."""
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(rho_arr < 0) or np.any(rho_arr > 1):
        raise ValueError("internal radius must lie in [0, 1]")
    lam, w = graded_unit_rule()
    vals = eval_profile(p, rho_arr[..., None] * lam)
    out = TWO_PI * np.sum(vals * lam * w, axis=-1)
    return float(out) if out.ndim == 0 else out


def gamma_rho_substituted(p: VorticityProfile, rho: float) -> float:
    """Same quantity as :func:`gamma_rho` through ``(2 pi / rho^2) int_0^rho varpi s ds``."""
    if rho <= 0:
        return 0.0
    val, _ = integrate.quad(lambda s: eval_profile(p, s) * s, 0.0, rho,
                            epsabs=1e-15 * abs(p.gamma), epsrel=1e-13, limit=200)
    return TWO_PI * val / rho ** 2


def rotation_energy_integral(p: VorticityProfile) -> float:
    """``int_0^1 varpi(rho) rho^3 Gamma_rho d rho``."""
    rho, w = graded_unit_rule()
    return float(np.sum(eval_profile(p, rho) * rho ** 3 * gamma_rho(p, rho) * w))


def layer_flux(p: VorticityProfile, rho):
    """``int_0^rho varpi(s) s ds``, i.e. ``rho^2 Gamma_rho / (2 pi)``."""
    rho_arr = np.asarray(rho, dtype=float)
    return rho_arr ** 2 * gamma_rho(p, rho_arr) / TWO_PI


def closed_form_gamma_rho(p: VorticityProfile, rho):
    """Exact layer circulation for the unperturbed family (test oracle)."""
    if p.perturbation is not None:
        raise ValueError("closed form only covers the unperturbed family")
    rho = np.asarray(rho, dtype=float)
    safe = np.where(rho > 0, rho, 1.0)
    lg = np.where(rho > 0, np.log(safe), 0.0)
    inner = (1.0 - p.c2 - p.c2 * lg) * (1.0 / 3.0 - rho / 4.0) - p.c2 * (-1.0 / 9.0 + rho / 16.0)
    return TWO_PI * p.gamma * p.c1 * rho * inner
