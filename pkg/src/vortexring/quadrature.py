"""Composite Gauss-Legendre rules used throughout the package."""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a: float, b: float, n: int):
    x, w = _leggauss(n)
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), h * w


def composite(breaks, n: int):
    """Nodes and weights of an ``n``-point rule on every panel between consecutive breaks."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = _leggauss(n)
    a = breaks[:-1, None]
    h = 0.5 * np.diff(breaks)[:, None]
    nodes = a + h * (x[None, :] + 1.0)
    weights = h * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_breaks(a: float, b: float, ratio: float = 0.15, levels: int = 8, uniform: int = 2):
    """Panel breaks on [a, b] refined geometrically toward ``a``.

    The last ``uniform`` panels split the outer part evenly; the remaining
    ``levels`` panels shrink by ``ratio`` each toward the left end.
    """
    length = b - a
    inner = [a + length * ratio ** k for k in range(levels, 0, -1)]
    outer = np.linspace(a + length * ratio, b, uniform + 1)
    return np.concatenate(([a], inner[:-1], outer))


@lru_cache(maxsize=16)
def graded_unit_rule(n: int = 12, levels: int = 8, ratio: float = 0.15, uniform: int = 3):
    """Rule on [0, 1] for integrands with ``rho**k log(rho)`` behaviour at 0."""
    x, w = composite(graded_breaks(0.0, 1.0, ratio=ratio, levels=levels, uniform=uniform), n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def periodic_trapezoid(n: int, start: float = 0.0):
    """Equispaced nodes on a full period with equal weights."""
    theta = start + 2.0 * np.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * np.pi / n)
