"""Independent reference computations shared by the test modules."""
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ellipe, ellipkm1

from vortexring.quadrature import composite
from vortexring.ring import height, thickness, vorticity_flux_array


def azimuthal_integral(r, z, rp, zp):
    """``int_0^{2 pi} cos(phi) / |x - x'| dphi`` for two coaxial circles."""
    dz2 = (z - zp) ** 2
    s = (r + rp) ** 2 + dz2
    p = ((r - rp) ** 2 + dz2) / s  # complementary parameter 1 - m, kept exact near coincidence
    m = 1.0 - p
    k, e = ellipkm1(p), ellipe(m)
    return 4.0 / np.sqrt(s) * ((2.0 / m) * (k - e) - k)


def stream_energy(params, profile, t, n_out=12, n_in=16, n_phi=64):
    """Whole-space kinetic energy from ``pi int psi omega dr dz``.

    Only the core is integrated, so there is no truncation radius.  The stream
    function at each outer node is a polar integral about that node, which turns
    the logarithmic self-interaction into a smooth ``s log s``.
    """
    c, h, L = thickness(params, t), height(params, t), params.L
    rho, wr = composite(np.array([0.0, 1e-3, 1e-2, 0.1, 0.3, 0.6, 1.0]), n_out)
    alpha = 2 * math.pi * (np.arange(2 * n_phi) + 0.5) / (2 * n_phi)
    R_, A_ = np.meshgrid(rho, alpha, indexing="ij")
    xr = (L + c * R_ * np.cos(A_)).ravel()
    xz = (h + c * R_ * np.sin(A_)).ravel()
    W = ((c * c * rho * wr)[:, None] * (math.pi / n_phi) * np.ones_like(A_)).ravel()
    om = vorticity_flux_array(params, profile, t, xr, xz)
    phi, wphi = composite(np.linspace(0, 2 * math.pi, 9), n_phi // 8)
    e = np.stack([np.cos(phi), np.sin(phi)], -1)
    gx, gw = leggauss(n_in)
    rel = np.array([0, 1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.4])
    total = 0.0
    for k in range(xr.size):
        d = np.array([xr[k] - L, xz[k] - h])
        b = e @ d
        reach = -b + np.sqrt(np.maximum(b * b - d @ d + c * c, 0.0))
        mid = np.clip(-b, 0.0, reach)
        br = np.sort(np.concatenate([rel[None, :] * reach[:, None], mid[:, None], reach[:, None]], 1), 1)
        lo, hi = br[:, :-1, None], br[:, 1:, None]
        s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx
        ws = 0.5 * (hi - lo) * gw
        pr = xr[k] + s * e[:, 0, None, None]
        pz = xz[k] + s * e[:, 1, None, None]
        omp = vorticity_flux_array(params, profile, t, pr.ravel(), pz.ravel()).reshape(pr.shape)
        with np.errstate(all="ignore"):
            f = np.where(s > 0, ws * s * omp * pr * azimuthal_integral(xr[k], xz[k], pr, pz), 0.0)
        total += W[k] * om[k] * xr[k] * np.sum(wphi * f.sum(axis=(1, 2)))
    # pi * (1 / 4 pi) from the vector potential
    return 0.25 * total
