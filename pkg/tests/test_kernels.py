import math
import os
import subprocess
import sys
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vortexring import kernels
from vortexring.kernels import (G, H, K_2d, K_ax, K_ax_parts, aux_exact_1, aux_exact_2, aux_quadrature_1,
                                aux_quadrature_2, kernel_table, large_s_series, mean_value_circle,
                                mean_value_circle_quadrature, ring_velocity_3d)

# 30-digit mpmath quadrature, frozen
ORACLE = {
    1e-6: (999996.94230164364991, 3.9935976927814519963),
    1e-2: (98.671051766233433511, 1.688161776900197464),
    1.0: (0.57165723896816644761, 0.48241619367008558932),
    100.0: (4.4866620895536198498e-5, 3.0058803059039578101e-3),
    1e4: (4.7100338162968147536e-10, 3.1401795257038695667e-6),
}

points = st.tuples(st.floats(0.2, 3.0), st.floats(-2.0, 2.0))


@pytest.mark.parametrize("s", sorted(ORACLE))
def test_kernels_against_oracle(s):
    g, h = ORACLE[s]
    assert G(s) == pytest.approx(g, rel=1e-10)
    assert H(s) == pytest.approx(h, rel=1e-10)


@pytest.mark.parametrize("s", [1.0, 0.37])
def test_brute_force_trapezoid(s):
    # the integrands are smooth and even about phi = 0 and pi, so the trapezoid rule is spectral
    n = 10_000_000
    phi = np.linspace(0.0, math.pi, n + 1)
    d = (2 * (1 - np.cos(phi)) + s) ** -1.5
    w = np.full(n + 1, math.pi / n)
    w[[0, -1]] *= 0.5
    assert G(s) == pytest.approx(np.dot(w, np.cos(phi) * d), rel=1e-8)
    assert H(s) == pytest.approx(np.dot(w, (1 - np.cos(phi)) * d), rel=1e-8)


def test_nonpositive_s_rejected():
    for f in (G, H, aux_exact_1, aux_exact_2):
        with pytest.raises(ValueError):
            f(0.0)


@pytest.mark.parametrize("s", [1e-2, 1e-4, 1e-6])
def test_small_s_leading_term(s):
    assert abs(s * G(s) - 1) <= 2.0 * s * abs(math.log(s))


def test_small_s_asymptotic_constants_bounded():
    s = np.logspace(-8, -2, 20)
    a = np.abs(G(s) - 1 / s) / np.abs(np.log(s))
    b = np.abs(H(s) + 0.25 * np.log(s))
    assert np.max(a) <= 3 * np.median(a)
    assert np.max(b) <= 3 * np.median(b)


def test_large_s_bounds():
    s = 100.0
    assert abs(G(s)) <= math.pi / s ** 1.5
    assert 0 < H(s) <= math.pi * 2 / s ** 1.5


def test_series_and_quadrature_agree_at_switch():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for s in (100.0, 150.0):
            g, h, _, _ = large_s_series(s)
            assert g == pytest.approx(kernels.G_quadrature(s), rel=1e-9)
            assert h == pytest.approx(kernels.H_quadrature(s), rel=1e-11)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_positive_and_decreasing():
    s = np.logspace(-8, 6, 200)
    g, h = G(s), H(s)
    assert np.all(g > 0) and np.all(h > 0)
    assert np.all(np.diff(g) < 0) and np.all(np.diff(h) < 0)


@pytest.mark.parametrize("s", np.logspace(-6, 2, 20))
def test_aux_closed_forms(s):
    assert aux_quadrature_1(s) == pytest.approx(aux_exact_1(s), rel=1e-10)
    assert aux_quadrature_2(s) == pytest.approx(aux_exact_2(s), rel=1e-10)


def test_aux_examples():
    assert aux_exact_1(1.0) == pytest.approx(math.pi / math.sqrt(1 + math.pi ** 2), rel=1e-15)
    assert aux_exact_1(1.0) == pytest.approx(0.9528905, abs=5e-8)
    s = 3 * math.pi ** 2
    assert aux_exact_1(s) == pytest.approx(math.pi / (s * 2 * math.pi), rel=1e-14)
    vals = aux_exact_2(np.logspace(2, 6, 13))
    assert np.all(np.diff(vals) < 0)
    # integrand ~ phi^2 s^(-3/2), well inside the s^(-1/2) envelope
    assert vals[-1] * 1e9 == pytest.approx(math.pi ** 3 / 3, rel=1e-3)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_table_matches_direct_evaluation():
    table = kernel_table()
    s = np.exp(np.random.default_rng(3).uniform(math.log(1e-12), math.log(1e8), 300))
    g, h = table(s)
    assert np.allclose(g, G(s), rtol=1e-10, atol=0)
    assert np.allclose(h, H(s), rtol=1e-10, atol=1e-10)


def test_table_beyond_range_uses_asymptotics():
    g, h = kernel_table()(np.array([1e-20, 1e14]))
    assert g[0] == pytest.approx(1e20, rel=1e-12)
    assert h[0] == pytest.approx(-0.25 * math.log(1e-20) + (H(1e-10) + 0.25 * math.log(1e-10)), rel=1e-8)
    assert g[1] > 0 and h[1] > 0


def test_kernel_reduces_to_point_vortex():
    zeta = (1.0, 0.0)
    for d in (1e-3, 1e-5):
        zp = (1.0 - d * 0.6, -d * 0.8)
        k = K_ax(zeta, zp)
        # curl v = -omega: the near field is the planar kernel with the sign flipped
        ref = -K_2d((zeta[0] - zp[0], zeta[1] - zp[1]))
        assert np.linalg.norm(k - ref) / np.linalg.norm(ref) < 10 * d * abs(math.log(d))


@given(points, points)
def test_reflection_symmetry(a, b):
    if math.hypot(a[0] - b[0], a[1] - b[1]) < 1e-3:
        return
    k = K_ax(a, b)
    m = K_ax((a[0], -a[1]), (b[0], -b[1]))
    assert m[0] == pytest.approx(-k[0], rel=1e-12, abs=1e-14)
    assert m[1] == pytest.approx(k[1], rel=1e-12, abs=1e-14)


@given(points, points, st.floats(0.1, 10.0))
def test_homogeneous_of_degree_minus_one(a, b, lam):
    if math.hypot(a[0] - b[0], a[1] - b[1]) < 1e-3:
        return
    k = K_ax(a, b)
    ks = K_ax((lam * a[0], lam * a[1]), (lam * b[0], lam * b[1]))
    assert np.allclose(ks * lam, k, rtol=1e-12, atol=1e-14)


@given(points, points)
def test_parts_sum_to_kernel(a, b):
    if math.hypot(a[0] - b[0], a[1] - b[1]) < 1e-3:
        return
    rot, up = K_ax_parts(a, b)
    assert np.allclose(rot + up, K_ax(a, b), rtol=1e-14, atol=1e-15)
    assert up[0] == 0.0


@pytest.mark.parametrize("zeta, zp", [((1.0, 0.0), (1.3, 0.4)), ((0.4, 2.0), (1.0, 0.0)), ((5.0, -3.0), (1.0, 0.2))])
def test_against_three_dimensional_biot_savart(zeta, zp):
    ref = ring_velocity_3d(zeta, zp)
    assert np.allclose(K_ax(zeta, zp), ref, rtol=1e-6, atol=1e-6 * np.abs(ref).max())


def test_far_field_decay():
    far = [np.linalg.norm(K_ax((1.0 + 10 * 2 ** k, 0.0), (1.0, 0.0))) for k in range(3)]
    assert far[1] < far[0] and far[2] < far[1]


def test_coincident_points_rejected():
    with pytest.raises(ValueError):
        K_ax((1.0, 0.0), (1.0, 0.0))


def test_k2d_examples():
    assert np.allclose(K_2d((1.0, 0.0)), [0.0, 1 / (2 * math.pi)])
    assert np.allclose(K_2d((0.0, 1.0)), [-1 / (2 * math.pi), 0.0])
    with pytest.raises(ValueError):
        K_2d((0.0, 0.0))


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_k2d_modulus(x, y):
    if math.hypot(x, y) < 1e-6:
        return
    assert np.linalg.norm(K_2d((x, y))) == pytest.approx(1 / (2 * math.pi * math.hypot(x, y)), rel=1e-14)


@pytest.mark.parametrize("rho, rho_p, expected", [(1.0, 0.5, 1.0), (0.5, 1.0, 0.0), (2.0, 1.99, 0.5)])
def test_mean_value_examples(rho, rho_p, expected):
    assert mean_value_circle(rho, rho_p) == expected
    val = mean_value_circle_quadrature(rho, rho_p)
    assert abs(val - expected) <= 1e-10


def test_mean_value_random_pairs(rng):
    n = 0
    while n < 100:
        rho, rho_p = rng.uniform(0.01, 1.0, 2)
        if abs(rho - rho_p) <= 1e-3:
            continue
        assert abs(mean_value_circle_quadrature(rho, rho_p) - mean_value_circle(rho, rho_p)) <= 1e-10
        n += 1


def test_mean_value_equal_radii_rejected():
    with pytest.raises(ValueError):
        mean_value_circle(0.5, 0.5)


def test_numpy_backend_matches_numba():
    code = ("import numpy as np, json;"
            "from vortexring import kernel_table, backend;"
            "s = np.logspace(-12, 8, 501); g, h = kernel_table()(s);"
            "print(json.dumps([backend(), g.tolist(), h.tolist()]))")
    env = dict(os.environ, VORTEXRING_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout
    import json
    name, g_np, h_np = json.loads(out)
    assert name == "numpy"
    g, h = kernel_table()(np.logspace(-12, 8, 501))
    assert np.allclose(g_np, g, rtol=1e-13, atol=0)
    assert np.allclose(h_np, h, rtol=1e-13, atol=1e-15)
