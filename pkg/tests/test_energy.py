import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from oracles import azimuthal_integral, stream_energy
from vortexring.energy import (EnergyReport, energy_slope_fit, is_decreasing, kinetic_energy, lambda_max_array,
                               lambda_max_traceless, reynolds_energy_bound, tail_bound, total_subsolution_energy,
                               write_energy_scan)
from vortexring.profile import solve_profile
from vortexring.reynolds import q1_coefficients
from vortexring.ring import RingParams, thickness

SLOPE_TIMES = tuple(float(t) for t in np.logspace(-6, -3, 5))
LADDER = (1e-2, 1e-3, 1e-4)


@pytest.fixture(scope="module")
def setup():
    return RingParams(), solve_profile(1.0)


@pytest.fixture(scope="module")
def ev_ladder(setup):
    params, prof = setup
    return {t: kinetic_energy(params, prof, t).value for t in SLOPE_TIMES}


@pytest.fixture(scope="module")
def er_ladder(setup):
    params, prof = setup
    out = {}
    for t in LADDER + (1e-6,):
        out[t] = reynolds_energy_bound(params, prof, q1_coefficients(params, prof, t), t)
    return out


@pytest.fixture(scope="module")
def truncation_pair(setup):
    params, prof = setup
    return kinetic_energy(params, prof, 1e-2), kinetic_energy(params, prof, 1e-2, truncation_radius=20.0)


@pytest.fixture(scope="module")
def ev_coarse(setup, truncation_pair):
    params, prof = setup
    return {1e-2: truncation_pair[0].value, 1e-4: kinetic_energy(params, prof, 1e-4).value}


# ---------------------------------------------------------------------------
# lambda_max

@pytest.mark.parametrize("R,expected", [
    (np.zeros((2, 2)), 0.0),
    (np.diag([1.0, -1.0]), 1.0),
    (np.diag([1.0, 1.0]), 1.0 / 3.0),
])
def test_lambda_max_examples(R, expected):
    assert lambda_max_traceless(R) == pytest.approx(expected, abs=1e-15)


def _lambda_oracle(a, b, d):
    T = np.array([[a, b, 0.0], [b, d, 0.0], [0.0, 0.0, 0.0]])
    return np.linalg.eigvalsh(T - np.trace(T) / 3 * np.eye(3))[-1]


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(finite, finite, finite)
def test_lambda_max_matches_eigensolver(a, b, d):
    lam = lambda_max_traceless((a, b, d))
    assert lam >= 0.0
    assert lam == pytest.approx(_lambda_oracle(a, b, d), abs=1e-9 * (abs(a) + abs(b) + abs(d) + 1))


def test_lambda_max_vectorized():
    comp = np.array([[1.0, 0.0, -1.0], [1.0, 0.0, 1.0], [0.3, -2.0, 0.7]])
    assert np.allclose(lambda_max_array(comp), [_lambda_oracle(*row) for row in comp], atol=1e-14)


# ---------------------------------------------------------------------------
# kinetic energy

def test_azimuthal_integral_closed_form():
    for r, z, rp, zp in [(1.0, 0.0, 1.2, 0.3), (1.0, 0.0, 1.0, 1e-3), (0.2, 1.0, 2.0, -1.0)]:
        ref, _ = quad(lambda p: math.cos(p) / math.sqrt(r * r + rp * rp - 2 * r * rp * math.cos(p) + (z - zp) ** 2),
                      0, 2 * math.pi, limit=200)
        assert azimuthal_integral(r, z, rp, zp) == pytest.approx(ref, rel=1e-9)


@pytest.mark.slow
def test_energy_matches_stream_function_identity(setup, truncation_pair):
    # no truncation in the oracle: the difference is the far-field tail
    params, prof = setup
    exact = stream_energy(params, prof, 1e-2)
    near, far = truncation_pair
    assert 0.0 < exact - near.value <= near.tail_bound
    # a |x|^-3 field loses R^-3 of its energy outside R: Richardson in the radius
    assert exact == pytest.approx(near.value + 8.0 / 7.0 * (far.value - near.value), abs=2e-5)


def test_energy_frozen_value(truncation_pair):
    assert truncation_pair[0].value == pytest.approx(1.8228013, rel=1e-6)


def test_truncation_doubling(truncation_pair):
    near, far = truncation_pair
    change = far.value - near.value
    assert 0.0 < change < 2e-3 * near.value
    assert change <= near.tail_bound
    assert far.tail_bound == pytest.approx(near.tail_bound / 8, rel=0.1)


def test_energy_quadratic_in_circulation(truncation_pair):
    one = truncation_pair[0].value
    two = kinetic_energy(RingParams(gamma=2.0), solve_profile(2.0), 1e-2).value
    assert two / one == pytest.approx(4.0, rel=1e-3)


def test_energy_grows_as_time_decreases(ev_ladder):
    vals = [ev_ladder[t] for t in sorted(ev_ladder)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_energy_ladder_values(ev_ladder):
    expected = [4.1253, 3.6935, 3.2618, 2.8301, 2.3983]
    assert [ev_ladder[t] for t in SLOPE_TIMES] == pytest.approx(expected, abs=1e-4)


def test_slope_law(setup, ev_ladder):
    params, prof = setup
    slope = energy_slope_fit(params, prof, SLOPE_TIMES, energies=[ev_ladder[t] for t in SLOPE_TIMES])
    assert slope == pytest.approx(-0.5, abs=0.05)


@pytest.mark.slow
def test_slope_law_by_stream_function(setup):
    params, prof = setup
    times = SLOPE_TIMES
    vals = [stream_energy(params, prof, t, n_out=8, n_in=12, n_phi=32) for t in times]
    slope = np.polyfit([math.log(thickness(params, t)) for t in times], vals, 1)[0]
    assert slope == pytest.approx(-0.5, rel=0.1)


@pytest.mark.parametrize("times,match", [
    (SLOPE_TIMES[:4], "at least 5"),
    ((1e-6, 1e-6, 1e-5, 1e-4, 1e-3), "at least 5"),
    ((1e-6, 2e-6, 1e-5, 1e-4, 1e-3), "log-spaced"),
    (tuple(np.logspace(-4, 0, 5)), "L/20"),
    ((-1e-3, 1e-3, 1e-2, 1e-1, 1.0), "positive"),
])
def test_slope_fit_rejects_bad_ladders(setup, times, match):
    params, prof = setup
    with pytest.raises(ValueError, match=match):
        energy_slope_fit(params, prof, times, energies=[0.0] * len(times))


def test_kinetic_energy_input_checks(setup):
    params, prof = setup
    with pytest.raises(ValueError):
        kinetic_energy(params, prof, 1e-2, truncation_radius=5.0)
    with pytest.raises(ValueError):
        kinetic_energy(params, prof, 0.0)


def test_tail_bound_decays_cubically(setup):
    params, prof = setup
    b = [tail_bound(params, prof, 1e-2, R) for R in (10.0, 20.0, 40.0)]
    assert b[0] / b[1] == pytest.approx(8.0, rel=0.1)
    assert b[1] / b[2] == pytest.approx(8.0, rel=0.05)


# ---------------------------------------------------------------------------
# Reynolds energy

def test_reynolds_energy_nonnegative_and_bounded(er_ladder):
    vals = [er_ladder[t] for t in LADDER]
    assert min(vals) >= 0.0
    assert max(vals) / min(vals) <= 10.0


def test_reynolds_energy_quadratic_in_circulation(setup, er_ladder):
    t = 1e-2
    params, prof = RingParams(gamma=2.0), solve_profile(2.0)
    two = reynolds_energy_bound(params, prof, q1_coefficients(params, prof, t), t)
    assert two / er_ladder[t] == pytest.approx(4.0, rel=0.2)


def test_reynolds_share_halves_on_default_ladder(ev_coarse, er_ladder):
    # E_v only gains about 0.58 per decade of t while E_R sits near 2.8, so two decades are not enough
    ratio_big = er_ladder[1e-2] / ev_coarse[1e-2]
    ratio_small = er_ladder[1e-4] / ev_coarse[1e-4]
    assert ratio_small <= 0.5 * ratio_big


def test_reynolds_share_decreases_toward_filament(ev_ladder, ev_coarse, er_ladder):
    ratios = [er_ladder[1e-4] / ev_coarse[1e-4], er_ladder[1e-6] / ev_ladder[1e-6]]
    ratio_big = er_ladder[1e-2] / ev_coarse[1e-2]
    assert ratio_big > ratios[0] > ratios[1]
    assert ratios[1] <= 0.5 * ratio_big


# ---------------------------------------------------------------------------
# reports

def test_total_energy_report(setup, er_ladder):
    params, prof = setup
    t = 1e-2
    rep = total_subsolution_energy(params, prof, q1_coefficients(params, prof, t), t)
    assert rep.E_sub - rep.E_v == pytest.approx(rep.E_R_bound, rel=1e-15)
    assert rep.E_R_bound == pytest.approx(er_ladder[t], rel=1e-12)
    assert rep.E_v > 0 and rep.E_R_bound >= 0
    assert rep.c == thickness(params, t)
    back = EnergyReport.from_json(rep.to_json())
    assert back == rep
    assert json.loads(rep.to_json())["E_sub"] == rep.E_sub


def test_is_decreasing():
    a = EnergyReport(1e-3, 0.03, 3.0, 1.0, 1e-3, 10.0)
    b = EnergyReport(1e-2, 0.1, 2.0, 1.0, 1e-3, 10.0)
    assert is_decreasing([b, a])
    assert not is_decreasing([a, EnergyReport(1e-2, 0.1, 3.5, 1.0, 1e-3, 10.0)])


def test_energy_scan_csv(tmp_path):
    reps = [EnergyReport(1e-3, 0.03, 3.0, 1.0, 1e-3, 10.0), EnergyReport(1e-2, 0.1, 1 / 3, 0.5, 2e-3, 10.0)]
    path = tmp_path / "scan.csv"
    write_energy_scan(path, reps)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,c,E_v,E_R,tail_bound"
    assert float(lines[2].split(",")[2]) == 1 / 3
