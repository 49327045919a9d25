import math

import mpmath
import numpy as np
import pytest

from fareygauss import measures
from fareygauss.cf_dynamics import periodic_cf_value
from fareygauss.measures import (
    LOG2,
    KaluzaSequence,
    birkhoff_log_tau,
    density_e,
    density_h,
    gauss_cell_mass,
    khinchin_average,
    khinchin_constant,
    orbit_log_tau_average,
    orbit_sn_ratio,
    sn_growth,
)


def test_density_values():
    assert density_e(1.0) == pytest.approx(1 / LOG2, rel=1e-15)
    assert density_e(0.5) == pytest.approx(2 / LOG2, rel=1e-15)
    assert density_h(0.0) == pytest.approx(1 / LOG2, rel=1e-15)
    assert density_h(1.0) == pytest.approx(1 / (2 * LOG2), rel=1e-15)
    with pytest.raises(ValueError):
        density_e(0.0)


def test_h_is_a_probability_density():
    val = mpmath.quad(lambda x: float(density_h(float(x))), [0, 1])
    assert abs(val - 1) < 1e-12


def test_kaluza_sequence():
    ks = KaluzaSequence.build(10_000)
    assert ks.q[0] == pytest.approx(1.0, abs=1e-15)
    assert np.all(np.diff(ks.q) < 0) and np.all(ks.q > 0)
    assert ks.is_kaluza()


def test_nu_relation_telescopes():
    ks = KaluzaSequence.build(200_000)
    inc = ks.increments()
    for n in range(1, 51):
        # q_n = sum_{l > n} (q_{l-1} - q_l), truncated sum plus the exact remainder q_N
        assert abs(ks.q[n] - (inc[n:].sum() + ks.q[-1])) < 1e-12


def test_cell_masses_match_mpmath():
    for k in (1, 2, 10, 1000, 10**6):
        want = mpmath.log(1 + mpmath.mpf(1) / (k * (k + 2))) / mpmath.log(2)
        assert gauss_cell_mass(k) == pytest.approx(float(want), rel=1e-14)


def test_khinchin_average_constant_function():
    r = khinchin_average(lambda k: np.ones_like(k), 10_000, p=0.0)
    assert abs(r.value - 1) <= r.tail_bound + 1e-10


def test_khinchin_average_indicator_of_one():
    r = khinchin_average(lambda k: 1.0 if k == 1 else 0.0, 100)
    assert r.value == pytest.approx(math.log(4 / 3) / LOG2, abs=1e-15)


def test_khinchin_average_of_log_matches_constant():
    r = khinchin_average(np.log, 10**6)
    k = khinchin_constant(10**6)
    assert abs(r.value - k.K_sum) < 1e-12
    assert abs(r.value - khinchin_constant(10**7).K) <= r.tail_bound


def test_khinchin_routes_and_value():
    r = khinchin_constant(10**6)
    assert abs(r.K_sum - r.K_product) < 1e-12
    assert r.exp_K == pytest.approx(2.68545, abs=1e-5)
    assert 0 < r.tail_estimate <= r.tail_bound


def test_khinchin_against_mpmath():
    assert khinchin_constant(10**6).exp_K == pytest.approx(float(mpmath.khinchin), rel=1e-10)


def test_birkhoff_seed_reproducible():
    a = birkhoff_log_tau(3, 20, 2000)
    b = birkhoff_log_tau(3, 20, 2000)
    assert a.to_json() == b.to_json()
    assert birkhoff_log_tau(4, 20, 2000).mean != a.mean


def test_birkhoff_within_three_standard_errors():
    r = birkhoff_log_tau(0, 100, 10_000)
    K = khinchin_constant(10**6).K
    assert abs(r.mean - K) < 3 * r.stderr


def test_periodic_orbit_averages():
    assert orbit_log_tau_average(periodic_cf_value([1]), 1000) == 0.0
    assert orbit_log_tau_average(periodic_cf_value([2]), 1000) == pytest.approx(math.log(2), abs=1e-15)
    # a float start drifts off the golden orbit after a few dozen steps
    assert orbit_log_tau_average((math.sqrt(5) - 1) / 2, 30) == 0.0


def test_sn_ratio_on_periodic_orbits():
    assert orbit_sn_ratio(periodic_cf_value([1]), 1000) == 1.0
    assert orbit_sn_ratio(periodic_cf_value([3]), 1000) == 3.0


def test_sn_growth_medians_increase():
    r = sn_growth(0, 100, 10_000)
    assert r.extra["checkpoints"] == [100, 1000, 10_000]
    assert r.extra["monotone"]


def test_checkpoints():
    assert measures.geometric_checkpoints(5000) == [100, 1000, 5000]
