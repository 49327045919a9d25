import math

import numpy as np
import pytest

from fareygauss import zeta as Z
from fareygauss.cf_dynamics import periodic_cf_value
from fareygauss.series import PowerSeries
from fareygauss.transfer_ops import build_Kzq

GOLD = (math.sqrt(5) - 1) / 2


def test_ZF_first():
    assert Z.partition_Z_F(1) == pytest.approx(1 + GOLD**2, abs=1e-15)
    assert Z.partition_Z_F(1, "symbolic") == pytest.approx(1 + GOLD**2, abs=1e-15)


@pytest.mark.parametrize("n", range(1, 9))
def test_ZF_methods_agree(n):
    assert Z.partition_Z_F(n) == pytest.approx(Z.partition_Z_F(n, "symbolic"), abs=1e-13)


def test_ZF_range():
    with pytest.raises(ValueError):
        Z.partition_Z_F(13)


def test_ZG_single_tuples():
    assert periodic_cf_value([1]).weight == pytest.approx(0.3819660112501051, abs=1e-15)
    assert periodic_cf_value([2]).weight == pytest.approx((math.sqrt(2) - 1) ** 2, abs=1e-15)


def test_ZG1_equals_Xi1():
    a = Z.partition_Z_G(1, 10_000)
    b = Z.grand_Xi(1, 1.0, 10_000, "trace")
    assert abs(a.value - b.value) < 1e-8


def test_trace_first_term():
    x = GOLD
    assert Z.trace_Kzq(1.0, 0, 1).value == pytest.approx(x**2 / (1 + x**2), abs=1e-15)
    assert Z.trace_Kzq(1.0, 0, 1).value == pytest.approx(0.2763932, abs=1e-7)


def test_trace_at_zero():
    assert Z.trace_Kzq(0, 0).value == 0
    assert Z.trace_power(2, 0.0, 0).value == 0


@pytest.mark.parametrize("q", [0, 1])
def test_trace_vs_matrix(m60, q):
    A = build_Kzq(0.5, q, m60).matrix
    assert abs(Z.trace_Kzq(0.5, q, 200).value - np.trace(A)) < 1e-8
    assert abs(Z.trace_power(2, 0.5, q, 200).value - np.trace(A @ A)) < 1e-7


@pytest.mark.parametrize("q", [0, 1])
def test_trace_power_one_is_trace(q):
    a = Z.trace_power(1, 0.7, q, 300).value
    b = Z.trace_Kzq(0.7, q, 300).value
    assert abs(a - b) < 1e-15


def test_tails_decrease_with_kmax():
    tails = [Z.trace_Kzq(1.0, 0, k).tail_bound for k in (10, 100, 1000)]
    assert tails[0] > tails[1] > tails[2] > 0


def test_telescoping_identity():
    k = np.arange(1, 1001, dtype=float)
    x = 2 / (np.sqrt(k * k + 4) + k)
    assert np.max(np.abs(x**2 / (1 + x**2) + x**4 / (1 + x**2) - x**2)) < 1e-15


@pytest.mark.parametrize("z", [0.3, 0.7, 1.0])
@pytest.mark.parametrize("ell", [1, 2, 3])
def test_Xi_routes(z, ell):
    kmax = {1: 2000, 2: 300, 3: 60}[ell]
    a = Z.grand_Xi(ell, z, kmax, "trace")
    b = Z.grand_Xi(ell, z, kmax, "direct")
    assert abs(a.value - b.value) <= a.tail_bound + b.tail_bound


def test_Xi1_half():
    a = Z.grand_Xi(1, 0.5, 200, "trace")
    b = Z.grand_Xi(1, 0.5, 200, "direct")
    assert abs(a.value - b.value) < 1e-10
    assert Z.grand_Xi(1, 0.0, 10).value == 0


def test_Xi2_vs_ZG2():
    a = Z.grand_Xi(2, 1.0, 300, "trace")
    b = Z.partition_Z_G(2, 300)
    assert abs(a.value - b.value) <= a.tail_bound + b.tail_bound


def test_det_examples(m60):
    assert Z.fredholm_det(0, 0.5, rule=m60) == 1
    a = Z.fredholm_det(0.5, 0.5, 0, route="series")
    b = Z.fredholm_det(0.5, 0.5, 0, route="matrix", rule=m60)
    assert abs(a - b) < 1e-8
    assert abs(Z.fredholm_det(1.0, 1.0, 0, rule=m60)) < 1e-6


@pytest.mark.parametrize("s", [0.3, -0.5, 0.6])
@pytest.mark.parametrize("z", [0.2, 0.35, 0.5])
def test_det_routes_grid(m60, s, z):
    a = Z.fredholm_det(s, z, 0, route="series")
    b = Z.fredholm_det(s, z, 0, route="matrix", rule=m60)
    assert abs(a - b) < 1e-7


def test_det_series_outside_disk():
    with pytest.raises(ValueError):
        Z.fredholm_det(2.0, 1.0, 0, route="series")


def test_zeta2_trivial_and_real(m60):
    for s in (0.3, 2.0, -1.5 + 0.5j):
        assert Z.zeta2(s, 0.0, m60) == 1
    for s in (-2.0, 0.5, 0.9, 3.0):
        assert abs(Z.zeta2(s, 1.0, m60).imag) < 1e-12


def test_zeta2_pole_reported(m60):
    with pytest.raises(ArithmeticError):
        Z.zeta2(1.0, 1.0, m60)


def test_log_zeta2_coefficients_vs_ZG(m60):
    c = Z.matrix_log_zeta2_coeffs(1.0, 3, m60)
    for ell, kmax in ((1, 10_000), (2, 1000), (3, 100)):
        zg = Z.partition_Z_G(ell, kmax)
        assert abs(c[ell - 1] - zg.value / ell) <= zg.tail_bound / ell


def test_zeta_F_series_head():
    zf = Z.zeta_F_series(7)
    assert zf[0] == 1
    assert zf[1].real == pytest.approx(1.381966011250105, abs=1e-14)


def test_zeta_factorization():
    lhs = Z.one_minus_z_zeta_F(7)
    rhs = Z.zeta2_at_s1_z_series(7)
    assert lhs.allclose(rhs, rtol=1e-4)


def test_coefficient_identity():
    order = 6
    lhs = PowerSeries([0] + [Z.partition_Z_F(n) / n for n in range(1, order + 1)], order, "z")
    rhs = -PowerSeries([1, -1], order, "z").log()
    for ell in range(1, order + 1):
        rhs = rhs + Z.xi_z_series(ell, order) / ell
    assert lhs.allclose(rhs, rtol=1e-4)


def test_pole_locations(m60):
    s1 = Z.pole_locate(1.0, (0.9, 1.1), m60)
    assert abs(s1 - 1) < 1e-6
    s2 = Z.pole_locate(1.0, (-4.0, -2.5), m60)
    assert s2 == pytest.approx(1 / -0.3036630, rel=1e-6)
    with pytest.raises(ValueError):
        Z.pole_locate(0.0, (0.5, 2.0), m60)


def test_trace_table_csv():
    tab = Z.trace_table(0.5, 2, 100)
    lines = tab.to_csv().splitlines()
    assert lines[0] == "ell,q,z_re,z_im,value_re,value_im,tail"
    assert len(lines) == 5
