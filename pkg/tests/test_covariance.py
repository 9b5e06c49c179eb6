"""Kernel-level checks of AB = B F(A) and their direct-action cross-checks."""

import math

import numpy as np
import pytest

from kernel_cases import UNIT, random_trig_kernel
from opkernel.covariance import (check_affine, check_covariance, check_monomial,
                                 check_nonvanishing, direct_check, direct_residual)
from opkernel.domain_sets import LebesgueSet
from opkernel.fixtures import example1_operators
from opkernel.kernels import GeneralKernel, Polynomial
from opkernel.operators import IntegralOperator, battery, compose_ops, operator_grid
from opkernel.report import FAIL, PASS


def _ops(ka, kb, G=UNIT):
    return IntegralOperator(GeneralKernel(ka, G), G), IntegralOperator(GeneralKernel(kb, G), G)


def test_example1_square_passes():
    A, B = example1_operators()
    rep = check_monomial(A, B, 1.0, 2)
    assert rep.verdict == PASS
    assert [c.evaluated for c in rep.conditions] == [True, False, False]


def test_example1_cube_fails():
    A, B = example1_operators()
    rep = check_monomial(A, B, 1.0, 3)
    assert rep.verdict == FAIL
    assert rep.condition("condition_1").violation_measure > 0.1 * math.pi ** 2


def test_example1_delta_two_fails():
    A, B = example1_operators()
    assert check_monomial(A, B, 2.0, 2).verdict == FAIL


def test_affine_constant_kernels():
    # 1*1 integrated over [0,1] is 1 = delta0 * k_B, so AB = B holds with delta1 = 0
    A, B = _ops("1", "1")
    assert check_affine(A, B, 1.0, 0.0).verdict == PASS
    assert check_affine(A, B, 0.0, 1.0).verdict == PASS
    assert check_affine(A, B, 2.0, 0.0).verdict == FAIL


def test_commuting_polynomial_kernels():
    A, B = _ops("t*s", "3*t*s")
    assert check_covariance(A, B, Polynomial([0.0, 1.0])).verdict == PASS


def test_all_three_regions_evaluated():
    GA, GB = LebesgueSet.interval(0, 1), LebesgueSet.interval(0.5, 2)
    A = IntegralOperator(GeneralKernel("1", GA), GA, X=LebesgueSet.interval(0, 2))
    B = IntegralOperator(GeneralKernel("1", GB), GB, X=LebesgueSet.interval(0, 2))
    rep = check_covariance(A, B, Polynomial([0.0, 1.0]))
    assert all(c.evaluated for c in rep.conditions)
    regions = {c.name: c.region_measure for c in rep.conditions}
    assert regions["condition_1"] == pytest.approx(2 * 0.5)
    assert regions["condition_2"] == pytest.approx(2 * 1.0)
    assert regions["condition_3"] == pytest.approx(2 * 0.5)


def test_monomial_agrees_with_general():
    A, B = example1_operators()
    a = check_monomial(A, B, 1.0, 2)
    g = check_covariance(A, B, Polynomial([0.0, 0.0, 1.0]))
    assert a.verdict == g.verdict
    assert a.conditions[0].sup_residual == pytest.approx(g.conditions[0].sup_residual, abs=1e-15)


def test_monomial_validates_inputs():
    A, B = example1_operators()
    with pytest.raises(ValueError):
        check_monomial(A, B, 0.0, 2)
    with pytest.raises(ValueError):
        check_monomial(A, B, 1.0, 0)


def test_direct_residual_nilpotent_pair():
    # AB = 0 for disjointly supported output/input pieces
    A = IntegralOperator(GeneralKernel("ind(0,0.5)*ind(0,0.5,s)", UNIT), UNIT)
    B = IntegralOperator(GeneralKernel("ind(0.5,1)*ind(0.5,1,s)", UNIT), UNIT)
    grid = operator_grid([A, B], extra=[0.5])
    dr = direct_residual(A, B, Polynomial([0.0, 1.0]), battery(grid, 10))
    assert dr.holds
    dr2 = direct_residual(A, A, Polynomial([0.0, 0.0, 3.0]), battery(grid, 10))
    assert not dr2.holds


def test_nonvanishing():
    A, B = example1_operators()
    grid = operator_grid([A, B])
    BA2 = compose_ops(B, compose_ops(A, A, grid=grid), grid=grid)
    assert check_nonvanishing(BA2, grid=grid)
    Z = IntegralOperator(GeneralKernel("0", UNIT), UNIT)
    assert not check_nonvanishing(Z)


def test_unbounded_sets_need_window():
    R = LebesgueSet.real_line()
    A = IntegralOperator(GeneralKernel("exp(-(t-s)^2)"), R)
    with pytest.raises(ValueError, match="window"):
        check_covariance(A, A, Polynomial([0.0, 1.0]))


def test_unbounded_with_window_runs():
    R = LebesgueSet.real_line()
    A = IntegralOperator(GeneralKernel("exp(-t^2-s^2)"), R)
    rep = check_covariance(A, A, Polynomial([0.0, 1.0]), window=(-6, 6))
    assert rep.verdict == PASS


@pytest.mark.parametrize("seed", range(10))
def test_checker_agrees_with_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    A, B = _ops(random_trig_kernel(rng), random_trig_kernel(rng))
    F = Polynomial([0.0, 1.0]) if seed % 2 else Polynomial([0.0, 0.0, 1.0])
    rep = check_covariance(A, B, F)
    assert rep.overall_pass == direct_check(A, B, F).holds


def test_report_json_stable_and_sorted():
    A, B = example1_operators()
    a = check_monomial(A, B, 1.0, 2).to_json(include_timing=False)
    b = check_monomial(A, B, 1.0, 2).to_json(include_timing=False)
    assert a == b
    assert "wall_time_ms" not in a
    assert "wall_time_ms" in check_monomial(A, B, 1.0, 2).to_json()
