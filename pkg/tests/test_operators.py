"""Operator application, functional calculus and the sequential-application oracle."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kernel_cases import UNIT, kernel_fixtures, random_trig_kernel
from opkernel.domain_sets import LebesgueSet
from opkernel.kernels import GeneralKernel, Polynomial, VolterraKernel
from opkernel.operators import (IntegralOperator, apply, apply_poly, apply_power_series,
                                battery, compose_ops, operator_grid)
from opkernel.quadrature import GridFunction, build_grid


def _l2(u):
    return float(np.sqrt(np.dot(u.grid.weights, u.values ** 2)))


def test_volterra_of_constant():
    A = IntegralOperator(VolterraKernel(GeneralKernel("1"), 0.0, UNIT), UNIT)
    grid = operator_grid([A])
    y = apply(A, GridFunction(grid, np.ones(grid.size)))
    assert np.max(np.abs(y.values - grid.points)) < 1e-14


def test_output_domain_restriction():
    A = IntegralOperator(GeneralKernel("1", UNIT), UNIT, X=LebesgueSet.interval(0, 0.5))
    grid = operator_grid([A], extra=[0.5])
    y = apply(A, GridFunction(grid, np.ones(grid.size)))
    assert np.all(y.values[grid.points > 0.5] == 0.0)
    assert np.allclose(y.values[grid.points < 0.5], 1.0)


def test_zero_operator_composition():
    Z = IntegralOperator(GeneralKernel("0", UNIT), UNIT)
    A = IntegralOperator(GeneralKernel("t*s+1", UNIT), UNIT)
    assert compose_ops(Z, A).kernel.sup_norm() == 0.0
    assert compose_ops(A, Z).kernel.sup_norm() == 0.0


def test_grid_kernel_on_wrong_grid():
    A = IntegralOperator(GeneralKernel("t", UNIT), UNIT)
    C = compose_ops(A, A)
    other = build_grid(UNIT, [0.37])
    with pytest.raises(ValueError, match="grid"):
        apply(C, GridFunction(other, np.ones(other.size)))


def test_poly_calculus_matches_repeated_application():
    A = IntegralOperator(GeneralKernel("cos(t-s)", UNIT), UNIT)
    grid = operator_grid([A])
    F = Polynomial([0.5, -1.0, 2.0, 0.25])
    for x in battery(grid, 5, seed=1):
        a = apply_poly(A, F, x).values
        b = apply_power_series(A, F, x).values
        assert np.max(np.abs(a - b)) < 1e-12 * (1 + np.max(np.abs(b)))


def test_battery_deterministic_and_sized():
    grid = build_grid(UNIT)
    a = battery(grid, 10, seed=7)
    b = battery(grid, 10, seed=7)
    assert len(a) == 10
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    c = battery(grid, 10, seed=8)
    assert not all(np.array_equal(x.values, y.values) for x, y in zip(a, c))


@pytest.mark.parametrize("seed", range(10))
def test_fubini_consistency_random_pairs(seed):
    rng = np.random.default_rng(seed)
    A = IntegralOperator(GeneralKernel(random_trig_kernel(rng), UNIT), UNIT)
    B = IntegralOperator(GeneralKernel(random_trig_kernel(rng), UNIT), UNIT)
    grid = operator_grid([A, B])
    AB = compose_ops(A, B, grid=grid)
    for x in battery(grid, 20, seed=seed):
        lhs = apply(AB, x).values
        rhs = apply(A, apply(B, x)).values
        err = float(np.sqrt(np.dot(grid.weights, (lhs - rhs) ** 2)))
        assert err <= 1e-9 * _l2(x)


@pytest.mark.parametrize("name, k, G", kernel_fixtures(), ids=[c[0] for c in kernel_fixtures()])
def test_fubini_consistency_fixtures(name, k, G):
    A = IntegralOperator(k, G)
    grid = operator_grid([A])
    AA = compose_ops(A, A, grid=grid)
    for x in battery(grid, 20, seed=0):
        err = _l2(GridFunction(grid, apply(AA, x).values - apply(A, apply(A, x)).values))
        assert err <= 1e-9 * _l2(x)


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_apply_linear(a, b):
    A = IntegralOperator(GeneralKernel("ind(0,0.4)*t + s", UNIT), UNIT)
    grid = operator_grid([A])
    x, y = battery(grid, 2, seed=2)
    lhs = apply(A, x * a + y * b).values
    rhs = a * apply(A, x).values + b * apply(A, y).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_unbounded_integration_set_rejected_for_composition():
    A = IntegralOperator(GeneralKernel("exp(-t^2-s^2)"), LebesgueSet.real_line())
    with pytest.raises(ValueError):
        compose_ops(A, A)
