"""Panel-aligned Gauss rules, integrals, inner products and norms."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opkernel.domain_sets import LebesgueSet
from opkernel.func_expr import parse_expr
from opkernel.quadrature import (DEFAULT_RULE, GridFunction, QuadratureRule, build_grid,
                                 inner_product, integrate, lp_norm)

UNIT = LebesgueSet.interval(0, 1)


def test_polynomial_exactness():
    assert integrate(parse_expr("t^5"), UNIT) == pytest.approx(1 / 6, abs=1e-15)


def test_indicator_integral_exact_with_alignment():
    f = parse_expr("ind(0,1/3)*exp(t) + ind(0.7,1)")
    exact = math.exp(1 / 3) - 1 + 0.3
    assert integrate(f, UNIT) == pytest.approx(exact, abs=1e-14)


def test_trig_over_half_period():
    dom = LebesgueSet.interval(0, math.pi)
    assert integrate(parse_expr("sin(t)"), dom) == pytest.approx(2.0, abs=1e-14)
    assert inner_product(parse_expr("cos(t)"), parse_expr("sin(t)"), dom) == \
        pytest.approx(0.0, abs=1e-15)


def test_disjoint_union_domain():
    dom = LebesgueSet([(0, 1), (2, 3)])
    assert integrate(parse_expr("t"), dom) == pytest.approx(0.5 + 2.5, abs=1e-14)


def test_empty_domain_integral_is_zero():
    assert integrate(parse_expr("t"), LebesgueSet.empty()) == 0.0


def test_unbounded_domain_rejected():
    with pytest.raises(ValueError):
        integrate(parse_expr("exp(-t)"), LebesgueSet.from_json([[0, "inf"]]))


def test_grid_respects_breakpoints_and_width():
    g = build_grid(UNIT, [0.3], QuadratureRule(6, 0.25))
    assert 0.3 in set(np.round(g.boundaries(), 15))
    assert g.max_panel_width() <= 0.25 + 1e-15
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_cum_rows_integrate_from_left_end():
    g = build_grid(UNIT, [], DEFAULT_RULE)
    y = np.array([0.0, 0.37, 1.0])
    got = g.cum_rows(y) @ (g.points ** 2)
    assert np.allclose(got, y ** 3 / 3, atol=1e-15)


def test_refinement_stable():
    f = parse_expr("ind(0,0.4)*sin(7*t) + t^3")
    a = integrate(f, UNIT, DEFAULT_RULE)
    b = integrate(f, UNIT, DEFAULT_RULE.refined())
    assert abs(a - b) < 1e-10


def test_invalid_rule():
    with pytest.raises(ValueError):
        QuadratureRule(1)
    with pytest.raises(ValueError):
        QuadratureRule(4, -1.0)


coef = st.floats(-5, 5, allow_nan=False)


@given(coef, coef, st.integers(1, 6), st.integers(1, 6))
def test_linearity(a, b, j, k):
    f, g = parse_expr(f"sin({j}*t)"), parse_expr(f"t^{k}")
    grid = build_grid(UNIT)
    fg = GridFunction.from_expr(f, grid)
    gg = GridFunction.from_expr(g, grid)
    lhs = integrate(fg * a + gg * b)
    assert lhs == pytest.approx(a * integrate(fg) + b * integrate(gg), abs=1e-12)


@given(st.sampled_from([1.5, 2.0, 3.0]), st.integers(1, 5), st.integers(0, 4))
def test_holder(p, j, k):
    q = p / (p - 1)
    grid = build_grid(UNIT)
    u = GridFunction.from_expr(parse_expr(f"cos({j}*t) + ind(0,0.5)"), grid)
    v = GridFunction.from_expr(parse_expr(f"t^{k} - 0.3"), grid)
    lhs = integrate(GridFunction(grid, np.abs(u.values * v.values)))
    assert lhs <= lp_norm(u, p=p) * lp_norm(v, p=q) + 1e-12


def test_lp_norm_inf_is_grid_max():
    grid = build_grid(UNIT)
    u = GridFunction.from_expr(parse_expr("t"), grid)
    assert lp_norm(u, p=math.inf) == pytest.approx(grid.points.max())
