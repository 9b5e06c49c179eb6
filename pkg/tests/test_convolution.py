"""Convolution of profiles, Laplace samples and the convolution checkers."""

import itertools
import math

import numpy as np
import pytest

from conv_cases import COMPACT, PROFILES
from opkernel.convolution import (check_conv_monomial, check_conv_poly,
                                  check_one_sided_monomial, convolve, convolve_at,
                                  convolve_fft, laplace_transform, numeric_support)
from opkernel.domain_sets import LebesgueSet
from opkernel.func_expr import evaluate, parse_expr
from opkernel.kernels import Polynomial
from opkernel.quadrature import lp_norm
from opkernel.report import CONTRADICTION, FAIL, PASS

WINDOW = (-20.0, 20.0)
DOMAIN = LebesgueSet.interval(*WINDOW)


def test_hat_function():
    h = convolve("ind(0,1)", "ind(0,1)")
    v = h.points
    want = np.clip(1 - np.abs(v - 1), 0, None)
    assert np.max(np.abs(h.values - want)) < 1e-14


def test_gaussian_closed_form():
    v = np.linspace(-3, 3, 13)
    got = convolve_at("exp(-t^2)", "exp(-t^2)", v)
    want = math.sqrt(math.pi / 2) * np.exp(-v ** 2 / 2)
    assert np.max(np.abs(got - want)) < 1e-13


def test_zero_profile():
    assert np.all(convolve("0", "exp(-t^2)").values == 0.0)


def test_divergent_truncation_rejected():
    with pytest.raises(ValueError, match="truncation"):
        convolve("1", "exp(-t^2)")


@pytest.mark.parametrize("f, g", list(itertools.combinations(PROFILES, 2)))
def test_commutativity(f, g):
    a, b = convolve(f, g), convolve(g, f)
    scale = max(1.0, float(np.max(np.abs(a.values))))
    assert np.max(np.abs(a.values - b.values)) <= 1e-10 * scale


@pytest.mark.parametrize("f, g", list(itertools.product(PROFILES, repeat=2)))
@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_young_inequality(f, g, p):
    h = convolve(f, g)
    lhs = lp_norm(h, p=p)
    rhs = lp_norm(parse_expr(f), DOMAIN, 1.0) * lp_norm(parse_expr(g), DOMAIN, p)
    assert lhs <= rhs + 1e-9


def test_fft_agrees_with_direct():
    u, fast = convolve_fft("exp(-t^2)", "exp(-2*(t-1)^2)", n=8192)
    inner = np.abs(u) < 10
    direct = convolve_at("exp(-t^2)", "exp(-2*(t-1)^2)", u[inner])
    assert np.max(np.abs(fast[inner] - direct)) < 1e-12


def test_fft_rejects_indicators():
    with pytest.raises(ValueError):
        convolve_fft("ind(0,1)", "exp(-t^2)")


@pytest.mark.parametrize("f, g", list(itertools.combinations(COMPACT, 2)))
def test_titchmarsh_support_additivity(f, g):
    h = convolve(f, g)
    sh = numeric_support(h)
    fb = _support(f)
    gb = _support(g)
    width = h.grid.max_panel_width()
    assert abs(sh[0] - (fb[0] + gb[0])) <= width
    assert abs(sh[1] - (fb[1] + gb[1])) <= width


def _support(expr):
    x = np.linspace(-20, 20, 400_001)
    nz = np.nonzero(np.abs(evaluate(parse_expr(expr), x) * np.ones(x.size)) > 0)[0]
    return x[nz[0]], x[nz[-1]]


def test_laplace_of_indicator():
    lg = laplace_transform("ind(0,1)", [-1.0, 0.5, 2.0])
    s = lg.s_points
    assert np.allclose(lg.values, (1 - np.exp(-s)) / s, atol=1e-14)
    assert lg.converged.all()


def test_laplace_marks_divergence():
    lg = laplace_transform("exp(-t)*ind(0,100)", [-2.0, 0.0, 1.0])
    assert math.isnan(lg.values[0])
    assert lg.converged[1] and lg.converged[2]


def test_conv_poly_identity_commutes():
    rep = check_conv_poly("exp(-t^2)", "exp(-2*(t-1)^2)", Polynomial([0.0, 1.0]))
    assert rep.verdict == PASS


def test_conv_poly_square_fails():
    rep = check_conv_poly("exp(-t^2)", "exp(-2*(t-1)^2)", Polynomial([0.0, 0.0, 1.0]))
    assert rep.verdict == FAIL


def test_conv_poly_needs_vanishing_constant():
    with pytest.raises(ValueError):
        check_conv_poly("exp(-t^2)", "exp(-t^2)", Polynomial([1.0, 1.0]))


@pytest.mark.parametrize("f, g", list(itertools.combinations(COMPACT, 2)))
def test_conv_monomial_fails_for_compact_pairs(f, g):
    assert check_conv_monomial(f, g, 1.0, 2).verdict == FAIL


def test_conv_monomial_zero_profile_passes():
    assert check_conv_monomial("0", "ind(0,1)", 1.0, 2).verdict == PASS


def test_one_sided_nondegenerate_fails():
    rep = check_one_sided_monomial("ind(0,1)", "ind(0,1)", 1.0, 2)
    assert rep.verdict == FAIL


def test_one_sided_degenerate_passes():
    assert check_one_sided_monomial("ind(0,1)", "0", 1.0, 2).verdict == PASS


def test_one_sided_rejects_negative_support():
    with pytest.raises(ValueError):
        check_one_sided_monomial("ind(-1,1)", "ind(0,1)", 1.0, 2)


def test_one_sided_verdict_never_contradicts_on_fixtures():
    for f in ("ind(0,1)", "exp(-t)*ind(0,20)", "t*ind(0,2)"):
        assert check_one_sided_monomial(f, "ind(0,1)", 1.0, 2).verdict != CONTRADICTION
