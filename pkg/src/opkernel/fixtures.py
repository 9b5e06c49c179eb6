"""Built-in worked scenarios with their claimed outcomes.

Each scenario runs end to end and returns rows ``(quantity, claimed,
observed)``.  A mismatch with a claimed outcome is reported, never patched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .convolution import CONV_RULE, check_conv_poly
from .covariance import check_monomial, check_nonvanishing
from .domain_sets import LebesgueSet
from .kernels import GeneralKernel, Polynomial, SeparableKernel
from .operators import (IntegralOperator, apply, apply_power_series, battery, compose_ops,
                        operator_grid)
from .quadrature import DEFAULT_RULE, QuadratureRule
from .report import CheckReport
from .volterra import (SeparableVolterra, check_both_zero, check_simple_necessary,
                       check_simple_sufficient)

__all__ = ["FIXTURES", "FixtureResult", "run_fixture", "example1_operators",
           "VOLTERRA_AB0", "VOLTERRA_COUNTER", "VOLTERRA_SUFFICIENT", "VOLTERRA_BOTHZERO"]

EX1_A = "ind(0,pi)*2/pi*(cos(t)*cos(s)+sin(t)*sin(s)+cos(t)*sin(s))"
EX1_B = "ind(0,pi)*2/pi*(cos(t)*cos(s)+2*sin(t)*sin(s))"

# (a, b, c, e) of A = a(t) int c(s) . ds and B = b(t) int e(s) . ds on [0, 1]
VOLTERRA_AB0 = ("ind(0,0.5)", "ind(0.5,1)", "1", "1")
VOLTERRA_COUNTER = ("ind(0,0.25)-ind(0.75,1)", "ind(0.25,0.75)", "1", "1")
VOLTERRA_SUFFICIENT = ("ind(0,0.25)-ind(0.5,0.75)", "ind(0.5,1)", "ind(0,0.5)",
                       "ind(0.25,0.5)+ind(0.75,1)")
VOLTERRA_BOTHZERO = ("ind(0,0.25)*(t^4+1)-ind(0.5,0.75)", "ind(0.5,1)", "ind(0,0.5)",
                     "ind(0.25,0.5)*(t^2+1)+ind(0.75,1)")


@dataclass
class FixtureResult:
    name: str
    rows: list[tuple[str, object, object]]
    reports: list[CheckReport] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def all_match(self) -> bool:
        return all(_same(c, o) for _, c, o in self.rows)

    def table(self) -> str:
        w = max([len("quantity")] + [len(q) for q, _, _ in self.rows])
        lines = [f"fixture {self.name}",
                 f"{'quantity':<{w}}  {'claimed':<14}{'observed':<14}match"]
        for q, c, o in self.rows:
            lines.append(f"{q:<{w}}  {_fmt(c):<14}{_fmt(o):<14}{'yes' if _same(c, o) else 'NO'}")
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _same(c, o) -> bool:
    return c == o


def example1_operators(rule: QuadratureRule = DEFAULT_RULE):
    G = LebesgueSet.interval(0.0, math.pi)
    A = IntegralOperator(GeneralKernel(EX1_A, G), G, rule=rule)
    B = IntegralOperator(GeneralKernel(EX1_B, G), G, rule=rule)
    return A, B


def _example1(rule, seed) -> FixtureResult:
    A, B = example1_operators(rule)
    rep = check_monomial(A, B, 1.0, 2, rule=rule, seed=seed)
    grid = operator_grid([A, B], rule)
    BA2 = compose_ops(B, compose_ops(A, A, rule, grid), rule, grid)
    nz = check_nonvanishing(BA2, grid=grid)
    return FixtureResult("example1", [("verdict AB = BA^2", "pass", rep.verdict),
                                      ("BA^2 nonzero", True, nz)], [rep],
                         [f"sup |k_(BA^2)| = {BA2.kernel.sup_norm():.12g}"])


def _zero_actions(abce, F: Polynomial, rule, seed):
    """Largest sup-norms of ``ABx`` and ``B F(A) x`` over the battery."""
    a, b, c, e = abce
    A = SeparableVolterra(a, c).operator(rule=rule)
    B = SeparableVolterra(b, e).operator(rule=rule)
    grid = operator_grid([A, B], rule)
    ab = bf = 0.0
    for x in battery(grid, 10, seed):
        ab = max(ab, float(np.max(np.abs(apply(A, apply(B, x)).values))))
        bf = max(bf, float(np.max(np.abs(apply(B, apply_power_series(A, F, x)).values))))
    return ab, bf


def _volterra_ab0(rule, seed) -> FixtureResult:
    F = Polynomial([0.0, 0.0, 1.0])
    rep = check_simple_necessary(*VOLTERRA_AB0, F, rule=rule, seed=seed)
    ab, bf = _zero_actions(VOLTERRA_AB0, F, rule, seed)
    rows = [("AB = 0", True, ab <= 1e-10), ("BA^2 = 0", True, bf <= 1e-10),
            ("relation_holds", True, rep.observations["relation_holds"]),
            ("support_ok", True, rep.observations["support_ok"])]
    notes = [f"max sup|ABx| = {ab:.3g}, max sup|BA^2x| = {bf:.6g} over the battery"]
    return FixtureResult("volterra_ab0", rows, [rep], notes)


def _volterra_counter(rule, seed) -> FixtureResult:
    rep = check_simple_necessary(*VOLTERRA_COUNTER, Polynomial([0.0, 0.0, 1.0]),
                                 rule=rule, seed=seed)
    dr = rep.observations["direct_residual"]["max_relative"]
    rows = [("support_ok", True, rep.observations["support_ok"]),
            ("relation_holds", False, rep.observations["relation_holds"]),
            ("direct residual > 1e-3", True, dr > 1e-3)]
    return FixtureResult("volterra_counterexample", rows, [rep],
                         [f"direct residual = {dr:.12g}"])


def _volterra_sufficient(rule, seed) -> FixtureResult:
    rows, reps = [], []
    for n in (2, 3):
        F = Polynomial.monomial(1.0, n)
        rep = check_simple_sufficient(*VOLTERRA_SUFFICIENT, F, rule=rule, seed=seed)
        reps.append(rep)
        rows.append((f"hypothesis (n={n})", True, rep.observations["hypothesis"]))
        rows.append((f"AB = BA^{n} = 0", True, rep.observations["conclusion"]))
    return FixtureResult("volterra_sufficient", rows, reps)


def _volterra_bothzero(rule, seed) -> FixtureResult:
    a, b, c, e = VOLTERRA_BOTHZERO
    rep = check_both_zero(SeparableKernel(a, c), SeparableKernel(b, e), 0.0, 1.0,
                          rule=rule, seed=seed)
    rows = [("verdict AB = BA = 0", "pass", rep.verdict),
            ("AB = 0", True, rep.observations["AB_zero"]),
            ("BA = 0", True, rep.observations["BA_zero"])]
    return FixtureResult("volterra_bothzero", rows, [rep])


def _conv_commute(rule, seed) -> FixtureResult:
    r = CONV_RULE if rule is DEFAULT_RULE else rule
    rep = check_conv_poly("exp(-t^2)", "exp(-2*(t-1)^2)", Polynomial([0.0, 1.0]), rule=r,
                          seed=seed)
    rows = [("verdict AB = BA", "pass", rep.verdict)]
    return FixtureResult("conv_commute", rows, [rep])


FIXTURES = {
    "example1": _example1,
    "volterra_ab0": _volterra_ab0,
    "volterra_counterexample": _volterra_counter,
    "volterra_sufficient": _volterra_sufficient,
    "volterra_bothzero": _volterra_bothzero,
    "conv_commute": _conv_commute,
}


def run_fixture(name: str, rule: QuadratureRule = DEFAULT_RULE, seed: int = 0) -> FixtureResult:
    """Run a named scenario.

    Raises
    ------
    KeyError
        For an unknown name.
    """
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return FIXTURES[name](rule, seed)
