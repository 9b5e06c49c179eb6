"""Volterra operators and their commutation tests.

Operators have the form ``(Ax)(t) = int_gamma^t k(t, s) x(s) ds`` on
``[alpha, beta]``.  Checkers in this module come in two flavours:

* equivalences (:func:`check_qplane`, :func:`check_both_zero`) whose
  kernel-level verdict is compared with the action-level oracle;
* implications (:func:`check_simple_necessary`,
  :func:`check_simple_sufficient`, :func:`check_commut_sufficient`,
  :func:`check_delta_commut_necessary`), which report the hypothesis and
  the conclusion separately.  A true hypothesis with a false conclusion is
  a ``contradiction``; a false hypothesis gives ``no_conclusion``.

Three-variable conditions are sampled on a tensor of Gauss nodes of a
coarse panel-aligned grid, with product weights as the measure.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .covariance import (DIRECT_ABS_TOL, DIRECT_REL_TOL, DirectResidual, check_nonvanishing,
                         direct_residual)
from .domain_sets import AeTolerance, LebesgueSet, ae_zero
from .func_expr import (Const, FuncExpr, Mul, SimpleFunction, all_breakpoints, evaluate,
                        parse_expr, to_text)
from .kernels import Kernel, Polynomial, SeparableKernel, VolterraKernel, kernel_grid
from .operators import IntegralOperator, apply, apply_power_series, battery, operator_grid
from .quadrature import DEFAULT_RULE, Grid, QuadratureRule, build_grid
from .report import (CONTRADICTION, FAIL, INCONCLUSIVE, NO_CONCLUSION, PASS, CheckReport,
                     ConditionResidual, ConditionResult, agreement_verdict)

__all__ = [
    "SeparableVolterra",
    "TriangularRegion",
    "probe_grid",
    "qplane_parts",
    "reassemble",
    "check_simple_necessary",
    "check_simple_sufficient",
    "check_qplane",
    "check_commut_sufficient",
    "check_delta_commut_necessary",
    "check_both_zero",
]

PROBE_NODES = 4
PROBE_PANELS = 16


def _expr(f) -> FuncExpr:
    return parse_expr(f) if isinstance(f, str) else f


@dataclass(frozen=True)
class SeparableVolterra:
    """``(Ax)(t) = outer(t) int_alpha^t inner(s) x(s) ds`` on ``[alpha, beta]``."""

    outer: FuncExpr
    inner: FuncExpr
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "outer", _expr(self.outer))
        object.__setattr__(self, "inner", _expr(self.inner))
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta) and self.alpha < self.beta):
            raise ValueError("need finite alpha < beta")

    @property
    def domain(self) -> LebesgueSet:
        return LebesgueSet.interval(self.alpha, self.beta)

    def kernel(self) -> VolterraKernel:
        return VolterraKernel(SeparableKernel(self.outer, self.inner), self.alpha, self.domain)

    def operator(self, p: float = 2.0, rule: QuadratureRule = DEFAULT_RULE) -> IntegralOperator:
        return IntegralOperator(self.kernel(), self.domain, p=p, rule=rule)

    @classmethod
    def from_spec(cls, spec: dict) -> "SeparableVolterra":
        if spec.get("type") != "volterra_separable":
            raise ValueError("expected a kernel spec of type 'volterra_separable'")
        for key in ("outer", "inner"):
            if key not in spec:
                raise ValueError(f"volterra_separable spec needs field {key!r}")
        return cls(spec["outer"], spec["inner"], float(spec.get("alpha", 0.0)),
                   float(spec.get("beta", 1.0)))

    def to_spec(self) -> dict:
        return {"type": "volterra_separable", "outer": to_text(self.outer),
                "inner": to_text(self.inner), "alpha": self.alpha, "beta": self.beta}


@dataclass(frozen=True)
class TriangularRegion:
    """``Gamma`` (three variables) or ``Delta`` (two variables) of the qplane test.

    ``Gamma = {gamma_b <= t <= beta, gamma_b <= s <= t, gamma_b <= tau <= t}``
    and ``Delta = [gamma_b, beta] x [gamma_a, gamma_b]``.
    """

    kind: str
    gamma_a: float
    gamma_b: float
    beta: float

    def __post_init__(self):
        if self.kind not in ("Gamma", "Delta"):
            raise ValueError("kind must be 'Gamma' or 'Delta'")
        if not self.gamma_a <= self.gamma_b <= self.beta:
            raise ValueError("need gamma_a <= gamma_b <= beta")

    def measure(self) -> float:
        L = self.beta - self.gamma_b
        if self.kind == "Gamma":
            return L ** 3 / 3.0
        return L * (self.gamma_b - self.gamma_a)

    def mask(self, P: np.ndarray) -> np.ndarray:
        """Membership of node tuples (strict inequalities drop diagonals)."""
        gb = self.gamma_b
        if self.kind == "Gamma":
            T, S, U = P[:, None, None], P[None, :, None], P[None, None, :]
            return (T >= gb) & (T <= self.beta) & (S >= gb) & (S < T) & (U >= gb) & (U < T)
        T, U = P[:, None], P[None, :]
        return (T >= gb) & (T <= self.beta) & (U >= self.gamma_a) & (U <= gb)


# ------------------------------------------------------------------ helpers

def _inner(k) -> Kernel:
    if isinstance(k, VolterraKernel):
        return k.inner
    if isinstance(k, SeparableVolterra):
        return SeparableKernel(k.outer, k.inner)
    return k


def _interval(alpha: float, beta: float) -> LebesgueSet:
    if not (math.isfinite(alpha) and math.isfinite(beta) and alpha < beta):
        raise ValueError("need finite alpha < beta")
    return LebesgueSet.interval(alpha, beta)


def probe_grid(kernels: Sequence[Kernel], alpha: float, beta: float,
               extra: Sequence[float] = ()) -> Grid:
    """Coarse panel-aligned grid whose nodes are tensored for 3-D conditions."""
    rule = QuadratureRule(PROBE_NODES, (beta - alpha) / PROBE_PANELS)
    return kernel_grid(kernels, [_interval(alpha, beta)], rule, extra)


def _samples(k: Kernel, P: np.ndarray) -> np.ndarray:
    return k.evaluate(P[:, None], P[None, :]) * np.ones((P.size, P.size))


def _strict_triangle(P: np.ndarray) -> np.ndarray:
    T, S, U = P[:, None, None], P[None, :, None], P[None, None, :]
    return (U < S) & (S < T)


def _weights3(w: np.ndarray) -> np.ndarray:
    return w[:, None, None] * w[None, :, None] * w[None, None, :]


def _cond3(name: str, region: str, values: np.ndarray, W: np.ndarray, mask: np.ndarray,
           tol: AeTolerance | None, scale: float) -> tuple[ConditionResult, float]:
    meas = float(W[mask].sum())
    if meas <= 0:
        return ConditionResult.skipped(name, region, 0.0), 0.0
    t = tol if tol is not None else AeTolerance.default_for(meas)
    v = ae_zero(values[mask], t, weights=W[mask], scale=scale)
    l2 = float(math.sqrt(np.sum(W[mask] * values[mask] ** 2)))
    return ConditionResult(name, region, v.max_abs, l2, v.violation_measure,
                           v.is_ae_zero, True, meas), meas


def _fn_zero(name: str, f: FuncExpr, alpha: float, beta: float, tol: AeTolerance | None,
             rule: QuadratureRule) -> ConditionResult:
    """``ae_zero`` of a product of factors on ``[alpha, beta]``."""
    D = _interval(alpha, beta)
    grid = build_grid(D, all_breakpoints(f, "t"), rule)
    vals = evaluate(f, grid.points) * np.ones(grid.size)
    t = tol if tol is not None else AeTolerance.default_for(D.measure())
    v = ae_zero(vals, t, weights=grid.weights, scale=float(np.max(np.abs(vals))))
    l2 = float(math.sqrt(np.dot(grid.weights, vals ** 2)))
    return ConditionResult(name, f"{name} on [{alpha:g}, {beta:g}]", v.max_abs, l2,
                           v.violation_measure, v.is_ae_zero, True, D.measure())


def _product(*fs: FuncExpr) -> FuncExpr:
    out = fs[0]
    for f in fs[1:]:
        out = Mul(out, f)
    return out


def _require_simple(fs, alpha, beta):
    for name, f in fs:
        try:
            SimpleFunction.from_expr(f, (alpha, beta))
        except ValueError as exc:
            raise ValueError(f"{name} must be a simple function: {exc}") from None


@dataclass
class _Actions:
    """Sizes of the actions ``ABx`` and ``B F(A) x`` over a battery."""

    ab: float
    bfa: float
    ab_sup: float
    bfa_sup: float
    scale: float

    @property
    def threshold(self) -> float:
        return DIRECT_REL_TOL * self.scale + DIRECT_ABS_TOL

    def to_dict(self) -> dict:
        return {"AB": self.ab, "BFA": self.bfa, "AB_sup": self.ab_sup, "BFA_sup": self.bfa_sup,
                "scale": self.scale, "threshold": self.threshold}


def _actions(A: IntegralOperator, B: IntegralOperator, F: Polynomial, bat) -> _Actions:
    ab = bfa = ab_sup = bfa_sup = 0.0
    nA = A.norm_bound or 0.0
    nB = B.norm_bound or 0.0
    nF = sum(abs(c) * nA ** j for j, c in enumerate(F.coeffs))
    scale = 0.0
    for x in bat:
        w = x.weights
        nx = float(math.sqrt(np.dot(w, x.values ** 2)))
        u = apply(A, apply(B, x)).values
        v = apply(B, apply_power_series(A, F, x)).values
        ab = max(ab, float(math.sqrt(np.dot(w, u * u))) / (1 + nx))
        bfa = max(bfa, float(math.sqrt(np.dot(w, v * v))) / (1 + nx))
        ab_sup = max(ab_sup, float(np.max(np.abs(u))))
        bfa_sup = max(bfa_sup, float(np.max(np.abs(v))))
        scale = max(scale, nB * max(nA, nF) * nx / (1 + nx))
    return _Actions(ab, bfa, ab_sup, bfa_sup, scale)


def _tol_info(tol: AeTolerance | None, rule: QuadratureRule) -> dict:
    d = tol.to_dict() if tol is not None else {"eps_value": 1e-9, "eps_rel": 1e-9,
                                               "eps_measure": "1e-6 * region measure"}
    d.update(rule.to_dict())
    d.update(direct_rel=DIRECT_REL_TOL, direct_abs=DIRECT_ABS_TOL,
             probe_nodes_per_panel=PROBE_NODES, probe_panels=PROBE_PANELS)
    return d


def _oracle_cond(name: str, dr: DirectResidual) -> ConditionResult:
    return ConditionResult(name, "battery actions", dr.max_relative, dr.max_relative, 0.0,
                           dr.holds, True, float("nan"))


def _separable_ops(a, b, c, e, alpha, beta, rule):
    A = SeparableVolterra(a, c, alpha, beta).operator(rule=rule)
    B = SeparableVolterra(b, e, alpha, beta).operator(rule=rule)
    return A, B


def _battery_for(A, B, rule, battery_size, seed):
    grid = operator_grid([A, B], rule)
    return battery(grid, battery_size, seed)


# ------------------------------------------------------------------ implications

def check_simple_necessary(a, b, c, e, F, tol: AeTolerance | None = None,
                           rule: QuadratureRule = DEFAULT_RULE, *, alpha: float = 0.0,
                           beta: float = 1.0, battery_size: int = 10,
                           seed: int = 0) -> CheckReport:
    """If ``AB = B F(A)`` with ``deg F >= 2`` then ``a b c e = 0`` a.e.

    ``A = a(t) int_alpha^t c(s) . ds`` and ``B = b(t) int_alpha^t e(s) . ds``
    with simple ``a, b, c, e``.  The relation is decided by the action-level
    oracle, the support condition by ``ae_zero``.
    """
    t0 = time.perf_counter()
    a, b, c, e = (_expr(f) for f in (a, b, c, e))
    if not isinstance(F, Polynomial):
        F = Polynomial(F)
    if F.degree < 2:
        raise ValueError("polynomial degree must be at least 2")
    _require_simple((("a", a), ("b", b), ("c", c), ("e", e)), alpha, beta)
    A, B = _separable_ops(a, b, c, e, alpha, beta, rule)
    dr = direct_residual(A, B, F, _battery_for(A, B, rule, battery_size, seed))
    support = _fn_zero("abce", _product(a, b, c, e), alpha, beta, tol, rule)
    relation = _oracle_cond("relation", dr)
    notes = []
    if not dr.holds:
        verdict = FAIL
        notes.append("relation does not hold: implication is vacuous")
    elif support.passed:
        verdict = PASS
    else:
        verdict = CONTRADICTION
        notes.append("relation holds but abce is not a.e. zero")
    obs = {"relation_holds": dr.holds, "support_ok": support.passed,
           "direct_residual": dr.to_dict(), "polynomial": list(F.coeffs)}
    return CheckReport("volterra_necessary", [relation, support], verdict, obs,
                       _tol_info(tol, rule), notes, 1000.0 * (time.perf_counter() - t0))


def check_simple_sufficient(a, b, c, e, F, tol: AeTolerance | None = None,
                            rule: QuadratureRule = DEFAULT_RULE, *, alpha: float = 0.0,
                            beta: float = 1.0, battery_size: int = 10,
                            seed: int = 0) -> CheckReport:
    """If ``a e = 0`` and ``b c = 0`` a.e. then ``AB = B F(A) = 0`` (``F(0) = 0``).

    The conclusion is measured on the actions over the battery, relative to
    ``||B|| max(||A||, ||F(A)||)``.
    """
    t0 = time.perf_counter()
    a, b, c, e = (_expr(f) for f in (a, b, c, e))
    if not isinstance(F, Polynomial):
        F = Polynomial(F)
    if F.delta0 != 0.0:
        raise ValueError("polynomial must satisfy F(0) = 0")
    A, B = _separable_ops(a, b, c, e, alpha, beta, rule)
    ae_c = _fn_zero("ae", _product(a, e), alpha, beta, tol, rule)
    bc_c = _fn_zero("bc", _product(b, c), alpha, beta, tol, rule)
    acts = _actions(A, B, F, _battery_for(A, B, rule, battery_size, seed))
    hyp = ae_c.passed and bc_c.passed
    concl = acts.ab <= acts.threshold and acts.bfa <= acts.threshold
    notes = []
    if not hyp:
        verdict = NO_CONCLUSION
        notes.append("hypothesis fails: no assertion is made")
    elif concl:
        verdict = PASS
    else:
        verdict = CONTRADICTION
        notes.append("hypothesis holds but AB or B F(A) is not zero")
    obs = {"hypothesis": hyp, "conclusion": concl, "actions": acts.to_dict(),
           "polynomial": list(F.coeffs)}
    return CheckReport("volterra_sufficient", [ae_c, bc_c], verdict, obs, _tol_info(tol, rule),
                       notes, 1000.0 * (time.perf_counter() - t0))


def check_delta_commut_necessary(a, b, c, e, delta: float, tol: AeTolerance | None = None,
                                 rule: QuadratureRule = DEFAULT_RULE, *, alpha: float = 0.0,
                                 beta: float = 1.0, battery_size: int = 10,
                                 seed: int = 0) -> CheckReport:
    """If ``AB = delta BA != 0`` then ``(delta - 1) a b c e = 0`` a.e.

    Raises
    ------
    ValueError
        If ``delta == 0``, a factor is not simple, or an operator is zero.
    """
    t0 = time.perf_counter()
    if delta == 0:
        raise ValueError("delta must be nonzero")
    a, b, c, e = (_expr(f) for f in (a, b, c, e))
    _require_simple((("a", a), ("b", b), ("c", c), ("e", e)), alpha, beta)
    A, B = _separable_ops(a, b, c, e, alpha, beta, rule)
    if not (check_nonvanishing(A, tol, rule) and check_nonvanishing(B, tol, rule)):
        raise ValueError("operators must be nonzero")
    F = Polynomial([0.0, float(delta)])
    bat = _battery_for(A, B, rule, battery_size, seed)
    dr = direct_residual(A, B, F, bat)
    acts = _actions(A, B, F, bat)
    ab_nonzero = acts.ab > acts.threshold
    antecedent = dr.holds and ab_nonzero
    cons = _fn_zero("(delta-1)abce", _product(Const(float(delta) - 1.0), a, b, c, e),
                    alpha, beta, tol, rule)
    notes = []
    if not antecedent:
        verdict = NO_CONCLUSION
        notes.append("antecedent fails (AB != delta BA or AB = 0): no assertion is made")
    elif cons.passed:
        verdict = PASS
    else:
        verdict = CONTRADICTION
        notes.append("AB = delta BA != 0 but (delta-1)abce is not a.e. zero")
    obs = {"antecedent": antecedent, "relation_holds": dr.holds, "AB_nonzero": ab_nonzero,
           "consequent": cons.passed, "direct_residual": dr.to_dict(),
           "actions": acts.to_dict(), "delta": float(delta)}
    return CheckReport("delta_commut_necessary", [_oracle_cond("relation", dr), cons], verdict,
                       obs, _tol_info(tol, rule), notes, 1000.0 * (time.perf_counter() - t0))


# ------------------------------------------------------------------ AB = delta BA

def _volterra_ops(kA, kB, gamma_a, gamma_b, alpha, beta, rule):
    D = _interval(alpha, beta)
    A = IntegralOperator(VolterraKernel(kA, gamma_a, D), D, rule=rule)
    B = IntegralOperator(VolterraKernel(kB, gamma_b, D), D, rule=rule)
    return A, B


def qplane_parts(kA, kB, gamma_a: float, gamma_b: float, beta: float, *,
                 alpha: float | None = None, rule: QuadratureRule = DEFAULT_RULE) -> dict:
    """Kernels of ``AB`` and ``BA`` split at ``gamma_b`` on a shared grid.

    ``k2_AB`` and ``k2_BA`` are ``int_tau^t`` compositions (used for
    ``gamma_b <= tau <= t``); ``k1_BA`` is ``int_{gamma_b}^t kB kA`` (used
    for ``tau`` in ``[gamma_a, gamma_b]``).  ``k1_AB`` vanishes because the
    inner integral of ``B`` starts at ``gamma_b``.  The matrices hold smooth
    continuations; :func:`reassemble` applies the integration limits.
    """
    kA, kB = _inner(kA), _inner(kB)
    alpha = gamma_a if alpha is None else alpha
    if gamma_a > gamma_b:
        raise ValueError("ordering violation: gamma_a > gamma_b")
    D = _interval(alpha, beta)
    grid = kernel_grid([kA, kB], [D], rule, [gamma_a, gamma_b])
    P = grid.points
    KA, KB = _samples(kA, P), _samples(kB, P)
    Q = grid.Q
    Cb = grid.cum_rows(np.array([gamma_b]))[0]
    k2ab = (Q * KA) @ KB - KA @ (Q.T * KB)
    k2ba = (Q * KB) @ KA - KB @ (Q.T * KA)
    k1ba = ((Q - Cb[None, :]) * KB * (P >= gamma_b)[None, :]) @ KA
    return {"grid": grid, "k1_AB": np.zeros_like(k2ab), "k2_AB": k2ab, "k1_BA": k1ba,
            "k2_BA": k2ba, "gamma_a": gamma_a, "gamma_b": gamma_b}


def reassemble(parts: dict, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(ABx, BAx)`` on the parts' grid from the split kernels."""
    grid = parts["grid"]
    P, w = grid.points, grid.weights
    ga, gb = parts["gamma_a"], parts["gamma_b"]
    Cb = grid.cum_rows(np.array([gb]))[0]
    live = (P >= gb)[:, None]
    # int_{gamma_b}^{t} over tau, with cumulative rows for the variable limit
    R = (grid.Q - Cb[None, :]) * live
    ab = (R * parts["k2_AB"]) @ x
    mid = ((P >= ga) & (P <= gb)).astype(float)
    ba = (R * parts["k2_BA"]) @ x + live[:, 0] * ((parts["k1_BA"] * (w * mid)[None, :]) @ x)
    return ab, ba


def check_qplane(kA, kB, gamma_a: float, gamma_b: float, beta: float, delta: float,
                 tol: AeTolerance | None = None, rule: QuadratureRule = DEFAULT_RULE, *,
                 alpha: float | None = None, battery_size: int = 10,
                 seed: int = 0) -> CheckReport:
    """Pointwise identity on ``Gamma`` plus the integral condition on ``Delta``.

    ``kA`` and ``kB`` are the inner kernels of ``A = int_{gamma_a}^t`` and
    ``B = int_{gamma_b}^t``.  The verdict of the two conditions is compared
    with the action-level residual of ``AB - delta BA``.
    """
    t0 = time.perf_counter()
    if delta == 0:
        raise ValueError("delta must be nonzero")
    if gamma_a > gamma_b:
        raise ValueError("ordering violation: gamma_a > gamma_b")
    alpha = gamma_a if alpha is None else float(alpha)
    if not (alpha <= gamma_a and gamma_b <= beta):
        raise ValueError("need alpha <= gamma_a <= gamma_b <= beta")
    kA, kB = _inner(kA), _inner(kB)
    conds, fields, notes = [], [], []

    # condition 1: pointwise on Gamma
    pg = probe_grid([kA, kB], alpha, beta, [gamma_a, gamma_b])
    P = pg.points
    KA, KB = _samples(kA, P), _samples(kB, P)
    Gam = TriangularRegion("Gamma", gamma_a, gamma_b, beta)
    m3 = Gam.mask(P)
    lhs = KA[:, :, None] * KB[None, :, :]
    rhs = delta * KB[:, :, None] * KA[None, :, :]
    scale = max(float(np.max(np.abs(lhs[m3]), initial=0.0)),
                float(np.max(np.abs(rhs[m3]), initial=0.0)))
    c1, _ = _cond3("condition_1", "Gamma", lhs - rhs, _weights3(pg.weights), m3, tol, scale)
    conds.append(c1)

    # condition 2: int_{gamma_b}^t kB(t, s) kA(s, tau) ds on Delta
    Dl = TriangularRegion("Delta", gamma_a, gamma_b, beta)
    if Dl.measure() > 0:
        parts = qplane_parts(kA, kB, gamma_a, gamma_b, beta, alpha=alpha, rule=rule)
        g = parts["grid"]
        m2 = Dl.mask(g.points)
        R = parts["k1_BA"]
        rows, cols = np.any(m2, axis=1), np.any(m2, axis=0)
        W2 = np.outer(g.weights, g.weights)
        t = tol if tol is not None else AeTolerance.default_for(Dl.measure())
        KBg, KAg = _samples(kB, g.points), _samples(kA, g.points)
        sc = float(np.max(np.abs(KBg))) * float(np.max(np.abs(KAg))) * (beta - gamma_b)
        v = ae_zero(R[m2], t, weights=W2[m2], scale=sc)
        conds.append(ConditionResult("condition_2", "Delta", v.max_abs,
                                     float(math.sqrt(np.sum(W2[m2] * R[m2] ** 2))),
                                     v.violation_measure, v.is_ae_zero, True, Dl.measure()))
        fields.append(ConditionResidual("condition_2", g.points[rows], g.points[cols],
                                        R[np.ix_(rows, cols)]))
    else:
        conds.append(ConditionResult.skipped("condition_2", "Delta", 0.0))

    A, B = _volterra_ops(kA, kB, gamma_a, gamma_b, alpha, beta, rule)
    dr = direct_residual(A, B, Polynomial([0.0, float(delta)]),
                         _battery_for(A, B, rule, battery_size, seed))
    checker = all(c.passed for c in conds)
    verdict = agreement_verdict(checker, dr.holds)
    if verdict == INCONCLUSIVE:
        notes.append("kernel conditions and action-level residual disagree")
    obs = {"direct_residual": dr.to_dict(), "delta": float(delta),
           "probe_nodes": int(pg.size)}
    return CheckReport("qplane", conds, verdict, obs, _tol_info(tol, rule), notes,
                       1000.0 * (time.perf_counter() - t0), fields)


def check_commut_sufficient(kA, kB, lam: float | None = None, tol: AeTolerance | None = None,
                            rule: QuadratureRule = DEFAULT_RULE, *, alpha: float = 0.0,
                            beta: float = 1.0, delta: float = 1.0, battery_size: int = 10,
                            seed: int = 0) -> CheckReport:
    """Sufficient conditions for ``AB = delta BA`` with both integrals from ``alpha``.

    On ``Omega = {kB(t, s) != 0 and kB(s, tau) != 0}`` the kernel ``kA``
    must vanish at both slots or (for ``delta = 1``) equal ``lam * kB`` at
    both slots.  Off ``Omega`` the supports of ``kA(t, s) kB(s, tau)`` and
    ``kA(s, tau) kB(t, s)`` must be null.  All three are sampled on the
    strict triangle ``tau < s < t``, the only part reached by the
    compositions.  ``lam`` is fitted by least squares when omitted.
    """
    t0 = time.perf_counter()
    if delta == 0:
        raise ValueError("delta must be nonzero")
    kA, kB = _inner(kA), _inner(kB)
    pg = probe_grid([kA, kB], alpha, beta)
    P = pg.points
    KA, KB = _samples(kA, P), _samples(kB, P)
    W = _weights3(pg.weights)
    tri = _strict_triangle(P)
    t = tol if tol is not None else AeTolerance.default_for(float(W[tri].sum()))
    thrB = t.eps_value + t.eps_rel * float(np.max(np.abs(KB), initial=0.0))
    nzB = np.abs(KB) > thrB
    omega = tri & nzB[:, :, None] & nzB[None, :, :]
    a1 = np.broadcast_to(KA[:, :, None], W.shape)
    a2 = np.broadcast_to(KA[None, :, :], W.shape)
    b1 = np.broadcast_to(KB[:, :, None], W.shape)
    b2 = np.broadcast_to(KB[None, :, :], W.shape)
    if lam is None:
        if delta == 1.0 and np.any(omega):
            wo = W[omega]
            den = float(np.sum(wo * (b1[omega] ** 2 + b2[omega] ** 2)))
            num = float(np.sum(wo * (a1[omega] * b1[omega] + a2[omega] * b2[omega])))
            lam = num / den if den > 0 else 0.0
        else:
            lam = 0.0
    zero_res = np.maximum(np.abs(a1), np.abs(a2))
    if delta == 1.0:
        prop_res = np.maximum(np.abs(a1 - lam * b1), np.abs(a2 - lam * b2))
        res = np.minimum(zero_res, prop_res)
    else:
        res = zero_res
    sA = float(np.max(np.abs(KA), initial=0.0))
    sB = float(np.max(np.abs(KB), initial=0.0))
    c1, _ = _cond3("omega_condition", "Omega_kB", res, W, omega, tol,
                   max(sA, abs(lam) * sB))
    off = tri & ~omega
    g = a1 * b2
    h = a2 * b1
    c2, _ = _cond3("overlap_g", "triangle minus Omega_kB", g, W, off, tol, sA * sB)
    c3, _ = _cond3("overlap_h", "triangle minus Omega_kB", h, W, off, tol, sA * sB)
    conds = [c1, c2, c3]
    A, B = _volterra_ops(kA, kB, alpha, alpha, alpha, beta, rule)
    dr = direct_residual(A, B, Polynomial([0.0, float(delta)]),
                         _battery_for(A, B, rule, battery_size, seed))
    notes = []
    if not all(c.passed for c in conds):
        verdict = NO_CONCLUSION
        notes.append("not sufficient: no conclusion (the conditions are one-directional)")
    elif dr.holds:
        verdict = PASS
    else:
        verdict = CONTRADICTION
        notes.append("sufficient conditions hold but AB != delta BA")
    obs = {"lambda": float(lam), "direct_residual": dr.to_dict(), "delta": float(delta),
           "omega_measure": float(W[omega].sum()), "probe_nodes": int(pg.size)}
    return CheckReport("commut_sufficient", conds, verdict, obs, _tol_info(tol, rule), notes,
                       1000.0 * (time.perf_counter() - t0))


def check_both_zero(kA, kB, alpha: float = 0.0, beta: float = 1.0,
                    tol: AeTolerance | None = None, rule: QuadratureRule = DEFAULT_RULE, *,
                    battery_size: int = 10, seed: int = 0) -> CheckReport:
    """``AB = BA = 0`` versus null support overlaps on the triangle ``tau < s < t``.

    ``g = kA(t, s) kB(s, tau)`` governs ``AB`` and ``h = kA(s, tau) kB(t, s)``
    governs ``BA``.  The action-level oracle checks ``ABx`` and ``BAx``
    separately, and the report says which side is nonzero.
    """
    t0 = time.perf_counter()
    kA, kB = _inner(kA), _inner(kB)
    pg = probe_grid([kA, kB], alpha, beta)
    P = pg.points
    KA, KB = _samples(kA, P), _samples(kB, P)
    W = _weights3(pg.weights)
    tri = _strict_triangle(P)
    sA = float(np.max(np.abs(KA), initial=0.0))
    sB = float(np.max(np.abs(KB), initial=0.0))
    g = KA[:, :, None] * KB[None, :, :]
    h = KA[None, :, :] * KB[:, :, None]
    cg, _ = _cond3("overlap_g", "tau < s < t", g, W, tri, tol, sA * sB)
    ch, _ = _cond3("overlap_h", "tau < s < t", h, W, tri, tol, sA * sB)
    A, B = _volterra_ops(kA, kB, alpha, alpha, alpha, beta, rule)
    bat = _battery_for(A, B, rule, battery_size, seed)
    acts_ab = _actions(A, B, Polynomial([0.0, 1.0]), bat)
    acts_ba = _actions(B, A, Polynomial([0.0, 1.0]), bat)
    ab_zero = acts_ab.ab <= acts_ab.threshold
    ba_zero = acts_ba.ab <= acts_ba.threshold
    checker = cg.passed and ch.passed
    oracle = ab_zero and ba_zero
    verdict = agreement_verdict(checker, oracle)
    notes = []
    if ab_zero != ba_zero:
        notes.append("one-sided: " + ("AB = 0 but BA != 0" if ab_zero else "BA = 0 but AB != 0"))
    if verdict == INCONCLUSIVE:
        notes.append("support overlaps and action-level check disagree")
    obs = {"AB_zero": ab_zero, "BA_zero": ba_zero, "actions_AB": acts_ab.to_dict(),
           "actions_BA": acts_ba.to_dict(), "probe_nodes": int(pg.size)}
    return CheckReport("both_zero", [cg, ch], verdict, obs, _tol_info(tol, rule), notes,
                       1000.0 * (time.perf_counter() - t0))
