"""Command-line front end.

::

    opkernel verify --spec FILE [--tol-eps X --tol-measure Y --nodes N
                     --panel-width W --out DIR --seed S --timings]
    opkernel fixture NAME
    opkernel compose --spec FILE --out DIR

Exit codes: 0 pass, 1 fail or contradiction, 2 inconclusive or no
conclusion, 3 input error.  ``OPKERNEL_THREADS`` caps BLAS threads
(0 or unset: library default).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from threadpoolctl import threadpool_limits

from .convolution import (CONV_RULE, ONE_SIDED_WINDOW, TWO_SIDED_WINDOW, check_conv_monomial,
                          check_conv_poly, check_one_sided_monomial)
from .covariance import check_affine, check_covariance, check_monomial
from .domain_sets import AeTolerance, LebesgueSet
from .fixtures import FIXTURES, run_fixture
from .func_expr import ParseError, parse_expr
from .kernels import (ConvolutionKernel, GridKernel, Kernel, Polynomial, VolterraKernel,
                      compose_kernels, iterated_kernel, kernel_from_spec, kernel_norm_bound,
                      polynomial_kernel)
from .operators import IntegralOperator
from .quadrature import DEFAULT_RULE, QuadratureRule
from .report import CheckReport
from .volterra import (SeparableVolterra, check_both_zero, check_commut_sufficient,
                       check_delta_commut_necessary, check_qplane, check_simple_necessary,
                       check_simple_sufficient)

__all__ = ["main", "RunConfig", "cmd_verify", "cmd_fixture", "cmd_compose", "CHECKERS",
           "SpecError"]

EXIT_INPUT = 3

CHECKERS = ("general", "affine", "monomial", "qplane", "conv_poly", "conv_monomial",
            "conv_one_sided", "volterra_necessary", "volterra_sufficient",
            "commut_sufficient", "both_zero", "delta_commut_necessary")
_CONV = ("conv_poly", "conv_monomial", "conv_one_sided")
_OVERRIDE_KEYS = ("eps_value", "eps_rel", "eps_measure", "nodes_per_panel", "max_panel_width")


class SpecError(ValueError):
    """Malformed experiment description."""


@dataclass
class RunConfig:
    command: str
    spec_path: Path | None = None
    overrides: dict = field(default_factory=dict)
    out_dir: Path = Path(".")
    seed: int = 0
    timings: bool = False

    def tolerance(self) -> AeTolerance | None:
        keys = ("eps_value", "eps_rel", "eps_measure")
        if not any(k in self.overrides for k in keys):
            return None
        base = AeTolerance()
        return AeTolerance(*(float(self.overrides.get(k, getattr(base, k))) for k in keys))

    def rule(self, conv: bool = False) -> QuadratureRule:
        base = CONV_RULE if conv else DEFAULT_RULE
        n = self.overrides.get("nodes_per_panel", base.nodes_per_panel)
        w = self.overrides.get("max_panel_width", base.max_panel_width)
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        return QuadratureRule(n, None if w is None else float(w))

    def validate(self):
        """Check every override against the type invariants before computing."""
        self.tolerance()
        self.rule()


# ------------------------------------------------------------------ spec loading

def load_spec(path: Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}") from None
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON at line {exc.lineno}, column {exc.colno} "
                        f"(position {exc.pos}): {exc.msg}") from None
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    return spec


def _kernel_spec(spec: dict, name: str) -> dict:
    kernels = spec.get("kernels")
    if not isinstance(kernels, dict) or name not in kernels:
        raise SpecError(f"spec needs kernels.{name}")
    k = kernels[name]
    if not isinstance(k, dict):
        raise SpecError(f"kernels.{name} must be an object")
    return k


def _polynomial(spec: dict) -> Polynomial:
    coeffs = spec.get("polynomial")
    if not isinstance(coeffs, list) or not coeffs:
        raise SpecError("spec needs a non-empty 'polynomial' coefficient list")
    try:
        vals = [float(c) for c in coeffs]
    except (TypeError, ValueError):
        raise SpecError("polynomial coefficients must be numbers") from None
    if not all(math.isfinite(v) for v in vals):
        raise SpecError("polynomial coefficients must be finite")
    return Polynomial(vals)


def _monomial(F: Polynomial) -> tuple[float, int]:
    m = F.as_monomial()
    if m is None:
        raise SpecError("this checker needs a monomial polynomial delta * z^d")
    return m


def _params(spec: dict) -> dict:
    p = spec.get("params", {})
    if not isinstance(p, dict):
        raise SpecError("'params' must be an object")
    return p


def _window(params: dict, default):
    w = params.get("window", default)
    if w is None:
        return None
    if not (isinstance(w, (list, tuple)) and len(w) == 2):
        raise SpecError("window must be a two-element list")
    return (float(w[0]), float(w[1]))


def _operator(kspec: dict, p: float, rule: QuadratureRule) -> IntegralOperator:
    k = kernel_from_spec(kspec)
    G = k.G
    if G is None:
        raise SpecError("kernel spec needs an integration set 'G'")
    X = LebesgueSet.from_json(kspec["X"]) if "X" in kspec else None
    return IntegralOperator(k, G, X, p=p, rule=rule)


def _profile(kspec: dict):
    if kspec.get("type") != "convolution" or "profile" not in kspec:
        raise SpecError("convolution checkers need kernels of type 'convolution'")
    return parse_expr(kspec["profile"])


def _separable_volterra(kspec: dict) -> SeparableVolterra:
    try:
        return SeparableVolterra.from_spec(kspec)
    except ValueError as exc:
        raise SpecError(str(exc)) from None


def _volterra_inner(kspec: dict) -> tuple[Kernel, float | None]:
    """Inner kernel and its lower limit (when the spec carries one)."""
    if kspec.get("type") == "volterra_separable":
        sv = _separable_volterra(kspec)
        return sv.kernel().inner, sv.alpha
    k = kernel_from_spec(kspec)
    if isinstance(k, VolterraKernel):
        return k.inner, k.gamma
    return k, None


def run_checker(spec: dict, cfg: RunConfig) -> CheckReport:
    """Dispatch a loaded spec to its checker."""
    kind = spec.get("checker")
    if kind not in CHECKERS:
        raise SpecError(f"unknown checker {kind!r}; choose from {', '.join(CHECKERS)}")
    tol = cfg.tolerance()
    rule = cfg.rule(conv=kind in _CONV)
    params = _params(spec)
    seed = cfg.seed
    p = float(spec.get("p", 2.0))
    kA, kB = _kernel_spec(spec, "A"), _kernel_spec(spec, "B")

    if kind in ("general", "affine", "monomial"):
        A, B = _operator(kA, p, rule), _operator(kB, p, rule)
        F = _polynomial(spec)
        window = _window(params, None)
        if kind == "general":
            return check_covariance(A, B, F, tol, rule, window=window, seed=seed)
        if kind == "affine":
            if F.degree > 1:
                raise SpecError("affine checker needs polynomial [delta_0, delta_1]")
            c = list(F.coeffs) + [0.0] * (2 - len(F.coeffs))
            return check_affine(A, B, c[0], c[1], tol, rule, window=window, seed=seed)
        delta, d = _monomial(F)
        return check_monomial(A, B, delta, d, tol, rule, window=window, seed=seed)

    if kind in _CONV:
        fA, fB = _profile(kA), _profile(kB)
        F = _polynomial(spec)
        if kind == "conv_poly":
            w = _window(params, TWO_SIDED_WINDOW)
            s = params.get("s_grid")
            return check_conv_poly(fA, fB, F, tol, rule, window=w, s_grid=s, seed=seed)
        delta, n = _monomial(F)
        if kind == "conv_monomial":
            w = _window(params, TWO_SIDED_WINDOW)
            return check_conv_monomial(fA, fB, delta, n, tol, rule, window=w, seed=seed)
        w = _window(params, ONE_SIDED_WINDOW)
        return check_one_sided_monomial(fA, fB, delta, n, tol, rule, window=w, seed=seed)

    if kind in ("volterra_necessary", "volterra_sufficient", "delta_commut_necessary"):
        sa, sb = _separable_volterra(kA), _separable_volterra(kB)
        if (sa.alpha, sa.beta) != (sb.alpha, sb.beta):
            raise SpecError("both operators must live on the same [alpha, beta]")
        args = (sa.outer, sb.outer, sa.inner, sb.inner)
        kw = dict(alpha=sa.alpha, beta=sa.beta, seed=seed)
        if kind == "delta_commut_necessary":
            delta, d = _monomial(_polynomial(spec))
            if d != 1:
                raise SpecError("delta_commut_necessary needs polynomial [0, delta]")
            return check_delta_commut_necessary(*args, delta, tol, rule, **kw)
        F = _polynomial(spec)
        if kind == "volterra_necessary":
            return check_simple_necessary(*args, F, tol, rule, **kw)
        return check_simple_sufficient(*args, F, tol, rule, **kw)

    iA, ga = _volterra_inner(kA)
    iB, gb = _volterra_inner(kB)
    alpha = float(params.get("alpha", ga if ga is not None else 0.0))
    beta = float(params.get("beta", 1.0))
    if kind == "qplane":
        delta, d = _monomial(_polynomial(spec))
        if d != 1:
            raise SpecError("qplane needs polynomial [0, delta]")
        gamma_a = float(params.get("gamma_a", ga if ga is not None else alpha))
        gamma_b = float(params.get("gamma_b", gb if gb is not None else alpha))
        return check_qplane(iA, iB, gamma_a, gamma_b, beta, delta, tol, rule, alpha=alpha,
                            seed=seed)
    if kind == "commut_sufficient":
        delta = 1.0
        if "polynomial" in spec:
            delta, d = _monomial(_polynomial(spec))
            if d != 1:
                raise SpecError("commut_sufficient needs polynomial [0, delta]")
        lam = params.get("lambda")
        return check_commut_sufficient(iA, iB, None if lam is None else float(lam), tol, rule,
                                       alpha=alpha, beta=beta, delta=delta, seed=seed)
    return check_both_zero(iA, iB, alpha, beta, tol, rule, seed=seed)


# ------------------------------------------------------------------ commands

def _write_report(rep: CheckReport, out: Path, timings: bool):
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(rep.to_json(include_timing=timings) + "\n")
    with open(out / "residuals.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["field", "t", "tau", "value"])
        for row in rep.residual_rows():
            w.writerow(row)


def _input_error(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_INPUT


def cmd_verify(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        spec = load_spec(cfg.spec_path)
        rep = run_checker(spec, cfg)
    except ParseError as exc:
        return _input_error(f"expression error at position {exc.position}: {exc}")
    except (SpecError, ValueError, KeyError, TypeError) as exc:
        return _input_error(str(exc))
    # all writes happen after computation
    _write_report(rep, cfg.out_dir, cfg.timings)
    print(f"{rep.checker}: {rep.verdict}")
    for c in rep.conditions:
        state = "pass" if c.passed else "FAIL"
        if not c.evaluated:
            state = "skipped"
        print(f"  {c.name:<18} {state:<8} sup={c.sup_residual:.3e} "
              f"violation={c.violation_measure:.3e}")
    for n in rep.notes:
        print(f"  note: {n}")
    return rep.exit_code


def cmd_fixture(name: str, seed: int = 0) -> int:
    if name not in FIXTURES:
        return _input_error(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    res = run_fixture(name, seed=seed)
    print(res.table())
    return 0 if res.all_match else 1


def _compose_set(spec: dict, k: Kernel) -> LebesgueSet:
    if "G" in spec:
        S = LebesgueSet.from_json(spec["G"])
    elif k.G is not None:
        S = k.G
    else:
        raise SpecError("compose needs an integration set 'G'")
    if not S.is_bounded:
        w = _window(_params(spec), None)
        if w is None:
            raise SpecError("unbounded set requires params.window")
        S = S.truncate(*w)
    return S


def compose_from_spec(spec: dict, rule: QuadratureRule) -> GridKernel:
    """``k_AB`` (two kernels), ``k_m`` (one kernel and ``m``) or ``F_n(k_A)``."""
    kA = _kernel_spec(spec, "A")
    A = kernel_from_spec(kA)
    G = _compose_set(spec, A)
    kernels = spec.get("kernels", {})
    if "B" in kernels:
        B = kernel_from_spec(_kernel_spec(spec, "B"))
        return compose_kernels(A, G, B, rule)
    if "m" in spec:
        m = spec["m"]
        if not isinstance(m, int) or isinstance(m, bool) or m < 0:
            raise SpecError("m must be a non-negative integer")
        return iterated_kernel(A, G, m, rule)
    if "polynomial" in spec:
        return polynomial_kernel(A, G, _polynomial(spec), rule)
    raise SpecError("compose needs kernels.B, an integer m, or a polynomial")


def cmd_compose(cfg: RunConfig) -> int:
    try:
        cfg.validate()
        spec = load_spec(cfg.spec_path)
        conv = any(isinstance(kernel_from_spec(k), ConvolutionKernel)
                   for k in spec.get("kernels", {}).values() if isinstance(k, dict))
        rule = cfg.rule(conv=conv)
        K = compose_from_spec(spec, rule)
        grid = K.grid
        norms = {str(p): kernel_norm_bound(K, (grid.lo, grid.hi), p, grid=grid)
                 for p in (1.0, 2.0, math.inf)}
    except ParseError as exc:
        return _input_error(f"expression error at position {exc.position}: {exc}")
    except (SpecError, ValueError, KeyError, TypeError) as exc:
        return _input_error(str(exc))
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    P = grid.points
    with open(out / "kernel.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "s", "value"])
        for i, t in enumerate(P):
            for j, s in enumerate(P):
                w.writerow([repr(float(t)), repr(float(s)), repr(float(K.values[i, j]))])
    labels = {"1.0": "1", "2.0": "2", "inf": "inf"}
    data = {"norm_bounds": {labels[k]: v for k, v in norms.items()},
            "grid": {"nodes": int(grid.size), "panels": int(len(grid.panels))}}
    (out / "norms.json").write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    print(f"wrote {out / 'kernel.csv'} ({grid.size}x{grid.size}) and {out / 'norms.json'}")
    for k, v in data["norm_bounds"].items():
        print(f"  norm bound p={k}: {v:.12g}")
    return 0


# ------------------------------------------------------------------ entry point

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opkernel",
                                 description="Kernel algebra and AB = BF(A) verification.")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run a checker described by a JSON spec")
    v.add_argument("--spec", required=True, type=Path)
    v.add_argument("--tol-eps", type=float, help="eps_value and eps_rel for ae tests")
    v.add_argument("--tol-measure", type=float, help="eps_measure for ae tests")
    v.add_argument("--nodes", type=int, help="Gauss nodes per panel")
    v.add_argument("--panel-width", type=float, help="maximum panel width")
    v.add_argument("--out", type=Path, default=Path("."))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--timings", action="store_true", help="include wall time in report.json")
    f = sub.add_parser("fixture", help="run a built-in scenario")
    f.add_argument("name")
    f.add_argument("--seed", type=int, default=0)
    c = sub.add_parser("compose", help="dump a composed or iterated kernel as CSV")
    c.add_argument("--spec", required=True, type=Path)
    c.add_argument("--out", type=Path, default=Path("."))
    c.add_argument("--nodes", type=int)
    c.add_argument("--panel-width", type=float)
    return ap


def _overrides(args) -> dict:
    o = {}
    if getattr(args, "tol_eps", None) is not None:
        o["eps_value"] = o["eps_rel"] = args.tol_eps
    if getattr(args, "tol_measure", None) is not None:
        o["eps_measure"] = args.tol_measure
    if getattr(args, "nodes", None) is not None:
        o["nodes_per_panel"] = args.nodes
    if getattr(args, "panel_width", None) is not None:
        o["max_panel_width"] = args.panel_width
    return o


def _threads() -> int | None:
    raw = os.environ.get("OPKERNEL_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise SpecError(f"OPKERNEL_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise SpecError("OPKERNEL_THREADS must be >= 0")
    return n or None


def main(argv: Sequence[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        limit = _threads()
    except SpecError as exc:
        return _input_error(str(exc))
    with threadpool_limits(limits=limit):
        if args.command == "fixture":
            return cmd_fixture(args.name, args.seed)
        cfg = RunConfig(args.command, args.spec, _overrides(args), args.out,
                        getattr(args, "seed", 0), getattr(args, "timings", False))
        if args.command == "verify":
            return cmd_verify(cfg)
        return cmd_compose(cfg)


if __name__ == "__main__":
    sys.exit(main())
