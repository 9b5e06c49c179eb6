"""Integral operators acting on grid functions.

An operator is discretized on a grid into a matrix ``M`` with
``(Ax)(t_i) ~= sum_l M[i, l] x(s_l)``.  Output samples live on the same grid
as the input (zero outside ``X``), so operator powers are matrix powers.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .domain_sets import LebesgueSet
from .kernels import (GridKernel, Kernel, Polynomial, band_weights, compose_pieces,
                      kernel_grid, norm_bound_from_pieces, polynomial_kernel)
from .quadrature import DEFAULT_RULE, Grid, GridFunction, QuadratureRule

__all__ = [
    "IntegralOperator",
    "apply",
    "apply_poly",
    "apply_power_series",
    "compose_ops",
    "operator_grid",
    "battery",
]


def _as_set(s):
    if s is None or isinstance(s, LebesgueSet):
        return s
    return LebesgueSet.from_json(s)


class IntegralOperator:
    """``(Ax)(t) = int_G k(t, s) x(s) ds`` for ``t`` in ``X``.

    Parameters
    ----------
    kernel : Kernel or GridKernel
    G : LebesgueSet, optional
        Integration set; defaults to ``kernel.G``.
    X : LebesgueSet, optional
        Output domain; defaults to ``G``.
    p : float
        The L_p index, used as metadata for norms.
    rule : QuadratureRule
        Rule used for the norm bound recorded at construction.
    """

    def __init__(self, kernel: Kernel, G=None, X=None, p: float = 2.0,
                 rule: QuadratureRule = DEFAULT_RULE):
        self.kernel = kernel
        G = _as_set(G) if G is not None else kernel.G
        if G is None:
            raise ValueError("operator needs an integration set G")
        self.G = G
        self.X = _as_set(X) if X is not None else G
        self.p = float(p)
        if not self.p >= 1.0:
            raise ValueError("p must be >= 1")
        self._cache: dict = {}
        self.norm_bound = None
        if self.G.is_bounded and self.X.is_bounded:
            grid = kernel.grid if isinstance(kernel, GridKernel) else operator_grid([self], rule)
            self.norm_bound = self.norm_bound_on(grid, self.p)
            if not math.isfinite(self.norm_bound):
                raise ValueError("kernel norm bound is not finite")

    @property
    def is_bounded_domain(self) -> bool:
        return self.G.is_bounded and self.X.is_bounded

    def pieces(self, grid: Grid):
        key = ("pieces", grid.key)
        if key not in self._cache:
            self._cache[key] = self.kernel.pieces(grid)
        return self._cache[key]

    def matrix(self, grid: Grid) -> np.ndarray:
        """Discrete operator on ``grid`` (cached per grid)."""
        key = ("matrix", grid.key)
        if key in self._cache:
            return self._cache[key]
        if isinstance(self.kernel, GridKernel) and self.kernel.grid.key != grid.key:
            raise ValueError("grid/support mismatch: GridKernel lives on another grid")
        span = LebesgueSet.interval(grid.lo, grid.hi)
        if not (self.G.intersect(span).measure() >= self.G.measure() - 1e-12
                or not self.G.is_bounded):
            raise ValueError("grid/support mismatch: grid does not cover G")
        gm = grid.mask(self.G)
        xm = grid.mask(self.X)
        M = np.zeros((grid.size, grid.size))
        for pc in self.pieces(grid):
            M += band_weights(grid, pc.lo, pc.hi) * pc.E
        M *= gm[None, :]
        M *= xm[:, None]
        M.setflags(write=False)
        self._cache[key] = M
        return M

    def norm_bound_on(self, grid: Grid, p: float | None = None) -> float:
        p = self.p if p is None else p
        return norm_bound_from_pieces(self.pieces(grid), grid, grid.mask(self.X),
                                      grid.mask(self.G), p)

    def __repr__(self):
        return f"IntegralOperator({self.kernel!r}, G={self.G!r}, X={self.X!r})"


def operator_grid(ops: Sequence[IntegralOperator], rule: QuadratureRule = DEFAULT_RULE,
                  window: Sequence[float] | None = None, extra: Sequence[float] = ()) -> Grid:
    """Shared grid over the hull of every ``X`` and ``G``, aligned with all breakpoints.

    For unbounded sets a ``window`` must be given; sets are truncated to it.
    """
    for op in ops:
        if isinstance(op.kernel, GridKernel):
            return op.kernel.grid
    sets = []
    for op in ops:
        for s in (op.X, op.G):
            if not s.is_bounded:
                if window is None:
                    raise ValueError("unbounded domain requires a truncation window")
                s = s.truncate(float(window[0]), float(window[1]))
            sets.append(s)
    bps = list(extra)
    if window is not None:
        bps.extend(float(w) for w in window)
    return kernel_grid([op.kernel for op in ops], sets, rule, bps)


def _check_grid(op: IntegralOperator, x: GridFunction):
    if not isinstance(x, GridFunction):
        raise TypeError("x must be a GridFunction")


def apply(op: IntegralOperator, x: GridFunction, rule: QuadratureRule | None = None) -> GridFunction:
    """``(Ax)(t_i)`` on the input grid; zero outside ``X``."""
    _check_grid(op, x)
    M = op.matrix(x.grid)
    return GridFunction(x.grid, M @ x.values, x.domain)


def apply_power_series(op: IntegralOperator, F: Polynomial, x: GridFunction) -> GridFunction:
    """``sum_j delta_j A^j x`` by repeated application (no composed kernels)."""
    M = op.matrix(x.grid)
    acc = F.coeffs[0] * x.values
    cur = x.values
    for c in F.coeffs[1:]:
        cur = M @ cur
        if c != 0.0:
            acc = acc + c * cur
    return GridFunction(x.grid, acc, x.domain)


def apply_poly(op: IntegralOperator, F: Polynomial, x: GridFunction,
               rule: QuadratureRule | None = None) -> GridFunction:
    """``(F(A)x)(t) = delta_0 x(t) + int_G F_n(k)(t, s) x(s) ds``."""
    _check_grid(op, x)
    grid = x.grid
    Fn = polynomial_kernel(op.kernel, op.G, F, grid=grid)
    tmp = IntegralOperator(Fn, op.G, op.X, op.p)
    return GridFunction(grid, F.delta0 * x.values + tmp.matrix(grid) @ x.values, x.domain)


def compose_ops(opLeft: IntegralOperator, opRight: IntegralOperator,
                rule: QuadratureRule = DEFAULT_RULE, grid: Grid | None = None) -> IntegralOperator:
    """Operator with kernel ``int_{G_left} kL(t, s) kR(s, tau) ds`` on ``G_right``."""
    if not opLeft.G.is_bounded:
        raise ValueError("unbounded G_mid requires a truncation window")
    if grid is None:
        grid = operator_grid([opLeft, opRight], rule)
    K = compose_pieces(opLeft.pieces(grid), opRight.pieces(grid), grid, grid.mask(opLeft.G))
    # restrict to the left operator's output domain
    xm = grid.mask(opLeft.X)
    K = K.row_masked(xm)
    return IntegralOperator(K, opRight.G, opLeft.X, opLeft.p)


def battery(grid: Grid, n: int = 10, seed: int = 0, support: LebesgueSet | None = None,
            taper: bool = False) -> list[GridFunction]:
    """Fixed-seed test functions drawn from ``1, t, sin kt, cos kt`` and indicators.

    Indicator endpoints are panel boundaries, so every function is smooth
    inside each panel.  ``support`` restricts the functions (its endpoints
    should be grid boundaries); ``taper`` multiplies by a smooth bump
    centred on the support instead, for problems on truncated windows.
    """
    if n < 1:
        raise ValueError("battery needs at least one function")
    rng = np.random.default_rng(seed)
    P = grid.points
    bounds = grid.boundaries()
    span = LebesgueSet.interval(grid.lo, grid.hi) if support is None else support
    lo, hi = span.inf, span.sup
    width = hi - lo
    inner = bounds[(bounds >= lo) & (bounds <= hi)]
    env = np.ones(P.size)
    if support is not None:
        if taper:
            c, h = 0.5 * (lo + hi), 0.5 * width
            env = np.exp(-((P - c) / (0.35 * h)) ** 2)
        else:
            env = support.contains(P).astype(float)
    out = []
    labels = ["1", "t", "sin", "cos", "ind"]
    for j in range(n):
        kind = labels[j % 5] if j < 5 else labels[int(rng.integers(0, 5))]
        k = int(rng.integers(1, 5))
        u = (P - lo) / width if width > 0 else P
        if kind == "1":
            v = np.ones(P.size)
        elif kind == "t":
            v = u.copy()
        elif kind == "sin":
            v = np.sin(k * math.pi * u)
        elif kind == "cos":
            v = np.cos(k * math.pi * u)
        else:
            if len(inner) >= 2:
                a, b = np.sort(rng.choice(inner, size=2, replace=False))
            else:
                a, b = lo, hi
            v = ((P >= a) & (P <= b)).astype(float)
            kind = f"ind[{a:.6g},{b:.6g}]"
        # mix in a second atom with a random weight for richer coverage
        if j >= 5:
            v = v + rng.uniform(-1, 1) * np.cos(int(rng.integers(1, 4)) * math.pi * u)
        out.append(GridFunction(grid, v * env, label=f"{kind}#{j}"))
    return out
