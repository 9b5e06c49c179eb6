"""Panel-aligned composite Gauss-Legendre quadrature.

Every integral in the package goes through a :class:`Grid`.  Panels never
straddle a registered breakpoint, so integrands that are smooth between
breakpoints converge at the Gauss-Legendre rate.  Besides the usual weights
a grid offers *cumulative rows*: for any ``y`` the row ``C(y)`` satisfies
``sum_l C(y)[l] f(x_l) ~= int_{start}^{y} f``, using exact integrals of the
panel's Lagrange basis for the partial panel.  Variable-limit (Volterra)
integrals therefore keep spectral accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial import legendre as npleg

from .domain_sets import LebesgueSet
from .func_expr import FuncExpr, all_breakpoints, evaluate

__all__ = [
    "QuadratureRule",
    "Grid",
    "GridFunction",
    "build_grid",
    "integrate",
    "inner_product",
    "lp_norm",
    "DEFAULT_RULE",
]

DEFAULT_PANELS = 32
MERGE_TOL = 1e-13


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule.

    ``max_panel_width=None`` means ``(hull width) / 32`` for whatever
    domain the rule is applied to.
    """

    nodes_per_panel: int = 12
    max_panel_width: float | None = None

    def __post_init__(self):
        if not isinstance(self.nodes_per_panel, (int, np.integer)) or self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be an integer >= 2")
        w = self.max_panel_width
        if w is not None and not (math.isfinite(w) and w > 0):
            raise ValueError("max_panel_width must be a positive finite number")

    def width_for(self, hull_width: float) -> float:
        if self.max_panel_width is not None:
            return float(self.max_panel_width)
        return hull_width / DEFAULT_PANELS if hull_width > 0 else 1.0

    def refined(self, factor: int = 2) -> "QuadratureRule":
        return QuadratureRule(self.nodes_per_panel * factor, self.max_panel_width)

    def to_dict(self) -> dict:
        return {"nodes_per_panel": int(self.nodes_per_panel),
                "max_panel_width": self.max_panel_width}


DEFAULT_RULE = QuadratureRule()


@lru_cache(maxsize=64)
def _reference(n: int):
    """Gauss nodes/weights on [-1, 1] and Legendre coefficients of the Lagrange basis."""
    xi, w = npleg.leggauss(n)
    m = np.arange(n)
    P = npleg.legvander(xi, n - 1)          # P[k, m] = P_m(xi_k)
    # l_k(x) = sum_m coef[m, k] P_m(x), exact because Gauss integrates l_k P_m
    coef = (P * w[:, None]).T * ((2 * m + 1) / 2.0)[:, None]
    return xi, w, coef


def _partial_basis_integrals(n: int, eta: np.ndarray) -> np.ndarray:
    """``int_{-1}^{eta} l_k`` for every node ``k``; returns shape (len(eta), n)."""
    _, _, coef = _reference(n)
    eta = np.clip(np.asarray(eta, dtype=float), -1.0, 1.0)
    V = npleg.legvander(eta, n)             # P_0 .. P_n at eta
    I = np.empty((eta.size, n))
    I[:, 0] = eta + 1.0
    for m in range(1, n):
        I[:, m] = (V[:, m + 1] - V[:, m - 1]) / (2 * m + 1)
    return I @ coef


def _dedup(points, tol):
    out = []
    for p in sorted(points):
        if not out or p - out[-1] > tol:
            out.append(p)
    return out


class Grid:
    """Quadrature grid made of panels over a finite :class:`LebesgueSet`."""

    def __init__(self, edges: Sequence[tuple[float, float]], n: int,
                 domain: LebesgueSet | None = None):
        self.n = int(n)
        self.panels = np.asarray(edges, dtype=float).reshape(-1, 2)
        if len(self.panels) == 0:
            raise ValueError("grid has no panels")
        xi, w, _ = _reference(self.n)
        a = self.panels[:, 0:1]
        b = self.panels[:, 1:2]
        half = 0.5 * (b - a)
        self.points = (a + half * (xi[None, :] + 1.0)).ravel()
        self.weights = (half * w[None, :]).ravel()
        self.panel_of = np.repeat(np.arange(len(self.panels)), self.n)
        if domain is None:
            domain = LebesgueSet([tuple(p) for p in self.panels])
        self.domain = domain
        self.key = (self.n, self.panels.tobytes())
        self._Q = None
        self._start = np.concatenate([[0.0], np.cumsum(self.weights)])

    def __len__(self):
        return self.points.size

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def lo(self) -> float:
        return float(self.panels[0, 0])

    @property
    def hi(self) -> float:
        return float(self.panels[-1, 1])

    def max_panel_width(self) -> float:
        return float(np.max(self.panels[:, 1] - self.panels[:, 0]))

    def boundaries(self) -> np.ndarray:
        return np.unique(self.panels.ravel())

    def cum_rows(self, y) -> np.ndarray:
        """Rows ``C(y)`` with ``C(y) @ f ~= int_{lo}^{y} f``; clamps outside the grid."""
        y = np.atleast_1d(np.asarray(y, dtype=float)).ravel()
        N, n = self.size, self.n
        out = np.zeros((y.size, N))
        a = self.panels[:, 0]
        b = self.panels[:, 1]
        # panel index containing y (first panel whose right edge >= y)
        p = np.searchsorted(b, y, side="left")
        beyond = p >= len(self.panels)
        p = np.minimum(p, len(self.panels) - 1)
        inside = (~beyond) & (y > a[p])
        full_upto = np.where(beyond, len(self.panels), p)   # panels strictly before
        # full weights of earlier panels via a mask on panel_of
        mask = self.panel_of[None, :] < full_upto[:, None]
        out[mask] = np.broadcast_to(self.weights, out.shape)[mask]
        if np.any(inside):
            idx = np.nonzero(inside)[0]
            pp = p[idx]
            aa, bb = a[pp], b[pp]
            eta = 2.0 * (y[idx] - aa) / (bb - aa) - 1.0
            part = _partial_basis_integrals(n, eta) * (0.5 * (bb - aa))[:, None]
            cols = pp[:, None] * n + np.arange(n)[None, :]
            out[idx[:, None], cols] = part
        return out

    @property
    def Q(self) -> np.ndarray:
        """Cumulative rows evaluated at the grid's own nodes."""
        if self._Q is None:
            self._Q = self.cum_rows(self.points)
            self._Q.setflags(write=False)
        return self._Q

    def mask(self, s: LebesgueSet) -> np.ndarray:
        return s.contains(self.points).astype(float)

    def __repr__(self):
        return (f"Grid(panels={len(self.panels)}, nodes_per_panel={self.n}, "
                f"span=[{self.lo:g}, {self.hi:g}])")


def build_grid(domain: LebesgueSet, breakpts: Sequence[float] = (),
               rule: QuadratureRule = DEFAULT_RULE) -> Grid:
    """Panels over each interval of ``domain``, split at breakpoints and capped in width.

    Raises
    ------
    ValueError
        If the domain is unbounded (truncate it first) or empty.
    """
    if not isinstance(domain, LebesgueSet):
        domain = LebesgueSet.from_json(domain)
    if domain.is_empty:
        raise ValueError("empty domain")
    if not domain.is_bounded:
        raise ValueError("unbounded domain requires a truncation window")
    hull_w = domain.sup - domain.inf
    width = rule.width_for(hull_w)
    tol = MERGE_TOL * max(1.0, hull_w)
    bps = [float(b) for b in breakpts if math.isfinite(b)]
    edges = []
    for lo, hi in domain.intervals:
        cuts = _dedup([lo, hi] + [b for b in bps if lo < b < hi], tol)
        if cuts[-1] < hi:
            cuts[-1] = hi
        for a, b in zip(cuts[:-1], cuts[1:]):
            k = max(1, int(math.ceil((b - a) / width - 1e-9)))
            sub = np.linspace(a, b, k + 1)
            edges.extend(zip(sub[:-1], sub[1:]))
    return Grid(edges, rule.nodes_per_panel, domain)


@dataclass
class GridFunction:
    """Samples of a function at the nodes of a grid."""

    grid: Grid
    values: np.ndarray
    domain: LebesgueSet | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.size,):
            raise ValueError("values do not match the grid")
        if self.domain is None:
            self.domain = self.grid.domain

    @classmethod
    def from_expr(cls, f: FuncExpr, grid: Grid, label: str = "") -> "GridFunction":
        return cls(grid, evaluate(f, grid.points) * np.ones(grid.size), label=label or str(f))

    @classmethod
    def from_callable(cls, fn, grid: Grid, label: str = "") -> "GridFunction":
        return cls(grid, np.asarray(fn(grid.points), dtype=float) * np.ones(grid.size), label=label)

    @property
    def points(self) -> np.ndarray:
        return self.grid.points

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def restricted(self, s: LebesgueSet) -> "GridFunction":
        return GridFunction(self.grid, self.values * self.grid.mask(s), self.domain, self.label)

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _vals(other, self.grid), self.domain)

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _vals(other, self.grid), self.domain)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * _vals(other, self.grid), self.domain)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values, self.domain)


def _vals(other, grid):
    if isinstance(other, GridFunction):
        if other.grid.key != grid.key:
            raise ValueError("grid functions live on different grids")
        return other.values
    return np.asarray(other, dtype=float)


def _grid_for(f, domain: LebesgueSet, rule: QuadratureRule, extra: Sequence[float] = ()):
    bps = list(extra)
    for g in f:
        if isinstance(g, FuncExpr):
            bps.extend(all_breakpoints(g, "t"))
    return build_grid(domain, bps, rule)


def _samples(f, grid: Grid, domain: LebesgueSet) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(f, GridFunction):
        if f.grid.key != grid.key:
            raise ValueError("grid function does not live on the requested grid")
        vals = f.values
    elif isinstance(f, FuncExpr):
        vals = evaluate(f, grid.points) * np.ones(grid.size)
    elif callable(f):
        vals = np.asarray(f(grid.points), dtype=float) * np.ones(grid.size)
    else:
        vals = np.asarray(f, dtype=float) * np.ones(grid.size)
    return vals, grid.weights * grid.mask(domain)


def _resolve(fs, domain, rule):
    """Pick the integration grid: reuse a GridFunction's grid or build one."""
    if domain is not None and not isinstance(domain, LebesgueSet):
        domain = LebesgueSet.from_json(domain)
    grids = [f.grid for f in fs if isinstance(f, GridFunction)]
    if grids:
        g = grids[0]
        if domain is None:
            domain = g.domain
        return g, domain
    if domain is None:
        raise ValueError("a domain is required for symbolic integrands")
    if domain.is_empty:
        return None, domain
    if not domain.is_bounded:
        raise ValueError("unbounded domain requires a truncation window")
    return _grid_for(fs, domain, rule), domain


def integrate(f, domain: LebesgueSet | None = None,
              rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Integral of ``f`` (expression, callable or GridFunction) over ``domain``."""
    grid, domain = _resolve([f], domain, rule)
    if grid is None:
        return 0.0
    v, w = _samples(f, grid, domain)
    return float(np.dot(w, v))


def inner_product(u, v, domain: LebesgueSet | None = None,
                  rule: QuadratureRule = DEFAULT_RULE) -> float:
    """``Q(u, v) = int_domain u v``."""
    grid, domain = _resolve([u, v], domain, rule)
    if grid is None:
        return 0.0
    uu, w = _samples(u, grid, domain)
    vv, _ = _samples(v, grid, domain)
    return float(np.dot(w, uu * vv))


def lp_norm(f, domain: LebesgueSet | None = None, p: float = 2.0,
            rule: QuadratureRule = DEFAULT_RULE) -> float:
    """Grid L_p norm; ``p=inf`` gives the grid maximum (a lower bound of esssup)."""
    p = float(p)
    if not (p >= 1.0):
        raise ValueError("p must be >= 1")
    grid, domain = _resolve([f], domain, rule)
    if grid is None:
        return 0.0
    v, w = _samples(f, grid, domain)
    a = np.abs(v)
    if math.isinf(p):
        inside = w > 0
        return float(a[inside].max()) if np.any(inside) else 0.0
    return float(np.dot(w, a ** p) ** (1.0 / p))
