"""Kernel representations and kernel calculus: sampling, composition,
iterated kernels, polynomial kernels and mixed-norm operator bounds.

Discretization
--------------
On a grid a kernel is described by *pieces* ``(lo, hi, E)``: on the band
``lo <= t - s <= hi`` the kernel coincides with the matrix ``E`` of samples
of a function that is smooth inside every panel square.  A general or
separable kernel is one piece over the whole line, a Volterra kernel is the
piece ``t - s >= 0`` and a convolution kernel with indicator profile gets one
piece per profile interval.  Integrals over ``s`` then use the grid's
cumulative rows to integrate exactly between the band limits, which keeps
the jump along ``s = t`` (or ``t - s = const``) from spoiling the Gauss rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain_sets import LebesgueSet
from .func_expr import (Const, FuncExpr, all_breakpoints, evaluate, parse_expr,
                        to_text)
from .quadrature import DEFAULT_RULE, Grid, QuadratureRule, build_grid

__all__ = [
    "Kernel",
    "GeneralKernel",
    "SeparableKernel",
    "ConvolutionKernel",
    "VolterraKernel",
    "GridKernel",
    "Piece",
    "Polynomial",
    "eval_kernel",
    "sample_kernel",
    "compose_kernels",
    "iterated_kernel",
    "polynomial_kernel",
    "kernel_norm_bound",
    "kernel_from_spec",
    "kernel_grid",
]

INF = math.inf


@dataclass(frozen=True)
class Piece:
    """Band ``lo <= t - s <= hi`` on which the kernel equals the smooth samples ``E``."""

    lo: float
    hi: float
    E: np.ndarray

    @property
    def is_full(self) -> bool:
        return self.lo == -INF and self.hi == INF

    @property
    def is_lower(self) -> bool:
        return self.lo == 0.0 and self.hi == INF


def _as_expr(e) -> FuncExpr:
    if isinstance(e, FuncExpr):
        return e
    if isinstance(e, (int, float)):
        return Const(float(e))
    return parse_expr(str(e))


def _as_set(g) -> LebesgueSet | None:
    if g is None or isinstance(g, LebesgueSet):
        return g
    return LebesgueSet.from_json(g)


class Kernel:
    """Base class.  ``G`` is the default integration set of the operator."""

    G: LebesgueSet | None = None

    def evaluate(self, t, s):
        raise NotImplementedError

    def __call__(self, t, s):
        return self.evaluate(t, s)

    def breakpoints_t(self) -> list[float]:
        return []

    def breakpoints_s(self) -> list[float]:
        return []

    def band_breaks(self) -> list[float]:
        """Values of ``t - s`` where the kernel may jump."""
        return []

    def pieces(self, grid: Grid) -> list[Piece]:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def _spec_G(self, d):
        if self.G is not None:
            d["G"] = self.G.to_json()
        return d


class GeneralKernel(Kernel):
    """Kernel given by one expression in ``t`` and ``s``."""

    def __init__(self, expr, G=None):
        self.expr = _as_expr(expr)
        self.G = _as_set(G)

    def evaluate(self, t, s):
        return evaluate(self.expr, t, s)

    def breakpoints_t(self):
        return all_breakpoints(self.expr, "t")

    def breakpoints_s(self):
        return all_breakpoints(self.expr, "s")

    def pieces(self, grid):
        P = grid.points
        E = evaluate(self.expr, P[:, None], P[None, :]) * np.ones((P.size, P.size))
        return [Piece(-INF, INF, E)]

    def to_spec(self):
        return self._spec_G({"type": "general", "expr": to_text(self.expr)})

    def __repr__(self):
        return f"GeneralKernel({to_text(self.expr)!r})"


class SeparableKernel(Kernel):
    """``left(t) * right(s)``; both factors are written in the variable ``t``."""

    def __init__(self, left, right, G=None):
        self.left = _as_expr(left)
        self.right = _as_expr(right)
        self.G = _as_set(G)

    def evaluate(self, t, s):
        return evaluate(self.left, t) * evaluate(self.right, s)

    def breakpoints_t(self):
        return all_breakpoints(self.left, "t")

    def breakpoints_s(self):
        return all_breakpoints(self.right, "t")

    def pieces(self, grid):
        P = grid.points
        a = evaluate(self.left, P) * np.ones(P.size)
        c = evaluate(self.right, P) * np.ones(P.size)
        return [Piece(-INF, INF, np.outer(a, c))]

    def to_spec(self):
        return self._spec_G({"type": "separable", "a": to_text(self.left),
                             "c": to_text(self.right)})

    def __repr__(self):
        return f"SeparableKernel({to_text(self.left)!r}, {to_text(self.right)!r})"


class ConvolutionKernel(Kernel):
    """``profile(t - s)``; with ``one_sided`` the kernel vanishes for ``t - s < 0``."""

    def __init__(self, profile, one_sided: bool = False, G=None):
        self.profile = _as_expr(profile)
        self.one_sided = bool(one_sided)
        self.G = _as_set(G)

    def evaluate(self, t, s):
        u = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
        v = evaluate(self.profile, u)
        if self.one_sided:
            v = v * (u >= 0)
        return v

    def band_breaks(self):
        b = all_breakpoints(self.profile, "t")
        if self.one_sided:
            b = sorted(set(b) | {0.0})
        return b

    def pieces(self, grid):
        P = grid.points
        U = P[:, None] - P[None, :]
        cuts = [-INF] + self.band_breaks() + [INF]
        out = []
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if self.one_sided and hi <= 0.0:
                continue
            if math.isinf(lo) and math.isinf(hi):
                ref = 0.0
            elif math.isinf(lo):
                ref = hi - 1.0
            elif math.isinf(hi):
                ref = lo + 1.0
            else:
                ref = 0.5 * (lo + hi)
            E = evaluate(self.profile, U, frozen={"t": ref}) * np.ones(U.shape)
            if np.any(E != 0.0):
                out.append(Piece(lo, hi, E))
        return out

    def to_spec(self):
        return self._spec_G({"type": "convolution", "profile": to_text(self.profile),
                             "one_sided": self.one_sided})

    def __repr__(self):
        return f"ConvolutionKernel({to_text(self.profile)!r}, one_sided={self.one_sided})"


class VolterraKernel(Kernel):
    """``inner(t, s) * [gamma <= s <= t]``."""

    def __init__(self, inner: Kernel, gamma: float = 0.0, G=None):
        if isinstance(inner, VolterraKernel):
            raise ValueError("nested Volterra wrappers are not supported")
        self.inner = inner
        self.gamma = float(gamma)
        self.G = _as_set(G)

    def evaluate(self, t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return self.inner.evaluate(t, s) * ((s <= t) & (s >= self.gamma))

    def breakpoints_t(self):
        return sorted(set(self.inner.breakpoints_t()) | {self.gamma})

    def breakpoints_s(self):
        return sorted(set(self.inner.breakpoints_s()) | {self.gamma})

    def band_breaks(self):
        return sorted(set(self.inner.band_breaks()) | {0.0})

    def pieces(self, grid):
        m = (grid.points >= self.gamma).astype(float)[None, :]
        out = []
        for p in self.inner.pieces(grid):
            if p.hi <= 0.0:
                continue
            out.append(Piece(max(p.lo, 0.0), p.hi, p.E * m))
        return out

    def to_spec(self):
        return self._spec_G({"type": "volterra", "gamma": self.gamma,
                             "inner": self.inner.to_spec()})

    def __repr__(self):
        return f"VolterraKernel({self.inner!r}, gamma={self.gamma:g})"


class GridKernel(Kernel):
    """Kernel sampled on the tensor grid ``grid x grid``.

    ``values[i, j]`` is the kernel at ``(t_i, s_j)``.  Internally the kernel
    is a sum of band pieces ``lo <= t - s <= hi``, each carrying samples that
    are smooth across its band edges; compositions and quadrature use them to
    keep variable-limit integrals accurate.  ``triangular`` is the single band
    ``s <= t`` with continuation ``ext``.
    """

    def __init__(self, grid: Grid, values=None, ext=None, triangular: bool = False, G=None,
                 bands: Sequence[Piece] | None = None):
        self.grid = grid
        N = grid.size
        if bands is None:
            values = np.asarray(values, dtype=float)
            if values.shape != (N, N):
                raise ValueError("values must be an N x N matrix on the grid")
            E = values if ext is None else np.asarray(ext, dtype=float)
            bands = [Piece(0.0, INF, E) if triangular else Piece(-INF, INF, E)]
        bands = _merge_bands(bands)
        for pc in bands:
            if pc.E.shape != (N, N):
                raise ValueError("band samples must be N x N matrices on the grid")
        self.bands = tuple(bands)
        self.triangular = len(bands) == 1 and bands[0].is_lower
        self.ext = bands[0].E if len(bands) == 1 else None
        self.values = _band_values(grid, self.bands)
        self.G = _as_set(G)

    @classmethod
    def zeros(cls, grid: Grid) -> "GridKernel":
        Z = np.zeros((grid.size, grid.size))
        return cls(grid, Z, Z, triangular=True)

    @property
    def t_points(self):
        return self.grid.points

    @property
    def s_points(self):
        return self.grid.points

    @property
    def t_weights(self):
        return self.grid.weights

    @property
    def s_weights(self):
        return self.grid.weights

    def evaluate(self, t, s):
        """Values at grid nodes only; other points are not interpolated."""
        P = self.grid.points
        ti = np.searchsorted(P, np.asarray(t, dtype=float))
        si = np.searchsorted(P, np.asarray(s, dtype=float))
        ti = np.clip(ti, 0, P.size - 1)
        si = np.clip(si, 0, P.size - 1)
        if not (np.allclose(P[ti], t, atol=1e-14) and np.allclose(P[si], s, atol=1e-14)):
            raise ValueError("GridKernel can only be evaluated at its grid nodes")
        return self.values[ti, si]

    def pieces(self, grid):
        if grid.key != self.grid.key:
            raise ValueError("GridKernel used on a different grid")
        return list(self.bands)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def _combine(self, other: "GridKernel", a: float, b: float) -> "GridKernel":
        if other.grid.key != self.grid.key:
            raise ValueError("grid kernels live on different grids")
        bands = [Piece(p.lo, p.hi, a * p.E) for p in self.bands] + \
            [Piece(p.lo, p.hi, b * p.E) for p in other.bands]
        return GridKernel(self.grid, G=self.G, bands=bands)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def scaled(self, c: float) -> "GridKernel":
        return GridKernel(self.grid, G=self.G,
                          bands=[Piece(p.lo, p.hi, c * p.E) for p in self.bands])

    def row_masked(self, mask) -> "GridKernel":
        """Kernel multiplied by a 0/1 function of ``t`` (sampled at the nodes)."""
        m = np.asarray(mask, dtype=float)[:, None]
        return GridKernel(self.grid, G=self.G,
                          bands=[Piece(p.lo, p.hi, p.E * m) for p in self.bands])

    def to_spec(self):
        raise ValueError("grid kernels have no JSON spec; dump them as CSV")

    def __repr__(self):
        return f"GridKernel(N={self.grid.size}, bands={len(self.bands)})"


def _merge_bands(bands: Sequence[Piece]) -> list[Piece]:
    """Sum pieces sharing a band; order by band."""
    acc: dict = {}
    for p in bands:
        key = (p.lo, p.hi)
        E = np.asarray(p.E, dtype=float)
        acc[key] = acc[key] + E if key in acc else E
    return [Piece(lo, hi, E) for (lo, hi), E in sorted(acc.items())]


def _band_values(grid: Grid, bands: Sequence[Piece]) -> np.ndarray:
    P = grid.points
    D = P[:, None] - P[None, :]
    out = np.zeros((P.size, P.size))
    for p in bands:
        out += p.E if p.is_full else p.E * ((D >= p.lo) & (D <= p.hi))
    return out


class Polynomial:
    """``F(z) = sum_j coeffs[j] z^j``; trailing zero coefficients are stripped."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[float]):
        c = [float(v) for v in coeffs]
        if not c:
            c = [0.0]
        if any(not math.isfinite(v) for v in c):
            raise ValueError("polynomial coefficients must be finite")
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def monomial(cls, delta: float, d: int) -> "Polynomial":
        if int(d) != d or d < 0:
            raise ValueError("degree must be a non-negative integer")
        return cls([0.0] * int(d) + [float(delta)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def delta0(self) -> float:
        return self.coeffs[0]

    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    def as_monomial(self):
        """``(delta, d)`` when F is ``delta z^d`` with ``delta != 0``, else ``None``."""
        nz = [j for j, c in enumerate(self.coeffs) if c != 0.0]
        if len(nz) == 1:
            return self.coeffs[nz[0]], nz[0]
        return None

    def __call__(self, z):
        out = np.zeros_like(np.asarray(z, dtype=float)) if not np.isscalar(z) else 0.0
        for c in reversed(self.coeffs):
            out = out * z + c
        return out

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({list(self.coeffs)})"


# ------------------------------------------------------------------ grids

def kernel_grid(kernels: Sequence[Kernel], sets: Sequence[LebesgueSet],
                rule: QuadratureRule = DEFAULT_RULE, extra: Sequence[float] = ()) -> Grid:
    """Shared grid over the hull of ``sets`` aligned with every kernel breakpoint."""
    hull = LebesgueSet.empty()
    for s in sets:
        if s is not None:
            hull = hull | s
    if hull.is_empty:
        raise ValueError("empty domain")
    if not hull.is_bounded:
        raise ValueError("unbounded domain requires a truncation window")
    hull = hull.hull()
    bps = list(extra)
    for s in sets:
        if s is not None:
            bps.extend(s.endpoints())
    for k in kernels:
        if isinstance(k, GridKernel):
            bps.extend(k.grid.boundaries())
            continue
        bps.extend(k.breakpoints_t())
        bps.extend(k.breakpoints_s())
    return build_grid(hull, bps, rule)


def _resolve_grid(kernels, sets, rule, grid):
    for k in kernels:
        if isinstance(k, GridKernel):
            if grid is not None and grid.key != k.grid.key:
                raise ValueError("GridKernel operand lives on a different grid")
            grid = k.grid
    if grid is None:
        sets = list(sets) + [k.G for k in kernels if k.G is not None]
        grid = kernel_grid(kernels, sets, rule)
    return grid


# ------------------------------------------------------------------ calculus

def eval_kernel(k: Kernel, t: float, s: float) -> float:
    return float(k.evaluate(float(t), float(s)))


def sample_kernel(k: Kernel, grid: Grid) -> GridKernel:
    """Kernel samples on ``grid``, keeping the band structure."""
    if isinstance(k, GridKernel):
        if k.grid.key != grid.key:
            raise ValueError("GridKernel used on a different grid")
        return k
    ps = k.pieces(grid)
    if not ps:
        return GridKernel.zeros(grid)
    return GridKernel(grid, G=k.G, bands=ps)


def band_weights(grid: Grid, lo: float, hi: float) -> np.ndarray:
    """``W[i, l]``: weight of node ``s_l`` in ``int`` over ``t_i - hi <= s <= t_i - lo``."""
    P = grid.points
    if lo == -INF and hi == INF:
        return np.broadcast_to(grid.weights, (P.size, P.size))
    if lo == 0.0 and hi == INF:
        return grid.Q
    return grid.cum_rows(P - lo) - grid.cum_rows(P - hi)


def transposed_band_weights(grid: Grid, lo: float, hi: float) -> np.ndarray:
    """``W[i, l]``: weight of node ``t_i`` in ``int`` over ``s_l + lo <= t <= s_l + hi``."""
    P = grid.points
    if lo == -INF and hi == INF:
        return np.broadcast_to(grid.weights[:, None], (P.size, P.size))
    return (grid.cum_rows(P + hi) - grid.cum_rows(P + lo)).T


def _limit_rows(grid: Grid, c: float, on_t: bool) -> np.ndarray:
    """``cum_rows(t_i - c)`` (limit moving with t) or ``cum_rows(tau_j + c)``."""
    P = grid.points
    return grid.cum_rows(P - c if on_t else P + c)


def _band_compose(pl: Piece, pr: Piece, EL: np.ndarray, grid: Grid) -> list[Piece]:
    """Compose two band pieces into sub-band pieces of ``t - tau``.

    With ``s`` in ``[t - hi_L, t - lo_L]`` and ``[tau + lo_R, tau + hi_R]``
    the limits switch formula only where ``t - tau`` crosses a sum of band
    edges.  On each sub-band the signed integral between the active limits is
    sampled everywhere, which continues it smoothly across the sub-band edges.
    """
    lo, hi = pl.lo + pr.lo, pl.hi + pr.hi
    cuts = {pl.hi + pr.lo, pl.lo + pr.hi}
    cuts = sorted(c for c in cuts if math.isfinite(c) and lo < c < hi)
    edges = [lo] + cuts + [hi]
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if math.isinf(a) and math.isinf(b):
            d = 0.0
        elif math.isinf(a):
            d = b - 1.0
        elif math.isinf(b):
            d = a + 1.0
        else:
            d = 0.5 * (a + b)
        # lower limit max(t - hi_L, tau + lo_R); upper min(t - lo_L, tau + hi_R)
        low_t = d - pl.hi >= pr.lo
        up_t = d - pl.lo <= pr.hi
        E = np.zeros_like(EL)
        for on_t, c, sign in ((up_t, pl.lo if up_t else pr.hi, 1.0),
                              (low_t, pl.hi if low_t else pr.lo, -1.0)):
            C = _limit_rows(grid, c, on_t)
            if on_t:
                E += sign * ((C * EL) @ pr.E)
            else:
                E += sign * (EL @ (C.T * pr.E))
        out.append(Piece(a, b, E))
    return out


def compose_pieces(left: Sequence[Piece], right: Sequence[Piece], grid: Grid,
                   mid_mask: np.ndarray) -> GridKernel:
    """``int_mid kL(t, s) kR(s, tau) ds`` from piece lists on a common grid."""
    P = grid.points
    m = np.asarray(mid_mask, dtype=float)
    out: list[Piece] = []
    for pl in left:
        EL = pl.E * m[None, :]
        for pr in right:
            if pl.is_full and pr.is_full:
                out.append(Piece(-INF, INF, (EL * grid.weights[None, :]) @ pr.E))
            elif pl.is_full:
                # s in [tau + lo_R, tau + hi_R]
                C = grid.cum_rows(P + pr.hi) - grid.cum_rows(P + pr.lo)
                out.append(Piece(-INF, INF, EL @ (C.T * pr.E)))
            elif pr.is_full:
                C = band_weights(grid, pl.lo, pl.hi)
                out.append(Piece(-INF, INF, (C * EL) @ pr.E))
            else:
                out.extend(_band_compose(pl, pr, EL, grid))
    if not out:
        return GridKernel.zeros(grid)
    return GridKernel(grid, bands=out)


def compose_kernels(kLeft: Kernel, G_mid: LebesgueSet, kRight: Kernel,
                    rule: QuadratureRule = DEFAULT_RULE, grid: Grid | None = None) -> GridKernel:
    """Nystrom-style composition ``k(t, tau) = int_{G_mid} kLeft(t, s) kRight(s, tau) ds``.

    Outer variables are sampled on the grid nodes and the inner integral
    reuses the grid weights (cumulative rows on variable-limit bands).
    """
    G_mid = _as_set(G_mid)
    if G_mid is None or G_mid.is_empty:
        grid = _resolve_grid([kLeft, kRight], [G_mid] if G_mid else [], rule, grid)
        return GridKernel.zeros(grid)
    if not G_mid.is_bounded:
        raise ValueError("unbounded G_mid requires a truncation window")
    grid = _resolve_grid([kLeft, kRight], [G_mid], rule, grid)
    return compose_pieces(kLeft.pieces(grid), kRight.pieces(grid), grid, grid.mask(G_mid))


def iterated_kernel(k: Kernel, G: LebesgueSet, m: int, rule: QuadratureRule = DEFAULT_RULE,
                    grid: Grid | None = None) -> GridKernel:
    """``k_0 = k`` and ``k_m(t, s) = int_G k(t, tau) k_{m-1}(tau, s) dtau``."""
    if int(m) != m or m < 0:
        raise ValueError("m must be a non-negative integer")
    return _iterates(k, _as_set(G), int(m), rule, grid)[-1]


def _iterates(k, G, m, rule, grid):
    grid = _resolve_grid([k], [G], rule, grid)
    mask = grid.mask(G)
    base = k.pieces(grid)
    out = [sample_kernel(k, grid)]
    for _ in range(m):
        out.append(compose_pieces(base, out[-1].pieces(grid), grid, mask))
    return out


def polynomial_kernel(k: Kernel, G: LebesgueSet, F: Polynomial,
                      rule: QuadratureRule = DEFAULT_RULE, grid: Grid | None = None) -> GridKernel:
    """``F_n(k) = sum_{j=1}^{n} delta_j k_{j-1}``; the constant term is left out."""
    G = _as_set(G)
    grid = _resolve_grid([k], [G], rule, grid)
    n = F.degree
    acc = GridKernel.zeros(grid)
    if n == 0 or all(c == 0.0 for c in F.coeffs[1:]):
        return acc
    its = _iterates(k, G, n - 1, rule, grid)
    for j in range(1, n + 1):
        dj = F.coeffs[j]
        if dj != 0.0:
            acc = acc + its[j - 1].scaled(dj)
    return acc


# ------------------------------------------------------------------ norm bounds

def norm_bound_from_pieces(pieces: Sequence[Piece], grid: Grid, x_mask, g_mask,
                           p: float) -> float:
    """Mixed-norm bound of a discretized kernel restricted to ``X x G``.

    ``p = 1``: sup over s of int |k| dt.  ``p = inf``: sup over t of
    int |k| ds.  Otherwise ``(int (int |k|^q ds)^{p/q} dt)^{1/p}``.
    """
    p = float(p)
    if not p >= 1.0:
        raise ValueError("p must be >= 1")
    xm = np.asarray(x_mask, dtype=float)
    gm = np.asarray(g_mask, dtype=float)
    if not pieces or not np.any(xm) or not np.any(gm):
        return 0.0
    if math.isinf(p):
        rows = np.zeros(grid.size)
        for pc in pieces:
            rows += (band_weights(grid, pc.lo, pc.hi) * np.abs(pc.E)) @ gm
        return float(np.max(np.clip(rows, 0, None)[xm > 0]))
    if p == 1.0:
        cols = np.zeros(grid.size)
        for pc in pieces:
            cols += xm @ (transposed_band_weights(grid, pc.lo, pc.hi) * np.abs(pc.E))
        return float(np.max(np.clip(cols, 0, None)[gm > 0]))
    q = p / (p - 1.0)
    rows = np.zeros(grid.size)
    for pc in pieces:
        rows += (band_weights(grid, pc.lo, pc.hi) * np.abs(pc.E) ** q) @ gm
    rows = np.clip(rows, 0, None)
    return float(np.dot(grid.weights * xm, rows ** (p / q)) ** (1.0 / p))


def kernel_norm_bound(k: Kernel, window: Sequence[float], p: float,
                      rule: QuadratureRule = DEFAULT_RULE, grid: Grid | None = None) -> float:
    """Bound ``||k||_{L_p}`` of the operator norm on ``L_p(window)``."""
    if not float(p) >= 1.0:
        raise ValueError("p must be >= 1")
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("kernel_norm_bound needs a finite window")
    W = LebesgueSet.interval(lo, hi)
    if grid is None:
        grid = _resolve_grid([k], [W], rule, None) if isinstance(k, GridKernel) else \
            kernel_grid([k], [W], rule)
    mask = grid.mask(W)
    return norm_bound_from_pieces(k.pieces(grid), grid, mask, mask, p)


# ------------------------------------------------------------------ specs

def kernel_from_spec(spec: dict) -> Kernel:
    """Build a kernel from its JSON description."""
    if not isinstance(spec, dict):
        raise ValueError("kernel spec must be an object")
    kind = spec.get("type")
    G = spec.get("G")
    if kind == "general":
        return GeneralKernel(_req(spec, "expr"), G)
    if kind == "separable":
        return SeparableKernel(_req(spec, "a"), _req(spec, "c"), G)
    if kind == "convolution":
        return ConvolutionKernel(_req(spec, "profile"), bool(spec.get("one_sided", False)), G)
    if kind == "volterra":
        inner = kernel_from_spec(_req(spec, "inner"))
        return VolterraKernel(inner, float(spec.get("gamma", 0.0)), G)
    if kind == "volterra_separable":
        alpha = float(spec.get("alpha", 0.0))
        beta = float(spec.get("beta", 1.0))
        inner = SeparableKernel(_req(spec, "outer"), _req(spec, "inner"))
        return VolterraKernel(inner, alpha, G if G is not None else [[alpha, beta]])
    raise ValueError(f"unknown kernel type {kind!r}")


def _req(spec, key):
    if key not in spec:
        raise ValueError(f"kernel spec of type {spec.get('type')!r} needs field {key!r}")
    return spec[key]
