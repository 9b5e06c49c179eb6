"""Finite unions of closed real intervals, Lebesgue measure and the numeric
almost-everywhere decision used by every checker."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

INF = math.inf

__all__ = [
    "LebesgueSet",
    "OrderedPartition",
    "AeTolerance",
    "AeVerdict",
    "intersect",
    "set_minus",
    "union",
    "measure",
    "ae_zero",
]


def _parse_endpoint(v) -> float:
    if isinstance(v, str):
        key = v.strip().lower()
        if key in ("inf", "+inf", "infinity"):
            return INF
        if key in ("-inf", "-infinity"):
            return -INF
        return float(key)
    return float(v)


def _normalize(pairs: Iterable[Sequence[float]]) -> tuple[tuple[float, float], ...]:
    items = []
    for pair in pairs:
        if len(pair) != 2:
            raise ValueError(f"interval must be a [lo, hi] pair, got {pair!r}")
        lo, hi = _parse_endpoint(pair[0]), _parse_endpoint(pair[1])
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"interval [{lo}, {hi}] has lo > hi")
        # points carry no measure; dropping them keeps the set canonical
        if lo < hi:
            items.append((lo, hi))
    items.sort()
    merged: list[list[float]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((a, b) for a, b in merged)


class LebesgueSet:
    """Finite union of disjoint closed intervals.

    Intervals are kept sorted and merged; degenerate intervals are dropped
    because they have measure zero.  ``-inf``/``inf`` endpoints are allowed
    for sets on the whole line.
    """

    __slots__ = ("_iv",)

    def __init__(self, intervals: Iterable[Sequence[float]] = ()):
        object.__setattr__(self, "_iv", _normalize(intervals))

    def __setattr__(self, name, value):
        raise AttributeError("LebesgueSet is immutable")

    @classmethod
    def interval(cls, lo: float, hi: float) -> "LebesgueSet":
        return cls([(lo, hi)])

    @classmethod
    def empty(cls) -> "LebesgueSet":
        return cls(())

    @classmethod
    def real_line(cls) -> "LebesgueSet":
        return cls([(-INF, INF)])

    @classmethod
    def from_json(cls, data) -> "LebesgueSet":
        """Build from ``[[lo, hi], ...]``; ``"inf"``/``"-inf"`` strings mark sentinels."""
        if not isinstance(data, (list, tuple)):
            raise ValueError("set literal must be a list of [lo, hi] pairs")
        if len(data) == 2 and all(not isinstance(v, (list, tuple)) for v in data):
            data = [data]
        return cls(data)

    def to_json(self) -> list:
        def enc(v):
            if v == INF:
                return "inf"
            if v == -INF:
                return "-inf"
            return v
        return [[enc(a), enc(b)] for a, b in self._iv]

    @property
    def intervals(self) -> tuple[tuple[float, float], ...]:
        return self._iv

    @property
    def is_empty(self) -> bool:
        return not self._iv

    @property
    def is_bounded(self) -> bool:
        return all(math.isfinite(a) and math.isfinite(b) for a, b in self._iv)

    @property
    def inf(self) -> float:
        return self._iv[0][0] if self._iv else INF

    @property
    def sup(self) -> float:
        return self._iv[-1][1] if self._iv else -INF

    def hull(self) -> "LebesgueSet":
        if not self._iv:
            return self
        return LebesgueSet([(self.inf, self.sup)])

    def endpoints(self) -> list[float]:
        out = []
        for a, b in self._iv:
            out.extend((a, b))
        return [v for v in out if math.isfinite(v)]

    def measure(self) -> float:
        return float(sum(b - a for a, b in self._iv))

    def contains(self, x):
        """Vectorized closed membership test."""
        arr = np.asarray(x, dtype=float)
        out = np.zeros(arr.shape, dtype=bool)
        for a, b in self._iv:
            out |= (arr >= a) & (arr <= b)
        return out

    def __contains__(self, x) -> bool:
        return bool(self.contains(x))

    def intersect(self, other: "LebesgueSet") -> "LebesgueSet":
        out = []
        i = j = 0
        A, B = self._iv, other._iv
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if lo < hi:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return LebesgueSet(out)

    def set_minus(self, other: "LebesgueSet") -> "LebesgueSet":
        out = []
        for a, b in self._iv:
            cur = a
            for c, d in other._iv:
                if d <= cur or c >= b:
                    continue
                if c > cur:
                    out.append((cur, c))
                cur = max(cur, d)
                if cur >= b:
                    break
            if cur < b:
                out.append((cur, b))
        return LebesgueSet(out)

    def union(self, other: "LebesgueSet") -> "LebesgueSet":
        return LebesgueSet(self._iv + other._iv)

    def truncate(self, lo: float, hi: float) -> "LebesgueSet":
        return self.intersect(LebesgueSet([(lo, hi)]))

    def __and__(self, other):
        return self.intersect(other)

    def __or__(self, other):
        return self.union(other)

    def __sub__(self, other):
        return self.set_minus(other)

    def __eq__(self, other):
        return isinstance(other, LebesgueSet) and self._iv == other._iv

    def __hash__(self):
        return hash(self._iv)

    def __repr__(self):
        if not self._iv:
            return "LebesgueSet(∅)"
        body = " ∪ ".join(f"[{a:g}, {b:g}]" for a, b in self._iv)
        return f"LebesgueSet({body})"


def intersect(s1: LebesgueSet, s2: LebesgueSet) -> LebesgueSet:
    return s1.intersect(s2)


def set_minus(s1: LebesgueSet, s2: LebesgueSet) -> LebesgueSet:
    return s1.set_minus(s2)


def union(s1: LebesgueSet, s2: LebesgueSet) -> LebesgueSet:
    return s1.union(s2)


def measure(s: LebesgueSet) -> float:
    return s.measure()


class OrderedPartition:
    """Cells covering ``[alpha, beta]`` with ``sup(cell k1) <= inf(cell k2)`` for k1 < k2."""

    __slots__ = ("cells", "alpha", "beta")

    def __init__(self, cells: Sequence[LebesgueSet], alpha: float | None = None,
                 beta: float | None = None):
        cells = tuple(c if isinstance(c, LebesgueSet) else LebesgueSet.from_json(c)
                      for c in cells)
        if not cells:
            raise ValueError("partition needs at least one cell")
        if any(c.is_empty for c in cells):
            raise ValueError("partition cells must have positive measure")
        for k in range(len(cells) - 1):
            if cells[k].sup > cells[k + 1].inf:
                raise ValueError(
                    f"cells {k} and {k + 1} violate the order condition "
                    f"(sup {cells[k].sup} > inf {cells[k + 1].inf})")
        lo = cells[0].inf if alpha is None else float(alpha)
        hi = cells[-1].sup if beta is None else float(beta)
        covered = LebesgueSet.empty()
        total = 0.0
        for c in cells:
            covered = covered | c
            total += c.measure()
        base = LebesgueSet.interval(lo, hi)
        if covered != base:
            raise ValueError(f"cells do not cover [{lo}, {hi}]")
        if abs(total - base.measure()) > 1e-12 * max(1.0, base.measure()):
            raise ValueError("cells overlap on a set of positive measure")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "alpha", lo)
        object.__setattr__(self, "beta", hi)

    def __setattr__(self, name, value):
        raise AttributeError("OrderedPartition is immutable")

    @classmethod
    def from_breakpoints(cls, points: Sequence[float]) -> "OrderedPartition":
        pts = sorted(float(p) for p in points)
        return cls([LebesgueSet.interval(a, b) for a, b in zip(pts[:-1], pts[1:])])

    def __len__(self):
        return len(self.cells)

    def common_refinement(self, other: "OrderedPartition") -> "OrderedPartition":
        out = []
        for c in self.cells:
            for d in other.cells:
                cd = c & d
                if not cd.is_empty:
                    out.append(cd)
        out.sort(key=lambda s: s.inf)
        return OrderedPartition(out)

    def __repr__(self):
        return f"OrderedPartition({list(self.cells)!r})"


@dataclass(frozen=True)
class AeTolerance:
    """Numeric stand-in for "almost everywhere".

    A sample counts as nonzero when ``|v| > eps_value + eps_rel * scale``;
    a function is a.e. zero when the weight of nonzero samples is at most
    ``eps_measure``.
    """

    eps_value: float = 1e-9
    eps_rel: float = 1e-9
    eps_measure: float = 1e-6

    def __post_init__(self):
        for name in ("eps_value", "eps_rel", "eps_measure"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive number, got {v!r}")

    @classmethod
    def default_for(cls, base_measure: float) -> "AeTolerance":
        m = base_measure if (math.isfinite(base_measure) and base_measure > 0) else 1.0
        return cls(1e-9, 1e-9, 1e-6 * m)

    def to_dict(self) -> dict:
        return {"eps_value": self.eps_value, "eps_rel": self.eps_rel,
                "eps_measure": self.eps_measure}


@dataclass(frozen=True)
class AeVerdict:
    is_ae_zero: bool
    violation_measure: float
    max_abs: float

    def __bool__(self):
        return self.is_ae_zero


def ae_zero(samples, tol: AeTolerance | None = None, *, weights=None,
            scale: float | None = None) -> AeVerdict:
    """Decide whether sampled values vanish almost everywhere.

    Parameters
    ----------
    samples : GridFunction-like or array_like
        Either an object with ``values`` and ``weights`` attributes or a raw
        array, in which case ``weights`` must be given.
    tol : AeTolerance, optional
        Defaults to ``AeTolerance.default_for(sum(weights))``.
    weights : array_like, optional
        Quadrature weights (measure carried by each sample).
    scale : float, optional
        Reference magnitude for the relative threshold.  Defaults to the
        samples' own max-abs value.

    Returns
    -------
    AeVerdict
        ``violation_measure`` is the weight sum over samples exceeding the
        threshold.
    """
    if weights is None:
        values = np.asarray(samples.values, dtype=float).ravel()
        weights = np.asarray(samples.weights, dtype=float).ravel()
    else:
        values = np.asarray(samples, dtype=float).ravel()
        weights = np.broadcast_to(np.asarray(weights, dtype=float), np.shape(samples)).ravel()
    if values.size == 0:
        raise ValueError("empty domain")
    if values.shape != weights.shape:
        raise ValueError("values and weights differ in shape")
    if tol is None:
        tol = AeTolerance.default_for(float(weights.sum()))
    absval = np.abs(values)
    max_abs = float(absval.max())
    ref = max_abs if scale is None else float(scale)
    thr = tol.eps_value + tol.eps_rel * ref
    # non-finite samples always count as violations
    bad = ~(absval <= thr)
    vm = float(weights[bad].sum())
    return AeVerdict(vm <= tol.eps_measure, vm, max_abs)
