"""Structured verdicts shared by all checkers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["ConditionResult", "ConditionResidual", "CheckReport", "PASS", "FAIL",
           "INCONCLUSIVE", "NO_CONCLUSION", "CONTRADICTION", "exit_code_for",
           "jsonable", "agreement_verdict"]

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
NO_CONCLUSION = "no_conclusion"
CONTRADICTION = "contradiction"

_EXIT = {PASS: 0, FAIL: 1, CONTRADICTION: 1, INCONCLUSIVE: 2, NO_CONCLUSION: 2}


def exit_code_for(verdict: str) -> int:
    return _EXIT[verdict]


def agreement_verdict(checker_pass: bool, oracle_pass: bool) -> str:
    """Combine a checker verdict with an independent oracle verdict."""
    if checker_pass != oracle_pass:
        return INCONCLUSIVE
    return PASS if checker_pass else FAIL


def jsonable(obj: Any):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


@dataclass
class ConditionResult:
    """Outcome of one gating condition evaluated on one region."""

    name: str
    region: str
    sup_residual: float
    l2_residual: float
    violation_measure: float
    passed: bool
    evaluated: bool = True
    region_measure: float = float("nan")

    @classmethod
    def skipped(cls, name: str, region: str, region_measure: float = 0.0) -> "ConditionResult":
        return cls(name, region, 0.0, 0.0, 0.0, True, False, region_measure)

    def to_dict(self) -> dict:
        return {"name": self.name, "region": self.region, "sup_residual": self.sup_residual,
                "l2_residual": self.l2_residual, "violation_measure": self.violation_measure,
                "pass": self.passed, "evaluated": self.evaluated,
                "region_measure": self.region_measure}


@dataclass
class ConditionResidual:
    """Residual samples of one condition on the grid covering its region."""

    name: str
    t: np.ndarray
    tau: np.ndarray | None
    values: np.ndarray


@dataclass
class CheckReport:
    checker: str
    conditions: list[ConditionResult]
    verdict: str
    observations: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    wall_time_ms: float = 0.0
    fields: list[ConditionResidual] = field(default_factory=list, repr=False)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def exit_code(self) -> int:
        return exit_code_for(self.verdict)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "checker": self.checker,
            "conditions": [c.to_dict() for c in self.conditions],
            "overall_pass": self.overall_pass,
            "verdict": self.verdict,
            "observations": self.observations,
            "tolerances": self.tolerances,
            "notes": list(self.notes),
        }
        if include_timing:
            d["wall_time_ms"] = self.wall_time_ms
        return jsonable(d)

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2)

    def residual_rows(self):
        """Rows ``(field, t, tau, value)`` for CSV output; tau is blank for 1-D fields."""
        for f in self.fields:
            if f.tau is None:
                for t, v in zip(f.t, f.values):
                    yield f.name, repr(float(t)), "", repr(float(v))
            else:
                T = np.broadcast_to(np.asarray(f.t)[:, None], f.values.shape)
                S = np.broadcast_to(np.asarray(f.tau)[None, :], f.values.shape)
                for t, s, v in zip(T.ravel(), S.ravel(), f.values.ravel()):
                    yield f.name, repr(float(t)), repr(float(s)), repr(float(v))
