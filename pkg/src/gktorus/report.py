"""Certificates and run reports shared by every command."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any


def fmt(x: float) -> float:
    """Round to 15 significant digits so JSON output is stable across platforms."""
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(f"{x:.15g}")


def clean(obj: Any) -> Any:
    """Recursively round floats and convert tuples/numpy scalars for JSON."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return fmt(obj)
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "tolist"):
        return clean(obj.tolist())
    if hasattr(obj, "numerator") and hasattr(obj, "denominator"):
        return str(obj) if obj.denominator != 1 else int(obj.numerator)
    return str(obj)


def dumps(obj: Any) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2)


def digest(obj: Any) -> str:
    return hashlib.sha256(json.dumps(clean(obj), sort_keys=True).encode()).hexdigest()


@dataclass
class Check:
    """One verified item: the largest residual seen and the tolerance it was held to."""

    item: str
    description: str
    max_residual: float
    tolerance: float
    passed: bool | None = None

    def __post_init__(self):
        if self.passed is None:
            self.passed = bool(self.max_residual <= self.tolerance)

    def to_json(self) -> dict:
        return {
            "item": self.item,
            "description": self.description,
            "max_residual": fmt(self.max_residual),
            "tolerance": fmt(self.tolerance),
            "pass": bool(self.passed),
        }


def exact_check(item: str, description: str, ok: bool) -> Check:
    """A check decided by exact arithmetic: residual 0 on success, 1 otherwise."""
    return Check(item, description, 0.0 if ok else 1.0, 0.0, bool(ok))


@dataclass
class RunReport:
    command: str
    inputs: Any
    checks: list[Check] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    timing: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def to_json(self) -> dict:
        out = {
            "command": self.command,
            "inputs": clean(self.inputs),
            "inputs_digest": digest(self.inputs),
            "checks": [c.to_json() for c in self.checks],
            "results": clean(self.results),
            "pass": self.passed,
        }
        if self.timing is not None:
            out["wall_clock_seconds"] = fmt(self.timing)
        return out

    def summary_lines(self) -> list[str]:
        lines = [f"[{'PASS' if c.passed else 'FAIL'}] {c.item}: {c.description} "
                 f"(residual {c.max_residual:.3g}, tol {c.tolerance:.3g})" for c in self.checks]
        lines.append(f"{self.command}: {'PASS' if self.passed else 'FAIL'}")
        return lines
