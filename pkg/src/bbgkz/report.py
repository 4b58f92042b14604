"""Check records and their JSON / text renderings.

JSON output is deterministic: keys sorted, no timestamps, rationals written
as "p/q" strings and complex numbers as [re, im].
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
import sympy

PROVENANCE = ("paper-formula", "derived-oracle", "trivial")


def encode(obj: Any) -> Any:
    """Convert numbers and containers to JSON-ready values."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, sympy.Basic):
        if obj.is_Rational:
            return f"{obj.p}/{obj.q}"
        return str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [encode(v) for v in obj.tolist()] if obj.dtype.kind != "c" else \
            [encode(v) for v in obj]
    if isinstance(obj, sympy.MatrixBase):
        return [[encode(obj[i, j]) for j in range(obj.cols)] for i in range(obj.rows)]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if hasattr(obj, "to_json"):
        return encode(obj.to_json())
    raise TypeError(f"cannot encode {type(obj).__name__}")


def digest(inputs: Any) -> str:
    blob = json.dumps(encode(inputs), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class CheckRecord:
    name: str
    passed: bool
    provenance: str
    inputs: Any = None
    computed: Any = None
    expected: Any = None
    deviation: float | None = None
    tolerance: float | None = None
    seconds: float | None = None
    note: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "pass": bool(self.passed),
            "provenance": self.provenance,
            "inputs_digest": digest(self.inputs),
            "inputs": encode(self.inputs),
            "computed": encode(self.computed),
            "expected": encode(self.expected),
            "deviation": self.deviation,
            "tolerance": self.tolerance,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Report:
    command: str
    checks: list[CheckRecord] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, record: CheckRecord) -> CheckRecord:
        self.checks.append(record)
        return record

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> dict:
        failed = [c.name for c in self.checks if not c.passed]
        return {"total": len(self.checks), "passed": len(self.checks) - len(failed), "failed": failed}

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "checks": [c.to_json() for c in self.checks],
            "data": encode(self.data),
            "summary": self.summary(),
            "pass": self.passed,
        }

    def dumps(self, fmt: str = "json") -> str:
        if fmt == "json":
            return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"
        return render_text(self)


def _fmt(val: Any) -> str:
    if val is None:
        return "-"
    if isinstance(val, float):
        return f"{val:.3e}"
    return str(val)


def _matrix_lines(name: str, mat) -> list[str]:
    if mat is None:
        return []
    lines = [f"  {name}:"]
    for row in mat:
        cells = []
        for v in row:
            if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
                cells.append(f"{v[0]:+.6f}{v[1]:+.6f}i")
            elif isinstance(v, float):
                cells.append(f"{v:+.6f}")
            else:
                cells.append(str(v))
        lines.append("    " + "  ".join(f"{c:>22}" for c in cells))
    return lines


def _is_matrix(val) -> bool:
    return isinstance(val, list) and bool(val) and all(isinstance(r, list) for r in val) \
        and isinstance(val[0][0], list)


def _is_table(val) -> bool:
    """Complex matrix, or a list of rows of plain numbers."""
    if _is_matrix(val):
        return True
    return isinstance(val, list) and bool(val) and all(
        isinstance(r, list) and r and all(isinstance(v, (int, float)) for v in r) for r in val)


def _matrices(label: str, val) -> list[tuple[str, list]]:
    """Matrix-shaped values, either the value itself or entries of a dict."""
    if _is_table(val):
        return [(label, val)]
    if isinstance(val, dict):
        return [(f"{label}.{k}", v) for k, v in sorted(val.items()) if _is_table(v)]
    return []


def render_text(report: Report) -> str:
    width = max([len(c.name) for c in report.checks] + [10])
    lines = [f"bbgkz {report.command}", ""]
    lines.append(f"{'check':<{width}}  {'result':<6}  {'deviation':>10}  {'tolerance':>10}  provenance")
    for c in report.checks:
        lines.append(f"{c.name:<{width}}  {'pass' if c.passed else 'FAIL':<6}  "
                     f"{_fmt(c.deviation):>10}  {_fmt(c.tolerance):>10}  {c.provenance}")
        if c.note:
            lines.append(f"{'':<{width}}  {c.note}")
        for label, val in (("computed", c.computed), ("expected", c.expected)):
            for name, mat in _matrices(label, encode(val)):
                lines.extend(_matrix_lines(name, mat))
    for key, val in sorted(encode(report.data).items()):
        if _is_matrix(val):
            lines.extend(_matrix_lines(key, val))
        else:
            lines.append(f"{key}: {json.dumps(val, sort_keys=True)}")
    s = report.summary()
    lines.append("")
    lines.append(f"{s['passed']}/{s['total']} checks passed")
    return "\n".join(lines) + "\n"
