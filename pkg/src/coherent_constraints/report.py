"""Run reports and their JSON / CSV serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

CSV_HEADER = ("name", "value", "tolerance", "pass")


@dataclass
class Check:
    name: str
    value: float
    tolerance: float | str | None
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "value": _clean(self.value),
                "tolerance": _clean(self.tolerance), "pass": bool(self.passed)}


def _clean(x):
    # JSON has no inf/nan
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def upper_check(name: str, value: float, tolerance: float) -> Check:
    """Passes when ``value <= tolerance``."""
    value = float(value)
    return Check(name, value, tolerance, bool(value <= tolerance))


@dataclass
class RunReport:
    config: dict
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    version: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self, *, include_timings: bool = False) -> dict:
        return {
            "version": self.version,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "timings": {k: round(v, 6) for k, v in self.timings.items()} if include_timings else {},
        }


def render(report: RunReport, fmt: str = "json", *, include_timings: bool = False) -> str:
    """Serialize deterministically; timings are left out unless requested."""
    if fmt == "json":
        return json.dumps(report.as_dict(include_timings=include_timings), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in report.checks:
            d = c.as_dict()
            writer.writerow([d["name"], repr(d["value"]) if isinstance(d["value"], float) else d["value"],
                             "" if d["tolerance"] is None else d["tolerance"], str(d["pass"]).lower()])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def emit_report(report: RunReport, fmt: str = "json", path: str | Path | None = None, *,
                include_timings: bool = False) -> str:
    """Render the report and write it to ``path`` when given. Returns the text."""
    text = render(report, fmt, include_timings=include_timings)
    if path is not None:
        Path(path).write_text(text)
    return text
