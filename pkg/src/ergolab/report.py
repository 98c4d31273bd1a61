"""Deterministic artifact writers for the scenario runner.

Every run emits a JSON report, one or more CSV tables, and a rendered
figure next to them.  Serialization is deterministic: keys are sorted,
floats use repr, and everything time-dependent lives under the single
top-level "timing" key, so two runs with the same config and seed produce
byte-identical CSV/JSON apart from that key.
"""

from __future__ import annotations

import csv
import json
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


@dataclass
class Check:
    """One declared pass/fail condition with its numeric margin
    (nonnegative margin means the condition holds)."""

    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class RunReport:
    scenario: str
    claim: str
    checks: list[Check] = field(default_factory=list)
    results: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    def add_check(self, name: str, margin: float, detail: str = "",
                  tolerance: float = 0.0) -> Check:
        check = Check(
            name=name,
            passed=bool(margin >= -tolerance),
            margin=float(margin),
            detail=detail,
        )
        self.checks.append(check)
        return check

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def environment_fingerprint() -> dict:
    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


def _jsonable(value):
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.complexfloating):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return str(value)


def write_report(
    report: RunReport,
    out_dir: Path,
    config_echo: dict,
    seconds: float,
) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "scenario": report.scenario,
        "claim": report.claim,
        "config": _jsonable(config_echo),
        "environment": environment_fingerprint(),
        "results": _jsonable(report.results),
        "checks": [
            {
                "name": c.name,
                "passed": c.passed,
                "margin": c.margin,
                "detail": c.detail,
            }
            for c in report.checks
        ],
        "artifacts": _jsonable(report.artifacts),
        "timing": {"seconds": seconds},
    }
    path = out_dir / "report.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_csv(out_dir: Path, name: str, header: list[str], rows) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _cell(value):
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_sequence_csv(out_dir: Path, name: str, sample) -> Path:
    """SequenceSample export: columns n, re(a), im(a)."""
    start, _ = sample.window
    rows = (
        (start + i, float(v.real), float(v.imag))
        for i, v in enumerate(sample.values)
    )
    return write_csv(out_dir, name, ["n", "re(a)", "im(a)"], rows)


def save_figure(fig, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def new_figure(width: float = 7.0, height: float = 4.0):
    return plt.figure(figsize=(width, height))
