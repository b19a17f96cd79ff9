"""Experiment reports, log-log rate fits and CSV/JSON persistence."""
import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__

BUILD_ID = f"zerofilter-{__version__}"


@dataclass
class RateFit:
    """Least-squares fit of ``log y = slope * log x + intercept``."""

    slope: float
    intercept: float
    residual: float
    count: int
    ci_low: float = math.nan
    ci_high: float = math.nan
    dropped: Optional[float] = None


def fit_rate(x, y, *, bootstrap: int = 1000, seed: int = 0, drop_outlier: bool = True) -> RateFit:
    """Fit a power law to positive data on log-log axes.

    The point with the largest ``x`` is dropped (and recorded in ``dropped``)
    when its residual against a fit of the other points exceeds three
    standard deviations of their residuals.
    The 95% interval comes from a seeded bootstrap over points.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    x, y = x[keep], y[keep]
    if x.size < 2:
        return RateFit(math.nan, math.nan, math.nan, int(x.size))
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    dropped = None
    if drop_outlier and x.size > 4:
        top = int(np.argmax(x))
        rest_x, rest_y = np.delete(lx, top), np.delete(ly, top)
        b, a = np.polyfit(rest_x, rest_y, 1)
        sigma = max(float(np.std(rest_y - (b * rest_x + a))), 1e-12)
        if abs(ly[top] - (b * lx[top] + a)) > 3 * sigma:
            dropped = float(x[top])
            lx, ly, slope, intercept = rest_x, rest_y, b, a
    res = ly - (slope * lx + intercept)
    ci = (math.nan, math.nan)
    if bootstrap and lx.size >= 3:
        rng = np.random.default_rng(seed)
        slopes = []
        for _ in range(bootstrap):
            idx = rng.integers(0, lx.size, lx.size)
            if np.unique(lx[idx]).size < 2:
                continue
            slopes.append(np.polyfit(lx[idx], ly[idx], 1)[0])
        if slopes:
            ci = tuple(float(v) for v in np.percentile(slopes, [2.5, 97.5]))
    return RateFit(float(slope), float(intercept), float(np.sqrt(np.mean(res**2))), int(lx.size),
                   ci[0], ci[1], dropped)


@dataclass
class Gate:
    """A pass/fail check; ``frozen`` marks empirical thresholds standing in for unknown constants."""

    name: str
    passed: bool
    value: float
    threshold: float
    frozen: bool = False
    note: str = ""


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    rows: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    gates: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    timestamps: dict = field(default_factory=dict)
    build: str = BUILD_ID

    @property
    def passed(self) -> bool:
        return all(g.passed for g in self.gates)

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def gate(self, name, passed, value, threshold, frozen=False, note=""):
        g = Gate(name, bool(passed), float(value), float(threshold), frozen, note)
        self.gates.append(g)
        return g

    def column(self, name):
        return [row[name] for row in self.rows]

    def stamp(self, key):
        self.timestamps[key] = datetime.now(timezone.utc).isoformat()

    def to_dict(self, include_timestamps=True) -> dict:
        out = {
            "experiment": self.experiment,
            "build": self.build,
            "config": self.config,
            "config_hash": self.config_hash,
            "rows": self.rows,
            "fits": {k: asdict(v) for k, v in self.fits.items()},
            "gates": [asdict(g) for g in self.gates],
            "passed": self.passed,
            "notes": self.notes,
        }
        if include_timestamps:
            out["timestamps"] = self.timestamps
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            experiment=data["experiment"],
            config=data["config"],
            rows=data["rows"],
            fits={k: RateFit(**v) for k, v in data.get("fits", {}).items()},
            gates=[Gate(**g) for g in data.get("gates", [])],
            notes=data.get("notes", []),
            timestamps=data.get("timestamps", {}),
            build=data.get("build", BUILD_ID),
        )

    def summary(self) -> str:
        lines = [f"[{self.experiment}] config {self.config_hash[:12]}"]
        for g in self.gates:
            tag = "PASS" if g.passed else "FAIL"
            kind = " (frozen)" if g.frozen else ""
            lines.append(f"  {tag} {g.name}: {g.value:.6g} vs {g.threshold:.6g}{kind}")
        return "\n".join(lines)


def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def config_hash(config: dict) -> str:
    return hashlib.sha256(_canonical(config).encode()).hexdigest()


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def report_csv(report: ExperimentReport) -> str:
    columns = []
    for row in report.rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in report.rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def report_json(report: ExperimentReport, include_timestamps=False) -> str:
    return json.dumps(report.to_dict(include_timestamps), sort_keys=True, indent=2,
                      default=_json_default) + "\n"


def persist_report(report: ExperimentReport, path, fmt: str = "csv", include_timestamps=False):
    """Write ``report`` as CSV (rows only) or JSON (everything).

    Timestamps are left out unless requested so that reruns of the same
    configuration produce byte-identical files.
    """
    if fmt == "csv":
        text = report_csv(report)
    elif fmt == "json":
        text = report_json(report, include_timestamps)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def load_report(path) -> ExperimentReport:
    with open(path) as fh:
        return ExperimentReport.from_dict(json.load(fh))
