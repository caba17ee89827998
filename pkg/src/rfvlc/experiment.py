"""Experiment orchestration and tidy result files.

An experiment evaluates one metric for one network mode over a sweep of a
single config parameter with the analytic engine, the Monte-Carlo engine or
both.  Results are rows with the fixed column order

    sweep_param, sweep_value, engine, metric, value, ci95, seconds, error

written as CSV or JSON lines with floats at 9 significant digits.  Vector
metrics (the interferer PMF and the Laplace transform) produce one row per
component, with the component encoded in the metric name, e.g.
``interferer_pmf@k=3``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic, simcore
from .analytic.vlc import GilPelaezSpec, NumericalError
from .config import _FIELDS, MODES, ConfigError, NetworkConfig, config_from_mapping
from .estimators import METRICS

__all__ = [
    "ENGINES",
    "COLUMNS",
    "ExperimentSpec",
    "ResultRow",
    "parse_sweep",
    "run_experiment",
    "emit_results",
    "format_rows",
    "read_results",
]

ENGINES = ("mc", "analytic", "both")
COLUMNS = ("sweep_param", "sweep_value", "engine", "metric", "value", "ci95", "seconds", "error")
_NON_SWEEPABLE = {"m_order", "z1_override", "k_interpretation", "r_th_unit", "empty_tier",
                  "los", "assume_u_one", "association_fading"}
SWEEP_KEYS = tuple(sorted((set(_FIELDS) - _NON_SWEEPABLE) | {"lambda_o_per_m2", "lambda_s_per_m2", "z1"}))


@dataclass(frozen=True)
class ExperimentSpec:
    mode: str = "vlc_only"
    metric: str = "coverage"
    sweep_param: str = ""
    sweep_values: tuple = ()
    trials: int = 100_000
    seed: int = 0
    engines: str = "both"
    s_grid: tuple | None = None
    n_jobs: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.engines not in ENGINES:
            raise ValueError(f"engines must be one of {ENGINES}")
        if self.metric == "rate" and self.mode == "hybrid":
            raise ValueError("the rate metric is not defined for hybrid mode")
        if self.engines != "analytic" and int(self.trials) < 1:
            raise ValueError("trials must be at least 1 when the mc engine is selected")
        if self.sweep_param:
            if self.sweep_param not in SWEEP_KEYS:
                raise ValueError(f"cannot sweep {self.sweep_param!r}; choose from {', '.join(SWEEP_KEYS)}")
            vals = np.asarray(self.sweep_values, dtype=float)
            if vals.size == 0:
                raise ValueError("sweep grid is empty")
            if np.any(np.diff(vals) <= 0):
                raise ValueError("sweep grid must be strictly increasing")

    def grid(self):
        if not self.sweep_param:
            return [None]
        return [float(v) for v in self.sweep_values]


@dataclass
class ResultRow:
    sweep_param: str
    sweep_value: float | None
    engine: str
    metric: str
    value: float
    ci95: float | None = None
    seconds: float | None = None
    error: str = ""


def parse_sweep(text: str) -> tuple[str, tuple]:
    """PARAM=START:STOP:STEP, with STOP included when it lies on the grid."""
    if "=" not in text:
        raise ValueError(f"sweep must look like PARAM=START:STOP:STEP, got {text!r}")
    name, rng = text.split("=", 1)
    parts = rng.split(":")
    if len(parts) != 3:
        raise ValueError(f"sweep must look like PARAM=START:STOP:STEP, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if not step > 0:
        raise ValueError("sweep step must be positive")
    if stop < start:
        raise ValueError("sweep stop must not be below start")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    vals = tuple(float(np.round(start + i * step, 12)) for i in range(n))
    return name.strip(), vals


def _apply(cfg: NetworkConfig, name: str, value: float | None) -> NetworkConfig:
    if not name or value is None:
        return cfg
    if name == "z1":
        return cfg.replace(z1_override=value)
    return config_from_mapping({name: value}, base=cfg)


def _laplace_grid(spec, cfg):
    if spec.s_grid is not None:
        return np.asarray(spec.s_grid, dtype=float)
    return np.geomspace(1e-2, 1e2, 9) / cfg.vlc_peak


def _pmf_support(cfg):
    mu = cfg.lambda_o * math.pi * cfg.t_radius ** 2
    return np.arange(int(math.ceil(mu + 6.0 * math.sqrt(mu) + 3)))


def _analytic_values(spec, cfg):
    """List of (metric_name, value) pairs."""
    m = spec.metric
    if m == "coverage":
        return [(m, analytic.coverage(cfg, spec.mode, GilPelaezSpec()))]
    if m == "association":
        return [(m, analytic.association_probability(cfg))]
    if m == "rate":
        fn = {"rf_only": analytic.rate_rf, "vlc_only": analytic.rate_vlc,
              "opportunistic": analytic.rate_opportunistic}[spec.mode]
        return [(m, fn(cfg))]
    if m == "interferer_pmf":
        k = _pmf_support(cfg)
        vals = analytic.vlc_interferer_pmf_unconditional(k, cfg)
        return [(f"{m}@k={int(i)}", float(v)) for i, v in zip(k, vals)]
    s = _laplace_grid(spec, cfg)
    vals = np.atleast_1d(analytic.vlc_laplace_unconditional(s, cfg))
    return [(f"{m}@s={si:.9g}", float(v)) for si, v in zip(s, vals)]


def _mc_values(spec, cfg):
    """List of (metric_name, value, ci95) triples."""
    m = spec.metric
    batch = simcore.simulate(cfg, spec.trials, spec.seed)
    if m == "coverage":
        hits = simcore.coverage_indicator(batch, cfg, spec.mode)
        p = float(np.mean(hits))
        return [(m, p, 1.96 * math.sqrt(p * (1.0 - p) / hits.size))]
    if m == "association":
        est = simcore.estimate_association(cfg, 0, batch=batch)
        return [(m, est.value, est.half_width_95)]
    if m == "rate":
        val, hw = simcore.estimate_rate(cfg, spec.mode, 0, batch=batch)
        return [(m, val, hw)]
    if m == "interferer_pmf":
        k = _pmf_support(cfg)
        counts = simcore.interferer_pmf(cfg, 0, batch=batch)
        n = counts.sum()
        full = np.zeros(k.size)
        top = min(k.size, counts.size)
        full[:top] = counts[:top]
        out = []
        for i in k:
            p = full[i] / n if n else float("nan")
            hw = 1.96 * math.sqrt(p * (1 - p) / n) if n else float("nan")
            out.append((f"{m}@k={int(i)}", float(p), hw))
        return out
    s = _laplace_grid(spec, cfg)
    evs = simcore.empirical_laplace(cfg, s, 0, batch=batch)
    return [(f"{m}@s={e.s:.9g}", e.value, e.half_width_95) for e in evs]


def _run_point(spec: ExperimentSpec, cfg: NetworkConfig, value):
    rows = []
    name = spec.sweep_param
    engines = ("analytic", "mc") if spec.engines == "both" else (spec.engines,)
    try:
        point_cfg = _apply(cfg, name, value)
    except (ConfigError, ValueError) as exc:
        return [ResultRow(name, value, e, spec.metric, float("nan"), None, None, f"config: {exc}")
                for e in engines]
    for engine in engines:
        t0 = time.perf_counter()
        try:
            if engine == "analytic":
                res = [(mn, v, None) for mn, v in _analytic_values(spec, point_cfg)]
            else:
                res = _mc_values(spec, point_cfg)
        except NumericalError as exc:
            rows.append(ResultRow(name, value, engine, spec.metric, float("nan"), None,
                                  time.perf_counter() - t0, f"numeric: {exc}"))
            continue
        except (ValueError, ArithmeticError) as exc:
            rows.append(ResultRow(name, value, engine, spec.metric, float("nan"), None,
                                  time.perf_counter() - t0, f"error: {exc}"))
            continue
        dt = time.perf_counter() - t0
        for mn, v, ci in res:
            rows.append(ResultRow(name, value, engine, mn, float(v), ci, dt))
    return rows


def run_experiment(spec: ExperimentSpec, cfg: NetworkConfig) -> list[ResultRow]:
    """Evaluate every grid point; failures are recorded in the row and the run continues."""
    grid = spec.grid()
    if spec.n_jobs > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=spec.n_jobs) as pool:
            parts = list(pool.map(lambda v: _run_point(spec, cfg, v), grid))
    else:
        parts = [_run_point(spec, cfg, v) for v in grid]
    order = {v: i for i, v in enumerate(grid)}
    rows = [r for part in parts for r in part]
    rows.sort(key=lambda r: order[r.sweep_value])
    return rows


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".9g")


def _json_num(x):
    if x is None:
        return None
    x = float(format(float(x), ".9g"))
    return x if math.isfinite(x) else None


def format_rows(rows, fmt: str = "csv", timing: bool = True) -> str:
    """Serialize rows; ``timing=False`` blanks the wall-time column for byte-stable output."""
    if fmt not in ("csv", "jsonl"):
        raise ValueError("format must be 'csv' or 'jsonl'")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([r.sweep_param, _fmt(r.sweep_value), r.engine, r.metric, _fmt(r.value),
                        _fmt(r.ci95), _fmt(r.seconds) if timing else "", r.error])
        return buf.getvalue()
    lines = []
    for r in rows:
        rec = {
            "sweep_param": r.sweep_param,
            "sweep_value": _json_num(r.sweep_value),
            "engine": r.engine,
            "metric": r.metric,
            "value": _json_num(r.value),
            "ci95": _json_num(r.ci95),
            "seconds": _json_num(r.seconds) if timing else None,
            "error": r.error,
        }
        lines.append(json.dumps(rec))
    return "".join(line + "\n" for line in lines)


def emit_results(rows, fmt: str = "csv", path=None, timing: bool = True) -> str:
    """Write rows to ``path`` (or return the text when ``path`` is None).

    An empty row list yields a header-only CSV or an empty JSON-lines file.
    """
    text = format_rows(rows, fmt, timing)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_results(path_or_text, fmt: str = "csv") -> list[ResultRow]:
    """Parse a result file written by ``emit_results``."""
    text = str(path_or_text)
    if "\n" not in text and Path(text).exists():
        text = Path(text).read_text()

    def num(v):
        if v in ("", None):
            return None
        return float(v)

    rows = []
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        for d in reader:
            rows.append(ResultRow(d["sweep_param"], num(d["sweep_value"]), d["engine"], d["metric"],
                                  num(d["value"]), num(d["ci95"]), num(d["seconds"]), d["error"]))
        return rows
    for line in text.splitlines():
        if not line.strip():
            continue
        d = json.loads(line)
        value = d["value"] if d["value"] is not None else float("nan")
        rows.append(ResultRow(d["sweep_param"], d["sweep_value"], d["engine"], d["metric"],
                              value, d["ci95"], d["seconds"], d["error"]))
    return rows
