"""Monte Carlo sweeps, aggregation, scaling-law fits and CSV output."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .capacity import (
    broadcast_cut_bound,
    coherent_upper_bound,
    mac_cut_bound,
    noncoherent_mac_bound,
    require_half_duplex_split,
)
from .channel import RngStream, SystemConfig, sample_realization
from .strategies import RatePair, achievable_rates

METRICS = ("ub_bc", "ub_mac", "ub_coherent", "dcm", "nc_ub", "nc_af")
AXES = ("relay_count", "relay_power", "alpha")

CSV_HEADER = ("axis", "axis_value", "metric", "direction", "mean_bits", "stderr_bits",
              "trials", "M", "N", "K", "P", "P_R", "sigma2", "alpha", "seed")
FIT_HEADER = ("metric", "direction", "slope_bits_per_doubling", "intercept_bits", "r_squared")

_EVALUATORS = {
    "ub_bc": broadcast_cut_bound,
    "ub_mac": mac_cut_bound,
    "ub_coherent": coherent_upper_bound,
    "dcm": lambda real, cfg: achievable_rates(real, cfg, "dcm"),
    "nc_ub": noncoherent_mac_bound,
    "nc_af": lambda real, cfg: achievable_rates(real, cfg, "nc_af"),
}


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    axis: Literal["relay_count", "relay_power", "alpha"]
    axis_values: Sequence[float]
    trials: int = 200
    seed: int = 42
    metrics: Sequence[str] = ("ub_coherent", "dcm")
    tie_power: bool = False  # relay_power axis: also set P = P_R

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        vals = list(self.axis_values)
        if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("axis_values must be nonempty and strictly ascending")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        _check_metrics(self.metrics)

    def config_at(self, value) -> SystemConfig:
        if self.axis == "relay_count":
            return self.base.with_(K=int(value))
        if self.axis == "relay_power":
            if self.tie_power:
                return self.base.with_(P_R=float(value), P=float(value))
            return self.base.with_(P_R=float(value))
        return self.base.with_(alpha=float(value))


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    metric: str
    direction: int
    mean_bits: float
    stderr_bits: float
    trials: int
    config: SystemConfig = field(repr=False)
    seed: int = 42


@dataclass(frozen=True)
class ScalingFit:
    slope_bits_per_doubling: float
    intercept_bits: float
    r_squared: float


@dataclass(frozen=True)
class RateRegion:
    vertices: tuple  # counter-clockwise (r12, r21) corners

    @property
    def corner(self) -> tuple[float, float]:
        return (max(v[0] for v in self.vertices), max(v[1] for v in self.vertices))

    def contains(self, other: "RateRegion", tol: float = 0.0) -> bool:
        (x, y), (ox, oy) = self.corner, other.corner
        return ox <= x + tol and oy <= y + tol


def _check_metrics(metrics: Iterable[str]) -> None:
    bad = [m for m in metrics if m not in METRICS]
    if bad:
        raise ValueError(f"unknown metric(s) {bad}; choose from {METRICS}")


def evaluate_trial(cfg: SystemConfig, seed: int, trial: int, metrics: Sequence[str]) -> np.ndarray:
    """Rates of one realization: array of shape (len(metrics), 2)."""
    real = sample_realization(cfg, RngStream(seed, trial, "channel"))
    out = np.empty((len(metrics), 2))
    for i, m in enumerate(metrics):
        pair = _EVALUATORS[m](real, cfg)
        out[i] = (pair.r12_bits, pair.r21_bits)
    return out


def trial_values(cfg: SystemConfig, trials: int, seed: int, metrics: Sequence[str],
                 threads: int = 1, first_trial: int = 0) -> np.ndarray:
    """Per-trial rates, shape (trials, len(metrics), 2), in trial order."""
    _check_metrics(metrics)
    if any(m in ("nc_ub", "nc_af") for m in metrics):
        require_half_duplex_split(cfg)
    idx = range(first_trial, first_trial + trials)
    if threads == 0:
        threads = os.cpu_count() or 1
    if threads <= 1:
        vals = [evaluate_trial(cfg, seed, t, metrics) for t in idx]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vals = list(pool.map(lambda t: evaluate_trial(cfg, seed, t, metrics), idx))
    return np.stack(vals)


def aggregate(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error along axis 0 (stderr = sample std / sqrt(n))."""
    n = values.shape[0]
    mean = values.mean(axis=0)
    if n < 2:
        return mean, np.zeros_like(mean)
    return mean, values.std(axis=0, ddof=1) / np.sqrt(n)


def run_point(cfg: SystemConfig, trials: int, seed: int, metrics: Sequence[str],
              threads: int = 1, axis: str = "", axis_value: float = float("nan"),
              first_trial: int = 0) -> list[SweepRow]:
    """Mean and stderr per metric and direction; trial t draws substream (seed, t)."""
    vals = trial_values(cfg, trials, seed, metrics, threads, first_trial)
    mean, se = aggregate(vals)
    rows = []
    for i, m in enumerate(metrics):
        for j, d in enumerate((12, 21)):
            rows.append(SweepRow(axis, axis_value, m, d, float(mean[i, j]), float(se[i, j]),
                                 trials, cfg, seed))
    return rows


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[SweepRow]:
    rows = []
    for value in spec.axis_values:
        rows += run_point(spec.config_at(value), spec.trials, spec.seed, spec.metrics,
                          threads, spec.axis, value)
    return rows


def fit_scaling(points: Sequence[tuple[float, float]]) -> ScalingFit:
    """OLS of mean rate against log2(axis value); slope is bits per doubling."""
    if len(points) < 2:
        raise ValueError("need at least 2 points to fit a scaling law")
    xv = np.array([p[0] for p in points], dtype=float)
    if np.any(~(xv > 0)) or np.any(~np.isfinite(xv)):
        raise ValueError("axis values must be positive and finite")
    x = np.log2(xv)
    y = np.array([p[1] for p in points], dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0.0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return ScalingFit(float(slope), float(intercept), r2)


def fit_rows(rows: Sequence[SweepRow]) -> dict[tuple[str, int], ScalingFit]:
    """Scaling fit for every (metric, direction) series in a sweep."""
    series: dict[tuple[str, int], list] = {}
    for r in rows:
        series.setdefault((r.metric, r.direction), []).append((r.axis_value, r.mean_bits))
    return {key: fit_scaling(pts) for key, pts in series.items() if len(pts) >= 2}


def select(rows: Sequence[SweepRow], metric: str, direction: int) -> list[SweepRow]:
    return [r for r in rows if r.metric == metric and r.direction == direction]


def rate_region(pair) -> RateRegion:
    r12, r21 = float(pair.r12_bits), float(pair.r21_bits)
    if r12 < 0 or r21 < 0:
        raise ValueError("rates must be nonnegative")
    corners = ((0.0, 0.0), (r12, 0.0), (r12, r21), (0.0, r21))
    # degenerate rates collapse repeated corners
    return RateRegion(tuple(dict.fromkeys(corners)))


def mean_pair(rows: Sequence[SweepRow], metric: str) -> RatePair:
    d = {r.direction: r.mean_bits for r in rows if r.metric == metric}
    return RatePair(d[12], d[21])


def _fmt(v) -> str:
    return format(float(v), ".9g")


def _sort_key(r: SweepRow):
    order = METRICS.index(r.metric) if r.metric in METRICS else len(METRICS)
    return (r.axis, float(r.axis_value), order, r.metric, r.direction)


def csv_text(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(rows, key=_sort_key):
        c = r.config
        w.writerow([r.axis, _fmt(r.axis_value), r.metric, r.direction, _fmt(r.mean_bits),
                    _fmt(r.stderr_bits), r.trials, c.M, c.N, c.K, _fmt(c.P), _fmt(c.P_R),
                    _fmt(c.sigma2), _fmt(c.alpha), r.seed])
    return buf.getvalue()


def fit_csv_text(fits: dict[tuple[str, int], ScalingFit]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIT_HEADER)
    for (metric, d) in sorted(fits, key=lambda k: (METRICS.index(k[0]), k[1])):
        f = fits[(metric, d)]
        w.writerow([metric, d, _fmt(f.slope_bits_per_doubling), _fmt(f.intercept_bits),
                    _fmt(f.r_squared)])
    return buf.getvalue()


def fit_path(path: str | os.PathLike) -> str:
    root, _ = os.path.splitext(os.fspath(path))
    return root + ".fit.csv"


def emit_csv(rows: Sequence[SweepRow], fit: dict | None, path: str | os.PathLike) -> None:
    """Write sweep rows to ``path``; scaling fits, if any, go to ``<stem>.fit.csv``."""
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            fh.write(csv_text(rows))
        if fit:
            with open(fit_path(path), "w", newline="", encoding="ascii") as fh:
                fh.write(fit_csv_text(fit))
    except OSError as exc:
        raise OSError(f"cannot write results to {os.fspath(path)!r}: {exc.strerror or exc}") from exc
