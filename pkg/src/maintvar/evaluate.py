"""Forecast metrics, the hold-out backtest, and synthetic data generators."""

from __future__ import annotations

import csv
import datetime as dt
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from maintvar.errors import EmptyInput, InsufficientRows, LengthMismatch, UnstableSpec, ZeroActual
from maintvar.rng import stream
from maintvar.textfeat import TARGET_LABEL, FeatureMatrix
from maintvar.varmodel import (
    DEFAULT_P_MAX,
    UnstableModelWarning,
    fit_var,
    forecast,
    is_stable,
    select_lag_order,
    spectral_radius,
)

DEFAULT_HORIZONS = (3, 5, 7, 10, 12, 30)
BURN_IN = 200


# ---------------------------------------------------------------- metrics

def _pair(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64).ravel()
    f = np.asarray(predicted, dtype=np.float64).ravel()
    if a.shape != f.shape:
        raise LengthMismatch(f"actual has {a.size} values, predicted has {f.size}")
    if a.size == 0:
        raise EmptyInput("metrics need at least one value")
    return a, f


def rmse(actual, predicted) -> float:
    a, f = _pair(actual, predicted)
    return math.sqrt(math.fsum((a - f) ** 2) / a.size)


def mae(actual, predicted) -> float:
    a, f = _pair(actual, predicted)
    return math.fsum(np.abs(a - f)) / a.size


def rmspe(actual, predicted, skip_zero: bool = False) -> float:
    """Root mean squared percentage error, in percent."""
    a, f = _pair(actual, predicted)
    zero = a == 0
    if zero.any():
        if not skip_zero:
            raise ZeroActual("RMSPE is undefined where the actual value is zero")
        a, f = a[~zero], f[~zero]
        if a.size == 0:
            raise EmptyInput("every actual value is zero")
    return 100.0 * math.sqrt(math.fsum(((a - f) / a) ** 2) / a.size)


# ---------------------------------------------------------------- synthetic VAR

@dataclass(frozen=True)
class SyntheticSpec:
    alpha: np.ndarray
    beta: np.ndarray  # (p, K, K)
    cov: np.ndarray  # innovation covariance (K, K)
    T: int
    seed: int = 0
    labels: tuple[str, ...] | None = None
    thresholds: dict = field(default_factory=dict)  # column index -> cut for {0,1} mapping
    start: dt.date = dt.date(2012, 1, 1)

    @property
    def k(self) -> int:
        return int(np.asarray(self.alpha).shape[0])

    @property
    def p(self) -> int:
        return int(np.asarray(self.beta).shape[0])

    def mean(self) -> np.ndarray:
        beta = np.asarray(self.beta, dtype=np.float64)
        return np.linalg.solve(np.eye(self.k) - beta.sum(axis=0), np.asarray(self.alpha, dtype=np.float64))

    def companion(self) -> np.ndarray:
        k, p = self.k, self.p
        c = np.zeros((k * p, k * p))
        c[:k] = np.concatenate(list(np.asarray(self.beta, dtype=np.float64)), axis=1)
        if p > 1:
            c[k:, :-k] = np.eye(k * (p - 1))
        return c


def _cov_root(cov: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh((cov + cov.T) / 2.0)
        return v * np.sqrt(np.clip(w, 0.0, None))


def simulate_var_array(spec: SyntheticSpec) -> np.ndarray:
    """Raw (T, K) draw from a SyntheticSpec, before any indicator thresholding."""
    if spectral_radius(spec.companion()) >= 1.0:
        raise UnstableSpec("synthetic VAR spec is not stable")
    if spec.T <= 10 * spec.p:
        raise InsufficientRows(f"T must exceed 10*p = {10 * spec.p}")
    alpha = np.asarray(spec.alpha, dtype=np.float64)
    beta = np.asarray(spec.beta, dtype=np.float64)
    root = _cov_root(np.asarray(spec.cov, dtype=np.float64))
    k, p = spec.k, spec.p
    n = spec.T + BURN_IN
    shocks = stream(spec.seed, "simulate_var").standard_normal((n, k)) @ root.T
    y = np.empty((n + p, k))
    y[:p] = spec.mean()
    for t in range(p, n + p):
        acc = alpha + shocks[t - p]
        for lag in range(p):
            acc = acc + beta[lag] @ y[t - 1 - lag]
        y[t] = acc
    return y[p + BURN_IN :]


def simulate_var(spec: SyntheticSpec) -> FeatureMatrix:
    y = simulate_var_array(spec)
    for col, cut in spec.thresholds.items():
        y[:, col] = (y[:, col] > cut).astype(np.float64)
    labels = spec.labels or tuple(f"y{i + 1}" for i in range(spec.k))
    dates = tuple(spec.start + dt.timedelta(days=i) for i in range(spec.T))
    target = labels[0] if TARGET_LABEL not in labels else TARGET_LABEL
    return FeatureMatrix(dates, labels, y, "binary", target)


def random_stable_spec(k: int, p: int, T: int, seed: int, sd: float = 0.1, radius: float = 0.8) -> SyntheticSpec:
    """Random coefficients rescaled so the companion spectral radius equals ``radius``."""
    g = stream(seed, "random_stable_spec")
    beta = g.normal(0.0, 0.3, size=(p, k, k))
    tmp = SyntheticSpec(np.zeros(k), beta, np.eye(k), T)
    rho = spectral_radius(tmp.companion())
    if rho > 0:
        # scaling lag l by c^l scales every companion eigenvalue by c
        c = radius / rho
        beta = np.stack([beta[l] * c ** (l + 1) for l in range(p)])
    alpha = g.normal(0.0, 0.1, size=k)
    return SyntheticSpec(alpha, beta, sd**2 * np.eye(k), T, seed)


# ---------------------------------------------------------------- backtest

@dataclass(frozen=True)
class HorizonResult:
    horizon: int
    rmspe: float
    rmse: float
    mae: float
    p: int
    stable: bool
    dates: tuple
    actual: np.ndarray
    forecast: np.ndarray  # target column
    forecast_all: np.ndarray  # every variable, (h * origins, K)


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[HorizonResult, ...]
    labels: tuple[str, ...]
    target: str
    train_rows: dict

    def table(self) -> list[tuple[int, float, float, float]]:
        return [(r.horizon, r.rmspe, r.rmse, r.mae) for r in self.rows]

    def format_table(self) -> str:
        lines = [f"{'Days':>5}  {'RMSPE':>8}  {'RMSE':>10}  {'MAE':>10}"]
        for h, a, b, c in self.table():
            lines.append(f"{h:>5}  {a:>8.2f}  {b:>10.3f}  {c:>10.3f}")
        return "\n".join(lines)

    def write_table_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["Days", "RMSPE", "RMSE", "MAE", "p"])
            for r in self.rows:
                w.writerow([r.horizon, repr(r.rmspe), repr(r.rmse), repr(r.mae), r.p])

    def write_series_csv(self, horizon: int, path: str | Path) -> None:
        r = next(r for r in self.rows if r.horizon == horizon)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "actual", "forecast"])
            for d, a, f in zip(r.dates, r.actual, r.forecast):
                w.writerow([str(d), repr(float(a)), repr(float(f))])


def normalize_horizons(horizons: Sequence[int]) -> tuple[int, ...]:
    hs = sorted({int(h) for h in horizons})
    if not hs:
        raise ValueError("at least one horizon is required")
    if hs[0] < 1:
        raise ValueError(f"horizons must be positive integers, got {hs[0]}")
    return tuple(hs)


def _forecast_window(values: np.ndarray, cutoff: int, h: int, p_max: int, difference: bool):
    train = values[:cutoff]
    if difference:
        d = np.diff(train, axis=0)
        p, _ = select_lag_order(d, p_max)
        model = fit_var(d, p)
        steps = forecast(model, d, h)
        fc = train[-1] + np.cumsum(steps, axis=0)
    else:
        p, _ = select_lag_order(train, p_max)
        model = fit_var(train, p)
        fc = forecast(model, train, h)
    stable, _ = is_stable(model)
    return fc, p, stable


def backtest(
    fm: FeatureMatrix,
    horizons: Sequence[int] = DEFAULT_HORIZONS,
    p_max: int = DEFAULT_P_MAX,
    origins: int = 1,
    difference: bool = False,
) -> EvaluationReport:
    """Hold out the last ``h`` rows per horizon, reselect p and refit on the prefix.

    With ``origins > 1`` the window is rolled back ``h`` rows at a time and
    errors are pooled over all origins.
    """
    hs = normalize_horizons(horizons)
    if origins < 1:
        raise ValueError("origins must be a positive integer")
    target = fm.target or fm.labels[0]
    t_col = fm.labels.index(target)
    values = np.asarray(fm.values, dtype=np.float64)
    n = values.shape[0]
    need = p_max + hs[-1] * origins + 30
    if n <= need:
        raise InsufficientRows(f"backtest needs more than {need} rows, got {n}")

    rows, train_rows = [], {}
    for h in hs:
        actual, predicted, dates, all_fc = [], [], [], []
        p_used, stable_all = None, True
        for o in reversed(range(origins)):
            cutoff = n - h * (o + 1)
            fc, p, stable = _forecast_window(values, cutoff, h, p_max, difference)
            actual.append(values[cutoff : cutoff + h, t_col])
            predicted.append(fc[:, t_col])
            all_fc.append(fc)
            dates.extend(fm.dates[cutoff : cutoff + h])
            p_used = p if p_used is None else p_used
            stable_all = stable_all and stable
            if o == 0:
                p_used, train_rows[h] = p, cutoff
        if not stable_all:
            warnings.warn(f"{h}-day backtest used an unstable VAR fit", UnstableModelWarning, stacklevel=2)
        a, f = np.concatenate(actual), np.concatenate(predicted)
        rows.append(HorizonResult(h, rmspe(a, f), rmse(a, f), mae(a, f), p_used, stable_all,
                                  tuple(dates), a, f, np.concatenate(all_fc)))
    return EvaluationReport(tuple(rows), fm.labels, target, train_rows)
