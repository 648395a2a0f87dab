"""Stationarity, correlation and Granger-causality screening."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from maintvar.errors import ConstantSeries, MaintvarError, SeriesTooShort, TargetMissing
from maintvar.linalg import ols
from maintvar.textfeat import FeatureMatrix

DEFAULT_CORR_THRESHOLD = 0.1
DEFAULT_ALPHA = 0.05
DEFAULT_MAX_LAG = 7

# Dickey-Fuller tau critical values, regression with constant and no trend
# (Fuller 1976, Table 8.5.2). Rows: sample size; columns: 1%, 5%, 10%.
_DF_TABLE = (
    (25, (-3.75, -3.00, -2.63)),
    (50, (-3.58, -2.93, -2.60)),
    (100, (-3.51, -2.89, -2.58)),
    (250, (-3.46, -2.88, -2.57)),
    (500, (-3.44, -2.87, -2.57)),
    (math.inf, (-3.43, -2.86, -2.57)),
)
_LEVELS = ("1%", "5%", "10%")


# ---------------------------------------------------------------- p-values

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_sf(f: float, df_num: int, df_den: int) -> float:
    """Upper-tail probability of the F distribution."""
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    x = df_den / (df_den + df_num * f)
    return betainc(df_den / 2.0, df_num / 2.0, x)


# ---------------------------------------------------------------- ADF

@dataclass(frozen=True)
class StationarityResult:
    statistic: float
    lags_used: int
    critical_values: dict
    nobs: int

    @property
    def is_stationary_5pct(self) -> bool:
        return self.statistic < self.critical_values["5%"]


def df_critical_values(nobs: int) -> dict[str, float]:
    """Constant-case Dickey-Fuller critical values, linear in 1/nobs between table rows."""
    if nobs <= _DF_TABLE[0][0]:
        return dict(zip(_LEVELS, _DF_TABLE[0][1]))
    inv = 1.0 / nobs
    for (n0, c0), (n1, c1) in zip(_DF_TABLE, _DF_TABLE[1:]):
        if nobs <= n1:
            i0, i1 = 1.0 / n0, (0.0 if math.isinf(n1) else 1.0 / n1)
            w = (i0 - inv) / (i0 - i1)
            return {lev: a + w * (b - a) for lev, a, b in zip(_LEVELS, c0, c1)}
    return dict(zip(_LEVELS, _DF_TABLE[-1][1]))  # pragma: no cover


def _adf_design(y: np.ndarray, lags: int, start: int):
    """Regress dy[t] on [1, y[t], dy[t-1..t-lags]] for dy indices t >= start."""
    dy = np.diff(y)
    t = np.arange(start, dy.shape[0])
    cols = [np.ones(t.shape[0]), y[t]]
    cols += [dy[t - i] for i in range(1, lags + 1)]
    return np.column_stack(cols), dy[t]


def default_adf_lag(n: int) -> int:
    return max(0, min(int(math.ceil(12.0 * (n / 100.0) ** 0.25)), n - 20))


def adf_test(series, max_lag: int | None = None) -> StationarityResult:
    """Augmented Dickey-Fuller test with constant; lag order by AIC on a common sample."""
    y = np.asarray(series, dtype=np.float64)
    n = y.shape[0]
    if max_lag is None:
        max_lag = default_adf_lag(n)
    if max_lag < 0:
        raise ValueError("max_lag must be non-negative")
    if n < 20 + max_lag:
        raise SeriesTooShort(f"ADF needs at least {20 + max_lag} observations, got {n}")
    if np.ptp(y) == 0:
        raise ConstantSeries("ADF test on a constant series")

    best_lag, best_aic = 0, math.inf
    for lags in range(max_lag + 1):
        X, target = _adf_design(y, lags, max_lag)
        res = ols(X, target)
        m = target.shape[0]
        aic = m * math.log(float(res.rss) / m) + 2 * X.shape[1]
        if aic < best_aic:
            best_lag, best_aic = lags, aic

    X, target = _adf_design(y, best_lag, best_lag)
    res = ols(X, target)
    m, k = X.shape
    s2 = float(res.rss) / (m - k)
    se = math.sqrt(s2 * res.xtx_inv_diag()[1])
    stat = float(res.coef[1]) / se
    return StationarityResult(stat, best_lag, df_critical_values(m), m)


# ---------------------------------------------------------------- correlation

@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray  # NaN marks an undefined coefficient
    undefined: frozenset[str]

    def get(self, a: str, b: str) -> float | None:
        v = self.values[self.labels.index(a), self.labels.index(b)]
        return None if np.isnan(v) else float(v)


def pearson_correlation(fm: FeatureMatrix) -> CorrelationMatrix:
    x = np.asarray(fm.values, dtype=np.float64)
    if x.shape[0] < 2:
        raise SeriesTooShort("correlation needs at least two rows")
    xc = x - x.mean(axis=0)
    ss = np.sum(xc * xc, axis=0)
    const = [np.ptp(x[:, j]) == 0 for j in range(x.shape[1])]
    k = x.shape[1]
    out = np.full((k, k), np.nan)
    for i in range(k):
        if const[i]:
            continue
        out[i, i] = 1.0
        for j in range(i + 1, k):
            if const[j]:
                continue
            r = float(np.dot(xc[:, i], xc[:, j]) / math.sqrt(ss[i] * ss[j]))
            out[i, j] = out[j, i] = min(1.0, max(-1.0, r))
    undefined = frozenset(lab for lab, c in zip(fm.labels, const) if c)
    return CorrelationMatrix(tuple(fm.labels), out, undefined)


# ---------------------------------------------------------------- Granger

@dataclass(frozen=True)
class CausalityResult:
    cause: str
    effect: str
    lag: int
    f_statistic: float
    p_value: float
    df_num: int
    df_den: int


def _lags(x: np.ndarray, lag: int) -> list[np.ndarray]:
    n = x.shape[0]
    return [x[lag - i : n - i] for i in range(1, lag + 1)]


def granger_causality(cause, effect, lag: int, cause_label: str = "cause", effect_label: str = "effect") -> CausalityResult:
    """F-test of whether ``cause`` lags 1..lag improve an AR(lag) model of ``effect``."""
    x = np.asarray(cause, dtype=np.float64)
    y = np.asarray(effect, dtype=np.float64)
    if lag < 1:
        raise ValueError("lag must be a positive integer")
    if x.shape != y.shape:
        raise ValueError(f"series lengths differ: {x.shape[0]} vs {y.shape[0]}")
    n = y.shape[0]
    if n <= 3 * lag + 3:
        raise SeriesTooShort(f"Granger test at lag {lag} needs more than {3 * lag + 3} observations, got {n}")
    if np.ptp(x) == 0:
        raise ConstantSeries(f"{cause_label} is constant")
    if np.ptp(y) == 0:
        raise ConstantSeries(f"{effect_label} is constant")

    target = y[lag:]
    ones = np.ones(n - lag)
    restricted = np.column_stack([ones] + _lags(y, lag))
    unrestricted = np.column_stack([ones] + _lags(y, lag) + _lags(x, lag))
    rss_r = float(ols(restricted, target).rss)
    rss_u = float(ols(unrestricted, target).rss)
    df_num = lag
    df_den = (n - lag) - 2 * lag - 1
    if rss_u <= 0.0:
        f = math.inf if rss_r > 0 else 0.0
    else:
        f = max(0.0, ((rss_r - rss_u) / df_num) / (rss_u / df_den))
    return CausalityResult(cause_label, effect_label, lag, f, f_sf(f, df_num, df_den), df_num, df_den)


# ---------------------------------------------------------------- screening

@dataclass(frozen=True)
class ScreeningRow:
    label: str
    correlation: float | None
    best_p_value: float | None
    best_lag: int | None
    selected: bool


@dataclass(frozen=True)
class ScreeningReport:
    target: str
    rows: tuple[ScreeningRow, ...]  # target first, then selection order, then the rest

    @property
    def selected(self) -> list[str]:
        return [r.label for r in self.rows if r.selected]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["label", "correlation", "granger_p_value", "best_lag", "selected"])
            for r in self.rows:
                w.writerow([
                    r.label,
                    "undefined" if r.correlation is None else repr(r.correlation),
                    "" if r.best_p_value is None else repr(r.best_p_value),
                    "" if r.best_lag is None else r.best_lag,
                    int(r.selected),
                ])


def screen_features(
    fm: FeatureMatrix,
    target: str | None = None,
    corr_threshold: float = DEFAULT_CORR_THRESHOLD,
    alpha: float = DEFAULT_ALPHA,
    max_lag: int = DEFAULT_MAX_LAG,
) -> ScreeningReport:
    target = target or fm.target
    if target is None or target not in fm.labels:
        raise TargetMissing(f"target column {target!r} not in feature matrix")
    corr = pearson_correlation(fm)
    y = fm.column(target)
    rows = []
    for lab in fm.labels:
        if lab == target:
            continue
        r = corr.get(lab, target)
        best_p, best_lag = None, None
        for lag in range(1, max_lag + 1):
            try:
                res = granger_causality(fm.column(lab), y, lag, lab, target)
            except MaintvarError:
                continue
            if best_p is None or res.p_value < best_p:
                best_p, best_lag = res.p_value, lag
        by_corr = r is not None and abs(r) >= corr_threshold
        by_granger = best_p is not None and alpha > 0 and best_p <= alpha
        selected = lab not in corr.undefined and (by_corr or by_granger)
        rows.append(ScreeningRow(lab, r, best_p, best_lag, selected))

    order = {lab: i for i, lab in enumerate(fm.labels)}
    chosen = sorted((r for r in rows if r.selected), key=lambda r: (-abs(r.correlation or 0.0), order[r.label]))
    rest = [r for r in rows if not r.selected]
    head = ScreeningRow(target, 1.0 if target not in corr.undefined else None, None, None, True)
    return ScreeningReport(target, tuple([head] + chosen + rest))


def select_features(
    fm: FeatureMatrix,
    target: str | None = None,
    corr_threshold: float = DEFAULT_CORR_THRESHOLD,
    alpha: float = DEFAULT_ALPHA,
    max_lag: int = DEFAULT_MAX_LAG,
) -> list[str]:
    """Target first, then surviving indicators by descending |correlation|."""
    return screen_features(fm, target, corr_threshold, alpha, max_lag).selected
