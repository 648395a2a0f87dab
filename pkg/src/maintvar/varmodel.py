"""VAR(p) estimation, AIC lag selection, stability and recursive forecasts.

Each equation regresses one variable on an intercept and the first ``p`` lags
of every variable. All K equations share one design matrix, so a single
Householder QR factorisation solves the whole system.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from maintvar import kernels
from maintvar.errors import (
    DataError,
    HistoryTooShort,
    InsufficientRows,
    RankDeficientDesign,
    SingularSigma,
)
from maintvar.linalg import ols
from maintvar.textfeat import FeatureMatrix

DEFAULT_P_MAX = 14
STABILITY_MARGIN = 1e-6
GELFAND_DOUBLINGS = 64


class UnstableModelWarning(UserWarning):
    pass


@dataclass(frozen=True)
class VarModel:
    labels: tuple[str, ...]
    p: int
    alpha: np.ndarray  # (K,)
    beta: np.ndarray  # (p, K, K); beta[l, i, j]: variable j at lag l+1 in equation i
    residuals: np.ndarray  # (t_eff, K)
    sigma: np.ndarray  # (K, K), ML divisor t_eff
    t_eff: int

    @property
    def k(self) -> int:
        return len(self.labels)

    def mean(self) -> np.ndarray:
        """Model-implied process mean (I - sum beta_l)^-1 alpha."""
        return np.linalg.solve(np.eye(self.k) - self.beta.sum(axis=0), self.alpha)

    def companion(self) -> np.ndarray:
        k, p = self.k, self.p
        c = np.zeros((k * p, k * p))
        c[:k, :] = np.concatenate(list(self.beta), axis=1)
        if p > 1:
            c[k:, :-k] = np.eye(k * (p - 1))
        return c


@dataclass(frozen=True)
class ModelSelectionRecord:
    candidate_p: int
    aic: float
    k_params: int
    log_det_sigma: float
    t_eff: int


def _as_array(data) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(data, FeatureMatrix):
        return np.asarray(data.values, dtype=np.float64), data.labels
    y = np.asarray(data, dtype=np.float64)
    return y, tuple(f"y{i + 1}" for i in range(y.shape[1]))


def var_design(y: np.ndarray, p: int, start: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Regressors ``[1, y_1 lags 1..p, ..., y_K lags 1..p]`` for rows start..T-1.

    ``start`` defaults to ``p``; a larger start trims the window so several
    lag orders can share one estimation sample.
    """
    t, k = y.shape
    start = p if start is None else start
    rows = np.arange(start, t)
    cols = [np.ones(rows.shape[0])]
    for j in range(k):
        for lag in range(1, p + 1):
            cols.append(y[rows - lag, j])
    return np.column_stack(cols), y[rows]


def _regressor_names(labels, p):
    return ["intercept"] + [f"{lab} (lag {lag})" for lab in labels for lag in range(1, p + 1)]


def _fit(y: np.ndarray, labels: tuple[str, ...], p: int, start: int | None = None) -> VarModel:
    t, k = y.shape
    if p < 1:
        raise ValueError("lag order p must be a positive integer")
    if k < 1:
        raise DataError("VAR needs at least one variable")
    if np.isnan(y).any():
        raise DataError("feature matrix contains missing cells; impute before fitting")
    start = p if start is None else start
    t_eff = t - start
    if t_eff <= k * p + 1:
        raise InsufficientRows(f"VAR({p}) with {k} variables needs more than {k * p + 1} usable rows, got {t_eff}")
    window = y[start - p :]
    for j, lab in enumerate(labels):
        if np.ptp(window[:, j]) == 0:
            raise RankDeficientDesign(f"column {lab!r} is constant over the estimation window")
    X, Y = var_design(y, p, start)
    res = ols(X, Y, _regressor_names(labels, p))
    coef = res.coef  # (1 + K p, K)
    alpha = coef[0].copy()
    # coef[1 + j*p + l, i] is variable j at lag l+1 in equation i
    beta = coef[1:].reshape(k, p, k).transpose(1, 2, 0).copy()
    resid = res.resid
    sigma = resid.T @ resid / t_eff
    sigma = (sigma + sigma.T) / 2.0
    return VarModel(tuple(labels), p, alpha, beta, resid, sigma, t_eff)


def fit_var(fm, p: int) -> VarModel:
    """Least-squares VAR(p) over rows p+1..T of ``fm``."""
    y, labels = _as_array(fm)
    return _fit(y, labels, p)


def compute_aic(fit: VarModel) -> ModelSelectionRecord:
    """``ln det(sigma) + 2 k / t_eff`` with ``k = K (K p + 1)``."""
    try:
        chol = np.linalg.cholesky(fit.sigma)
    except np.linalg.LinAlgError:
        raise SingularSigma("residual covariance is not positive definite") from None
    d = np.diag(chol)
    if not np.all(d > 0) or not np.all(np.isfinite(d)):
        raise SingularSigma("residual covariance is singular")
    log_det = 2.0 * float(np.sum(np.log(d)))
    k_params = fit.k * (fit.k * fit.p + 1)
    return ModelSelectionRecord(fit.p, log_det + 2.0 * k_params / fit.t_eff, k_params, log_det, fit.t_eff)


def select_lag_order(fm, p_max: int = DEFAULT_P_MAX) -> tuple[int, list[ModelSelectionRecord]]:
    """Choose p in 1..p_max by minimum AIC, all candidates on the window t > p_max."""
    if p_max < 1:
        raise ValueError("p_max must be a positive integer")
    y, labels = _as_array(fm)
    records = [compute_aic(_fit(y, labels, p, start=p_max)) for p in range(1, p_max + 1)]
    best = min(records, key=lambda r: (r.aic, r.candidate_p))
    return best.candidate_p, records


def forecast(model: VarModel, history, h: int) -> np.ndarray:
    """Iterate the fitted equations ``h`` steps ahead with zero shocks.

    Only the last ``p`` rows of ``history`` are used.
    """
    if h < 1:
        raise ValueError("forecast horizon must be a positive integer")
    if isinstance(history, FeatureMatrix):
        history = history.values
    hist = np.asarray(history, dtype=np.float64)
    if hist.ndim != 2 or hist.shape[1] != model.k:
        raise DataError(f"history must have {model.k} columns")
    if hist.shape[0] < model.p:
        raise HistoryTooShort(f"forecast needs {model.p} history rows, got {hist.shape[0]}")
    window = np.ascontiguousarray(hist[hist.shape[0] - model.p :])
    return kernels.forecast_recursive(
        np.ascontiguousarray(model.alpha), np.ascontiguousarray(model.beta), window, int(h)
    )


def spectral_radius(a: np.ndarray, doublings: int = GELFAND_DOUBLINGS) -> float:
    """Gelfand estimate ||A^(2^n)||^(1/2^n) with per-step renormalisation."""
    m = np.asarray(a, dtype=np.float64)
    norm = np.linalg.norm(m, 2)
    if norm == 0.0:
        return 0.0
    m = m / norm
    log_rho = math.log(norm)
    for n in range(1, doublings + 1):
        m = m @ m
        c = np.linalg.norm(m, 2)
        if c == 0.0:
            return 0.0
        m = m / c
        log_rho += math.log(c) / 2.0**n
    return math.exp(log_rho)


def is_stable(model: VarModel) -> tuple[bool, float]:
    rho = spectral_radius(model.companion())
    return rho < 1.0 - STABILITY_MARGIN, rho


def warn_if_unstable(model: VarModel) -> bool:
    stable, rho = is_stable(model)
    if not stable:
        warnings.warn(
            f"fitted VAR({model.p}) is not stable (spectral radius {rho:.6f}); long-horizon forecasts may diverge",
            UnstableModelWarning,
            stacklevel=2,
        )
    return stable


# ---------------------------------------------------------------- serialization

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dump_model(model: VarModel, path: str | Path) -> None:
    """Write labels, p, t_eff, alpha and each beta matrix row-major."""
    k = model.k
    lines = [
        "# maintvar VAR model",
        "labels = " + "\t".join(model.labels),
        f"p = {model.p}",
        f"t_eff = {model.t_eff}",
        "alpha = " + " ".join(_fmt(v) for v in model.alpha),
    ]
    for lag in range(model.p):
        lines.append(f"beta {lag + 1}")
        for i in range(k):
            lines.append(" ".join(_fmt(v) for v in model.beta[lag, i]))
    lines.append("sigma")
    for i in range(k):
        lines.append(" ".join(_fmt(v) for v in model.sigma[i]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> VarModel:
    """Inverse of ``dump_model``; residuals are not stored and come back empty."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")]
    header = {}
    it = iter(lines)
    for _ in range(4):
        key, _, value = next(it).partition(" = ")
        header[key] = value
    labels = tuple(header["labels"].split("\t"))
    p, t_eff, k = int(header["p"]), int(header["t_eff"]), len(labels)
    alpha = np.array([float(v) for v in header["alpha"].split()])
    beta = np.empty((p, k, k))
    for lag in range(p):
        next(it)
        for i in range(k):
            beta[lag, i] = [float(v) for v in next(it).split()]
    next(it)
    sigma = np.array([[float(v) for v in next(it).split()] for _ in range(k)])
    return VarModel(labels, p, alpha, beta, np.empty((0, k)), sigma, t_eff)
