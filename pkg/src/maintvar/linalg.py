"""Least squares via Householder QR (LAPACK ``geqrf`` through numpy)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from maintvar.errors import RankDeficientDesign

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class OLSResult:
    coef: np.ndarray  # (m,) or (m, r)
    resid: np.ndarray
    r: np.ndarray  # upper-triangular factor of the design

    @property
    def rss(self):
        return np.sum(self.resid**2, axis=0)

    def xtx_inv_diag(self) -> np.ndarray:
        rinv = np.linalg.solve(self.r, np.eye(self.r.shape[0]))
        return np.sum(rinv**2, axis=1)


def ols(X: np.ndarray, Y: np.ndarray, names=None) -> OLSResult:
    """Solve min ||X b - Y|| for one or several right-hand sides.

    Raises ``RankDeficientDesign`` naming the first regressor whose QR pivot
    collapses relative to the column scale.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    q, r = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(r))
    scale = np.maximum(np.linalg.norm(X, axis=0), np.finfo(float).tiny)
    bad = np.nonzero(diag <= RANK_RTOL * scale)[0]
    if bad.size:
        j = int(bad[0])
        name = names[j] if names is not None else f"column {j}"
        raise RankDeficientDesign(f"design matrix is rank deficient at regressor {name}")
    coef = np.linalg.solve(r, q.T @ Y)
    resid = Y - X @ coef
    return OLSResult(coef, resid, r)

