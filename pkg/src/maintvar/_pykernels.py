"""Pure-Python/numpy kernels, the fallback for ``_ckernels``.

The floating-point operation order here is the contract both backends
share: sequential prefix sums for split search and a fixed
alpha-then-lag-then-variable accumulation for the forecast recursion.
"""

from __future__ import annotations

import numpy as np


def best_split(X, yc, idx, features, min_leaf):
    """Best variance-reduction split for one node.

    ``yc`` holds the node targets centred on the node mean, aligned with
    ``idx``. Returns ``(feature, threshold, gain)`` with ``feature == -1``
    when no admissible split exists. ``gain`` is the decrease in the
    node's sum of squared errors.
    """
    n = idx.shape[0]
    best_f, best_t, best_gain = -1, 0.0, 0.0
    if n < 2 * min_leaf:
        return best_f, best_t, best_gain
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    admissible = (nl >= min_leaf) & (nr >= min_leaf)
    for f in features:
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        xs = vals[order]
        cs = np.cumsum(yc[order])
        total = cs[-1]
        left = cs[:-1]
        right = total - left
        gain = left * left / nl + right * right / nr - total * total / n
        ok = admissible & (xs[:-1] != xs[1:])
        if not ok.any():
            continue
        gain = np.where(ok, gain, -np.inf)
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            best_gain = float(gain[i])
            best_f = int(f)
            t = (xs[i] + xs[i + 1]) / 2.0
            if t == xs[i + 1]:
                t = xs[i]
            best_t = float(t)
    return best_f, best_t, best_gain


def predict_tree(feature, threshold, left, right, value, X):
    """Route every row of ``X`` through one flattened tree."""
    out = np.empty(X.shape[0], dtype=np.float64)
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out


def forecast_recursive(alpha, beta, history, h):
    """Iterate the VAR recursion ``h`` steps past ``history`` with zero shocks.

    ``beta`` has shape (p, K, K); ``history`` holds at least p rows in
    chronological order.
    """
    p, k = beta.shape[0], beta.shape[1]
    hist = history.shape[0]
    window = np.empty((hist + h, k), dtype=np.float64)
    window[:hist] = history
    for step in range(h):
        t = hist + step
        for i in range(k):
            acc = float(alpha[i])
            for lag in range(p):
                row = window[t - 1 - lag]
                b = beta[lag, i]
                for j in range(k):
                    acc += float(b[j]) * float(row[j])
            window[t, i] = acc
    return window[hist:].copy()
