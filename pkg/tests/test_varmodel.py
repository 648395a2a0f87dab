import dataclasses
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import var1_spec, var2_spec
from oracles import naive_forecast, scalar_ar_aic
from maintvar.errors import HistoryTooShort, InsufficientRows, RankDeficientDesign, SingularSigma
from maintvar.evaluate import random_stable_spec, simulate_var
from maintvar.rng import stream
from maintvar.varmodel import (
    VarModel,
    compute_aic,
    dump_model,
    fit_var,
    forecast,
    is_stable,
    load_model,
    select_lag_order,
    spectral_radius,
    var_design,
    warn_if_unstable,
    UnstableModelWarning,
)


def _model(alpha, beta):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    k = alpha.shape[0]
    return VarModel(tuple(f"y{i}" for i in range(k)), beta.shape[0], alpha, beta, np.zeros((0, k)), np.eye(k), 100)


def _noiseless(alpha, beta, start, n):
    p = len(beta)
    y = np.empty((n, len(alpha)))
    y[:p] = start
    for t in range(p, n):
        y[t] = alpha + sum(beta[lag] @ y[t - 1 - lag] for lag in range(p))
    return y


def test_noiseless_equal_rates_is_rank_deficient():
    # both series are multiples of 0.5**t, so their lag columns are proportional
    y = _noiseless(np.zeros(2), [0.5 * np.eye(2)], [[3.0, -2.0]], 30)
    with pytest.raises(RankDeficientDesign):
        fit_var(y, 1)


def test_noiseless_decoupled_recovery():
    y = _noiseless(np.zeros(2), [np.diag([0.5, 0.3])], [[3.0, -2.0]], 25)
    m = fit_var(y, 1)
    assert np.allclose(m.alpha, 0.0, atol=1e-8)
    assert np.allclose(m.beta[0], np.diag([0.5, 0.3]), atol=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(2, 4))
def test_exact_recovery_of_generating_coefficients(seed, p, k):
    spec = random_stable_spec(k, p, 200, seed, radius=0.95)
    start = stream(seed, "exact-rec").standard_normal((p, k)) * 10
    # transients decay geometrically; a short window keeps the design well conditioned
    y = _noiseless(spec.alpha, spec.beta, start, 2 * k * p + 2 * p + 4)
    m = fit_var(y, p)
    assert np.allclose(m.alpha, spec.alpha, atol=1e-8)
    assert np.allclose(m.beta, spec.beta, atol=1e-8)


def test_recovery_var1_monte_carlo():
    ok = 0
    for s in range(20):
        spec = var1_spec(s)
        m = fit_var(simulate_var(spec), 1)
        ok += np.abs(m.alpha - spec.alpha).max() < 0.05 and np.abs(m.beta - spec.beta).max() < 0.05
    assert ok >= 19


def test_fit_invariants():
    fm = simulate_var(var2_spec(7, T=500))
    m = fit_var(fm, 2)
    assert m.t_eff == 498 and m.residuals.shape == (498, 5)
    assert np.allclose(m.residuals.mean(axis=0), 0.0, atol=1e-8)
    X, _ = var_design(np.asarray(fm.values), 2)
    inner = X.T @ m.residuals
    scale = np.linalg.norm(X, axis=0)[:, None] * np.linalg.norm(m.residuals, axis=0)[None, :]
    assert np.all(np.abs(inner) <= 1e-6 * scale)
    assert np.array_equal(m.sigma, m.sigma.T)
    assert np.all(np.linalg.eigvalsh(m.sigma) >= -1e-15)


def test_fit_errors():
    g = stream(0, "err")
    y = g.standard_normal((50, 3))
    y[:, 1] = 4.0
    with pytest.raises(RankDeficientDesign, match="y2"):
        fit_var(y, 1)
    with pytest.raises(InsufficientRows):
        fit_var(g.standard_normal((8, 3)), 2)


def test_aic_scalar_reduction():
    y = simulate_var(var1_spec(3, T=300)).values[:, :1]
    for p in (1, 2, 3):
        rec = compute_aic(fit_var(y, p))
        assert rec.aic == pytest.approx(scalar_ar_aic(y[:, 0], p), rel=1e-10)
        assert rec.k_params == p + 1


def test_aic_prefers_true_order_var1():
    wins = 0
    for s in range(20):
        y = simulate_var(var1_spec(s, T=500))
        _, recs = select_lag_order(y, 2)
        wins += recs[0].aic < recs[1].aic
    assert wins >= 18


def test_aic_singular_sigma():
    y = np.empty((30, 2))
    y[0], y[1] = [1.0, 2.0], [0.5, -1.0]
    for t in range(2, 30):
        y[t] = [0.9 * y[t - 1, 0] + 0.1, 0.3 * y[t - 1, 0] + 0.5 * y[t - 1, 1]]
    m = fit_var(y[:12], 1)
    exact = dataclasses.replace(m, sigma=np.zeros((2, 2)))
    with pytest.raises(SingularSigma):
        compute_aic(exact)


def test_select_lag_order_examples():
    ok = 0
    for s in range(20):
        p, recs = select_lag_order(simulate_var(var2_spec(s, T=600)), 6)
        ok += p == 2
        assert len({r.t_eff for r in recs}) == 1
    assert ok >= 17
    p, recs = select_lag_order(simulate_var(var1_spec(0, T=200)), 1)
    assert p == 1 and len(recs) == 1


def test_select_lag_order_white_noise_mode():
    picks = []
    for s in range(15):
        y = stream(s, "wn").standard_normal((400, 3))
        picks.append(select_lag_order(y, 4)[0])
    assert max(set(picks), key=picks.count) == 1


def test_forecast_examples():
    m = _model([0.0, 0.0], [0.5 * np.eye(2)])
    fc = forecast(m, np.array([[2.0, 4.0]]), 2)
    assert fc.tolist() == [[1.0, 2.0], [0.5, 1.0]]
    const = _model([3.0, 3.0], [np.zeros((2, 2))])
    assert forecast(const, np.zeros((1, 2)), 4).tolist() == [[3.0, 3.0]] * 4
    with pytest.raises(HistoryTooShort):
        forecast(_model([0, 0], np.zeros((3, 2, 2))), np.zeros((2, 2)), 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 5), st.integers(1, 30))
def test_forecast_matches_naive_loop(seed, p, k, h):
    spec = random_stable_spec(k, p, 100, seed)
    g = stream(seed, "hist")
    hist = g.standard_normal((p + 3, k))
    m = _model(spec.alpha, spec.beta)
    fc = forecast(m, hist, h)
    assert fc.tolist() == naive_forecast(spec.alpha.tolist(), spec.beta.tolist(), hist.tolist(), h)
    assert forecast(m, hist, 1).tolist() == fc[:1].tolist()


def test_forecast_converges_to_mean():
    for s in range(5):
        spec = random_stable_spec(4, 2, 100, s, radius=0.9)
        m = _model(spec.alpha, spec.beta)
        fc = forecast(m, stream(s, "conv").standard_normal((2, 4)) * 5, 500)
        assert np.allclose(fc[-1], m.mean(), atol=1e-6)


def test_scaling_equivariance():
    fm = simulate_var(var2_spec(11, T=400))
    y = np.asarray(fm.values)
    c = 37.5
    scaled = y.copy()
    scaled[:, 2] *= c
    base = forecast(fit_var(y, 2), y, 10)
    fc = forecast(fit_var(scaled, 2), scaled, 10)
    fc[:, 2] /= c
    assert np.allclose(fc, base, rtol=1e-8, atol=1e-10)


def test_stability_examples():
    for factor, stable in ((0.5, True), (1.2, False), (1.0, False)):
        ok, rho = is_stable(_model([0, 0, 0], [factor * np.eye(3)]))
        assert ok is stable
        assert rho == pytest.approx(factor, abs=1e-3)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 4))
def test_spectral_radius_vs_eigvals(seed, p, k):
    beta = stream(seed, "rho").normal(0, 0.5, size=(p, k, k))
    c = _model(np.zeros(k), beta).companion()
    ref = np.abs(np.linalg.eigvals(c)).max()
    assert spectral_radius(c) == pytest.approx(ref, abs=1e-3)


def test_unstable_warns():
    with pytest.warns(UnstableModelWarning):
        assert not warn_if_unstable(_model([0, 0], [1.2 * np.eye(2)]))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert warn_if_unstable(_model([0, 0], [0.2 * np.eye(2)]))


def test_model_round_trip(tmp_path):
    m = fit_var(simulate_var(var2_spec(2, T=300)), 2)
    dump_model(m, tmp_path / "m.txt")
    back = load_model(tmp_path / "m.txt")
    assert back.labels == m.labels and back.p == 2 and back.t_eff == m.t_eff
    assert np.array_equal(back.alpha, m.alpha)
    assert np.array_equal(back.beta, m.beta)
    assert np.array_equal(back.sigma, m.sigma)
