import numpy as np
import pytest
from scipy import stats

from bdarch.compositional import alr_inv
from bdarch.inference import SamplerConfig
from bdarch.simulation import (
    DARCH_ALPHA, DARCH_TAU, DgpParams, StudyConfig, StudyError, apply_regime_shift, draw_dgp_params,
    generate_series, initial_composition, inject_shocks, run_study, simulate_dataset,
)


@pytest.mark.parametrize("study", range(1, 7))
def test_parameter_supports(study, rng):
    for _ in range(50):
        p = draw_dgp_params(study, rng)
        assert p.A.shape == (4, 4) and np.all(np.abs(p.A) <= 0.75)
        assert p.beta.shape == (4,)
        if study in (3, 6):
            assert 0.05 <= p.sigma <= 0.5 and np.all(np.abs(p.M) <= 0.3)
            assert np.linalg.eigvalsh(p.Sigma).min() >= -1e-12
        else:
            assert 6.0 <= p.phi0 <= 7.5
        if study in (2, 5):
            assert (p.alpha, p.tau) == (DARCH_ALPHA, DARCH_TAU) == (0.8, -0.95)


def test_invalid_study():
    with pytest.raises(StudyError):
        draw_dgp_params(7, np.random.default_rng(0))
    with pytest.raises(ValueError):
        StudyConfig(2, T=50, train_len=60)


def test_initial_composition_near_uniform(rng):
    y = np.array([initial_composition(rng) for _ in range(2000)])
    np.testing.assert_allclose(y.sum(axis=1), 1.0, atol=1e-14)
    assert abs(y.mean() - 0.2) < 1e-3 and 0.007 < y[:, 0].std() < 0.011


@pytest.mark.parametrize("study", range(1, 7))
def test_generated_rows_are_compositions(study, rng):
    p = draw_dgp_params(study, rng)
    y, eta, lphi = generate_series(p, 100, rng)
    assert y.shape == (100, 5) and np.all(y > 0)
    np.testing.assert_allclose(y.sum(axis=1), 1.0, atol=1e-12)


def test_zero_dynamics_mean(rng):
    beta = np.array([0.3, -0.2, 0.1, 0.4])
    p = DgpParams("darma", np.zeros((4, 4)), beta, phi0=4.0)
    y, _, _ = generate_series(p, 10_000, rng)
    mu = alr_inv(beta)
    se = y[1:].std(axis=0) / np.sqrt(9999)
    assert np.all(np.abs(y[1:].mean(axis=0) - mu) < 4 * se)


def test_darch_without_feedback_reduces_to_constant_precision(rng):
    A = 0.3 * np.eye(4)
    beta = np.array([0.1, 0.2, -0.1, 0.0])
    darch = DgpParams("darch", A, beta, phi0=3.0, alpha=0.0, tau=0.0)
    y1, _, lphi = generate_series(darch, 3000, np.random.default_rng(1))
    np.testing.assert_array_equal(lphi, 3.0)
    y2, _, _ = generate_series(DgpParams("darma", A, beta, phi0=3.0), 3000, np.random.default_rng(2))
    assert stats.ks_2samp(y1[1:, 0], y2[1:, 0]).pvalue > 0.001


def test_darch_recursion_by_hand(rng):
    p = DgpParams("darch", 0.2 * np.eye(4), np.zeros(4), phi0=5.0)
    y, eta, lphi = generate_series(p, 6, rng)
    from bdarch.compositional import alr
    a = alr(y)
    assert lphi[1] == pytest.approx(5.0)
    for t in range(2, 6):
        e = a[t - 1] - eta[t - 1]
        assert lphi[t] == pytest.approx(5.0 + 0.8 * (lphi[t - 1] - 5.0) - 0.95 * e @ e, abs=1e-12)


def test_log_precision_is_clamped(caplog):
    p = DgpParams("darch", 0.2 * np.eye(4), np.zeros(4), phi0=1.0, tau=-1e6)
    with caplog.at_level("INFO"):
        _, _, lphi = generate_series(p, 20, np.random.default_rng(0))
    assert lphi.min() == -30.0
    assert "clamped" in caplog.text


def test_shock_count_and_times():
    counts = []
    y = np.full((100, 5), 0.2)
    for s in range(400):
        out, times = inject_shocks(y, 60, np.random.default_rng(s))
        assert all(1 <= t <= 60 for t in times) and times == sorted(set(times))
        mask = np.zeros(100, bool)
        mask[np.array(times, int) - 1] = True
        np.testing.assert_array_equal(out[~mask], y[~mask])
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-14)
        counts.append(len(times))
    assert 7 <= np.mean(counts) <= 13


def test_no_shock_when_first_gap_exceeds_training():
    y = np.full((100, 5), 0.2)
    out, times = inject_shocks(y, 60, np.random.default_rng(0), mean_gap=500.0)
    assert times == [] and np.array_equal(out, y)


def test_regime_shift_window(rng):
    for _ in range(100):
        p = draw_dgp_params(5, rng)
        sched, ts = apply_regime_shift(p, 5, 100, rng)
        assert 10 <= ts <= 50 and len(sched) == 100
        shifted = [t + 1 for t, q in enumerate(sched) if q is not p]
        assert shifted == list(range(ts, ts + 10))
        after = sched[ts + 9]
        assert after is p and np.array_equal(after.A, p.A)
        assert sched[ts - 1].alpha == p.alpha and sched[ts - 1].tau == p.tau


def test_dataset_structure(rng):
    ds = simulate_dataset(2, 100, 60, rng)
    assert ds.schedule is None and ds.t_shift is None
    ds = simulate_dataset(4, 100, 60, rng)
    assert ds.shock_times == [] and np.array_equal(ds.y, ds.y_clean) and 10 <= ds.t_shift <= 50


def test_study_runner_deterministic_and_shapes():
    cfg = StudyConfig(1, n_replicates=2, T=40, train_len=30, seed=4)
    scfg = SamplerConfig(n_chains=1, n_warmup=30, n_keep=20)
    r1 = run_study(cfg, scfg)
    r2 = run_study(cfg, scfg)
    assert r1.model_names() == ["B-DARMA", "B-DARCH", "B-tVARMA"]
    rows1 = [{k: v for k, v in r.items() if k != "fit_seconds"} for r in r1.replicate_rows()]
    rows2 = [{k: v for k, v in r.items() if k != "fit_seconds"} for r in r2.replicate_rows()]
    assert rows1 == rows2 and r1.failures == r2.failures
    assert len(r1.outcomes) >= 1 and len(rows1) == 3 * len(r1.outcomes)
    assert len(r1.outcomes) + len(r1.failures) == 2
    assert len(r1.pacf_rows()) == 3 * 20
    np.testing.assert_array_equal(r1.mean_pacf()["B-DARCH"], r2.mean_pacf()["B-DARCH"])
