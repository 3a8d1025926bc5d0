import numpy as np
import pytest

from bdarch import dirichlet
from bdarch.compositional import alr
from bdarch.metrics import (
    MetricsReport, autocorrelation, empirical_coverage, fmae, frmse, frss, pacf, residual_pacf_report,
    ssr_series,
)


def test_point_metrics_trivial_cases(rng):
    y = rng.dirichlet(np.ones(4), size=7)
    assert frmse(y, y)[1] == 0 and fmae(y, y)[1] == 0 and frss(y, y)[1] == 0
    per, m = frmse(y, y + 0.1)
    np.testing.assert_allclose(per, 0.1)
    assert m == pytest.approx(0.1)
    assert fmae(y, y - 0.1)[1] == pytest.approx(0.1)


def test_hand_cases():
    actual = np.array([[0.0], [0.0]])
    pred = np.array([[0.3], [-0.4]])
    assert frmse(actual, pred)[1] == pytest.approx(np.sqrt(0.125), abs=1e-15)
    assert fmae(actual, pred)[1] == pytest.approx(0.35, abs=1e-15)
    assert frss([[0.5]], [[0.3]])[1] == pytest.approx(0.04, abs=1e-15)


def test_frss_total_is_sum(rng):
    y, f = rng.random((2, 10, 5))
    per, tot = frss(y, f)
    assert tot == pytest.approx(per.sum(), abs=1e-15)


def test_frmse_equals_fmae_for_constant_magnitude(rng):
    y = rng.random((12, 3))
    signs = rng.choice([-1.0, 1.0], size=y.shape)
    f = y + 0.07 * signs
    np.testing.assert_allclose(frmse(y, f)[0], fmae(y, f)[0], atol=1e-15)


def test_coverage_cases():
    y = np.arange(4.0)[:, None]
    assert empirical_coverage(y, y - 1, y + 1)[1] == 1.0
    assert empirical_coverage(y, y + 1, y + 2)[1] == 0.0
    lo = np.array([[-1.0], [5.0], [1.0], [9.0]])
    assert empirical_coverage(y, lo, lo + 2.5)[1] == 0.5


def test_errors():
    with pytest.raises(ValueError):
        frmse(np.empty((0, 3)), np.empty((0, 3)))
    with pytest.raises(ValueError):
        fmae(np.ones((2, 3)), np.ones((3, 3)))
    with pytest.raises(ValueError):
        pacf(np.ones(50), 5)


def test_report_rows_and_scale(rng):
    y, f = rng.random((2, 6, 3))
    rep = MetricsReport.compute(y, f, f - 0.5, f + 0.5, names=["a", "b", "c"], scale=100)
    rows = rep.rows()
    assert [r["component"] for r in rows] == ["a", "b", "c", "mean", "total"]
    assert rows[3]["frmse"] == pytest.approx(100 * frmse(y, f)[1])
    assert rows[4]["frss"] == pytest.approx(100 * frss(y, f)[1])
    assert rows[4]["frss_scaled_data"] == pytest.approx(frss(100 * y, 100 * f)[1])
    assert rep.frmse_mean == pytest.approx(frmse(y, f)[1])
    assert "FRMSE" in rep.table()


def test_ssr_zero_at_mean(rng):
    mu = rng.dirichlet(np.ones(5), size=10)
    np.testing.assert_allclose(ssr_series(mu, mu, np.full(10, 50.0)), 0.0, atol=1e-28)


def test_ssr_dirichlet_matches_component_variance(rng):
    mu = rng.dirichlet(np.ones(3) * 4, size=4)
    phi = np.array([5.0, 10.0, 20.0, 40.0])
    y = rng.dirichlet(np.ones(3) * 4, size=4)
    var = mu * (1 - mu) / (phi[:, None] + 1)
    np.testing.assert_allclose(ssr_series(y, mu, phi), np.sum((y - mu) ** 2 / var, axis=1), rtol=1e-13)


def test_ssr_gaussian_identity_factor(rng):
    y = rng.dirichlet(np.ones(4) * 3, size=8)
    eta = rng.normal(0, 0.5, (8, 3))
    np.testing.assert_allclose(ssr_series(y, eta=eta, chol=np.eye(3)), np.sum((alr(y) - eta) ** 2, axis=1),
                               rtol=1e-13)
    L = np.array([[1.0, 0, 0], [0.5, 0.8, 0], [0.1, -0.2, 0.6]])
    r = np.linalg.solve(0.3 * L, (alr(y) - eta).T).T
    np.testing.assert_allclose(ssr_series(y, eta=eta, chol=L, sigma=0.3), np.sum(r * r, axis=1), rtol=1e-12)


def test_ssr_rejects_nonfinite():
    with pytest.raises(ValueError):
        ssr_series(np.array([[0.5, 0.5]]), np.array([[0.5, 0.5]]), np.array([np.nan]))


def test_mean_ssr_equals_J(rng):
    mu = np.array([0.1, 0.2, 0.3, 0.15, 0.25])
    y = dirichlet.sample(np.tile(mu, (10_000, 1)), np.full(10_000, 30.0), rng)
    assert ssr_series(y, np.tile(mu, (10_000, 1)), np.full(10_000, 30.0)).mean() == pytest.approx(5, rel=0.05)


def test_pacf_lag_one_is_autocorrelation(rng):
    x = rng.standard_normal(200).cumsum()
    assert pacf(x, 3)[0] == pytest.approx(autocorrelation(x, 1)[1], abs=1e-15)


def test_pacf_ar1(rng):
    n = 100_000
    e = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = e[0]
    for t in range(1, n):
        x[t] = 0.5 * x[t - 1] + e[t]
    p = pacf(x, 5)
    assert p[0] == pytest.approx(0.5, abs=0.02)
    assert np.all(np.abs(p[1:]) < 0.02)


def ols_pacf(x, k):
    """Last coefficient of a least-squares AR(k) fit on the zero-padded demeaned series."""
    xc = x - x.mean()
    n = xc.size
    pad = np.concatenate([np.zeros(k), xc, np.zeros(k)])
    rows = n + k
    Y = pad[k:k + rows]
    Xm = np.column_stack([pad[k - i:k - i + rows] for i in range(1, k + 1)])
    coef = np.linalg.lstsq(Xm, Y, rcond=None)[0]
    return coef[-1]


def test_pacf_matches_ols_oracle(rng):
    for _ in range(5):
        n = int(rng.integers(100, 400))
        x = np.convolve(rng.standard_normal(n + 3), [1.0, 0.6, -0.3, 0.2], mode="valid")
        p = pacf(x, 12)
        for k in range(1, 13):
            assert p[k - 1] == pytest.approx(ols_pacf(x, k), abs=1e-6)


def test_pacf_white_noise_flags(rng):
    flagged = residual_pacf_report({"m": rng.chisquare(5, 500)})["m"]["flagged"]
    assert len(flagged) <= 1


def test_pacf_ar_structure_flagged(rng):
    x = np.empty(500)
    x[0] = 0
    for t in range(1, 500):
        x[t] = 0.7 * x[t - 1] + rng.standard_normal()
    assert 1 in residual_pacf_report({"m": x})["m"]["flagged"]


def test_threshold_is_strict(rng):
    x = rng.standard_normal(300).cumsum()
    p1 = abs(pacf(x, 20)[0])
    assert 1 not in residual_pacf_report({"m": x}, threshold=p1)["m"]["flagged"]
    assert 1 in residual_pacf_report({"m": x}, threshold=np.nextafter(p1, 0))["m"]["flagged"]
