"""Forecast accuracy, interval coverage, standardized residuals and PACF.

Stored metrics are always on the raw share scale; ``scale`` (100 for the
usual tables) is applied only when rendering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bdarch.compositional import alr
from bdarch.dirichlet import standardized_residual

PACF_THRESHOLD = 0.2


def _pair(actuals, points):
    y = np.asarray(actuals, dtype=float)
    f = np.asarray(points, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if f.ndim == 1:
        f = f[:, None]
    if y.shape != f.shape:
        raise ValueError(f"shape mismatch: actuals {y.shape} vs forecasts {f.shape}")
    if y.shape[0] == 0:
        raise ValueError("empty evaluation window")
    return y, f


def frmse(actuals, points) -> tuple[np.ndarray, float]:
    """Per-component root mean squared error and its mean over components."""
    y, f = _pair(actuals, points)
    per = np.sqrt(np.mean((y - f) ** 2, axis=0))
    return per, float(per.mean())


def fmae(actuals, points) -> tuple[np.ndarray, float]:
    y, f = _pair(actuals, points)
    per = np.mean(np.abs(y - f), axis=0)
    return per, float(per.mean())


def frss(actuals, points) -> tuple[np.ndarray, float]:
    """Per-component residual sum of squares and the total."""
    y, f = _pair(actuals, points)
    per = np.sum((y - f) ** 2, axis=0)
    return per, float(per.sum())


def empirical_coverage(actuals, lower, upper) -> tuple[np.ndarray, float]:
    y, lo = _pair(actuals, lower)
    _, hi = _pair(actuals, upper)
    inside = (lo <= y) & (y <= hi)
    per = inside.mean(axis=0)
    return per, float(per.mean())


@dataclass
class MetricsReport:
    names: list[str]
    frmse: np.ndarray
    fmae: np.ndarray
    frss: np.ndarray
    coverage: np.ndarray | None = None
    scale: float = 1.0
    extra: dict = field(default_factory=dict)

    @classmethod
    def compute(cls, actuals, points, lower=None, upper=None, names=None, scale=1.0):
        y, _ = _pair(actuals, points)
        names = list(names) if names is not None else [f"c{j + 1}" for j in range(y.shape[1])]
        cov = None
        if lower is not None and upper is not None:
            cov = empirical_coverage(actuals, lower, upper)[0]
        return cls(names, frmse(actuals, points)[0], fmae(actuals, points)[0], frss(actuals, points)[0], cov, scale)

    @property
    def frmse_mean(self) -> float:
        return float(self.frmse.mean())

    @property
    def fmae_mean(self) -> float:
        return float(self.fmae.mean())

    @property
    def fmae_total(self) -> float:
        return float(self.fmae.sum())

    @property
    def frss_total(self) -> float:
        return float(self.frss.sum())

    @property
    def coverage_mean(self) -> float | None:
        return None if self.coverage is None else float(self.coverage.mean())

    def rows(self) -> list[dict]:
        """Per-component rows plus ``mean`` and ``total`` rows, display-scaled.

        ``frss`` multiplies the raw sum of squares by ``scale``;
        ``frss_scaled_data`` is the sum of squares of errors measured on
        data already multiplied by ``scale`` (a factor ``scale**2``).
        """
        k = self.scale
        out = []
        for j, n in enumerate(self.names):
            out.append({"component": n, "frmse": k * self.frmse[j], "fmae": k * self.fmae[j],
                        "frss": k * self.frss[j], "frss_scaled_data": k * k * self.frss[j],
                        "coverage": None if self.coverage is None else float(self.coverage[j])})
        out.append({"component": "mean", "frmse": k * self.frmse_mean, "fmae": k * self.fmae_mean,
                    "frss": k * float(self.frss.mean()), "frss_scaled_data": k * k * float(self.frss.mean()),
                    "coverage": self.coverage_mean})
        out.append({"component": "total", "frmse": None, "fmae": k * self.fmae_total,
                    "frss": k * self.frss_total, "frss_scaled_data": k * k * self.frss_total, "coverage": None})
        return out

    def table(self) -> str:
        lines = [f"{'component':>12} {'FRMSE':>10} {'FMAE':>10} {'FRSS':>10} {'coverage':>9}"]
        for r in self.rows():
            cells = [f"{r['component']:>12}"]
            for key in ("frmse", "fmae", "frss"):
                cells.append(f"{r[key]:10.4f}" if r[key] is not None else f"{'':>10}")
            cells.append(f"{r['coverage']:9.3f}" if r["coverage"] is not None else f"{'':>9}")
            lines.append(" ".join(cells))
        return "\n".join(lines)


# --------------------------------------------------------------------------
# residuals

def ssr_series(y, mu=None, phi=None, *, eta=None, chol=None, sigma=1.0, ref=None) -> np.ndarray:
    """Per-time sum of squared standardized residuals.

    Dirichlet models pass ``mu`` (T, J) and ``phi`` (T,); each component
    residual is scaled by its conditional standard deviation. The Gaussian
    alr model passes ``eta`` (T, J-1) and the covariance factor ``chol``
    (covariance = (sigma chol)(sigma chol)'); residuals are whitened with
    its inverse.
    """
    y = np.asarray(y, dtype=float)
    if mu is not None:
        r = standardized_residual(y, mu, phi)
    elif eta is not None:
        d = y.shape[1] - 1
        Lc = sigma * (np.eye(d) if chol is None else np.asarray(chol, dtype=float))
        resid = alr(y, ref) - np.asarray(eta, dtype=float)
        r = np.linalg.solve(Lc, resid.T).T
    else:
        raise ValueError("pass mu/phi for Dirichlet models or eta/chol for the alr model")
    out = np.sum(r * r, axis=1)
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite standardized residuals")
    return out


def autocorrelation(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations r_0..r_max_lag with the 1/n normalization."""
    x = np.asarray(x, dtype=float)
    xc = x - x.mean()
    c0 = xc @ xc
    if not c0 > 0:
        raise ValueError("series has zero variance")
    n = x.size
    return np.array([xc[: n - k] @ xc[k:] for k in range(max_lag + 1)]) / c0


def pacf(x, max_lag: int = 20) -> np.ndarray:
    """Partial autocorrelations at lags 1..max_lag by Durbin-Levinson."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size <= max_lag + 1:
        raise ValueError("series must be 1-d and longer than max_lag + 1")
    r = autocorrelation(x, max_lag)
    out = np.empty(max_lag)
    phi = np.zeros(max_lag + 1)
    v = 1.0
    for k in range(1, max_lag + 1):
        num = r[k] - phi[1:k] @ r[k - 1:0:-1]
        a = num / v
        new = phi.copy()
        new[k] = a
        new[1:k] = phi[1:k] - a * phi[k - 1:0:-1]
        phi = new
        v *= 1.0 - a * a
        out[k - 1] = a
    return out


def residual_pacf_report(ssr_by_model: dict, max_lag: int = 20, threshold: float = PACF_THRESHOLD) -> dict:
    """PACF of each model's SSR series and the lags whose |PACF| exceeds ``threshold``."""
    report = {}
    for name, s in ssr_by_model.items():
        p = pacf(s, max_lag)
        report[name] = {"pacf": p, "flagged": [k + 1 for k in np.flatnonzero(np.abs(p) > threshold)]}
    return report
