"""Split R-hat and bulk effective sample size.

Inputs are arrays of shape (n_chains, n_draws) or (n_chains, n_draws, n_params).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata, norm


@dataclass
class Diagnostics:
    rhat: np.ndarray
    ess_bulk: np.ndarray
    constant: np.ndarray
    n_divergent: int
    n_max_depth: int

    def summary(self, names=None) -> dict:
        names = names or [f"p{k}" for k in range(len(self.rhat))]
        return {
            "max_rhat": float(np.nanmax(self.rhat)) if len(self.rhat) else 1.0,
            "min_ess_bulk": float(np.nanmin(self.ess_bulk)) if len(self.ess_bulk) else 0.0,
            "n_divergent": int(self.n_divergent),
            "n_max_treedepth": int(self.n_max_depth),
            "constant_params": [n for n, c in zip(names, self.constant) if c],
            "rhat": {n: float(r) for n, r in zip(names, self.rhat)},
            "ess_bulk": {n: float(e) for n, e in zip(names, self.ess_bulk)},
        }


def _as3d(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :, None]
    elif x.ndim == 2:
        x = x[:, :, None]
    return x


def _split(x):
    n = x.shape[1] // 2
    if n < 1:
        return x
    return np.concatenate([x[:, :n], x[:, x.shape[1] - n:]], axis=0)


def _is_constant(x):
    flat = x.reshape(-1, x.shape[2])
    return np.all(flat == flat[:1], axis=0)


def split_rhat(draws) -> np.ndarray:
    """Potential scale reduction on split chains; constant parameters report 1.

    Values are floored at 1: a smaller ratio only reflects sampling noise
    in the between-chain variance.
    """
    x = _split(_as3d(draws))
    m, n, _ = x.shape
    const = _is_constant(_as3d(draws))
    chain_mean = x.mean(axis=1)
    chain_var = x.var(axis=1, ddof=1)
    W = chain_var.mean(axis=0)
    B = n * chain_mean.var(axis=0, ddof=1)
    var_plus = (n - 1) / n * W + B / n
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(var_plus / W)
    return np.where(const, 1.0, np.maximum(r, 1.0))


def _autocov(x):
    """Autocovariance of each row via FFT (biased, lag 0 .. n-1)."""
    n = x.shape[-1]
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    xc = x - x.mean(axis=-1, keepdims=True)
    f = np.fft.rfft(xc, size)
    ac = np.fft.irfft(f * np.conj(f), size)[..., :n]
    return ac / n


def _ess_raw(x):
    """Multi-chain ESS of a (chains, draws) array with Geyer truncation."""
    m, n = x.shape
    if n < 4:
        return np.nan
    acov = _autocov(x)
    chain_mean = x.mean(axis=1)
    mean_var = acov[:, 0].mean() * n / (n - 1)
    var_plus = mean_var * (n - 1) / n
    if m > 1:
        var_plus += chain_mean.var(ddof=1)
    if var_plus <= 0:
        return np.nan
    rho = 1.0 - (mean_var - acov.mean(axis=0)) / var_plus
    rho[0] = 1.0
    # Geyer initial positive sequence on pair sums, then made monotone
    pairs = rho[: 2 * (n // 2)].reshape(-1, 2).sum(axis=1)
    k = 0
    while k < len(pairs) and pairs[k] > 0:
        k += 1
    pairs = pairs[:k]
    if k == 0:
        return float(m * n)
    pairs = np.minimum.accumulate(pairs)
    tau = -1.0 + 2.0 * pairs.sum()
    tau = max(tau, 1.0 / np.log10(m * n))
    return float(m * n / tau)


def ess_bulk(draws) -> np.ndarray:
    """Bulk ESS: rank-normalized split chains. Constant parameters give 0."""
    x3 = _as3d(draws)
    const = _is_constant(x3)
    xs = _split(x3)
    out = np.empty(x3.shape[2])
    for k in range(x3.shape[2]):
        if const[k]:
            out[k] = 0.0
            continue
        v = xs[:, :, k]
        r = rankdata(v, method="average").reshape(v.shape)
        z = norm.ppf((r - 3.0 / 8) / (v.size + 0.25))
        out[k] = _ess_raw(z)
    return out
