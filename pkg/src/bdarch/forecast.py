"""Posterior-predictive simulation of future compositions."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from bdarch import dirichlet
from bdarch.compositional import CompositionalSeries, alr, alr_inv
from bdarch.covariates import DesignMatrices, build_designs
from bdarch.model import kernels
from bdarch.model.posterior import Posterior
from bdarch.model.spec import ModelSpec, Priors

log = logging.getLogger(__name__)

MIN_DRAWS = 100
LEVELS = (0.95, 0.5)


@dataclass
class ForecastResult:
    """Simulated future paths for every retained posterior draw.

    ``paths`` holds sampled compositions and ``mu`` the conditional mean
    compositions, both of shape (n_draws, S, J). Rows of invalid draws are
    NaN and excluded from every summary.
    """

    paths: np.ndarray
    mu: np.ndarray
    valid: np.ndarray
    times: list
    names: list[str]
    n_resampled: int = 0
    point_kind: str = "mu"
    bounds: dict = field(default_factory=dict)

    @property
    def S(self) -> int:
        return self.paths.shape[1]

    @property
    def J(self) -> int:
        return self.paths.shape[2]

    @property
    def n_invalid(self) -> int:
        return int((~self.valid).sum())

    @property
    def point(self) -> np.ndarray:
        """Posterior mean of mu (default) or of the sampled y, shape (S, J)."""
        src = self.mu if self.point_kind == "mu" else self.paths
        return src[self.valid].mean(axis=0)

    def interval(self, level: float) -> tuple[np.ndarray, np.ndarray]:
        if level not in self.bounds:
            self.bounds[level] = interval(self, level)
        return self.bounds[level]

    def rows(self, levels=LEVELS) -> list[dict]:
        """One record per (time, component) in time-major order."""
        pt = self.point
        ivs = {lv: self.interval(lv) for lv in levels}
        out = []
        for s in range(self.S):
            for j in range(self.J):
                rec = {"time": self.times[s], "component": self.names[j], "point": float(pt[s, j])}
                for lv, (lo, hi) in ivs.items():
                    tag = int(round(lv * 100))
                    rec[f"lower_{tag}"] = float(lo[s, j])
                    rec[f"upper_{tag}"] = float(hi[s, j])
                out.append(rec)
        return out


def interval(result: ForecastResult, level: float) -> tuple[np.ndarray, np.ndarray]:
    """Equal-tailed nearest-rank interval of the sampled compositions.

    With n valid draws the bounds are the order statistics of rank
    k = ceil(n (1 - level) / 2) and n + 1 - k (1-based).
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    y = result.paths[result.valid]
    n = y.shape[0]
    if n == 0:
        raise ValueError("no valid forecast paths")
    if n < MIN_DRAWS:
        warnings.warn(f"interval from only {n} draws", RuntimeWarning, stacklevel=2)
    k = max(1, math.ceil(n * (1.0 - level) / 2.0 - 1e-9))
    ys = np.sort(y, axis=0)
    return ys[k - 1], ys[n - k]


def _future_times(series, S):
    idx = list(series.time_index) if isinstance(series, CompositionalSeries) else []
    if idx and all(isinstance(t, (int, np.integer)) for t in idx[-2:]):
        step = idx[-1] - idx[-2] if len(idx) > 1 else 1
        return [int(idx[-1] + step * (s + 1)) for s in range(S)]
    T = len(idx) if idx else np.asarray(series).shape[0]
    return [T + s + 1 for s in range(S)]


class _Stack:
    """Parameters of many draws stacked along a leading axis."""

    def __init__(self, post: Posterior, rows):
        pvs = [post.from_constrained_row(r) for r in rows]
        s = post.spec
        self.A = np.array([p.A for p in pvs]).reshape(len(pvs), s.P, s.d, s.d)
        self.B = np.array([p.B for p in pvs]).reshape(len(pvs), s.Q, s.d, s.d)
        self.beta = np.array([p.beta for p in pvs])
        self.gamma = np.array([p.gamma for p in pvs]).reshape(len(pvs), -1)
        self.alpha = np.array([p.alpha for p in pvs]).reshape(len(pvs), s.L)
        self.tau = np.array([p.tau for p in pvs]).reshape(len(pvs), s.K)
        self.sigma = np.array([p.sigma for p in pvs])
        self.chol = np.array([p.omega_chol if p.omega_chol is not None else np.eye(s.d) for p in pvs])
        self.pvs = pvs


def _simulate(post: Posterior, st: _Stack, Xf, Zf, S, rng):
    spec = post.spec
    N, d, J, ref = len(st.pvs), spec.d, spec.J, spec.ref
    P, Q, L, K = spec.P, spec.Q, spec.L, spec.K
    nE = max(Q, K)
    # most recent first
    a_hist = np.zeros((N, P, d))
    xb_hist = np.zeros((N, P, d))
    e_hist = np.zeros((N, nE, d))
    dev_hist = np.zeros((N, L))
    T = post.a.shape[0]
    for n, pv in enumerate(st.pvs):
        _, _, e, dev, xb, _ = kernels.latent_path(
            post.a, post.X, post.Z, np.ascontiguousarray(pv.A), np.ascontiguousarray(pv.B),
            pv.beta, pv.gamma, pv.alpha, pv.tau, spec.m)
        for p in range(P):
            a_hist[n, p] = post.a[T - 1 - p]
            xb_hist[n, p] = xb[T - 1 - p]
        for q in range(nE):
            e_hist[n, q] = e[T - 1 - q]
        for l in range(L):
            dev_hist[n, l] = dev[T - 1 - l]

    paths = np.empty((N, S, J))
    mus = np.empty((N, S, J))
    failed = np.zeros(N, dtype=bool)
    for s in range(S):
        xb = np.einsum("ik,nk->ni", Xf[s], st.beta)
        eta = xb.copy()
        for p in range(P):
            eta += np.einsum("nik,nk->ni", st.A[:, p], a_hist[:, p] - xb_hist[:, p])
        for q in range(Q):
            eta += np.einsum("nik,nk->ni", st.B[:, q], e_hist[:, q])
        bad = ~np.all(np.isfinite(eta), axis=1)
        eta[bad] = 0.0
        mu = alr_inv(eta, ref)
        if spec.variant.dirichlet:
            zg = st.gamma @ Zf[s]
            dev = (st.alpha * dev_hist).sum(axis=1) if L else np.zeros(N)
            for k in range(K):
                dev = dev + st.tau[:, k] * np.sum(e_hist[:, k] ** 2, axis=1)
            lphi = zg + dev
            out = ~np.isfinite(lphi) | (np.abs(lphi) > kernels.LOG_PHI_BOUND)
            bad |= out
            lphi[out] = 0.0
            y = dirichlet.sample(mu, np.exp(lphi), rng)
            a_new = alr(y, ref)
        else:
            z = rng.standard_normal((N, d))
            a_draw = eta + st.sigma[:, None] * np.einsum("nik,nk->ni", st.chol, z)
            bad |= ~np.all(np.isfinite(a_draw), axis=1)
            a_draw[bad] = 0.0
            y = alr_inv(a_draw, ref)
            a_new = alr(y, ref)
            dev = np.zeros(N)
        failed |= bad
        paths[:, s] = y
        mus[:, s] = mu
        e_new = a_new - eta
        if P:
            a_hist = np.concatenate([a_new[:, None], a_hist[:, :-1]], axis=1)
            xb_hist = np.concatenate([xb[:, None], xb_hist[:, :-1]], axis=1)
        if nE:
            e_hist = np.concatenate([e_new[:, None], e_hist[:, :-1]], axis=1)
        if L:
            dev_hist = np.concatenate([dev[:, None], dev_hist[:, :-1]], axis=1)
    return paths, mus, failed


def predict(spec: ModelSpec, draws, series, S: int, rng: np.random.Generator,
            designs: DesignMatrices | None = None, designs_future: DesignMatrices | None = None,
            point: str = "mu") -> ForecastResult:
    """Sample the joint predictive of the next ``S`` compositions.

    Parameters
    ----------
    spec : ModelSpec
    draws : PosteriorDraws or ndarray
        Retained draws; rows are constrained parameter vectors.
    series : CompositionalSeries or ndarray
        The training data the draws were fitted to.
    S : int
        Horizon.
    rng : numpy.random.Generator
    designs, designs_future : DesignMatrices, optional
        Training and forecast-period designs. By default both come from
        the spec's covariate configuration, the future block continuing
        the training time axis.
    point : {"mu", "y"}
        Whether the point forecast averages conditional means or samples.

    Returns
    -------
    ForecastResult
        Paths whose recursion failed (non-finite values or a log precision
        beyond the rejection bound) are re-simulated once and otherwise
        marked invalid.
    """
    if S < 1:
        raise ValueError("horizon must be at least 1")
    if point not in ("mu", "y"):
        raise ValueError("point must be 'mu' or 'y'")
    rows = np.asarray(getattr(draws, "draws", draws), dtype=float)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise ValueError("need a non-empty 2-d array of draws")
    values = series.values if isinstance(series, CompositionalSeries) else np.asarray(series, float)
    T = values.shape[0]
    post = Posterior(spec, Priors(), values, designs)
    if designs_future is None:
        designs_future = build_designs(spec.mean_covariates, spec.prec_covariates, S, spec.J, t0=T, train_len=T)
    if designs_future.X.shape[0] < S:
        raise ValueError("future designs shorter than the horizon")
    Xf = designs_future.X[:S]
    Zf = designs_future.z[:S] if spec.variant.dirichlet else np.zeros((S, 0))

    st = _Stack(post, rows)
    paths, mus, failed = _simulate(post, st, Xf, Zf, S, rng)
    n_retry = int(failed.sum())
    if n_retry:
        idx = np.flatnonzero(failed)
        sub = _Stack(post, rows[idx])
        p2, m2, f2 = _simulate(post, sub, Xf, Zf, S, rng)
        paths[idx], mus[idx] = p2, m2
        failed[idx] = f2
        log.info("re-simulated %d paths, %d still invalid", n_retry, int(f2.sum()))
    paths[failed] = np.nan
    mus[failed] = np.nan
    names = list(series.names) if isinstance(series, CompositionalSeries) else [f"c{j + 1}" for j in range(spec.J)]
    return ForecastResult(paths, mus, ~failed, _future_times(series, S), names, n_retry, point)
