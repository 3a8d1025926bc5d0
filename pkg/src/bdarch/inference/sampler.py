"""Warm-up adaptation and multi-chain orchestration."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from bdarch.inference.diagnostics import Diagnostics, ess_bulk, split_rhat
from bdarch.inference.nuts import NUTS

log = logging.getLogger(__name__)

INIT_SHRINK = 0.8


class InitializationError(RuntimeError):
    pass


@dataclass
class SamplerConfig:
    n_chains: int = 4
    n_warmup: int = 500
    n_keep: int = 500
    target_accept: float = 0.8
    max_tree_depth: int = 10
    base_seed: int = 0
    init_radius: float = 1.0
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_chains < 1 or self.n_warmup < 1 or self.n_keep < 1:
            raise ValueError("n_chains, n_warmup and n_keep must be >= 1")
        if not 0 < self.target_accept < 1:
            raise ValueError("target_accept must lie in (0, 1)")

    @classmethod
    def simulation(cls, **kw) -> "SamplerConfig":
        """4 chains x 1000 iterations, 500 of them warm-up."""
        return cls(**{"n_chains": 4, "n_warmup": 500, "n_keep": 500, **kw})

    @classmethod
    def data_fit(cls, **kw) -> "SamplerConfig":
        """4 chains x 2000 iterations, 1000 of them warm-up."""
        return cls(**{"n_chains": 4, "n_warmup": 1000, "n_keep": 1000, **kw})


@dataclass
class PosteriorDraws:
    """Retained draws, unconstrained and constrained, stacked chain-major."""

    theta: np.ndarray
    draws: np.ndarray
    chain_id: np.ndarray
    names: list[str]
    accept_rate: np.ndarray
    step_size: np.ndarray
    n_divergent: int
    diagnostics: Diagnostics | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_chains(self) -> int:
        return int(self.chain_id.max()) + 1 if len(self.chain_id) else 0

    def by_chain(self, which: str = "draws") -> np.ndarray:
        x = getattr(self, which)
        return x.reshape(self.n_chains, -1, x.shape[1])

    def column(self, name: str) -> np.ndarray:
        return self.draws[:, self.names.index(name)]


class DualAveraging:
    """Step-size adaptation towards a target mean acceptance probability."""

    def __init__(self, step_size, target, gamma=0.05, t0=10.0, kappa=0.75):
        self.target, self.gamma, self.t0, self.kappa = target, gamma, t0, kappa
        self.restart(step_size)

    def restart(self, step_size):
        self.mu = math.log(10.0 * step_size)
        self.counter = 0
        self.s_bar = 0.0
        self.x_bar = 0.0

    def update(self, accept_prob):
        self.counter += 1
        accept_prob = min(1.0, accept_prob)
        eta = 1.0 / (self.counter + self.t0)
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (self.target - accept_prob)
        x = self.mu - self.s_bar * math.sqrt(self.counter) / self.gamma
        x_eta = self.counter ** (-self.kappa)
        self.x_bar = (1.0 - x_eta) * self.x_bar + x_eta * x
        return math.exp(x)

    def final(self):
        return math.exp(self.x_bar)


def warmup_windows(n_warmup, init_buffer=75, term_buffer=50, base_window=25):
    """Ends (exclusive) of the metric-estimation windows, expanding in size."""
    if n_warmup < 20:
        return [], 0, n_warmup
    if init_buffer + base_window + term_buffer > n_warmup:
        init_buffer = int(0.15 * n_warmup)
        term_buffer = int(0.1 * n_warmup)
        base_window = n_warmup - init_buffer - term_buffer
    ends = []
    start, size = init_buffer, base_window
    last = n_warmup - term_buffer
    while start < last:
        end = start + size
        if end + 2 * size > last:
            end = last
        ends.append(end)
        start, size = end, 2 * size
    return ends, init_buffer, last


def _run_chain(logp_grad, dim, cfg: SamplerConfig, chain: int, init=None):
    ss = np.random.SeedSequence(cfg.base_seed, spawn_key=(chain,))
    rng = np.random.default_rng(ss)
    q = lp = grad = None
    for k in range(100):
        # the box shrinks after each failure so far-from-data targets still find
        # the finite region near the origin
        radius = cfg.init_radius * INIT_SHRINK ** k
        q0 = np.array(init, float) if init is not None else rng.uniform(-radius, radius, dim)
        lp0, g0 = logp_grad(q0)
        if np.isfinite(lp0) and np.all(np.isfinite(g0)):
            q, lp, grad = q0, lp0, g0
            break
        init = None
    if q is None:
        raise InitializationError(f"chain {chain}: no finite initial point in 100 attempts")

    kernel = NUTS(logp_grad, np.ones(dim), step_size=1.0, max_depth=cfg.max_tree_depth, rng=rng)
    kernel.init_step_size(q, lp, grad)
    da = DualAveraging(kernel.step_size, cfg.target_accept)
    ends, win_start, adapt_end = warmup_windows(cfg.n_warmup)
    window = []
    n_div_warm = 0
    for it in range(cfg.n_warmup):
        q, lp, grad, st = kernel.transition(q, lp, grad)
        n_div_warm += st.divergent
        kernel.step_size = da.update(st.accept_prob)
        if win_start <= it < adapt_end:
            window.append(q)
        if ends and it + 1 == ends[0]:
            ends.pop(0)
            w = np.array(window)
            n = len(w)
            var = w.var(axis=0, ddof=1) if n > 1 else np.ones(dim)
            kernel.inv_metric = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
            window = []
            kernel.init_step_size(q, lp, grad)
            da.restart(kernel.step_size)
    kernel.step_size = da.final()

    keep = np.empty((cfg.n_keep, dim))
    acc = np.empty(cfg.n_keep)
    n_div = 0
    n_maxdepth = 0
    for it in range(cfg.n_keep):
        q, lp, grad, st = kernel.transition(q, lp, grad)
        keep[it] = q
        acc[it] = st.accept_prob
        n_div += st.divergent
        n_maxdepth += st.tree_depth >= cfg.max_tree_depth
    return {
        "draws": keep, "accept": float(acc.mean()), "step_size": kernel.step_size,
        "n_divergent": n_div, "n_max_depth": n_maxdepth, "n_divergent_warmup": n_div_warm,
        "inv_metric": kernel.inv_metric,
    }


def sample(logp_grad, dim, cfg: SamplerConfig, names=None, to_constrained=None, inits=None) -> PosteriorDraws:
    """Run ``cfg.n_chains`` NUTS chains on an arbitrary differentiable target.

    ``to_constrained`` maps one unconstrained row to the reported row.
    Chains are independent (their seeds derive from ``base_seed`` and the
    chain index) and results are stacked in chain order.
    """
    inits = inits or [None] * cfg.n_chains
    if cfg.n_jobs > 1 and cfg.n_chains > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as ex:
            futs = [ex.submit(_run_chain, logp_grad, dim, cfg, c, inits[c]) for c in range(cfg.n_chains)]
            results = [f.result() for f in futs]
    else:
        results = [_run_chain(logp_grad, dim, cfg, c, inits[c]) for c in range(cfg.n_chains)]

    theta = np.concatenate([r["draws"] for r in results])
    if to_constrained is not None:
        draws = np.array([to_constrained(row) for row in theta])
    else:
        draws = theta.copy()
    names = names or [f"theta[{k + 1}]" for k in range(draws.shape[1])]
    chain_id = np.repeat(np.arange(cfg.n_chains), cfg.n_keep)
    n_div = sum(r["n_divergent"] for r in results)
    by_chain = draws.reshape(cfg.n_chains, cfg.n_keep, -1)
    rhat = split_rhat(by_chain)
    ess = ess_bulk(by_chain)
    diag = Diagnostics(
        rhat=rhat, ess_bulk=ess,
        constant=(np.ptp(draws, axis=0) == 0),
        n_divergent=n_div, n_max_depth=sum(r["n_max_depth"] for r in results),
    )
    return PosteriorDraws(
        theta=theta, draws=draws, chain_id=chain_id, names=list(names),
        accept_rate=np.array([r["accept"] for r in results]),
        step_size=np.array([r["step_size"] for r in results]),
        n_divergent=n_div, diagnostics=diag,
        extra={"inv_metric": [r["inv_metric"] for r in results],
               "n_divergent_warmup": sum(r["n_divergent_warmup"] for r in results)},
    )


def sample_posterior(posterior, cfg: SamplerConfig) -> PosteriorDraws:
    """Sample a model :class:`~bdarch.model.Posterior`."""
    return sample(posterior.logp_grad, posterior.dim, cfg, names=posterior.param_names,
                  to_constrained=posterior.constrained_row)
