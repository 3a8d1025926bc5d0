"""The six simulation studies: data-generating processes, contamination, runner."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from bdarch import dirichlet
from bdarch.compositional import EPS, alr, alr_inv, close
from bdarch.model.kernels import LOG_PHI_BOUND

log = logging.getLogger(__name__)

DARCH_ALPHA = 0.8
DARCH_TAU = -0.95

STUDY_FAMILY = {1: "darma", 2: "darch", 3: "tvarma", 4: "darma", 5: "darch", 6: "tvarma"}
STUDY_NAMES = {
    1: "DARMA Shock", 2: "DARCH Shock", 3: "tVARMA Shock",
    4: "DARMA Regime Shift", 5: "DARCH Regime Shift", 6: "tVARMA Regime Shift",
}


class StudyError(ValueError):
    pass


def _check_study(study: int) -> int:
    if study not in STUDY_FAMILY:
        raise StudyError(f"study must be 1..6, got {study}")
    return study


@dataclass
class StudyConfig:
    study_id: int
    n_replicates: int = 50
    T: int = 100
    train_len: int = 60
    J: int = 5
    seed: int = 0

    def __post_init__(self):
        _check_study(self.study_id)
        if not 0 < self.train_len < self.T:
            raise StudyError("need 0 < train_len < T")
        if self.J < 2:
            raise StudyError("J must be at least 2")


@dataclass
class DgpParams:
    """Parameters of one simulated data set (alr reference: last component)."""

    family: str
    A: np.ndarray
    beta: np.ndarray
    phi0: float = 7.0
    alpha: float = DARCH_ALPHA
    tau: float = DARCH_TAU
    sigma: float = 0.1
    M: np.ndarray | None = None

    @property
    def Sigma(self) -> np.ndarray:
        return self.M.T @ self.M

    @property
    def J(self) -> int:
        return self.beta.shape[0] + 1


def draw_dgp_params(study: int, rng: np.random.Generator, J: int = 5) -> DgpParams:
    """Fresh DGP parameters for one replicate of ``study``."""
    family = STUDY_FAMILY[_check_study(study)]
    d = J - 1
    A = rng.uniform(-0.75, 0.75, size=(d, d))
    for _ in range(1000):
        raw = rng.normal(0.2, 0.03, size=J)
        if np.all(raw > 0):
            break
        log.info("redrawing non-positive intercept composition")
    beta = alr(close(raw))
    p = DgpParams(family, A, beta)
    if family == "tvarma":
        p.sigma = float(rng.uniform(0.05, 0.5))
        p.M = rng.uniform(-0.3, 0.3, size=(d, d))
    else:
        p.phi0 = float(rng.uniform(6.0, 7.5))
    return p


def initial_composition(rng: np.random.Generator, J: int = 5) -> np.ndarray:
    """Near-uniform start: 1/J plus N(0, 0.01^2) noise, then closed."""
    for _ in range(1000):
        y = 1.0 / J + rng.normal(0.0, 0.01, size=J)
        if np.all(y > 0):
            return close(y)
    raise StudyError("could not draw a positive initial composition")


def generate_series(params, T: int, rng: np.random.Generator, y1=None):
    """Forward-simulate T steps.

    ``params`` is a single :class:`DgpParams` or a length-T list of them
    (a regime schedule; entry t governs step t). Returns (y, eta, log_phi).
    """
    schedule = params if isinstance(params, (list, tuple)) else [params] * T
    if len(schedule) != T:
        raise StudyError("schedule length must equal T")
    J = schedule[0].J
    y = np.empty((T, J))
    eta = np.empty((T, J - 1))
    lphi = np.empty(T)
    y[0] = initial_composition(rng, J) if y1 is None else y1
    eta[0] = alr(y[0])
    lphi[0] = schedule[0].phi0
    n_clamped = 0
    for t in range(1, T):
        p = schedule[t]
        a_prev = alr(y[t - 1])
        mean = p.beta + p.A @ (a_prev - p.beta)
        if p.family == "tvarma":
            chol = np.linalg.cholesky(p.Sigma + 1e-12 * np.eye(J - 1))
            eta[t] = mean + p.sigma * chol @ rng.standard_normal(J - 1)
            lphi[t] = np.nan
            y[t] = alr_inv(eta[t])
            continue
        eta[t] = mean
        if p.family == "darch":
            innov = a_prev - eta[t - 1]
            lp = p.phi0 + p.alpha * (lphi[t - 1] - p.phi0) + p.tau * float(innov @ innov)
        else:
            lp = p.phi0
        if abs(lp) > LOG_PHI_BOUND:
            n_clamped += 1
            lp = float(np.clip(lp, -LOG_PHI_BOUND, LOG_PHI_BOUND))
        lphi[t] = lp
        y[t] = dirichlet.sample(alr_inv(eta[t]), np.exp(lp), rng)
    if n_clamped:
        log.info("clamped log precision at %d steps", n_clamped)
    return y, eta, lphi


def inject_shocks(y: np.ndarray, train_len: int, rng: np.random.Generator, mean_gap: float = 6.0):
    """Replace rows at cumulative Poisson(mean_gap) times <= train_len.

    Times are 1-based; a zero gap would repeat a time and is skipped.
    Returns (contaminated copy, shock times).
    """
    y = y.copy()
    times = []
    t = 0
    while True:
        t += int(rng.poisson(mean_gap))
        if t > train_len:
            break
        if t >= 1 and (not times or t > times[-1]):
            times.append(t)
    for t in times:
        y[t - 1] = close(np.maximum(rng.uniform(0.0, 1.0, size=y.shape[1]), EPS))
    return y, times


def apply_regime_shift(params: DgpParams, study: int, T: int, rng: np.random.Generator, window: int = 10):
    """Length-T schedule with a ``window``-step redraw starting at t_shift in [10, 50]."""
    _check_study(study)
    t_shift = int(rng.integers(10, 51))
    new = draw_dgp_params(study, rng, params.J)
    new = replace(new, alpha=params.alpha, tau=params.tau)
    schedule = [params] * T
    for t in range(t_shift - 1, min(t_shift - 1 + window, T)):
        schedule[t] = new
    return schedule, t_shift


@dataclass
class SimulatedDataset:
    study: int
    y: np.ndarray
    y_clean: np.ndarray
    params: DgpParams
    schedule: list | None = None
    shock_times: list = field(default_factory=list)
    t_shift: int | None = None


def simulate_dataset(study: int, T: int, train_len: int, rng: np.random.Generator, J: int = 5,
                     params: DgpParams | None = None) -> SimulatedDataset:
    params = params or draw_dgp_params(study, rng, J)
    schedule, t_shift = (None, None)
    if study >= 4:
        schedule, t_shift = apply_regime_shift(params, study, T, rng)
    y_clean, _, _ = generate_series(schedule or params, T, rng)
    y, times = (y_clean, [])
    if study <= 3:
        y, times = inject_shocks(y_clean, train_len, rng)
    return SimulatedDataset(study, y, y_clean, params, schedule, times, t_shift)


# --------------------------------------------------------------------------
# replication runner

FITTED_MODELS = (
    ("B-DARMA", dict(variant="BDARMA", P=1, Q=0)),
    ("B-DARCH", dict(variant="BDARMA_DARCH", P=1, Q=0, L=1, K=1)),
    ("B-tVARMA", dict(variant="BTVARMA", P=1, Q=0)),
)


@dataclass
class ModelOutcome:
    """Out-of-sample and residual summaries of one model on one replicate."""

    model: str
    frmse: float
    fmae: float
    coverage95: float
    pacf: np.ndarray
    ssr: np.ndarray
    max_rhat: float
    n_divergent: int
    fit_seconds: float


@dataclass
class StudyResult:
    config: StudyConfig
    outcomes: dict
    failures: list = field(default_factory=list)

    def replicate_rows(self) -> list[dict]:
        rows = []
        for rep in sorted(self.outcomes):
            for name, o in self.outcomes[rep].items():
                rows.append({"study": self.config.study_id, "replicate": rep, "model": name,
                             "frmse": o.frmse, "fmae": o.fmae, "coverage95": o.coverage95,
                             "max_rhat": o.max_rhat, "n_divergent": o.n_divergent,
                             "fit_seconds": round(o.fit_seconds, 3)})
        return rows

    def model_names(self) -> list[str]:
        return [n for n, _ in FITTED_MODELS if any(n in v for v in self.outcomes.values())]

    def frmse_table(self) -> dict:
        """Model -> array of per-replicate FRMSE (replicates sorted by id)."""
        return {n: np.array([self.outcomes[r][n].frmse for r in sorted(self.outcomes) if n in self.outcomes[r]])
                for n in self.model_names()}

    def mean_frmse(self) -> dict:
        return {n: float(v.mean()) for n, v in self.frmse_table().items()}

    def mean_fmae(self) -> dict:
        return {n: float(np.mean([self.outcomes[r][n].fmae for r in self.outcomes if n in self.outcomes[r]]))
                for n in self.model_names()}

    def mean_pacf(self) -> dict:
        return {n: np.mean([self.outcomes[r][n].pacf for r in self.outcomes if n in self.outcomes[r]], axis=0)
                for n in self.model_names()}

    def pacf_rows(self) -> list[dict]:
        rows = []
        for n, p in self.mean_pacf().items():
            rows += [{"model": n, "lag": k + 1, "mean_pacf": float(v)} for k, v in enumerate(p)]
        return rows


def replicate_seed(cfg: StudyConfig, replicate: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.seed, spawn_key=(cfg.study_id, replicate))


def plug_in_ssr(post, draws) -> np.ndarray:
    """SSR over the modelled span at the posterior-mean parameters."""
    from bdarch.metrics import ssr_series

    pv = post.from_constrained_row(draws.draws.mean(axis=0))
    m = post.spec.m
    if post.spec.variant.dirichlet:
        eta, lphi = post.latent(pv)
        mu = alr_inv(eta, post.spec.ref)
        return ssr_series(post.y[m:], mu[m:], np.exp(lphi[m:]))
    # the posterior mean of a Cholesky factor need not have unit rows
    Lm = np.asarray(pv.omega_chol)
    Lm = Lm / np.linalg.norm(Lm, axis=1, keepdims=True)
    eta, _ = post.latent(pv)
    return ssr_series(post.y[m:], eta=eta[m:], chol=Lm, sigma=pv.sigma, ref=post.spec.ref)


def run_replicate(cfg: StudyConfig, replicate: int, sampler_cfg=None, models=None, max_lag: int = 20) -> dict:
    """Simulate one data set and fit, forecast and score every model on it."""
    import time

    from bdarch.forecast import predict
    from bdarch.inference import SamplerConfig, sample_posterior
    from bdarch.metrics import empirical_coverage, fmae, frmse, pacf
    from bdarch.model import ModelSpec, Posterior, Priors

    ss = replicate_seed(cfg, replicate)
    data_ss, *model_ss = ss.spawn(1 + len(FITTED_MODELS))
    ds = simulate_dataset(cfg.study_id, cfg.T, cfg.train_len, np.random.default_rng(data_ss), cfg.J)
    train, test = ds.y[: cfg.train_len], ds.y[cfg.train_len:]
    sampler_cfg = sampler_cfg or SamplerConfig.simulation()
    out = {}
    for (name, kw), mss in zip(FITTED_MODELS, model_ss):
        if models is not None and name not in models:
            continue
        spec = ModelSpec(J=cfg.J, **kw)
        post = Posterior(spec, Priors.simulation(), train)
        seed_fit, seed_fc = mss.generate_state(2)
        t0 = time.perf_counter()
        scfg = replace(sampler_cfg, base_seed=int(seed_fit))
        draws = sample_posterior(post, scfg)
        elapsed = time.perf_counter() - t0
        fc = predict(spec, draws, train, cfg.T - cfg.train_len, np.random.default_rng(seed_fc))
        lo, hi = fc.interval(0.95)
        ssr = plug_in_ssr(post, draws)
        out[name] = ModelOutcome(
            model=name, frmse=frmse(test, fc.point)[1], fmae=fmae(test, fc.point)[1],
            coverage95=empirical_coverage(test, lo, hi)[1], pacf=pacf(ssr, max_lag), ssr=ssr,
            max_rhat=float(np.nanmax(draws.diagnostics.rhat)), n_divergent=int(draws.n_divergent),
            fit_seconds=elapsed,
        )
        log.info("study %d rep %d %s: FRMSE %.4f (%.1fs)", cfg.study_id, replicate, name, out[name].frmse, elapsed)
    return out


def run_study(cfg: StudyConfig, sampler_cfg=None, models=None, progress=None) -> StudyResult:
    """Run every replicate; a failing replicate is recorded and skipped."""
    outcomes, failures = {}, []
    for r in range(cfg.n_replicates):
        try:
            outcomes[r] = run_replicate(cfg, r, sampler_cfg, models)
        except Exception as exc:  # noqa: BLE001 - keep long runs alive
            log.warning("replicate %d failed: %s", r, exc)
            failures.append((r, repr(exc)))
        if progress is not None:
            progress(r, outcomes.get(r))
    return StudyResult(cfg, outcomes, failures)
