"""Log-posterior of a fitted model on the unconstrained scale."""

from __future__ import annotations

import math

import numpy as np

from bdarch.compositional import EPS, CompositionalSeries, alr
from bdarch.covariates import DesignMatrices, build_designs
from bdarch.model import kernels
from bdarch.model.corr import corr_cholesky, corr_cholesky_inv, lkj_cholesky_grad, lkj_cholesky_logpdf
from bdarch.model.spec import ModelSpec, ParamLayout, ParamVector, Priors, Variant

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# |y| beyond this sends tanh to within 1e-13 of one; such points are rejected
OMEGA_BOUND = 15.0


class Posterior:
    """Unnormalized posterior density for one model, data set and prior.

    ``logp_grad(theta)`` is the sampler entry point: log posterior on the
    unconstrained scale (Jacobian included) and its exact gradient.
    """

    def __init__(self, spec: ModelSpec, priors: Priors, series, designs: DesignMatrices | None = None):
        values = series.values if isinstance(series, CompositionalSeries) else np.asarray(series, float)
        if values.shape[1] != spec.J:
            raise ValueError(f"data has {values.shape[1]} components, spec expects {spec.J}")
        T = values.shape[0]
        if spec.m >= T:
            raise ValueError(f"need more than m={spec.m} observations, got {T}")
        if designs is None:
            designs = build_designs(spec.mean_covariates, spec.prec_covariates, T, spec.J)
        if designs.X.shape[2] != spec.r_beta or (spec.variant.dirichlet and designs.z.shape[1] != spec.r_gamma):
            raise ValueError("design widths do not match the model spec")
        self.spec = spec
        self.priors = priors
        self.designs = designs
        self.y = np.maximum(values, EPS)
        self.logy = np.ascontiguousarray(np.log(self.y))
        self.a = np.ascontiguousarray(alr(self.y, spec.ref))
        self.X = np.ascontiguousarray(designs.X[:T], dtype=float)
        self.Z = np.ascontiguousarray(designs.z[:T], dtype=float) if spec.variant.dirichlet else np.zeros((T, 0))
        self.layout = ParamLayout(spec)
        self.prior_mean, self.prior_sd = self.layout.prior_vectors(priors, designs.beta_kinds, designs.gamma_kinds)

    @property
    def dim(self) -> int:
        return self.layout.dim

    @property
    def param_names(self) -> list[str]:
        return self.layout.constrained_names()

    # ------------------------------------------------------------ transforms
    def constrain(self, theta) -> ParamVector:
        theta = np.asarray(theta, dtype=float)
        if not np.all(np.isfinite(theta)):
            raise ValueError("non-finite unconstrained parameters")
        g = self.layout.split(theta)
        pv = ParamVector(g["A"].copy(), g["B"].copy(), g["beta"].copy(), g["gamma"].copy(),
                         g["alpha"].copy(), g["tau"].copy())
        if self.spec.variant is Variant.BTVARMA:
            pv.sigma = float(np.exp(g["log_sigma"]))
            pv.omega_chol = corr_cholesky(np.ascontiguousarray(g["omega"]), self.spec.d)[0]
        return pv

    def unconstrain(self, pv: ParamVector) -> np.ndarray:
        parts = [np.ravel(pv.A), np.ravel(pv.B), pv.beta, pv.gamma, pv.alpha, pv.tau]
        if self.spec.variant is Variant.BTVARMA:
            if not pv.sigma > 0:
                raise ValueError("sigma must be positive")
            parts += [[math.log(pv.sigma)], corr_cholesky_inv(np.asarray(pv.omega_chol))]
        out = np.concatenate([np.asarray(p, dtype=float).ravel() for p in parts])
        if not np.all(np.isfinite(out)):
            raise ValueError("non-finite parameters")
        return out

    def log_jacobian(self, theta) -> float:
        if self.spec.variant is not Variant.BTVARMA:
            return 0.0
        g = self.layout.split(np.asarray(theta, float))
        return g["log_sigma"] + corr_cholesky(np.ascontiguousarray(g["omega"]), self.spec.d)[1]

    def constrained_row(self, theta) -> np.ndarray:
        """Flat constrained values in ``param_names`` order."""
        theta = np.asarray(theta, float)
        row = theta[: self.layout.n_normal]
        if self.spec.variant is Variant.BTVARMA:
            pv = self.constrain(theta)
            row = np.concatenate([row, [pv.sigma], pv.omega_chol[self.layout.tril]])
        return row

    def from_constrained_row(self, row) -> ParamVector:
        row = np.asarray(row, float)
        lay = self.layout
        g = lay.split(np.concatenate([row[: lay.n_normal], np.zeros(lay.dim - lay.n_normal)]))
        pv = ParamVector(g["A"].copy(), g["B"].copy(), g["beta"].copy(), g["gamma"].copy(),
                         g["alpha"].copy(), g["tau"].copy())
        if self.spec.variant is Variant.BTVARMA:
            d = self.spec.d
            pv.sigma = float(row[lay.n_normal])
            Lm = np.zeros((d, d))
            Lm[lay.tril] = row[lay.n_normal + 1:]
            pv.omega_chol = Lm
        return pv

    # ------------------------------------------------------------- densities
    def log_prior(self, pv: ParamVector) -> float:
        normal = np.concatenate([np.ravel(pv.A), np.ravel(pv.B), pv.beta, pv.gamma, pv.alpha, pv.tau])
        zs = (normal - self.prior_mean) / self.prior_sd
        lp = float(-0.5 * zs @ zs - np.sum(np.log(self.prior_sd)) - normal.size * LOG_SQRT_2PI)
        if self.spec.variant is Variant.BTVARMA:
            if not pv.sigma > 0:
                return -np.inf
            s = self.priors.sigma_scale
            lp += math.log(2.0) - LOG_SQRT_2PI - math.log(s) - 0.5 * (pv.sigma / s) ** 2
            lp += lkj_cholesky_logpdf(pv.omega_chol, self.priors.lkj_shape)
        return lp

    def log_likelihood(self, pv: ParamVector) -> float:
        s = self.spec
        if s.variant.dirichlet:
            return float(kernels.dirichlet_loglik_grad(
                self.a, self.logy, self.X, self.Z, pv.A, pv.B, pv.beta, pv.gamma,
                pv.alpha, pv.tau, s.m, s.ref, False)[0])
        return float(kernels.gaussian_loglik_grad(
            self.a, self.X, pv.A, pv.B, pv.beta, np.ascontiguousarray(pv.omega_chol),
            math.log(pv.sigma), s.m, False)[0])

    def log_posterior(self, theta, jacobian: bool = True) -> float:
        if self.spec.variant is Variant.BTVARMA:
            g = self.layout.split(np.asarray(theta, float))
            if np.any(np.abs(g["omega"]) > OMEGA_BOUND):
                return -np.inf
        pv = self.constrain(theta)
        lp = self.log_prior(pv)
        if not np.isfinite(lp):
            return -np.inf
        ll = self.log_likelihood(pv)
        if not np.isfinite(ll):
            return -np.inf
        return lp + ll + (self.log_jacobian(theta) if jacobian else 0.0)

    def logp_grad(self, theta) -> tuple[float, np.ndarray]:
        """Log posterior (with Jacobian) and its gradient on the unconstrained scale."""
        theta = np.asarray(theta, dtype=float)
        s, lay = self.spec, self.layout
        g = lay.split(theta)
        A = np.ascontiguousarray(g["A"])
        B = np.ascontiguousarray(g["B"])
        grad = np.zeros(lay.dim)
        nn = lay.n_normal
        zs = (theta[:nn] - self.prior_mean) / self.prior_sd
        lp = float(-0.5 * zs @ zs - np.sum(np.log(self.prior_sd)) - nn * LOG_SQRT_2PI)
        grad[:nn] = -zs / self.prior_sd
        if s.variant.dirichlet:
            ll, gA, gB, gbeta, ggamma, galpha, gtau = kernels.dirichlet_loglik_grad(
                self.a, self.logy, self.X, self.Z, A, B, g["beta"], g["gamma"],
                g["alpha"], g["tau"], s.m, s.ref, True)
            if not np.isfinite(ll):
                return -np.inf, np.zeros(lay.dim)
            grad[lay.slices["gamma"]] += ggamma
            grad[lay.slices["alpha"]] += galpha
            grad[lay.slices["tau"]] += gtau
        else:
            ls = g["log_sigma"]
            y_om = np.ascontiguousarray(g["omega"])
            if np.any(np.abs(y_om) > OMEGA_BOUND) or abs(ls) > 50.0:
                return -np.inf, np.zeros(lay.dim)
            chol, logj, dchol, glogj = corr_cholesky(y_om, s.d)
            ll, gA, gB, gbeta, gchol, gls = kernels.gaussian_loglik_grad(
                self.a, self.X, A, B, g["beta"], chol, ls, s.m, True)
            if not np.isfinite(ll):
                return -np.inf, np.zeros(lay.dim)
            sc = self.priors.sigma_scale
            sigma = math.exp(ls)
            # half-normal on sigma plus log-transform Jacobian
            lp += math.log(2.0) - LOG_SQRT_2PI - math.log(sc) - 0.5 * (sigma / sc) ** 2 + ls
            gls += -(sigma / sc) ** 2 + 1.0
            lp += lkj_cholesky_logpdf(chol, self.priors.lkj_shape) + logj
            gL = gchol + lkj_cholesky_grad(chol, self.priors.lkj_shape)
            grad[lay.slices["log_sigma"]] += gls
            grad[lay.slices["omega"]] += np.tensordot(gL, dchol, axes=([0, 1], [0, 1])) + glogj
        grad[lay.slices["A"]] += gA.ravel()
        grad[lay.slices["B"]] += gB.ravel()
        grad[lay.slices["beta"]] += gbeta
        return lp + ll, grad

    def grad_log_posterior(self, theta) -> np.ndarray:
        return self.logp_grad(theta)[1]

    # --------------------------------------------------------------- latents
    def latent(self, pv: ParamVector):
        """eta (T, d) and log phi (T,) for fixed parameters."""
        s = self.spec
        eta, lphi, *_ = kernels.latent_path(
            self.a, self.X, self.Z, np.ascontiguousarray(pv.A), np.ascontiguousarray(pv.B),
            pv.beta, pv.gamma, pv.alpha, pv.tau, s.m)
        return eta, lphi
