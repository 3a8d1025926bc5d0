"""B-DARMA, B-DARMA-DARCH and B-tVARMA: recursions, densities, gradients."""

from __future__ import annotations

import numpy as np

from bdarch.model.posterior import Posterior
from bdarch.model.spec import ModelConfigError, ModelSpec, ParamLayout, ParamVector, Priors, Variant

__all__ = [
    "ModelConfigError", "ModelSpec", "ParamLayout", "ParamVector", "Posterior", "Priors", "Variant",
    "mean_recursion", "precision_recursion", "log_likelihood", "log_prior", "log_posterior",
    "grad_log_posterior", "constrain", "unconstrain",
]


def mean_recursion(spec, params: ParamVector, series, designs=None) -> np.ndarray:
    post = Posterior(spec, Priors(), series, designs)
    return post.latent(params)[0]


def precision_recursion(spec, params: ParamVector, series, designs=None) -> np.ndarray:
    post = Posterior(spec, Priors(), series, designs)
    return post.latent(params)[1]


def log_likelihood(spec, params: ParamVector, series, designs=None) -> float:
    return Posterior(spec, Priors(), series, designs).log_likelihood(params)


def log_prior(spec, priors, params: ParamVector, series, designs=None) -> float:
    return Posterior(spec, priors, series, designs).log_prior(params)


def log_posterior(spec, priors, params: ParamVector, series, designs=None) -> float:
    post = Posterior(spec, priors, series, designs)
    return post.log_posterior(post.unconstrain(params), jacobian=False)


def grad_log_posterior(spec, priors, params: ParamVector, series, designs=None) -> np.ndarray:
    post = Posterior(spec, priors, series, designs)
    return post.grad_log_posterior(post.unconstrain(params))


def unconstrain(spec, params: ParamVector) -> np.ndarray:
    return Posterior(spec, Priors(), np.full((spec.m + 1, spec.J), 1.0 / spec.J)).unconstrain(params)


def constrain(spec, theta) -> ParamVector:
    return Posterior(spec, Priors(), np.full((spec.m + 1, spec.J), 1.0 / spec.J)).constrain(theta)
