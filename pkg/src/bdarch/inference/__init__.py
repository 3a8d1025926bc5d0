"""Gradient-based MCMC, adaptation and convergence diagnostics."""

from bdarch.inference.diagnostics import Diagnostics, ess_bulk, split_rhat
from bdarch.inference.nuts import NUTS
from bdarch.inference.sampler import (
    InitializationError,
    PosteriorDraws,
    SamplerConfig,
    sample,
    sample_posterior,
)

__all__ = [
    "Diagnostics", "InitializationError", "NUTS", "PosteriorDraws", "SamplerConfig",
    "ess_bulk", "sample", "sample_posterior", "split_rhat",
]
