"""Bayesian Dirichlet ARMA models with DARCH precision for compositional time series."""

__version__ = "0.1.0"

from bdarch.compositional import CompositionalSeries, alr, alr_inv, clr, clr_inv, close, ilr
from bdarch.covariates import CovariateSpec, build_designs
from bdarch.forecast import ForecastResult, interval, predict
from bdarch.inference import PosteriorDraws, SamplerConfig, sample_posterior
from bdarch.model import ModelSpec, ParamVector, Posterior, Priors, Variant

__all__ = [
    "CompositionalSeries", "CovariateSpec", "ForecastResult", "ModelSpec", "ParamVector", "Posterior",
    "PosteriorDraws", "Priors", "SamplerConfig", "Variant", "alr", "alr_inv", "build_designs", "clr",
    "clr_inv", "close", "ilr", "interval", "predict", "sample_posterior",
]
