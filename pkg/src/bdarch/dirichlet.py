"""Dirichlet observation law in mean/precision form: y ~ Dirichlet(phi * mu)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from bdarch._jit import jit
from bdarch.compositional import EPS, as_composition


@dataclass(frozen=True)
class DirichletParams:
    mu: np.ndarray
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "mu", as_composition(self.mu))
        if not np.all(np.asarray(self.phi) > 0):
            raise ValueError("precision phi must be positive")


@jit
def digamma(x):
    """psi(x) for x > 0 via upward recurrence and the asymptotic series."""
    acc = 0.0
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv2 * (
        1.0 / 12
        - inv2
        * (
            1.0 / 120
            - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * 691.0 / 32760)))
        )
    )
    return acc + math.log(x) - 0.5 * inv - series


@jit
def log_pdf_kernel(logy, w):
    """Dirichlet(w) log-density at a point given as log-parts."""
    s = 0.0
    out = 0.0
    for j in range(w.shape[0]):
        s += w[j]
        out += (w[j] - 1.0) * logy[j] - math.lgamma(w[j])
    return out + math.lgamma(s)


def _split(y, mu, phi):
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return y, mu, phi


def log_pdf(y, mu, phi) -> np.ndarray | float:
    """log p(y | mu, phi); broadcasts over leading axes.

    Entries of ``y`` are floored at 1e-12 before the log.
    """
    y, mu, phi = _split(y, mu, phi)
    w = phi[..., None] * mu
    if np.any(w <= 0):
        raise ValueError("Dirichlet parameters phi * mu must be positive")
    logy = np.log(np.maximum(y, EPS))
    out = gammaln(phi) - gammaln(w).sum(axis=-1) + ((w - 1.0) * logy).sum(axis=-1)
    return out[()] if out.ndim == 0 else out


def component_var(mu, phi) -> np.ndarray:
    """Marginal variance mu_j (1 - mu_j) / (phi + 1) of every component."""
    mu = np.asarray(mu, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if mu.ndim == 0:
        return float(mu * (1.0 - mu) / (phi + 1.0))
    return mu * (1.0 - mu) / (phi[..., None] + 1.0)


def standardized_residual(y, mu, phi) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return (y - mu) / np.sqrt(component_var(mu, phi))


def log_gamma_variates(shape, rng: np.random.Generator) -> np.ndarray:
    """log of Gamma(shape, 1) draws, stable for tiny shapes.

    Shapes below one use the boost G(a) = G(a + 1) * U**(1/a), kept on the
    log scale so draws never underflow to zero.
    """
    shape = np.asarray(shape, dtype=float)
    small = shape < 1.0
    g = rng.gamma(np.where(small, shape + 1.0, shape))
    out = np.log(g)
    if np.any(small):
        u = rng.random(shape.shape)
        out = np.where(small, out + np.log(u) / np.where(small, shape, 1.0), out)
    return out


def sample(mu, phi, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw from Dirichlet(phi * mu) via normalized gamma variates.

    ``mu``/``phi`` broadcast; ``size`` prepends extra sample axes.
    """
    mu = np.asarray(mu, dtype=float)
    phi = np.asarray(phi, dtype=float)
    w = phi[..., None] * mu
    if size is not None:
        w = np.broadcast_to(w, tuple(np.atleast_1d(size)) + w.shape)
    lg = log_gamma_variates(w, rng)
    lg -= lg.max(axis=-1, keepdims=True)
    y = np.exp(lg)
    y /= y.sum(axis=-1, keepdims=True)
    if y.min() < EPS:
        y = np.maximum(y, EPS)
        y /= y.sum(axis=-1, keepdims=True)
    return y
