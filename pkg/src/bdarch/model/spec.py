"""Model variants, priors and the parameter layout."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from bdarch.covariates import CovariateSpec, n_mean_coefficients


class Variant(str, enum.Enum):
    BDARMA = "BDARMA"
    BDARMA_DARCH = "BDARMA_DARCH"
    BTVARMA = "BTVARMA"

    @property
    def dirichlet(self) -> bool:
        return self is not Variant.BTVARMA

    @property
    def label(self) -> str:
        return {"BDARMA": "B-DARMA", "BDARMA_DARCH": "B-DARCH", "BTVARMA": "B-tVARMA"}[self.value]


class ModelConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    """One of the three model variants with its lag orders.

    ``ref`` is the 0-based alr reference component (default: last). The
    conditioning window is m = max(P, Q, L, K).
    """

    variant: Variant
    J: int
    P: int = 1
    Q: int = 0
    L: int = 0
    K: int = 0
    ref: int = -1
    mean_covariates: CovariateSpec = field(default_factory=CovariateSpec)
    prec_covariates: CovariateSpec = field(default_factory=CovariateSpec)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.J < 2:
            raise ModelConfigError("J must be at least 2")
        if min(self.P, self.Q, self.L, self.K) < 0:
            raise ModelConfigError("lag orders must be non-negative")
        if self.variant is not Variant.BDARMA_DARCH and (self.L or self.K):
            raise ModelConfigError("L and K are only allowed for BDARMA_DARCH")
        if not -self.J <= self.ref < self.J:
            raise ModelConfigError(f"ref {self.ref} out of range")
        object.__setattr__(self, "ref", self.ref % self.J)

    @property
    def d(self) -> int:
        return self.J - 1

    @property
    def m(self) -> int:
        return max(self.P, self.Q, self.L, self.K)

    @property
    def r_beta(self) -> int:
        return n_mean_coefficients(self.mean_covariates, self.J)

    @property
    def r_gamma(self) -> int:
        return self.prec_covariates.n_columns if self.variant.dirichlet else 0

    def with_orders(self, **kw) -> "ModelSpec":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.value, "J": self.J, "P": self.P, "Q": self.Q,
            "L": self.L, "K": self.K, "ref": self.ref,
            "mean_covariates": self.mean_covariates.to_dict(),
            "prec_covariates": self.prec_covariates.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        d = dict(d)
        d["mean_covariates"] = CovariateSpec.from_dict(d.get("mean_covariates", {}))
        d["prec_covariates"] = CovariateSpec.from_dict(d.get("prec_covariates", {}))
        return cls(**d)


Normal = tuple  # (mean, sd)


@dataclass(frozen=True)
class Priors:
    """Independent normal priors per parameter group.

    Regression coefficients are keyed by column kind (intercept, trend,
    fourier). ``sigma_scale`` is the half-normal scale for the tVARMA
    scale parameter, ``lkj_shape`` the LKJ shape on its correlation factor.
    """

    A_diag: Normal = (0.0, 1.0)
    A_offdiag: Normal = (0.0, 1.0)
    B_diag: Normal = (0.0, 1.0)
    B_offdiag: Normal = (0.0, 1.0)
    beta: dict = field(default_factory=lambda: {"intercept": (0.0, 0.3), "trend": (0.0, 0.1), "fourier": (0.0, 1.0)})
    gamma: dict = field(default_factory=lambda: {"intercept": (7.0, 1.5), "trend": (0.0, 0.1), "fourier": (0.0, 1.0)})
    alpha: Normal = (0.35, 0.5)
    tau: Normal = (-0.75, 0.5)
    sigma_scale: float = 0.5
    lkj_shape: float = 3.0

    def __post_init__(self):
        sds = [self.A_diag[1], self.A_offdiag[1], self.B_diag[1], self.B_offdiag[1],
               self.alpha[1], self.tau[1], self.sigma_scale]
        sds += [v[1] for v in self.beta.values()] + [v[1] for v in self.gamma.values()]
        if min(sds) <= 0:
            raise ModelConfigError("prior standard deviations must be positive")
        if self.lkj_shape < 1:
            raise ModelConfigError("LKJ shape must be >= 1")

    @classmethod
    def simulation(cls) -> "Priors":
        """Priors used for the simulation-study fits."""
        return cls()

    @classmethod
    def airbnb(cls) -> "Priors":
        """Weakly informative set for seasonal/trend fits on real share data."""
        reg = {"intercept": (0.0, 2.0), "trend": (0.0, 0.1), "fourier": (0.0, 1.0)}
        return cls(
            A_diag=(0.4, 0.5), A_offdiag=(0.0, 0.5), B_diag=(0.4, 0.5), B_offdiag=(0.0, 0.5),
            beta=dict(reg), gamma=dict(reg), alpha=(0.0, 1.0), tau=(0.0, 1.0),
            sigma_scale=0.5, lkj_shape=3.0,
        )

    @classmethod
    def preset(cls, name: str) -> "Priors":
        try:
            return {"simulation": cls.simulation, "airbnb": cls.airbnb}[name]()
        except KeyError:
            raise ModelConfigError(f"unknown prior preset {name!r}") from None

    def to_dict(self) -> dict:
        return {
            "A_diag": list(self.A_diag), "A_offdiag": list(self.A_offdiag),
            "B_diag": list(self.B_diag), "B_offdiag": list(self.B_offdiag),
            "beta": {k: list(v) for k, v in self.beta.items()},
            "gamma": {k: list(v) for k, v in self.gamma.items()},
            "alpha": list(self.alpha), "tau": list(self.tau),
            "sigma_scale": self.sigma_scale, "lkj_shape": self.lkj_shape,
        }

    @classmethod
    def from_dict(cls, d) -> "Priors":
        if isinstance(d, str):
            return cls.preset(d)
        d = dict(d)
        base = cls.preset(d.pop("preset")) if "preset" in d else cls()
        kw = {}
        for k, v in d.items():
            if k in ("beta", "gamma"):
                merged = dict(getattr(base, k))
                merged.update({kk: tuple(vv) for kk, vv in v.items()})
                kw[k] = merged
            elif isinstance(v, (list, tuple)):
                kw[k] = tuple(v)
            else:
                kw[k] = v
        return replace(base, **kw)


@dataclass
class ParamVector:
    """Constrained parameter values for one draw."""

    A: np.ndarray
    B: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    alpha: np.ndarray
    tau: np.ndarray
    sigma: float = 1.0
    omega_chol: np.ndarray | None = None


class ParamLayout:
    """Offsets of each group in the unconstrained vector and the constrained row.

    Unconstrained order: A, B, beta, gamma, alpha, tau, log(sigma), then the
    (d choose 2) unbounded partial-correlation coordinates of the
    correlation Cholesky factor. The constrained row stores sigma itself and
    the full lower triangle of the factor instead.
    """

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        d = spec.d
        sizes = [
            ("A", spec.P * d * d),
            ("B", spec.Q * d * d),
            ("beta", spec.r_beta),
            ("gamma", spec.r_gamma),
            ("alpha", spec.L),
            ("tau", spec.K),
        ]
        if spec.variant is Variant.BTVARMA:
            sizes += [("log_sigma", 1), ("omega", d * (d - 1) // 2)]
        self.slices = {}
        off = 0
        for name, n in sizes:
            self.slices[name] = slice(off, off + n)
            off += n
        self.dim = off
        self.n_normal = self.slices["tau"].stop  # all groups with normal priors come first
        self.tril = np.tril_indices(d)
        self.constrained_dim = self.n_normal + (1 + len(self.tril[0]) if spec.variant is Variant.BTVARMA else 0)

    # ------------------------------------------------------------------ names
    def unconstrained_names(self) -> list[str]:
        return self._normal_names() + (
            ["log_sigma"] + [f"omega_raw[{k + 1}]" for k in range(self.slices["omega"].stop - self.slices["omega"].start)]
            if self.spec.variant is Variant.BTVARMA else []
        )

    def constrained_names(self) -> list[str]:
        names = self._normal_names()
        if self.spec.variant is Variant.BTVARMA:
            names += ["sigma"] + [f"L_Omega[{i + 1},{j + 1}]" for i, j in zip(*self.tril)]
        return names

    def _normal_names(self) -> list[str]:
        s, d = self.spec, self.spec.d
        names = []
        for p in range(s.P):
            names += [f"A{p + 1}[{r + 1},{c + 1}]" for r in range(d) for c in range(d)]
        for q in range(s.Q):
            names += [f"B{q + 1}[{r + 1},{c + 1}]" for r in range(d) for c in range(d)]
        names += [f"beta[{k + 1}]" for k in range(s.r_beta)]
        names += [f"gamma[{k + 1}]" for k in range(s.r_gamma)]
        names += [f"alpha[{k + 1}]" for k in range(s.L)]
        names += [f"tau[{k + 1}]" for k in range(s.K)]
        return names

    # ------------------------------------------------------------- unpacking
    def split(self, theta: np.ndarray) -> dict:
        s, d = self.spec, self.spec.d
        out = {
            "A": theta[self.slices["A"]].reshape(s.P, d, d),
            "B": theta[self.slices["B"]].reshape(s.Q, d, d),
            "beta": theta[self.slices["beta"]],
            "gamma": theta[self.slices["gamma"]],
            "alpha": theta[self.slices["alpha"]],
            "tau": theta[self.slices["tau"]],
        }
        if s.variant is Variant.BTVARMA:
            out["log_sigma"] = theta[self.slices["log_sigma"]][0]
            out["omega"] = theta[self.slices["omega"]]
        return out

    def prior_vectors(self, priors: Priors, beta_kinds, gamma_kinds) -> tuple[np.ndarray, np.ndarray]:
        """Per-element (mean, sd) for every normal-prior coordinate."""
        s, d = self.spec, self.spec.d
        mean = np.empty(self.n_normal)
        sd = np.empty(self.n_normal)
        eye = np.eye(d, dtype=bool)
        for key, lags, dg, od in (("A", s.P, priors.A_diag, priors.A_offdiag),
                                   ("B", s.Q, priors.B_diag, priors.B_offdiag)):
            sl = self.slices[key]
            mm = np.where(eye, dg[0], od[0])
            ss = np.where(eye, dg[1], od[1])
            mean[sl] = np.tile(mm.ravel(), lags)
            sd[sl] = np.tile(ss.ravel(), lags)
        for key, kinds, table in (("beta", beta_kinds, priors.beta), ("gamma", gamma_kinds, priors.gamma)):
            sl = self.slices[key]
            if sl.stop > sl.start:
                mean[sl] = [table[k][0] for k in kinds]
                sd[sl] = [table[k][1] for k in kinds]
        mean[self.slices["alpha"]], sd[self.slices["alpha"]] = priors.alpha
        mean[self.slices["tau"]], sd[self.slices["tau"]] = priors.tau
        return mean, sd
