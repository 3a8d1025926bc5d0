"""Deterministic trend and Fourier designs for the mean and precision models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class CovariateConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CovariateSpec:
    """Columns: [intercept], [trend], then sin/cos pairs for each seasonal block.

    ``seasonal`` holds ``(period, n_harmonics)`` pairs, e.g. ``((7, 3), (365.25, 8))``.
    """

    include_intercept: bool = True
    include_trend: bool = False
    seasonal: tuple[tuple[float, int], ...] = ()
    share_across_components: bool = False

    def __post_init__(self):
        object.__setattr__(self, "seasonal", tuple((float(w), int(k)) for w, k in self.seasonal))
        for w, k in self.seasonal:
            if w <= 1:
                raise CovariateConfigError(f"seasonal period {w} must exceed 1")
            if k < 1 or k > w / 2:
                raise CovariateConfigError(f"harmonics K={k} must satisfy 1 <= K <= {w / 2}")

    @property
    def column_kinds(self) -> list[str]:
        kinds = []
        if self.include_intercept:
            kinds.append("intercept")
        if self.include_trend:
            kinds.append("trend")
        for _, k in self.seasonal:
            kinds += ["fourier"] * (2 * k)
        return kinds

    @property
    def column_names(self) -> list[str]:
        names = []
        if self.include_intercept:
            names.append("intercept")
        if self.include_trend:
            names.append("trend")
        for w, k in self.seasonal:
            for h in range(1, k + 1):
                names += [f"sin{h}_{w:g}", f"cos{h}_{w:g}"]
        return names

    @property
    def n_columns(self) -> int:
        return len(self.column_kinds)

    def to_dict(self) -> dict:
        return {
            "include_intercept": self.include_intercept,
            "include_trend": self.include_trend,
            "seasonal": [list(b) for b in self.seasonal],
            "share_across_components": self.share_across_components,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CovariateSpec":
        d = dict(d)
        d["seasonal"] = tuple(tuple(b) for b in d.get("seasonal", ()))
        return cls(**d)


def covariate_rows(spec: CovariateSpec, T: int, t0: int = 0, trend_scale: float | None = None) -> np.ndarray:
    """(T, n_columns) rows for absolute times t0+1 .. t0+T.

    The trend is the absolute index divided by ``trend_scale`` (the training
    length), so it keeps growing past the split.
    """
    t = np.arange(t0 + 1, t0 + T + 1, dtype=float)
    cols = []
    if spec.include_intercept:
        cols.append(np.ones(T))
    if spec.include_trend:
        cols.append(t / float(trend_scale or T))
    for w, k in spec.seasonal:
        for h in range(1, k + 1):
            ang = 2.0 * np.pi * h * t / w
            cols += [np.sin(ang), np.cos(ang)]
    if not cols:
        return np.zeros((T, 0))
    return np.column_stack(cols)


def n_mean_coefficients(spec: CovariateSpec, J: int) -> int:
    n = spec.n_columns
    return n if spec.share_across_components else (J - 1) * n


@dataclass
class DesignMatrices:
    """X: (T, J-1, r_beta) mean designs; z: (T, r_gamma) precision rows."""

    X: np.ndarray
    z: np.ndarray
    beta_kinds: list[str] = field(default_factory=list)
    gamma_kinds: list[str] = field(default_factory=list)
    beta_names: list[str] = field(default_factory=list)
    gamma_names: list[str] = field(default_factory=list)

    @property
    def T(self) -> int:
        return self.X.shape[0]

    def slice(self, start: int, stop: int) -> "DesignMatrices":
        return DesignMatrices(
            self.X[start:stop], self.z[start:stop], self.beta_kinds, self.gamma_kinds,
            self.beta_names, self.gamma_names,
        )


def build_designs(
    spec_mean: CovariateSpec,
    spec_prec: CovariateSpec,
    T: int,
    J: int,
    t0: int = 0,
    train_len: int | None = None,
) -> DesignMatrices:
    """Design arrays for times t0+1 .. t0+T.

    Unless shared, each alr coordinate gets its own coefficient block:
    X_t = I_{J-1} kron x_t', so r_beta = (J-1) * n_columns.
    """
    if T < 1 or J < 2:
        raise CovariateConfigError("need T >= 1 and J >= 2")
    d = J - 1
    scale = train_len if train_len else t0 + T
    xr = covariate_rows(spec_mean, T, t0, scale)
    zr = covariate_rows(spec_prec, T, t0, scale)
    nc = xr.shape[1]
    if spec_mean.share_across_components:
        X = np.repeat(xr[:, None, :], d, axis=1)
        bk = spec_mean.column_kinds
        bn = list(spec_mean.column_names)
    else:
        X = np.zeros((T, d, d * nc))
        for i in range(d):
            X[:, i, i * nc : (i + 1) * nc] = xr
        bk = spec_mean.column_kinds * d
        bn = [f"{name}[{i + 1}]" for i in range(d) for name in spec_mean.column_names]
    return DesignMatrices(
        np.ascontiguousarray(X), np.ascontiguousarray(zr), bk, spec_prec.column_kinds,
        bn, list(spec_prec.column_names),
    )
