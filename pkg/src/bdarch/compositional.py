"""Simplex value types and log-ratio transforms.

Compositions are plain numpy arrays whose last axis runs over the J
components; every transform accepts a single composition (shape ``(J,)``)
or a stack of them (shape ``(..., J)``). Reference indices are 0-based and
default to the last component.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EPS = 1e-12
SUM_TOL = 1e-9


class CompositionError(ValueError):
    """Input is not a valid point (or series of points) on the open simplex."""


class PartitionError(ValueError):
    """Sequential binary partition is malformed."""


def _resolve_ref(ref: int | None, J: int) -> int:
    if ref is None:
        return J - 1
    r = ref + J if ref < 0 else ref
    if not 0 <= r < J:
        raise CompositionError(f"reference index {ref} out of range for J={J}")
    return r


def close(raw) -> np.ndarray:
    """Divide positive parts by their row sum."""
    raw = np.asarray(raw, dtype=float)
    if np.any(~np.isfinite(raw)) or np.any(raw <= 0):
        raise CompositionError("closure requires strictly positive finite parts")
    return raw / raw.sum(axis=-1, keepdims=True)


def as_composition(values, tol: float = SUM_TOL) -> np.ndarray:
    """Validate (and silently renormalize within ``tol``) one or more compositions."""
    c = np.asarray(values, dtype=float)
    if c.ndim == 0 or c.shape[-1] < 2:
        raise CompositionError("a composition needs at least two parts")
    if np.any(~np.isfinite(c)) or np.any(c <= 0) or np.any(c >= 1):
        raise CompositionError("composition entries must lie strictly inside (0, 1)")
    s = c.sum(axis=-1, keepdims=True)
    if np.any(np.abs(s - 1.0) > tol):
        raise CompositionError(f"composition does not sum to 1 within {tol:g}")
    return c / s


def alr(c, ref: int | None = None) -> np.ndarray:
    """Additive log-ratio against component ``ref``; that slot is dropped."""
    c = np.asarray(c, dtype=float)
    J = c.shape[-1]
    r = _resolve_ref(ref, J)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(c)
    out = np.delete(logc, r, axis=-1) - logc[..., r : r + 1]
    if not np.all(np.isfinite(out)):
        raise CompositionError("alr undefined: component at or below zero")
    return out


def alr_inv(v, ref: int | None = None, eps: float = EPS) -> np.ndarray:
    """Inverse alr (softmax with the reference slot pinned at zero).

    Outputs are clamped into ``[eps, 1 - eps]`` and renormalized so the
    result stays on the open simplex.
    """
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise CompositionError("alr coordinates must be finite")
    J = v.shape[-1] + 1
    r = _resolve_ref(ref, J)
    full = np.insert(v, r, 0.0, axis=-1)
    full = full - full.max(axis=-1, keepdims=True)
    w = np.exp(full)
    mu = w / w.sum(axis=-1, keepdims=True)
    if eps > 0 and (mu.min() < eps or mu.max() > 1 - eps):
        mu = np.clip(mu, eps, 1 - eps)
        mu = mu / mu.sum(axis=-1, keepdims=True)
    return mu


def alr_change_matrix(J: int, ref_from: int, ref_to: int) -> np.ndarray:
    """Linear map taking alr coordinates w.r.t. ``ref_from`` to ``ref_to``."""
    rf, rt = _resolve_ref(ref_from, J), _resolve_ref(ref_to, J)
    # embed: full log-ratio vector (J) with zero at rf
    E = np.delete(np.eye(J), rf, axis=1)
    S = np.eye(J) - np.eye(J)[[rt], :]  # x_j - x_rt for every j
    D = np.delete(np.eye(J), rt, axis=0)
    return D @ S @ E


def clr(c) -> np.ndarray:
    """Centered log-ratio: log parts minus their mean."""
    c = np.asarray(c, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(c)
    if not np.all(np.isfinite(logc)):
        raise CompositionError("clr undefined: component at or below zero")
    return logc - logc.mean(axis=-1, keepdims=True)


def clr_inv(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    w = np.exp(x - x.max(axis=-1, keepdims=True))
    return w / w.sum(axis=-1, keepdims=True)


def pivot_partition(J: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """First part versus the rest, recursively."""
    return [((j,), tuple(range(j + 1, J))) for j in range(J - 1)]


def validate_partition(partition, J: int) -> None:
    """Check that ``partition`` is a sequential binary partition of range(J)."""
    if len(partition) != J - 1:
        raise PartitionError(f"need {J - 1} splits for J={J}, got {len(partition)}")
    open_groups = [frozenset(range(J))]
    for k, (S, H) in enumerate(partition):
        S, H = frozenset(S), frozenset(H)
        if not S or not H or S & H:
            raise PartitionError(f"split {k}: parts must be non-empty and disjoint")
        parent = S | H
        if parent not in open_groups:
            raise PartitionError(f"split {k}: {sorted(parent)} is not an unsplit group")
        open_groups.remove(parent)
        open_groups += [g for g in (S, H) if len(g) > 1]
    if open_groups:
        raise PartitionError("partition leaves groups unsplit")


def ilr(c, partition: Sequence | None = None) -> np.ndarray:
    """Isometric log-ratio balances.

    Coordinate k contrasts the geometric means of ``S_k`` and ``H_k`` with
    the balance weight sqrt(r s / (r + s)), r = |H_k|, s = |S_k|. The default
    pivot partition has s = 1 throughout.
    """
    c = np.asarray(c, dtype=float)
    J = c.shape[-1]
    if partition is None:
        partition = pivot_partition(J)
    validate_partition(partition, J)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(c)
    if not np.all(np.isfinite(logc)):
        raise CompositionError("ilr undefined: component at or below zero")
    out = np.empty(c.shape[:-1] + (J - 1,))
    for k, (S, H) in enumerate(partition):
        s, r = len(S), len(H)
        gs = logc[..., list(S)].mean(axis=-1)
        gh = logc[..., list(H)].mean(axis=-1)
        out[..., k] = np.sqrt(r * s / (r + s)) * (gs - gh)
    return out


@dataclass
class CompositionalSeries:
    """T compositions sharing J components, with ordered time labels."""

    values: np.ndarray
    time_index: list = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = as_composition(np.atleast_2d(self.values))
        T, J = self.values.shape
        if not self.time_index:
            self.time_index = list(range(1, T + 1))
        if len(self.time_index) != T:
            raise CompositionError("time_index length does not match rows")
        if any(b <= a for a, b in zip(self.time_index, self.time_index[1:])):
            raise CompositionError("time_index must be strictly increasing")
        if not self.names:
            self.names = [f"c{j + 1}" for j in range(J)]
        if len(self.names) != J:
            raise CompositionError("names length does not match components")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def J(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.T

    def __getitem__(self, sl: slice) -> "CompositionalSeries":
        return CompositionalSeries(self.values[sl], list(self.time_index[sl]), list(self.names))
