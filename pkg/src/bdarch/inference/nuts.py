"""No-U-turn Hamiltonian Monte Carlo with multinomial trajectory sampling.

A diagonal Euclidean metric is used throughout. The tree builder follows the
usual recursive doubling scheme: each subtree is checked for a U-turn at its
own ends and across the seams joining it to its sibling, and the proposal is
drawn multinomially (biased towards the newer subtree at the top level).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_DELTA_H = 1000.0


@dataclass
class TransitionStats:
    accept_prob: float
    n_leapfrog: int
    tree_depth: int
    divergent: bool
    energy: float
    step_size: float


def _logaddexp(a, b):
    if a == -math.inf:
        return b
    if b == -math.inf:
        return a
    if a > b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


def _criterion(p_sharp_minus, p_sharp_plus, rho):
    return float(p_sharp_plus @ rho) > 0 and float(p_sharp_minus @ rho) > 0


class _Point:
    __slots__ = ("q", "p", "lp", "grad")

    def __init__(self, q, p, lp, grad):
        self.q, self.p, self.lp, self.grad = q, p, lp, grad


class NUTS:
    """One-chain NUTS kernel.

    ``logp_grad(q)`` returns the log density and its gradient. A non-finite
    log density or gradient is treated as a divergence.
    """

    def __init__(self, logp_grad, inv_metric, step_size=0.1, max_depth=10, rng=None):
        self.logp_grad = logp_grad
        self.inv_metric = np.asarray(inv_metric, dtype=float)
        self.step_size = step_size
        self.max_depth = max_depth
        self.rng = rng or np.random.default_rng()

    # -- dynamics ------------------------------------------------------------
    def _hamiltonian(self, pt):
        return -pt.lp + 0.5 * float(pt.p @ (self.inv_metric * pt.p))

    def _leapfrog(self, pt, eps):
        p = pt.p + 0.5 * eps * pt.grad
        q = pt.q + eps * self.inv_metric * p
        lp, grad = self.logp_grad(q)
        if not np.isfinite(lp) or not np.all(np.isfinite(grad)):
            return _Point(q, p, -math.inf, np.zeros_like(q))
        p = p + 0.5 * eps * grad
        return _Point(q, p, lp, grad)

    # -- tree building -------------------------------------------------------
    def _build_tree(self, edge, depth, eps, H0, acc):
        """Extend from ``edge`` by 2**depth leapfrog steps of size ``eps``.

        Returns (valid, new_edge, proposal, log_sum_weight, rho, p_beg,
        p_sharp_beg, p_end, p_sharp_end).
        """
        if depth == 0:
            new = self._leapfrog(edge, eps)
            acc["n_leapfrog"] += 1
            h = self._hamiltonian(new) if np.isfinite(new.lp) else math.inf
            if math.isnan(h):
                h = math.inf
            if h - H0 > MAX_DELTA_H:
                acc["divergent"] = True
            lw = H0 - h
            acc["sum_metro"] += 1.0 if lw > 0 else math.exp(lw)
            p_sharp = self.inv_metric * new.p
            return (not acc["divergent"], new, new, lw, new.p.copy(), new.p, p_sharp, new.p, p_sharp)

        ok, mid, prop_init, lsw_init, rho_init, p_beg, ps_beg, p_init_end, ps_init_end = \
            self._build_tree(edge, depth - 1, eps, H0, acc)
        if not ok:
            return (False, mid, prop_init, lsw_init, rho_init, p_beg, ps_beg, p_init_end, ps_init_end)
        ok, end, prop_final, lsw_final, rho_final, p_final_beg, ps_final_beg, p_end, ps_end = \
            self._build_tree(mid, depth - 1, eps, H0, acc)
        if not ok:
            return (False, end, prop_final, lsw_final, rho_final, p_beg, ps_beg, p_end, ps_end)

        lsw = _logaddexp(lsw_init, lsw_final)
        proposal = prop_init
        if math.log(self.rng.random()) < lsw_final - lsw:
            proposal = prop_final
        rho = rho_init + rho_final
        persist = _criterion(ps_beg, ps_end, rho)
        persist = persist and _criterion(ps_beg, ps_final_beg, rho_init + p_final_beg)
        persist = persist and _criterion(ps_init_end, ps_end, rho_final + p_init_end)
        return (persist, end, proposal, lsw, rho, p_beg, ps_beg, p_end, ps_end)

    def transition(self, q, lp=None, grad=None):
        """One NUTS transition from ``q``; returns (q, lp, grad, stats)."""
        if lp is None or grad is None:
            lp, grad = self.logp_grad(q)
        rng = self.rng
        p0 = rng.standard_normal(q.shape[0]) / np.sqrt(self.inv_metric)
        start = _Point(q, p0, lp, grad)
        H0 = self._hamiltonian(start)

        fwd = bck = start
        ps0 = self.inv_metric * p0
        p_fwd_fwd = p_fwd_bck = p_bck_fwd = p_bck_bck = p0
        ps_fwd_fwd = ps_fwd_bck = ps_bck_fwd = ps_bck_bck = ps0
        rho = p0.copy()
        lsw = 0.0
        sample = start
        acc = {"n_leapfrog": 0, "sum_metro": 0.0, "divergent": False}
        depth = 0
        while depth < self.max_depth:
            if rng.random() > 0.5:
                rho_bck = rho
                p_bck_fwd, ps_bck_fwd = p_fwd_fwd, ps_fwd_fwd
                ok, fwd, prop, lsw_sub, rho_fwd, p_fwd_bck, ps_fwd_bck, p_fwd_fwd, ps_fwd_fwd = \
                    self._build_tree(fwd, depth, self.step_size, H0, acc)
            else:
                rho_fwd = rho
                p_fwd_bck, ps_fwd_bck = p_bck_bck, ps_bck_bck
                ok, bck, prop, lsw_sub, rho_bck, p_bck_fwd, ps_bck_fwd, p_bck_bck, ps_bck_bck = \
                    self._build_tree(bck, depth, -self.step_size, H0, acc)
            if not ok:
                break
            depth += 1
            if lsw_sub > lsw or math.log(rng.random()) < lsw_sub - lsw:
                sample = prop
            lsw = _logaddexp(lsw, lsw_sub)
            rho = rho_bck + rho_fwd
            persist = _criterion(ps_bck_bck, ps_fwd_fwd, rho)
            persist = persist and _criterion(ps_bck_bck, ps_fwd_bck, rho_bck + p_fwd_bck)
            persist = persist and _criterion(ps_bck_fwd, ps_fwd_fwd, rho_fwd + p_bck_fwd)
            if not persist:
                break
        n = max(acc["n_leapfrog"], 1)
        stats = TransitionStats(
            accept_prob=acc["sum_metro"] / n,
            n_leapfrog=acc["n_leapfrog"],
            tree_depth=depth,
            divergent=acc["divergent"],
            energy=self._hamiltonian(sample),
            step_size=self.step_size,
        )
        return sample.q, sample.lp, sample.grad, stats

    # -- step size initialisation --------------------------------------------
    def init_step_size(self, q, lp, grad):
        """Double or halve the step until one-step acceptance crosses 0.8."""
        eps = self.step_size
        start_p = self.rng.standard_normal(q.shape[0]) / np.sqrt(self.inv_metric)
        start = _Point(q, start_p, lp, grad)
        H0 = self._hamiltonian(start)
        new = self._leapfrog(start, eps)
        delta = H0 - (self._hamiltonian(new) if np.isfinite(new.lp) else math.inf)
        direction = 1 if delta > math.log(0.8) else -1
        for _ in range(100):
            p = self.rng.standard_normal(q.shape[0]) / np.sqrt(self.inv_metric)
            start = _Point(q, p, lp, grad)
            H0 = self._hamiltonian(start)
            new = self._leapfrog(start, eps)
            h = self._hamiltonian(new) if np.isfinite(new.lp) else math.inf
            delta = H0 - h
            if direction == 1 and not delta > math.log(0.8):
                break
            if direction == -1 and not delta < math.log(0.8):
                break
            eps = eps * 2.0 if direction == 1 else eps * 0.5
            if eps > 1e7 or eps < 1e-12:
                break
        self.step_size = eps
        return eps
