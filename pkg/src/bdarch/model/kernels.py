"""Recursions, log-likelihoods and their reverse-mode gradients.

Shapes: ``a`` (T, d) alr of the data, ``logy`` (T, J) log parts, ``X``
(T, d, r_beta), ``Z`` (T, r_gamma), ``A`` (P, d, d), ``B`` (Q, d, d).
Rows before ``m`` are conditioned on: eta_t = a_t there and the precision
deviation is zero, so every innovation at or before m vanishes.

Each step has an explicit-loop form (``*_loops``, compiled by numba) and a
vectorized numpy form (``*_np``); the public name is whichever the
``BDARCH_DISABLE_NUMBA`` flag selects.
"""

import math

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import digamma as _digamma_np
from scipy.special import gammaln

from bdarch._jit import jit, select
from bdarch.dirichlet import digamma

LOG_PHI_BOUND = 30.0
LOG_2PI = math.log(2.0 * math.pi)


# --------------------------------------------------------------------------
# linear predictors x_t' beta and z_t' gamma

def _linear_predictors_loops(X, beta, Z, gamma):
    T, d, rb = X.shape
    xb = np.zeros((T, d))
    zg = np.zeros(T)
    for t in range(T):
        for i in range(d):
            s = 0.0
            for k in range(rb):
                s += X[t, i, k] * beta[k]
            xb[t, i] = s
        s = 0.0
        for k in range(Z.shape[1]):
            s += Z[t, k] * gamma[k]
        zg[t] = s
    return xb, zg


def _linear_predictors_np(X, beta, Z, gamma):
    return X @ beta, Z @ gamma


linear_predictors = select(_linear_predictors_loops, _linear_predictors_np)


# --------------------------------------------------------------------------
# mean recursion

def _mean_forward_loops(a, xb, A, B, m):
    T, d = a.shape
    P = A.shape[0]
    Q = B.shape[0]
    eta = np.empty((T, d))
    e = np.zeros((T, d))
    for t in range(min(m, T)):
        for i in range(d):
            eta[t, i] = a[t, i]
    for t in range(m, T):
        for i in range(d):
            s = xb[t, i]
            for p in range(P):
                for k in range(d):
                    s += A[p, i, k] * (a[t - p - 1, k] - xb[t - p - 1, k])
            for q in range(Q):
                for k in range(d):
                    s += B[q, i, k] * e[t - q - 1, k]
            eta[t, i] = s
        for i in range(d):
            e[t, i] = a[t, i] - eta[t, i]
    return eta, e


def _mean_forward_np(a, xb, A, B, m):
    T, d = a.shape
    dev = a - xb
    eta = a.copy()
    base = xb[m:].copy()
    for p in range(A.shape[0]):
        base += dev[m - p - 1:T - p - 1] @ A[p].T
    if B.shape[0] == 0:
        eta[m:] = base
        return eta, np.vstack([np.zeros((m, d)), a[m:] - base])
    e = np.zeros((T, d))
    for t in range(m, T):
        v = base[t - m] + np.einsum("qik,qk->i", B, e[t - B.shape[0]:t][::-1])
        eta[t] = v
        e[t] = a[t] - v
    return eta, e


mean_forward = select(_mean_forward_loops, _mean_forward_np)


# --------------------------------------------------------------------------
# log-precision recursion

def _precision_forward_loops(zg, e, alpha, tau, m):
    T, d = e.shape
    dev = np.zeros(T)
    lphi = zg.copy()
    for t in range(m, T):
        s = 0.0
        for l in range(alpha.shape[0]):
            s += alpha[l] * dev[t - l - 1]
        for k in range(tau.shape[0]):
            sq = 0.0
            for i in range(d):
                sq += e[t - k - 1, i] * e[t - k - 1, i]
            s += tau[k] * sq
        dev[t] = s
        lphi[t] += s
    return dev, lphi


def _precision_forward_np(zg, e, alpha, tau, m):
    T = zg.shape[0]
    sq = np.sum(e * e, axis=1)
    drive = np.zeros(T - m)
    for k in range(tau.shape[0]):
        drive += tau[k] * sq[m - k - 1:T - k - 1]
    dev = np.zeros(T)
    if alpha.shape[0] == 0:
        dev[m:] = drive
    else:
        L = alpha.shape[0]
        for t in range(m, T):
            dev[t] = drive[t - m] + alpha @ dev[t - L:t][::-1]
    return dev, zg + dev


precision_forward = select(_precision_forward_loops, _precision_forward_np)


# --------------------------------------------------------------------------
# observation terms

def _dirichlet_terms_loops(logy, eta, lphi, m, ref, want_grad):
    T, J = logy.shape
    d = J - 1
    geta = np.zeros((T, d))
    glphi = np.zeros(T)
    full = np.empty(J)
    mu = np.empty(J)
    g = np.empty(J)
    ll = 0.0
    for t in range(m, T):
        if abs(lphi[t]) > LOG_PHI_BOUND:
            return -np.inf, geta, glphi
        k = 0
        mx = 0.0
        for j in range(J):
            if j == ref:
                full[j] = 0.0
            else:
                full[j] = eta[t, k]
                k += 1
            if full[j] > mx:
                mx = full[j]
        tot = 0.0
        for j in range(J):
            mu[j] = math.exp(full[j] - mx)
            tot += mu[j]
        phi = math.exp(lphi[t])
        lt = math.lgamma(phi)
        for j in range(J):
            mu[j] /= tot
            w = phi * mu[j]
            if w <= 0.0:
                return -np.inf, geta, glphi
            lt += (w - 1.0) * logy[t, j] - math.lgamma(w)
            if want_grad:
                g[j] = logy[t, j] - digamma(w)
        if not math.isfinite(lt):
            return -np.inf, geta, glphi
        ll += lt
        if want_grad:
            mg = 0.0
            for j in range(J):
                mg += mu[j] * g[j]
            glphi[t] = phi * (digamma(phi) + mg)
            k = 0
            for j in range(J):
                if j != ref:
                    geta[t, k] = phi * mu[j] * (g[j] - mg)
                    k += 1
    return ll, geta, glphi


def _dirichlet_terms_np(logy, eta, lphi, m, ref, want_grad):
    T, J = logy.shape
    geta = np.zeros((T, J - 1))
    glphi = np.zeros(T)
    lp = lphi[m:]
    if np.any(np.abs(lp) > LOG_PHI_BOUND):
        return -np.inf, geta, glphi
    full = np.insert(eta[m:], ref, 0.0, axis=1)
    full = np.exp(full - np.maximum(full.max(axis=1, keepdims=True), 0.0))
    mu = full / full.sum(axis=1, keepdims=True)
    phi = np.exp(lp)
    w = phi[:, None] * mu
    if np.any(w <= 0):
        return -np.inf, geta, glphi
    ly = logy[m:]
    ll = float(np.sum(gammaln(phi)) - np.sum(gammaln(w)) + np.sum((w - 1.0) * ly))
    if not math.isfinite(ll):
        return -np.inf, geta, glphi
    if want_grad:
        g = ly - _digamma_np(w)
        mg = np.sum(mu * g, axis=1)
        glphi[m:] = phi * (_digamma_np(phi) + mg)
        geta[m:] = np.delete(phi[:, None] * mu * (g - mg[:, None]), ref, axis=1)
    return ll, geta, glphi


dirichlet_terms = select(_dirichlet_terms_loops, _dirichlet_terms_np)


def _gaussian_terms_loops(a, eta, chol, log_sigma, m, want_grad):
    T, d = a.shape
    sigma = math.exp(log_sigma)
    geta = np.zeros((T, d))
    gchol = np.zeros((d, d))
    glog_sigma = 0.0
    logdiag = 0.0
    for i in range(d):
        logdiag += math.log(chol[i, i])
    u = np.empty(d)
    v = np.empty(d)
    ll = 0.0
    n = T - m
    for t in range(m, T):
        # L u = (a - eta) / sigma
        for i in range(d):
            s = (a[t, i] - eta[t, i]) / sigma
            for k in range(i):
                s -= chol[i, k] * u[k]
            u[i] = s / chol[i, i]
        uu = 0.0
        for i in range(d):
            uu += u[i] * u[i]
        ll -= 0.5 * uu
        if want_grad:
            # L' v = u
            for i in range(d - 1, -1, -1):
                s = u[i]
                for k in range(i + 1, d):
                    s -= chol[k, i] * v[k]
                v[i] = s / chol[i, i]
            for i in range(d):
                geta[t, i] = v[i] / sigma
                for k in range(i + 1):
                    gchol[i, k] += v[i] * u[k]
            glog_sigma += uu
    ll -= n * (0.5 * d * LOG_2PI + d * log_sigma + logdiag)
    glog_sigma -= n * d
    for i in range(d):
        gchol[i, i] -= n / chol[i, i]
    return ll, geta, gchol, glog_sigma


def _gaussian_terms_np(a, eta, chol, log_sigma, m, want_grad):
    T, d = a.shape
    n = T - m
    sigma = math.exp(log_sigma)
    R = (a[m:] - eta[m:]) / sigma
    U = solve_triangular(chol, R.T, lower=True).T
    uu = float(np.sum(U * U))
    ll = -0.5 * uu - n * (0.5 * d * LOG_2PI + d * log_sigma + np.sum(np.log(np.diag(chol))))
    geta = np.zeros((T, d))
    gchol = np.zeros((d, d))
    glog_sigma = 0.0
    if want_grad:
        V = solve_triangular(chol.T, U.T, lower=False).T
        geta[m:] = V / sigma
        gchol = np.tril(V.T @ U) - np.diag(n / np.diag(chol))
        glog_sigma = uu - n * d
    return float(ll), geta, gchol, glog_sigma


gaussian_terms = select(_gaussian_terms_loops, _gaussian_terms_np)


# --------------------------------------------------------------------------
# reverse passes

def _precision_backward_loops(glphi, dev, e, alpha, tau, m):
    T, d = e.shape
    L = alpha.shape[0]
    K = tau.shape[0]
    D = np.zeros(T)
    galpha = np.zeros(L)
    gtau = np.zeros(K)
    ge = np.zeros((T, d))
    for t in range(T - 1, m - 1, -1):
        s = glphi[t]
        for l in range(L):
            if t + l + 1 < T:
                s += alpha[l] * D[t + l + 1]
        D[t] = s
        for l in range(L):
            galpha[l] += s * dev[t - l - 1]
        for k in range(K):
            sq = 0.0
            for i in range(d):
                sq += e[t - k - 1, i] * e[t - k - 1, i]
            gtau[k] += s * sq
    for t in range(m, T):
        c = 0.0
        for k in range(K):
            if t + k + 1 < T:
                c += 2.0 * tau[k] * D[t + k + 1]
        for i in range(d):
            ge[t, i] = c * e[t, i]
    return galpha, gtau, ge


def _precision_backward_np(glphi, dev, e, alpha, tau, m):
    T = glphi.shape[0]
    L, K = alpha.shape[0], tau.shape[0]
    if L == 0:
        D = glphi.copy()
        D[:m] = 0.0
    else:
        D = np.zeros(T + L)
        for t in range(T - 1, m - 1, -1):
            D[t] = glphi[t] + alpha @ D[t + 1:t + 1 + L]
        D = D[:T]
    sq = np.sum(e * e, axis=1)
    galpha = np.array([D[m:] @ dev[m - l - 1:T - l - 1] for l in range(L)])
    gtau = np.array([D[m:] @ sq[m - k - 1:T - k - 1] for k in range(K)])
    c = np.zeros(T)
    for k in range(K):
        c[m:T - k - 1] += 2.0 * tau[k] * D[m + k + 1:T]
    return galpha.reshape(L), gtau.reshape(K), c[:, None] * e


precision_backward = select(_precision_backward_loops, _precision_backward_np)


def _mean_backward_loops(geta_direct, ge_extra, a, xb, e, A, B, m):
    T, d = a.shape
    P = A.shape[0]
    Q = B.shape[0]
    G = np.zeros((T, d))
    gA = np.zeros(A.shape)
    gB = np.zeros(B.shape)
    gxb = np.zeros((T, d))
    for t in range(T - 1, m - 1, -1):
        for i in range(d):
            s = ge_extra[t, i]
            for q in range(Q):
                if t + q + 1 < T:
                    for k in range(d):
                        s += B[q, k, i] * G[t + q + 1, k]
            G[t, i] = geta_direct[t, i] - s
            gxb[t, i] += G[t, i]
        for p in range(P):
            for i in range(d):
                gi = G[t, i]
                for k in range(d):
                    gA[p, i, k] += gi * (a[t - p - 1, k] - xb[t - p - 1, k])
                    gxb[t - p - 1, k] -= A[p, i, k] * gi
        for q in range(Q):
            for i in range(d):
                for k in range(d):
                    gB[q, i, k] += G[t, i] * e[t - q - 1, k]
    return gA, gB, gxb


def _mean_backward_np(geta_direct, ge_extra, a, xb, e, A, B, m):
    T, d = a.shape
    P, Q = A.shape[0], B.shape[0]
    if Q == 0:
        G = geta_direct - ge_extra
        G[:m] = 0.0
    else:
        G = np.zeros((T + Q, d))
        for t in range(T - 1, m - 1, -1):
            G[t] = geta_direct[t] - ge_extra[t] - np.einsum("qki,qk->i", B, G[t + 1:t + 1 + Q])
        G = G[:T]
    dev = a - xb
    Gm = G[m:]
    gA = np.zeros(A.shape)
    gB = np.zeros(B.shape)
    gxb = G.copy()
    for p in range(P):
        gA[p] = Gm.T @ dev[m - p - 1:T - p - 1]
        gxb[m - p - 1:T - p - 1] -= Gm @ A[p]
    for q in range(Q):
        gB[q] = Gm.T @ e[m - q - 1:T - q - 1]
    return gA, gB, gxb


mean_backward = select(_mean_backward_loops, _mean_backward_np)


def _design_adjoint_loops(X, gxb, Z, glphi):
    T, d, rb = X.shape
    gbeta = np.zeros(rb)
    ggamma = np.zeros(Z.shape[1])
    for t in range(T):
        for i in range(d):
            gi = gxb[t, i]
            if gi != 0.0:
                for k in range(rb):
                    gbeta[k] += X[t, i, k] * gi
        for k in range(Z.shape[1]):
            ggamma[k] += Z[t, k] * glphi[t]
    return gbeta, ggamma


def _design_adjoint_np(X, gxb, Z, glphi):
    return np.einsum("tik,ti->k", X, gxb), Z.T @ glphi


design_adjoint = select(_design_adjoint_loops, _design_adjoint_np)


# --------------------------------------------------------------------------
# fused entry points

@jit
def dirichlet_loglik_grad(a, logy, X, Z, A, B, beta, gamma, alpha, tau, m, ref, want_grad):
    """Log-likelihood of the Dirichlet variants and its gradient per group."""
    xb, zg = linear_predictors(X, beta, Z, gamma)
    eta, e = mean_forward(a, xb, A, B, m)
    dev, lphi = precision_forward(zg, e, alpha, tau, m)
    ll, geta, glphi = dirichlet_terms(logy, eta, lphi, m, ref, want_grad)
    if not want_grad or not math.isfinite(ll):
        return (ll, np.zeros(A.shape), np.zeros(B.shape), np.zeros(beta.shape[0]),
                np.zeros(gamma.shape[0]), np.zeros(alpha.shape[0]), np.zeros(tau.shape[0]))
    galpha, gtau, ge = precision_backward(glphi, dev, e, alpha, tau, m)
    gA, gB, gxb = mean_backward(geta, ge, a, xb, e, A, B, m)
    gbeta, ggamma = design_adjoint(X, gxb, Z, glphi)
    return ll, gA, gB, gbeta, ggamma, galpha, gtau


@jit
def gaussian_loglik_grad(a, X, A, B, beta, chol, log_sigma, m, want_grad):
    """Log-likelihood of the alr-normal variant and its gradient per group."""
    T = X.shape[0]
    Z = np.zeros((T, 0))
    xb, _ = linear_predictors(X, beta, Z, np.zeros(0))
    eta, e = mean_forward(a, xb, A, B, m)
    ll, geta, gchol, gls = gaussian_terms(a, eta, chol, log_sigma, m, want_grad)
    if not want_grad or not math.isfinite(ll):
        return ll, np.zeros(A.shape), np.zeros(B.shape), np.zeros(beta.shape[0]), np.zeros(chol.shape), 0.0
    gA, gB, gxb = mean_backward(geta, np.zeros((T, e.shape[1])), a, xb, e, A, B, m)
    gbeta, _ = design_adjoint(X, gxb, Z, np.zeros(T))
    return ll, gA, gB, gbeta, gchol, gls


@jit
def latent_path(a, X, Z, A, B, beta, gamma, alpha, tau, m):
    """eta (T, d), log phi (T,), innovations, precision deviations, X beta, z'gamma."""
    xb, zg = linear_predictors(X, beta, Z, gamma)
    eta, e = mean_forward(a, xb, A, B, m)
    dev, lphi = precision_forward(zg, e, alpha, tau, m)
    return eta, lphi, e, dev, xb, zg
