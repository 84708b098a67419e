"""JIT-compiled Metropolis-in-Gibbs sweep loop.

The network and dataset are packed into flat arrays before entering the
kernel: arms of all trials are concatenated (arm-major), with `arm_off[i]`
slicing trial i's arms; `delta` is laid out parallel to the arm slots with
baseline slots pinned at zero, so the log-odds of slot j is always
b[trial] + delta[j].  Every update recomputes its local posterior terms from
the current state (no incremental caches), which keeps the acceptance ratios
trivially consistent with the reference density functions.

One sweep updates, in fixed order: every trial baseline b_i, every relative
effect delta_i(l), every basic contrast d entry, then tau.  Proposals are
univariate Gaussian random walks whose log-sds are adapted toward a target
acceptance rate by Robbins-Monro during burn-in and frozen afterwards; tau
proposals are folded back into (0, 5) by exact reflection.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

LN_2PI = math.log(2.0 * math.pi)
PRIOR_VAR = 1.0e4
TAU_MAX = 5.0
TAU_GUARD = 1e-12
LSD_MIN = math.log(1e-4)
LSD_MAX = math.log(1e3)


@njit(cache=True, inline="always")
def _softplus(x):
    # log(1 + e^x), stable for any x
    if x > 0.0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@njit(cache=True, inline="always")
def _quad_raw(arm_off, arm_t, delta, dfull, i):
    # Residual quadratic form of trial i without the 2/tau^2 prefactor and
    # after halving: x'Sigma^-1 x / 2 = (sum x^2 - (sum x)^2 / m) / tau^2,
    # where x = delta - mean and m is the arm count.
    j0 = arm_off[i]
    j1 = arm_off[i + 1]
    base = dfull[arm_t[j0]]
    s = 0.0
    ss = 0.0
    for j in range(j0 + 1, j1):
        x = delta[j] - (dfull[arm_t[j]] - base)
        s += x
        ss += x * x
    return ss - s * s / (j1 - j0)


@njit(cache=True)
def run_sweeps(arm_off, arm_t, arm_n, arm_r, tr_of_off, tr_of,
               b, delta, dfull, tau,
               burn_in, n_after, thin, target, gen):
    M = arm_off.shape[0] - 1
    N = dfull.shape[0]
    n_keep = n_after // thin
    d_samples = np.empty((n_keep, N - 1))
    tau_samples = np.empty(n_keep)

    lsd_b = np.full(M, math.log(0.5))
    lsd_delta = np.full(arm_t.shape[0], math.log(0.5))
    lsd_d = np.full(N, math.log(0.5))
    lsd_tau = math.log(0.1)

    acc_b = np.zeros(M, dtype=np.int64)
    acc_delta = np.zeros(arm_t.shape[0], dtype=np.int64)
    acc_d = np.zeros(N, dtype=np.int64)
    acc_tau = 0

    sum_m_minus_1 = 0.0
    for i in range(M):
        sum_m_minus_1 += arm_off[i + 1] - arm_off[i] - 1

    keep = 0
    total = burn_in + n_after
    for sweep in range(1, total + 1):
        adapting = sweep <= burn_in
        post = not adapting
        gamma = float(sweep) ** -0.6 if adapting else 0.0
        inv_tau2 = 1.0 / (tau * tau)

        # trial baselines
        for i in range(M):
            j0 = arm_off[i]
            j1 = arm_off[i + 1]
            old = b[i]
            prop = old + math.exp(lsd_b[i]) * gen.standard_normal()
            dlog = -(prop * prop - old * old) / (2.0 * PRIOR_VAR)
            for j in range(j0, j1):
                xo = old + delta[j]
                xn = prop + delta[j]
                dlog += arm_r[j] * (xn - xo) - arm_n[j] * (_softplus(xn) - _softplus(xo))
            ap = math.exp(min(0.0, dlog))
            if gen.random() < ap:
                b[i] = prop
                if post:
                    acc_b[i] += 1
            if adapting:
                lsd_b[i] = min(LSD_MAX, max(LSD_MIN, lsd_b[i] + gamma * (ap - target)))

        # relative effects
        for i in range(M):
            j0 = arm_off[i]
            j1 = arm_off[i + 1]
            for j in range(j0 + 1, j1):
                old = delta[j]
                prop = old + math.exp(lsd_delta[j]) * gen.standard_normal()
                xo = b[i] + old
                xn = b[i] + prop
                dlog = arm_r[j] * (xn - xo) - arm_n[j] * (_softplus(xn) - _softplus(xo))
                q_old = _quad_raw(arm_off, arm_t, delta, dfull, i)
                delta[j] = prop
                q_new = _quad_raw(arm_off, arm_t, delta, dfull, i)
                dlog -= (q_new - q_old) * inv_tau2
                ap = math.exp(min(0.0, dlog))
                if gen.random() < ap:
                    if post:
                        acc_delta[j] += 1
                else:
                    delta[j] = old
                if adapting:
                    lsd_delta[j] = min(LSD_MAX, max(LSD_MIN, lsd_delta[j] + gamma * (ap - target)))

        # basic contrasts (dfull[0] stays pinned at 0)
        for a in range(1, N):
            old = dfull[a]
            prop = old + math.exp(lsd_d[a]) * gen.standard_normal()
            dlog = -(prop * prop - old * old) / (2.0 * PRIOR_VAR)
            q_old = 0.0
            for idx in range(tr_of_off[a], tr_of_off[a + 1]):
                q_old += _quad_raw(arm_off, arm_t, delta, dfull, tr_of[idx])
            dfull[a] = prop
            q_new = 0.0
            for idx in range(tr_of_off[a], tr_of_off[a + 1]):
                q_new += _quad_raw(arm_off, arm_t, delta, dfull, tr_of[idx])
            dlog -= (q_new - q_old) * inv_tau2
            ap = math.exp(min(0.0, dlog))
            if gen.random() < ap:
                if post:
                    acc_d[a] += 1
            else:
                dfull[a] = old
            if adapting:
                lsd_d[a] = min(LSD_MAX, max(LSD_MIN, lsd_d[a] + gamma * (ap - target)))

        # heterogeneity, with exact reflection into (0, 5)
        prop = tau + math.exp(lsd_tau) * gen.standard_normal()
        y = prop - 10.0 * math.floor(prop / 10.0)
        if y > 5.0:
            y = 10.0 - y
        if y < TAU_GUARD or y > TAU_MAX - TAU_GUARD:
            ap = 0.0  # float guard at the open-interval boundaries
        else:
            q_tot = 0.0
            for i in range(M):
                q_tot += _quad_raw(arm_off, arm_t, delta, dfull, i)
            dlog = (-sum_m_minus_1 * (math.log(y) - math.log(tau))
                    - q_tot * (1.0 / (y * y) - inv_tau2))
            ap = math.exp(min(0.0, dlog))
        if gen.random() < ap:
            tau = y
            if post:
                acc_tau += 1
        if adapting:
            lsd_tau = min(LSD_MAX, max(LSD_MIN, lsd_tau + gamma * (ap - target)))

        if post:
            k = sweep - burn_in
            if k % thin == 0:
                for a in range(1, N):
                    d_samples[keep, a - 1] = dfull[a]
                tau_samples[keep] = tau
                keep += 1

    return d_samples, tau_samples, acc_b, acc_delta, acc_d, acc_tau, tau
