"""Numpy fallback kernels for batched truncated-rollout scoring.

Semantics match the compiled versions in ``_speedups.pyx``: a score is
``sum_{k=0}^{horizon} gamma**k * g(x_k, u_k)`` along the digit-decoded
action sequence, with absorbing zero-cost termination once the state
leaves the valid region.  Digits beyond each row's stored depth read as 0.
"""

from __future__ import annotations

import numpy as np


def decode_digit_matrix(ls: np.ndarray, base: int, depth: int) -> np.ndarray:
    """Leading `depth` base-M digits of each float in [0, 1), one row per value."""
    v = np.array(ls, dtype=np.float64, copy=True).ravel()
    if v.size and (v.min() < 0.0 or v.max() >= 1.0):
        raise ValueError("life values must lie in [0, 1)")
    out = np.empty((v.size, depth), dtype=np.uint8)
    for k in range(depth):
        v *= base
        d = np.floor(v)
        out[:, k] = d
        v -= d
    return out


def cartpole_scores(x0, digits, gamma, horizon, cost_kind, params):
    """Truncated discounted cost for each digit row, from cart-pole state x0.

    cost_kind 0 selects the diagonal quadratic cost, 1 the negated survival
    reward.
    """
    gravity, mass_cart, mass_pole, half_length, force_mag, tau, x_limit, theta_limit = params
    total_mass = mass_cart + mass_pole
    pml = mass_pole * half_length
    digits = np.ascontiguousarray(digits, dtype=np.uint8)
    n, depth = digits.shape
    x = np.full(n, x0[0])
    xd = np.full(n, x0[1])
    th = np.full(n, x0[2])
    thd = np.full(n, x0[3])
    alive = np.full(n, abs(x0[0]) <= x_limit and abs(x0[2]) <= theta_limit)
    scores = np.zeros(n)
    disc = 1.0
    for k in range(horizon + 1):
        if not alive.any():
            break
        if cost_kind == 0:
            cost = 2.0 * x * x + xd * xd + 8.0 * th * th + thd * thd
            scores += np.where(alive, disc * cost, 0.0)
        else:
            scores += np.where(alive, -disc, 0.0)
        disc *= gamma
        a = digits[:, k] if k < depth else np.zeros(n, dtype=np.uint8)
        force = np.where(a == 1, force_mag, -force_mag)
        ct = np.cos(th)
        st = np.sin(th)
        temp = (force + pml * thd * thd * st) / total_mass
        thacc = (gravity * st - ct * temp) / (
            half_length * (4.0 / 3.0 - mass_pole * ct * ct / total_mass)
        )
        xacc = temp - pml * thacc * ct / total_mass
        x = np.where(alive, x + tau * xd, x)
        xd = np.where(alive, xd + tau * xacc, xd)
        th = np.where(alive, th + tau * thd, th)
        thd = np.where(alive, thd + tau * thacc, thd)
        alive &= (np.abs(x) <= x_limit) & (np.abs(th) <= theta_limit)
    return scores


def cycle_scores(x0, n_states, digits, gamma, horizon):
    """Truncated discounted cost on the cyclic MDP (g(x, u) = x, no termination)."""
    digits = np.ascontiguousarray(digits, dtype=np.uint8)
    n, depth = digits.shape
    s = np.full(n, int(x0), dtype=np.int64)
    scores = np.zeros(n)
    disc = 1.0
    for k in range(horizon + 1):
        scores += disc * s
        disc *= gamma
        a = digits[:, k].astype(np.int64) if k < depth else 0
        s = (s + 1 + a) % n_states
    return scores
