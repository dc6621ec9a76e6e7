"""Relating Score-life functions of two states along a trajectory.

If a length-N action prefix leads from x0 to xN with discounted prefix cost
psi and prefix phase phi (the life value of the prefix), then

    S(l, xN) = (S(l / M**N + phi, x0) - psi) / gamma**N.

Parameters come either exactly from a known trajectory or from a seeded
regression against sampled evaluations when the trajectory is unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import least_squares

from .envs import EnvModel, Trajectory
from .errors import FitError, TransformDomainError
from .evaluate import StateEvaluator
from .fractal_opt import ONE_MINUS
from .life import LifeValue, concat, prefix_phase

TINY_N = 1e-3  # stand-in for the open lower bound N > 0 (identity limit)
SNAP_SLACK = 1.10  # integer snap keeps the fit if residual grows <= 10%
RELIABLE_REL_RMS = 1e-4


@dataclass(frozen=True)
class TransformParams:
    """(phi, psi, N) triple; phi_digits carries exactness when known."""

    phi: float
    psi: float
    n: float
    gamma: float
    base: int = 2
    phi_digits: LifeValue | None = None

    @property
    def scale(self) -> float:
        return self.gamma**self.n

    def arg(self, l: float) -> float:
        return l / self.base**self.n + self.phi


def identity_params(gamma: float, base: int = 2) -> TransformParams:
    return TransformParams(0.0, 0.0, 0.0, gamma, base, LifeValue.zero(base))


def params_from_trajectory(traj: Trajectory, gamma: float, base: int = 2) -> TransformParams:
    """Exact transform parameters of a recorded trajectory."""
    phi = prefix_phase(traj.actions, base)
    psi = float(sum(g * gamma**i for i, g in enumerate(traj.costs)))
    return TransformParams(phi.value, psi, float(len(traj.actions)), gamma, base, phi)


def apply_transform(base_rep: Callable[[float], float], params: TransformParams, l) -> float:
    """Evaluate the downstream Score-life function through the upstream rep.

    Uses exact digit concatenation when both the prefix digits and the digit
    form of l are available and the rep can evaluate digit strings; falls
    back to float arithmetic otherwise.
    """
    p = params
    exact_ok = (
        p.phi_digits is not None
        and float(p.n).is_integer()
        and p.phi_digits.depth == int(p.n)
        and isinstance(l, LifeValue)
        and isinstance(base_rep, StateEvaluator)
    )
    if exact_ok:
        val = base_rep(concat(p.phi_digits, l))
        return (val - p.psi) / p.scale
    lv = l.value if isinstance(l, LifeValue) else float(l)
    arg = p.arg(lv)
    if arg >= 1.0:
        raise TransformDomainError(
            f"transformed argument {arg} >= 1 (phi={p.phi}, N={p.n}); params inconsistent"
        )
    return (float(base_rep(arg)) - p.psi) / p.scale


class TransformedRep:
    """The downstream state's Score-life slice as a reusable callable."""

    def __init__(self, base_rep, params: TransformParams):
        self.base_rep = base_rep
        self.params = params

    def __call__(self, l) -> float:
        return apply_transform(self.base_rep, self.params, l)

    def eval_batch(self, ls) -> np.ndarray:
        p = self.params
        ls = np.asarray(ls, dtype=np.float64)
        args = ls / p.base**p.n + p.phi
        if np.any(args >= 1.0):
            raise TransformDomainError("transformed argument >= 1")
        base_vals = _batch_eval(self.base_rep, args)
        return (base_vals - p.psi) / p.scale


def _batch_eval(rep, ls: np.ndarray) -> np.ndarray:
    if hasattr(rep, "eval_batch"):
        return np.asarray(rep.eval_batch(ls), dtype=np.float64)
    if hasattr(rep, "reconstruct_batch"):
        return np.asarray(rep.reconstruct_batch(ls), dtype=np.float64)
    return np.asarray([rep(float(l)) for l in ls], dtype=np.float64)


@dataclass(frozen=True)
class TransformFit:
    """Primary fit plus both the continuous-N and integer-snapped candidates."""

    params: TransformParams
    residual_rms: float
    continuous: TransformParams
    continuous_rms: float
    snapped: TransformParams | None
    snapped_rms: float | None
    reliable: bool


def _rms_for(base_rep, ls, ys, phi, psi, n, gamma, base) -> float:
    args = np.minimum(ls / base**n + phi, ONE_MINUS)
    vals = (_batch_eval(base_rep, args) - psi) / gamma**n
    return float(np.sqrt(np.mean((vals - ys) ** 2)))


def fit_params(
    base_rep,
    evaluator,
    env: EnvModel,
    n_samples: int = 25,
    seed: int | None = None,
    n_max: int = 16,
    grid_depth: int = 12,
) -> TransformFit:
    """Recover (phi, psi, N) by seeded multistart least squares.

    Coarse stage: sweep integer N (plus a near-zero candidate) against a
    depth-``grid_depth`` dyadic phi grid, with the optimal psi in closed
    form (it enters the residual affinely).  The best cells seed a dyadic
    refinement of phi and a bounded least-squares polish over all three
    parameters.  N is then snapped to the nearest positive integer when
    that costs less than 10% extra residual; both candidates are reported.
    """
    if n_samples < 3:
        raise FitError("need at least 3 sample sites to identify (phi, psi, N)")
    gamma, m = env.gamma, env.n_actions
    psi_max = env.g_max / (1.0 - gamma) + 1.0
    rng = np.random.default_rng(seed)
    ls = rng.uniform(0.0, 1.0, n_samples)
    ys = _batch_eval(evaluator, ls)
    y_scale = 1.0 + float(np.max(np.abs(ys)))

    # coarse sweep: residual of every (N, phi) cell with closed-form psi
    n_grid = 2**grid_depth
    phis = np.arange(n_grid) / n_grid
    candidates = []  # (rms, phi, psi, n)
    for n in [TINY_N] + list(range(1, n_max + 1)):
        scale = float(m) ** n
        args = ls[None, :] / scale + phis[:, None]  # (n_grid, n_samples)
        flat = np.minimum(args.reshape(-1), ONE_MINUS)
        b = _batch_eval(base_rep, flat).reshape(n_grid, n_samples)
        gn = gamma**n
        psi_row = b.mean(axis=1) - gn * ys.mean()
        np.clip(psi_row, 0.0, psi_max, out=psi_row)
        res = (b - psi_row[:, None]) / gn - ys[None, :]
        rms = np.sqrt(np.mean(res**2, axis=1))
        bad = args.max(axis=1) >= 1.0
        rms[bad] = np.inf
        order = np.argsort(rms)[:3]
        for k in order:
            if np.isfinite(rms[k]):
                candidates.append((float(rms[k]), float(phis[k]), float(psi_row[k]), float(n)))
    if not candidates:
        raise FitError("no feasible (phi, N) cell found in the search box")
    candidates.sort()
    candidates = candidates[:6]

    def refine_phi(phi, psi, n, rms):
        step = 1.0 / (2 * n_grid)
        while step > 2.0**-48:
            for cand in (phi - step, phi + step):
                if not 0.0 <= cand < 1.0:
                    continue
                r = _rms_for(base_rep, ls, ys, cand, psi, n, gamma, m)
                if r < rms:
                    phi, rms = cand, r
            step *= 0.5
        return phi, rms

    def polish(phi, psi, n):
        def resid(theta):
            ph, ps, nn = theta
            args = np.minimum(ls / float(m) ** nn + ph, ONE_MINUS)
            return (_batch_eval(base_rep, args) - ps) / gamma**nn - ys

        try:
            sol = least_squares(
                resid,
                x0=[phi, psi, max(n, TINY_N)],
                bounds=([0.0, 0.0, TINY_N / 10], [ONE_MINUS, psi_max, float(n_max)]),
                xtol=1e-14,
                ftol=1e-14,
                gtol=1e-14,
                max_nfev=400,
            )
        except Exception as exc:
            raise FitError(f"transform regression failed to converge: {exc}") from exc
        ph, ps, nn = sol.x
        return float(ph), float(ps), float(nn), float(np.sqrt(np.mean(sol.fun**2)))

    best = None
    for rms0, phi0, psi0, n0 in candidates:
        phi1, rms1 = refine_phi(phi0, psi0, n0, rms0)
        # closed-form psi update after the phi move
        args = np.minimum(ls / float(m) ** n0 + phi1, ONE_MINUS)
        psi1 = float(np.clip(_batch_eval(base_rep, args).mean() - gamma**n0 * ys.mean(), 0, psi_max))
        rms1 = _rms_for(base_rep, ls, ys, phi1, psi1, n0, gamma, m)
        trials = [(rms1, phi1, psi1, n0)]
        ph, ps, nn, r = polish(phi1, psi1, n0)
        trials.append((r, ph, ps, nn))
        for t in trials:
            if best is None or t[0] < best[0]:
                best = t

    rms_c, phi_c, psi_c, n_c = best
    continuous = TransformParams(phi_c, psi_c, n_c, gamma, m)

    # integer snap: hold N fixed at the nearest integer, re-polish phi and psi
    n_int = max(1, round(n_c))

    def resid2(theta):
        phx, psx = theta
        args = np.minimum(ls / float(m) ** n_int + phx, ONE_MINUS)
        return (_batch_eval(base_rep, args) - psx) / gamma**n_int - ys

    sol2 = least_squares(
        resid2,
        x0=[min(max(phi_c, 0.0), ONE_MINUS), min(max(psi_c, 0.0), psi_max)],
        bounds=([0.0, 0.0], [ONE_MINUS, psi_max]),
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=200,
    )
    phi_s, psi_s = (float(v) for v in sol2.x)
    phi_s, rms_s = refine_phi(phi_s, psi_s, float(n_int), float(np.sqrt(np.mean(sol2.fun**2))))
    rms_s = _rms_for(base_rep, ls, ys, phi_s, psi_s, float(n_int), gamma, m)
    snapped = TransformParams(phi_s, psi_s, float(n_int), gamma, m)
    snapped_rms = rms_s

    if snapped_rms <= max(rms_c * SNAP_SLACK, rms_c + 1e-15):
        primary, primary_rms = snapped, snapped_rms
    else:
        primary, primary_rms = continuous, rms_c
    return TransformFit(
        params=primary,
        residual_rms=primary_rms,
        continuous=continuous,
        continuous_rms=rms_c,
        snapped=snapped,
        snapped_rms=snapped_rms,
        reliable=primary_rms <= RELIABLE_REL_RMS * y_scale,
    )
