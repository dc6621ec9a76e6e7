"""Low-degree polynomial stand-ins for Score-life functions.

The polynomial's minimum value approximates the optimal cost-to-go well
even when its argmin is meaningless as an action encoding, so this module
never decodes a polynomial minimizer into actions; action selection goes
through the one-step lookahead rule instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .envs import EnvModel
from .errors import FitError, ScoreLifeError
from .fractal_opt import ONE_MINUS

CLOSED_FORM_DEGREE = 5
GRID_FALLBACK_POINTS = 1_000_001


@dataclass(frozen=True)
class PolyRep:
    coeffs: np.ndarray  # ascending, a_0 .. a_degree
    state: Any = None
    n_samples: int = 0
    residual_rms: float = float("nan")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, l: float) -> float:
        return float(P.polyval(l, self.coeffs))

    def reconstruct_batch(self, ls) -> np.ndarray:
        return P.polyval(np.asarray(ls, dtype=np.float64), self.coeffs)

    def to_json_obj(self) -> dict:
        return {
            "degree": self.degree,
            "coeffs": [float(c) for c in self.coeffs],
            "rms": float(self.residual_rms),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "PolyRep":
        return cls(np.asarray(obj["coeffs"], dtype=np.float64), residual_rms=obj.get("rms", float("nan")))


def fit_poly(
    evaluator: Callable[[float], float],
    degree: int,
    n_samples: int = 200,
    seed: int | None = None,
    state: Any = None,
    ls: Sequence[float] | None = None,
) -> PolyRep:
    """Least-squares polynomial fit on uniform random sample sites.

    Pass explicit sites via ``ls`` to pin the design (shared sites give
    paired comparisons between successor states a common noise floor).
    """
    if degree < 1:
        raise ScoreLifeError("degree must be >= 1")
    if ls is None:
        if n_samples < degree + 1:
            raise FitError(f"need at least {degree + 1} samples for degree {degree}")
        ls = np.random.default_rng(seed).uniform(0.0, 1.0, n_samples)
    else:
        ls = np.asarray(ls, dtype=np.float64)
    if hasattr(evaluator, "eval_batch"):
        ys = np.asarray(evaluator.eval_batch(ls), dtype=np.float64)
    else:
        ys = np.asarray([evaluator(float(l)) for l in ls], dtype=np.float64)
    vand = P.polyvander(ls, degree)
    coeffs, _, rank, sv = np.linalg.lstsq(vand, ys, rcond=None)
    if rank < degree + 1:
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
        raise FitError(
            f"rank-deficient fit: rank {rank} < {degree + 1}, condition {cond:.3e}; "
            "sample sites too clustered"
        )
    rms = float(np.sqrt(np.mean((vand @ coeffs - ys) ** 2)))
    if state is None:
        state = getattr(evaluator, "state", None)
    return PolyRep(coeffs, state, len(ls), rms)


def poly_min(rep: PolyRep, n_grid: int = GRID_FALLBACK_POINTS) -> tuple[float, float]:
    """Global minimum of the polynomial over [0, 1).

    Degree <= 5 goes through the critical points (real roots of the
    derivative) plus both endpoints; higher degrees fall back to a dense
    grid scan.
    """
    if rep.degree <= CLOSED_FORM_DEGREE:
        cands = [0.0, ONE_MINUS]
        deriv = P.polyder(rep.coeffs)
        for r in P.polyroots(deriv):
            if abs(r.imag) < 1e-12 and 0.0 <= r.real < 1.0:
                cands.append(float(r.real))
        vals = [(float(P.polyval(l, rep.coeffs)), l) for l in cands]
        v, l = min(vals)
        return l, v
    grid = np.linspace(0.0, ONE_MINUS, n_grid)
    vals = rep.reconstruct_batch(grid)
    k = int(np.argmin(vals))
    return float(grid[k]), float(vals[k])


def poly_min_on(rep: PolyRep, lo: float, hi: float, n_grid: int = 100_001) -> tuple[float, float]:
    """Minimum of the polynomial over a closed subinterval [lo, hi]."""
    if not lo <= hi:
        raise ScoreLifeError(f"empty interval [{lo}, {hi}]")
    if rep.degree <= CLOSED_FORM_DEGREE:
        cands = [lo, hi]
        for r in P.polyroots(P.polyder(rep.coeffs)):
            if abs(r.imag) < 1e-12 and lo < r.real < hi:
                cands.append(float(r.real))
        v, l = min((float(P.polyval(c, rep.coeffs)), c) for c in cands)
        return l, v
    grid = np.linspace(lo, hi, n_grid)
    vals = rep.reconstruct_batch(grid)
    k = int(np.argmin(vals))
    return float(grid[k]), float(vals[k])


def bellman_action(env: EnvModel, x, reps: Mapping[int, PolyRep] | Sequence[PolyRep]) -> int:
    """argmin_a g(x, a) + gamma * min_l S_poly(l, f(x, a)); ties to the lower code."""
    best = (float("inf"), env.n_actions)
    for a in range(env.n_actions):
        rep = reps[a]
        _, v = poly_min(rep)
        q = env.stage_cost(x, a) + env.gamma * v
        if q < best[0]:
            best = (q, a)
    return best[1]
