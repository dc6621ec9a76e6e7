"""Hat-function (Faber-Schauder) representation of Score-life functions.

An order-n fit samples the target on the depth-n dyadic grid (O(2^n)
queries) and reproduces it there exactly; between grid points the partial
sum interpolates linearly.  The derivative uses the right-slope convention
at kinks: each |a*l - b| term contributes slope +a at its own kink.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .errors import ScoreLifeError

ZERO_TOL = 1e-12
MAX_ORDER = 16  # caps the O(2^n) query cost


def basis_eval(i: int, j: int, l: float) -> float:
    """Hat e_ij: 2^j (|l - i/2^j| + |l - (i+1)/2^j| - |2l - (2i+1)/2^j|)."""
    if j < 0 or not 0 <= i <= 2**j - 1:
        raise ScoreLifeError(f"basis index (i={i}, j={j}) out of range")
    p = 2.0**j
    return p * (abs(l - i / p) + abs(l - (i + 1) / p) - abs(2 * l - (2 * i + 1) / p))


def _sign_plus(t):
    """Right-slope sign: +1 at and right of the kink, -1 left of it."""
    return np.where(t >= 0, 1.0, -1.0)


def basis_slope(i: int, j: int, l: float) -> float:
    if j < 0 or not 0 <= i <= 2**j - 1:
        raise ScoreLifeError(f"basis index (i={i}, j={j}) out of range")
    p = 2.0**j
    return float(
        p * (_sign_plus(l - i / p) + _sign_plus(l - (i + 1) / p) - 2.0 * _sign_plus(2 * l - (2 * i + 1) / p))
    )


@dataclass(frozen=True)
class SchauderCoeffs:
    """Order-n coefficient set: alpha0, alpha1 and one hat weight per (i, j)."""

    order: int
    alpha0: float
    alpha1: float
    alpha: np.ndarray  # flat level-major array, length 2**order - 1
    state: Any = None

    def __post_init__(self):
        if len(self.alpha) != 2**self.order - 1:
            raise ScoreLifeError(
                f"order {self.order} needs {2**self.order - 1} hat coefficients, got {len(self.alpha)}"
            )

    def coefficient(self, i: int, j: int) -> float:
        if not 0 <= j < self.order or not 0 <= i < 2**j:
            raise ScoreLifeError(f"coefficient index (i={i}, j={j}) out of range")
        return float(self.alpha[2**j - 1 + i])

    def __call__(self, l: float) -> float:
        return reconstruct(self, l)

    def reconstruct(self, l: float) -> float:
        return reconstruct(self, l)

    def derivative(self, l: float) -> float:
        return derivative(self, l)

    def reconstruct_batch(self, ls) -> np.ndarray:
        ls = np.asarray(ls, dtype=np.float64)
        out = self.alpha0 + self.alpha1 * ls
        for j in range(self.order):
            p = 2**j
            idx = np.minimum((ls * p).astype(np.int64), p - 1)
            a = idx / p
            b = (idx + 1) / p
            c = (2 * idx + 1) / p
            hats = p * (np.abs(ls - a) + np.abs(ls - b) - np.abs(2 * ls - c))
            out = out + self.alpha[p - 1 + idx] * hats
        return out

    def to_json_obj(self) -> dict:
        entries = []
        for j in range(self.order):
            for i in range(2**j):
                v = float(self.alpha[2**j - 1 + i])
                if v != 0.0:
                    entries.append([j, i, v])
        st = self.state
        if st is not None and not isinstance(st, (int, float, str)):
            st = list(st)
        return {
            "order": self.order,
            "alpha0": self.alpha0,
            "alpha1": self.alpha1,
            "alpha": entries,
            "state": st,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SchauderCoeffs":
        alpha = np.zeros(2 ** obj["order"] - 1)
        for j, i, v in obj["alpha"]:
            alpha[2**j - 1 + i] = v
        return cls(obj["order"], obj["alpha0"], obj["alpha1"], alpha, obj.get("state"))


def fit(evaluator: Callable[[float], float], order: int, state: Any = None) -> SchauderCoeffs:
    """Compute the order-n coefficient set from depth-n dyadic samples.

    alpha0 = S(0); alpha1 = S(1) - S(0) (l=1 read as the all-max digit
    limit); each hat weight is the midpoint defect
    S(mid) - (S(left) + S(right)) / 2 of its support cell.
    """
    if order < 0:
        raise ScoreLifeError("order must be >= 0")
    if order > MAX_ORDER:
        raise ScoreLifeError(f"order {order} exceeds the configured cap {MAX_ORDER}")
    n_grid = 2**order
    grid = np.arange(n_grid + 1) / n_grid  # includes the closed endpoint 1
    if hasattr(evaluator, "eval_batch"):
        samples = np.asarray(evaluator.eval_batch(grid), dtype=np.float64)
    else:
        samples = np.empty(n_grid + 1)
        for k, l in enumerate(grid):
            try:
                samples[k] = evaluator(float(l))
            except Exception as exc:
                raise ScoreLifeError(f"evaluator failed at dyadic point {k}/{n_grid}: {exc}") from exc
    alpha0 = float(samples[0])
    alpha1 = float(samples[-1] - samples[0])
    alpha = np.zeros(n_grid - 1)
    for j in range(order):
        stride = n_grid >> j
        left = np.arange(2**j) * stride
        mid = left + stride // 2
        alpha[2**j - 1 : 2 ** (j + 1) - 1] = samples[mid] - 0.5 * (
            samples[left] + samples[left + stride]
        )
    alpha[np.abs(alpha) < ZERO_TOL] = 0.0
    if abs(alpha0) < ZERO_TOL:
        alpha0 = 0.0
    if abs(alpha1) < ZERO_TOL:
        alpha1 = 0.0
    if state is None:
        state = getattr(evaluator, "state", None)
    return SchauderCoeffs(order, alpha0, alpha1, alpha, state)


def reconstruct(rep: SchauderCoeffs, l: float) -> float:
    """Partial-sum evaluation; exact at depth-n dyadic points."""
    if not 0.0 <= l <= 1.0:
        raise ScoreLifeError(f"life value {l} outside [0, 1]")
    v = rep.alpha0 + rep.alpha1 * l
    for j in range(rep.order):
        p = 2**j
        i = min(int(l * p), p - 1)
        coeff = rep.alpha[p - 1 + i]
        if coeff != 0.0:
            v += coeff * basis_eval(i, j, l)
    return float(v)


def derivative(rep: SchauderCoeffs, l: float) -> float:
    """Piecewise-constant slope of the partial sum (right-slope at kinks)."""
    if not 0.0 <= l < 1.0:
        raise ScoreLifeError(f"life value {l} outside [0, 1)")
    g = rep.alpha1
    for j in range(rep.order):
        p = 2**j
        i = min(int(l * p), p - 1)
        coeff = rep.alpha[p - 1 + i]
        if coeff != 0.0:
            g += coeff * basis_slope(i, j, l)
    return float(g)
