"""Ground-truth Score-life evaluation and the tabular fixed-point sweep.

The truncated evaluator is the reference for every other representation:
it decodes a life value's digits into actions and sums discounted stage
costs along the induced trajectory.  Truncating at horizon n leaves an
error of at most gamma**(n+1) * g_max / (1 - gamma).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import _kernels
from .envs import EnvModel
from .errors import ScoreLifeError
from .life import LifeValue, float_shift, shift

DEFAULT_TAIL_TOL = 1e-6


def tail_bound(gamma: float, g_max: float, horizon: int) -> float:
    """Worst-case cost of everything beyond the horizon."""
    return gamma ** (horizon + 1) * g_max / (1.0 - gamma)


def default_horizon(gamma: float, g_max: float, tol: float = DEFAULT_TAIL_TOL) -> int:
    """Smallest n with tail_bound(gamma, g_max, n) < tol."""
    n = 0
    while tail_bound(gamma, g_max, n) >= tol:
        n += 1
        if n > 100_000:
            raise ScoreLifeError("horizon selection diverged; check gamma < 1 and g_max")
    return n


def _digit_rows(ls, base: int, depth: int) -> np.ndarray:
    """Normalize floats / LifeValues / digit rows into a (n, depth) uint8 matrix."""
    if isinstance(ls, LifeValue):
        ls = [ls]
    if isinstance(ls, np.ndarray) and ls.ndim == 2:
        rows = np.zeros((ls.shape[0], depth), dtype=np.uint8)
        rows[:, : min(depth, ls.shape[1])] = ls[:, :depth]
        return rows
    if isinstance(ls, (list, tuple)) and any(isinstance(l, LifeValue) for l in ls):
        rows = np.zeros((len(ls), depth), dtype=np.uint8)
        for r, l in enumerate(ls):
            if not isinstance(l, LifeValue):
                rows[r] = _kernels.decode_digit_matrix(np.asarray([float(l)]), base, depth)[0]
                continue
            if l.base != base:
                raise ScoreLifeError(f"life value base {l.base} != env base {base}")
            d = l.digits[:depth]
            rows[r, : len(d)] = d
        return rows
    arr = np.atleast_1d(np.asarray(ls, dtype=np.float64))
    return _kernels.decode_digit_matrix(arr, base, depth)


@dataclass(frozen=True)
class TruncatedEvaluator:
    """Evaluate S(l, x) by depth-limited rollout of the decoded actions."""

    env: EnvModel
    horizon: int | None = None
    tol: float = DEFAULT_TAIL_TOL

    @property
    def n(self) -> int:
        if self.horizon is not None:
            return self.horizon
        return default_horizon(self.env.gamma, self.env.g_max, self.tol)

    @property
    def tail(self) -> float:
        return tail_bound(self.env.gamma, self.env.g_max, self.n)

    def eval(self, l, x, n: int | None = None) -> float:
        """sum_{k=0}^{n} gamma**k g(x_k, u_k) with digits of l as actions.

        ``l`` may be a LifeValue, a float in [0, 1], or a uint8 digit row;
        l == 1.0 evaluates the all-(M-1) limit sequence.
        """
        return float(self.eval_batch([l] if isinstance(l, LifeValue) else l, x, n)[0])

    def eval_batch(self, ls, x, n: int | None = None) -> np.ndarray:
        n = self.n if n is None else n
        base = self.env.n_actions
        if isinstance(ls, (int, float)) and not isinstance(ls, bool):
            ls = [float(ls)]
        ls = self._sub_limit(ls, n)
        rows = _digit_rows(ls, base, n + 1)
        if self.env.batch_scorer is not None:
            return np.asarray(self.env.batch_scorer(x, rows, self.env.gamma, n))
        return self._generic_scores(rows, x, n)

    def _sub_limit(self, ls, n: int):
        """Map the closed endpoint l=1 to the all-(M-1) digit sequence."""
        top = LifeValue.all_max(self.env.n_actions, n + 1)
        if isinstance(ls, (list, tuple)):
            return [top if (isinstance(v, float) and v == 1.0) else v for v in ls]
        if isinstance(ls, np.ndarray) and ls.ndim == 1 and np.any(ls == 1.0):
            return [top if v == 1.0 else float(v) for v in ls]
        return ls

    def _generic_scores(self, rows: np.ndarray, x0, n: int) -> np.ndarray:
        env = self.env
        out = np.zeros(rows.shape[0])
        for r in range(rows.shape[0]):
            x = x0
            disc = 1.0
            acc = 0.0
            for k in range(n + 1):
                if env.is_terminal is not None and env.is_terminal(x):
                    break
                u = int(rows[r, k])
                acc += disc * env.stage_cost(x, u)
                disc *= env.gamma
                x = env.step(x, u)
            out[r] = acc
        return out

    def at(self, x) -> "StateEvaluator":
        return StateEvaluator(self, x)


@dataclass(frozen=True)
class StateEvaluator:
    """The one-argument slice S(., x) of a truncated evaluator."""

    evaluator: TruncatedEvaluator
    state: Any

    def __call__(self, l) -> float:
        return self.evaluator.eval(l, self.state)

    def eval_batch(self, ls) -> np.ndarray:
        return self.evaluator.eval_batch(ls, self.state)


def shift_recursion_residual(ev: TruncatedEvaluator, l: LifeValue, x, n: int | None = None) -> float:
    """|S_n(l,x) - g(x,u0) - gamma S_{n-1}(l', f(x,u0))| for the digit-shift recursion.

    Zero in exact arithmetic; bounded by float rounding plus twice the tail
    bound when horizons are matched, which they are here.
    """
    n = ev.n if n is None else n
    if isinstance(l, (int, float)):
        head, tail_f = float_shift(float(l), ev.env.n_actions)
        tail: Any = tail_f
    else:
        head, tail = shift(l)
    env = ev.env
    lhs = ev.eval(l, x, n)
    x1 = env.step(x, head)
    rhs = env.stage_cost(x, head) + env.gamma * ev.eval(tail, x1, n - 1)
    return abs(lhs - rhs)


def _nearest_state_index(states_arr: np.ndarray, x) -> int:
    v = np.asarray(x, dtype=np.float64).ravel()
    d = np.linalg.norm(states_arr - v, axis=1)
    return int(np.argmin(d))


@dataclass
class TabularScore:
    """Dense S(l, x) table over a finite region and the depth-d dyadic l-grid.

    The single-digit shift maps the depth-d grid onto itself after a
    trailing-zero pad, so the sweep of the recursion is closed on the table.
    """

    env: EnvModel
    states: tuple
    depth: int
    table: np.ndarray = field(init=False)
    projections: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise ScoreLifeError("l-grid depth must be >= 1")
        m = self.env.n_actions
        self.table = np.zeros((len(self.states), m**self.depth))
        self._index = {s: i for i, s in enumerate(self.states)}
        self._arr = np.asarray(
            [np.asarray(s, dtype=np.float64).ravel() for s in self.states]
        )
        # successor/cost per (state, head digit), applying the boundary
        # projection once up front
        n_s = len(self.states)
        self._succ = np.empty((n_s, m), dtype=np.int64)
        self._cost = np.empty((n_s, m))
        for i, s in enumerate(self.states):
            for a in range(m):
                nxt = self.env.step(s, a)
                j = self._index.get(nxt)
                if j is None:
                    j = _nearest_state_index(self._arr, nxt)
                    self.projections += 1
                self._succ[i, a] = j
                self._cost[i, a] = self.env.stage_cost(s, a)

    def grid_values(self) -> np.ndarray:
        """Real projections of the depth-d digit grid, in table column order."""
        m = self.env.n_actions
        return np.arange(m**self.depth) / float(m**self.depth)

    def life_of_column(self, col: int) -> LifeValue:
        m = self.env.n_actions
        digits = []
        for _ in range(self.depth):
            col, d = divmod(col, m)
            digits.append(d)
        return LifeValue(tuple(reversed(digits)), m)

    def value_fn(self, x) -> Callable[[float], float]:
        """Nearest-grid-point lookup slice for a fixed state."""
        row = self.table[self._index[x]]
        m = self.env.n_actions
        n_cols = m**self.depth

        def f(l: float) -> float:
            col = min(int(l * n_cols), n_cols - 1)
            return float(row[col])

        return f


def tabular_sweep(ts: TabularScore) -> float:
    """One Jacobi sweep of the digit-shift recursion; returns the sup-norm delta."""
    m = ts.env.n_actions
    n_cols = m**ts.depth
    cols = np.arange(n_cols)
    heads = cols // (n_cols // m)
    shifted = (cols % (n_cols // m)) * m  # drop head digit, pad trailing zero
    new = ts._cost[:, heads] + ts.env.gamma * ts.table[ts._succ[:, heads], shifted]
    delta = float(np.max(np.abs(new - ts.table))) if ts.table.size else 0.0
    ts.table = new
    return delta


def tabular_converge(
    ts: TabularScore, tol: float = 1e-9, max_sweeps: int = 10_000
) -> tuple[list[float], str]:
    """Sweep until the sup-norm delta drops under tol or the cap fires."""
    deltas = []
    for _ in range(max_sweeps):
        deltas.append(tabular_sweep(ts))
        if deltas[-1] < tol:
            return deltas, "tolerance"
    return deltas, "sweep_cap"


def grid_argmin(rep, depth: int, base: int = 2) -> tuple[LifeValue, float]:
    """Exhaustive minimum of a callable rep over the depth-d dyadic grid.

    Ties break toward the smaller l so results are deterministic.
    """
    n_cols = base**depth
    grid = np.arange(n_cols) / float(n_cols)
    if hasattr(rep, "eval_batch"):
        vals = np.asarray(rep.eval_batch(grid))
    elif hasattr(rep, "reconstruct_batch"):
        vals = np.asarray(rep.reconstruct_batch(grid))
    else:
        vals = np.asarray([rep(float(l)) for l in grid])
    best = int(np.argmin(vals))  # argmin returns the first (smallest-l) minimizer
    return LifeValue.from_float(grid[best], base, depth), float(vals[best])


def extract_policy(l_star: LifeValue) -> int:
    """First action of the encoded sequence: the head digit of l*."""
    head, _ = shift(l_star)
    return head
