"""Life values of stationary policies via the linear fixed point L = A L + C.

Row i of A has a single entry 1/M at the policy successor of state i, so
the system is a 1/M-contraction: a dense solve and plain fixed-point
iteration both work and are cross-checked in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .envs import EnvModel
from .errors import ScoreLifeError, SystemConstructionError
from .life import encode

DENSE_LIMIT = 10_000
BOUNDARY_TOL = 1e-9


@dataclass
class PolicyLifeSystem:
    env: EnvModel
    states: tuple
    policy_codes: np.ndarray  # action code per state
    matrix: np.ndarray        # A, one 1/M entry per row
    offset: np.ndarray        # C_pi
    solution: np.ndarray | None = None
    boundary: np.ndarray | None = None  # flags the degenerate l -> 1 states
    _index: dict = field(default_factory=dict, repr=False)


def build_system(
    env: EnvModel, policy: Mapping | Callable, states: tuple | None = None
) -> PolicyLifeSystem:
    """Assemble A and C_pi for a deterministic policy on a finite state list.

    Successors must stay inside the list; this system is exact and refuses
    to project.
    """
    states = states if states is not None else env.states
    if not states:
        raise SystemConstructionError("a finite state list is required")
    pick = policy.__getitem__ if isinstance(policy, Mapping) else policy
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    m = env.n_actions
    a = np.zeros((n, n))
    c = np.zeros(n)
    codes = np.zeros(n, dtype=np.int64)
    for i, s in enumerate(states):
        u = int(pick(s))
        if not 0 <= u < m:
            raise SystemConstructionError(f"policy code {u} invalid for |U|={m}")
        nxt = env.step(s, u)
        j = index.get(nxt)
        if j is None:
            raise SystemConstructionError(f"policy successor {nxt!r} of state {s!r} leaves the region")
        a[i, j] = 1.0 / m
        c[i] = u / m
        codes[i] = u
    sys = PolicyLifeSystem(env, tuple(states), codes, a, c)
    sys._index = index
    return sys


def solve(sys: PolicyLifeSystem, method: str = "auto") -> np.ndarray:
    """Solve for the policy life values; flags entries that close to 1.

    The all-(M-1)-forever policy has no solution inside [0, 1); the linear
    system then returns exactly 1, which is kept and flagged rather than
    clipped.
    """
    n = len(sys.states)
    if method == "auto":
        method = "dense" if n <= DENSE_LIMIT else "iterative"
    if method == "dense":
        l = np.linalg.solve(np.eye(n) - sys.matrix, sys.offset)
    elif method == "iterative":
        l = np.zeros(n)
        for _ in range(100_000):
            nxt = sys.matrix @ l + sys.offset
            change = float(np.max(np.abs(nxt - l)))
            l = nxt
            if change < 1e-16:
                break
    else:
        raise ScoreLifeError(f"unknown solve method {method!r}")
    residual = float(np.max(np.abs(l - sys.matrix @ l - sys.offset)))
    assert residual < 1e-12, f"policy life solve residual {residual}"
    assert np.all(l >= 0.0) and np.all(l <= 1.0 + 1e-15)
    sys.solution = np.minimum(l, 1.0)
    sys.boundary = 1.0 - sys.solution < BOUNDARY_TOL
    return sys.solution


def unroll_policy_codes(sys: PolicyLifeSystem, state, depth: int) -> list[int]:
    codes = []
    x = state
    for _ in range(depth):
        i = sys._index[x]
        u = int(sys.policy_codes[i])
        codes.append(u)
        x = sys.env.step(x, u)
    return codes


def verify_against_rollout(sys: PolicyLifeSystem, depth: int) -> float:
    """Max |encoded depth-n policy prefix - solved entry| over all states.

    Bounded by M**(-depth) plus solver tolerance, since the prefix drops
    exactly the tail digits.
    """
    if sys.solution is None:
        solve(sys)
    m = sys.env.n_actions
    worst = 0.0
    for i, s in enumerate(sys.states):
        prefix = encode(unroll_policy_codes(sys, s, depth), m)
        worst = max(worst, abs(prefix.value - float(sys.solution[i])))
    return worst
