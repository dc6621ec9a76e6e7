"""Deterministic environments: native cartpole and a cyclic oracle MDP.

Both built-ins expose a vectorized batch scorer (compiled kernel or numpy
fallback) used by the truncated-rollout evaluator; arbitrary user
environments work through the generic per-step path.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import EncodingError, ScoreLifeError


class CartpoleState(NamedTuple):
    x: float
    x_dot: float
    theta: float
    theta_dot: float


@dataclass(frozen=True)
class CartpoleParams:
    """Standard cart-pole constants (declared here so runs are auditable).

    ``x_dot_bound``/``theta_dot_bound`` are not dynamics limits; they bound
    the reachable-while-valid region and feed the stage-cost ceiling used by
    horizon selection.
    """

    gravity: float = 9.8
    mass_cart: float = 1.0
    mass_pole: float = 0.1
    half_length: float = 0.5
    force_mag: float = 10.0
    tau: float = 0.02
    x_limit: float = 2.4
    theta_limit: float = 0.2095
    episode_cap: int = 500
    x_dot_bound: float = 7.0
    theta_dot_bound: float = 4.0

    @property
    def total_mass(self) -> float:
        return self.mass_cart + self.mass_pole

    @property
    def polemass_length(self) -> float:
        return self.mass_pole * self.half_length

    def as_tuple(self) -> tuple:
        return (
            self.gravity,
            self.mass_cart,
            self.mass_pole,
            self.half_length,
            self.force_mag,
            self.tau,
            self.x_limit,
            self.theta_limit,
        )


def episode_valid(s: CartpoleState, p: CartpoleParams = CartpoleParams()) -> bool:
    return abs(s.x) <= p.x_limit and abs(s.theta) <= p.theta_limit


def cartpole_step(s: CartpoleState, u: int, p: CartpoleParams = CartpoleParams()) -> CartpoleState:
    """One explicit-Euler step; action 0 pushes with -force_mag, 1 with +force_mag."""
    if u not in (0, 1):
        raise EncodingError(f"cartpole action code must be 0 or 1, got {u}")
    if not all(math.isfinite(v) for v in s):
        raise ScoreLifeError(f"non-finite cartpole state {s}")
    force = p.force_mag if u == 1 else -p.force_mag
    cos_t = math.cos(s.theta)
    sin_t = math.sin(s.theta)
    temp = (force + p.polemass_length * s.theta_dot**2 * sin_t) / p.total_mass
    theta_acc = (p.gravity * sin_t - cos_t * temp) / (
        p.half_length * (4.0 / 3.0 - p.mass_pole * cos_t**2 / p.total_mass)
    )
    x_acc = temp - p.polemass_length * theta_acc * cos_t / p.total_mass
    return CartpoleState(
        s.x + p.tau * s.x_dot,
        s.x_dot + p.tau * x_acc,
        s.theta + p.tau * s.theta_dot,
        s.theta_dot + p.tau * theta_acc,
    )


def quadratic_cost(s: CartpoleState) -> float:
    """Diagonal-Q stage cost 2x^2 + x_dot^2 + 8 theta^2 + theta_dot^2."""
    return 2.0 * s.x**2 + s.x_dot**2 + 8.0 * s.theta**2 + s.theta_dot**2


def reward_cost(s: CartpoleState, p: CartpoleParams = CartpoleParams()) -> float:
    """Negated per-step survival reward: -1 while the episode is valid, else 0."""
    return -1.0 if episode_valid(s, p) else 0.0


@dataclass(frozen=True)
class EnvModel:
    """Deterministic control problem: dynamics f, stage cost g, M actions, discount."""

    name: str
    n_actions: int
    step: Callable[[Any, int], Any]
    stage_cost: Callable[[Any, int], float]
    gamma: float
    g_max: float
    is_terminal: Callable[[Any], bool] | None = None
    states: tuple | None = None
    episode_cap: int = 500
    # (x0, digits uint8 (n, depth), gamma, horizon) -> scores (n,)
    batch_scorer: Callable | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_actions < 2 or self.n_actions & (self.n_actions - 1):
            raise EncodingError(f"|U| must be a power of 2, got {self.n_actions}")
        if not 0.0 < self.gamma < 1.0:
            raise ScoreLifeError(f"discount must lie in (0, 1), got {self.gamma}")

    def with_gamma(self, gamma: float) -> "EnvModel":
        return replace(self, gamma=gamma)


COST_KINDS = ("quadratic", "reward")


def cartpole_env(
    cost: str = "quadratic", gamma: float = 0.8, params: CartpoleParams | None = None
) -> EnvModel:
    """Native cart-pole with a selectable stage cost.

    Termination is absorbing with zero cost, which keeps the discounted sum
    defined for the episodic reward cost and bounds the quadratic cost by
    the declared valid-region box.
    """
    p = params or CartpoleParams()
    if cost == "quadratic":
        g_max = (
            2.0 * p.x_limit**2
            + p.x_dot_bound**2
            + 8.0 * p.theta_limit**2
            + p.theta_dot_bound**2
        )
        cost_fn = lambda s, u: quadratic_cost(s)
        kind = 0
    elif cost == "reward":
        g_max = 1.0
        cost_fn = lambda s, u: reward_cost(s, p)
        kind = 1
    else:
        raise ScoreLifeError(f"unknown cost kind {cost!r}; expected one of {COST_KINDS}")

    pt = p.as_tuple()

    def scorer(x0, digits, gamma_, horizon):
        x0 = np.asarray(x0, dtype=np.float64)
        return _kernels.cartpole_scores(x0, digits, gamma_, horizon, kind, pt)

    return EnvModel(
        name="cartpole",
        n_actions=2,
        step=lambda s, u: cartpole_step(s, u, p),
        stage_cost=cost_fn,
        gamma=gamma,
        g_max=g_max,
        is_terminal=lambda s: not episode_valid(s, p),
        episode_cap=p.episode_cap,
        batch_scorer=scorer,
        meta={"cost": cost, "params": p},
    )


def cycle_mdp(n_states: int, gamma: float = 0.5) -> EnvModel:
    """Cyclic MDP on {0..n-1}: action 0 hops +1, action 1 hops +2; g(x, u) = x.

    Small enough for exhaustive sequence enumeration, which makes it the
    brute-force oracle for everything downstream.
    """
    if n_states < 2:
        raise ScoreLifeError(f"cycle MDP needs at least 2 states, got {n_states}")

    def scorer(x0, digits, gamma_, horizon):
        return _kernels.cycle_scores(int(x0), n_states, digits, gamma_, horizon)

    return EnvModel(
        name=f"cycle{n_states}",
        n_actions=2,
        step=lambda s, u: (s + 1 + u) % n_states,
        stage_cost=lambda s, u: float(s),
        gamma=gamma,
        g_max=float(n_states - 1),
        states=tuple(range(n_states)),
        episode_cap=10_000,
        batch_scorer=scorer,
        meta={"n_states": n_states},
    )


@dataclass(frozen=True)
class Trajectory:
    """Aligned rollout record; len(states) == len(actions) + 1."""

    states: tuple
    actions: tuple[int, ...]
    costs: tuple[float, ...]
    cumulative_reward: float

    def __post_init__(self):
        if len(self.states) != len(self.actions) + 1 or len(self.costs) != len(self.actions):
            raise ScoreLifeError("trajectory fields misaligned")

    def __len__(self) -> int:
        return len(self.actions)

    def discounted_cost(self, gamma: float) -> float:
        return float(sum(g * gamma**k for k, g in enumerate(self.costs)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        first = self.states[0]
        if isinstance(first, CartpoleState):
            w.writerow(["t", "x", "xdot", "theta", "thetadot", "action", "stage_cost", "cum_reward"])
            unpack = lambda s: list(s)
        else:
            w.writerow(["t", "state", "action", "stage_cost", "cum_reward"])
            unpack = lambda s: [s]
        cum = 0.0
        for t, (s, a, g) in enumerate(zip(self.states, self.actions, self.costs)):
            cum -= g
            w.writerow([t, *unpack(s), a, repr(g), repr(cum)])
        return buf.getvalue()


def rollout(env: EnvModel, x0, codes: Sequence[int]) -> Trajectory:
    """Apply an action-code sequence, stopping early if the env terminates."""
    states = [x0]
    actions: list[int] = []
    costs: list[float] = []
    x = x0
    for u in codes:
        u = int(u)
        if not 0 <= u < env.n_actions:
            raise EncodingError(f"action code {u} invalid for |U|={env.n_actions}")
        if env.is_terminal is not None and env.is_terminal(x):
            break
        costs.append(float(env.stage_cost(x, u)))
        x = env.step(x, u)
        states.append(x)
        actions.append(u)
    return Trajectory(tuple(states), tuple(actions), tuple(costs), -float(sum(costs)))
