"""Machine-checkable invariant suite behind `scorelife verify`.

Each property reports pass/fail with its measured value, bound, and margin.
Sizes here are scaled for an interactive run; the test suite exercises the
same properties at full scale.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .envs import CartpoleState, cartpole_env, cycle_mdp, rollout
from .evaluate import TabularScore, TruncatedEvaluator, tabular_converge, tail_bound, shift_recursion_residual
from .life import LifeValue, compose, encode, shift
from .policy import build_system, solve, verify_against_rollout
from .schauder import fit as fit_schauder
from .schauder import reconstruct
from .transform import TransformedRep, fit_params, params_from_trajectory, apply_transform


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    measured: float
    bound: float
    detail: str

    @property
    def margin(self) -> float:
        return self.bound - self.measured

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": float(self.measured),
            "bound": float(self.bound),
            "margin": float(self.margin),
            "detail": self.detail,
        }


def _projection_range(n_strings: int, seed: int) -> PropertyResult:
    rng = random.Random(seed)
    worst = 0.0
    ok = True
    for _ in range(n_strings):
        base = 2 ** rng.randint(1, 3)
        depth = rng.randint(1, 64)
        l = LifeValue([rng.randrange(base) for _ in range(depth)], base)
        v = l.as_fraction()
        ok &= 0 <= v < 1
        head, tail = shift(l)
        ok &= compose(head, tail).digits == l.digits
        worst = max(worst, float(v))
    return PropertyResult("life_projection_range_and_round_trip", ok, worst, 1.0,
                          f"{n_strings} random digit strings over bases 2,4,8")


def _shift_recursion(env, horizon, states, bound, n_pairs, seed, name) -> PropertyResult:
    ev = TruncatedEvaluator(env, horizon=horizon)
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(n_pairs):
        l = encode([rng.randrange(env.n_actions) for _ in range(horizon + 1)], env.n_actions)
        x = states(rng)
        worst = max(worst, shift_recursion_residual(ev, l, x, horizon))
    cert = 2 * tail_bound(env.gamma, env.g_max, horizon)
    return PropertyResult(name, worst <= bound and worst <= cert + 1e-12, worst, bound,
                          f"{n_pairs} random (l, x); certified bound {cert:.3e}")


def _transform_round_trip(n_ls, seed) -> PropertyResult:
    env = cycle_mdp(3, 0.5)
    ev = TruncatedEvaluator(env, horizon=60)
    p = params_from_trajectory(rollout(env, 0, [0, 0]), 0.5)
    base, down = ev.at(0), ev.at(2)
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(n_ls):
        l = encode([rng.randrange(2) for _ in range(58)], 2)
        worst = max(worst, abs(apply_transform(base, p, l) - down(l)))
    return PropertyResult("transform_trajectory_round_trip", worst < 1e-9, worst, 1e-9,
                          f"{n_ls} random l against direct evaluation at the downstream state")


def _transform_recovery(seed) -> PropertyResult:
    env = cycle_mdp(3, 0.5)
    ev = TruncatedEvaluator(env, horizon=60)
    base = ev.at(0)
    planted = params_from_trajectory(rollout(env, 0, [0, 1]), 0.5)
    fitres = fit_params(base, TransformedRep(base, planted), env, n_samples=25, seed=seed,
                        n_max=8, grid_depth=10)
    err = max(abs(fitres.params.psi - planted.psi), abs(fitres.params.phi - planted.phi))
    return PropertyResult("transform_parameter_recovery", err < 1e-6, err, 1e-6,
                          f"planted (phi={planted.phi}, psi={planted.psi}, N={planted.n})")


def _policy_life(seed) -> PropertyResult:
    from .envs import EnvModel

    swap = EnvModel("swap2", 2, lambda s, u: 1 - s, lambda s, u: 0.0, 0.5, 0.0, states=(0, 1))
    sys = build_system(swap, {0: 1, 1: 0})
    l = solve(sys)
    fixture_err = max(abs(l[0] - 2 / 3), abs(l[1] - 1 / 3))
    env = cycle_mdp(8)
    rng = random.Random(seed)
    worst = fixture_err
    for _ in range(20):
        pol = {s: rng.randint(0, 1) for s in range(8)}
        sys = build_system(env, pol)
        solve(sys)
        worst = max(worst, verify_against_rollout(sys, 40) - 2**-40)
    return PropertyResult("policy_life_fixture_and_rollout", worst <= 1e-12, worst, 1e-12,
                          "2-state fixture to [2/3, 1/3]; 20 random policies on the 8-cycle")


def _fs_interpolation(order, seed) -> PropertyResult:
    worst = 0.0
    env = cycle_mdp(3, 0.5)
    ev = TruncatedEvaluator(env, horizon=40).at(0)
    rep = fit_schauder(ev, order)
    for k in range(2**order + 1):
        l = k / 2**order
        worst = max(worst, abs(reconstruct(rep, l) - ev(l)))
    cp = cartpole_env(cost="quadratic", gamma=0.5)
    evc = TruncatedEvaluator(cp, horizon=30).at(CartpoleState(0, 0, 0, 0))
    repc = fit_schauder(evc, order)
    for k in range(2**order + 1):
        l = k / 2**order
        worst = max(worst, abs(reconstruct(repc, l) - evc(l)))
    return PropertyResult("faber_schauder_interpolation", worst < 1e-12, worst, 1e-12,
                          f"order {order} on cycle and cartpole evaluators")


def _argmin_oracle(depth) -> PropertyResult:
    env = cycle_mdp(3, 0.5)
    ts = TabularScore(env, states=(0, 1, 2), depth=depth)
    deltas, fired = tabular_converge(ts, tol=1e-12)
    ratio_ok = all(b <= 0.5 * a + 1e-15 for a, b in zip(deltas[1:-1], deltas[2:]))
    cert = 0.5**depth * 2 / 0.5
    worst = 0.0
    for x in range(3):
        best = math.inf
        for bits in range(2**depth):
            s, acc = x, 0.0
            for k in range(depth):
                a = (bits >> (depth - 1 - k)) & 1
                acc += 0.5**k * s
                s = (s + 1 + a) % 3
            best = min(best, acc)
        worst = max(worst, abs(float(ts.table[x].min()) - best))
    return PropertyResult("tabular_min_matches_enumeration", worst <= cert and ratio_ok,
                          worst, cert, f"depth {depth}; stop rule fired: {fired}; "
                          f"contraction ratio ok: {ratio_ok}")


def run_verification(scale: float = 1.0, seed: int = 0) -> list[PropertyResult]:
    n = lambda k: max(10, int(k * scale))
    results = [
        _projection_range(n(2000), seed),
        _shift_recursion(cycle_mdp(3, 0.5), 60, lambda rng: rng.randrange(3), 1e-12, n(150), seed + 1,
                  "shift_recursion_residual_cycle"),
        _shift_recursion(
            cartpole_env(cost="quadratic", gamma=0.8), 80,
            lambda rng: CartpoleState(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                      rng.uniform(-0.1, 0.1), rng.uniform(-1, 1)),
            1e-6, n(100), seed + 2, "shift_recursion_residual_cartpole"),
        _transform_round_trip(n(50), seed + 3),
        _transform_recovery(seed + 4),
        _policy_life(seed + 5),
        _fs_interpolation(6, seed + 6),
        _argmin_oracle(8),
    ]
    return results
