import dataclasses
import math
import random

import numpy as np
import pytest

from scorelife.envs import CartpoleState, EnvModel, cartpole_env, cycle_mdp
from scorelife.evaluate import (
    TabularScore,
    TruncatedEvaluator,
    default_horizon,
    extract_policy,
    grid_argmin,
    tabular_converge,
    tabular_sweep,
    tail_bound,
    shift_recursion_residual,
)
from scorelife.errors import ScoreLifeError
from scorelife.life import LifeValue, encode

ORIGIN = CartpoleState(0.0, 0.0, 0.0, 0.0)


def constant_cost_env(gamma=0.5):
    return EnvModel(
        name="const",
        n_actions=2,
        step=lambda s, u: 0,
        stage_cost=lambda s, u: 1.0,
        gamma=gamma,
        g_max=1.0,
        states=(0,),
    )


def hand_cartpole_rollout_cost(x0, actions, gamma):
    """Second, straight-line implementation of the quadratic-cost rollout."""
    g, mc, mp, hl, fm, tau = 9.8, 1.0, 0.1, 0.5, 10.0, 0.02
    mt, pml = mc + mp, mp * hl
    x, xd, th, thd = x0
    total = 0.0
    disc = 1.0
    for a in actions:
        if abs(x) > 2.4 or abs(th) > 0.2095:
            break
        total += disc * (2 * x * x + xd * xd + 8 * th * th + thd * thd)
        disc *= gamma
        f = fm if a == 1 else -fm
        ct, st = math.cos(th), math.sin(th)
        temp = (f + pml * thd * thd * st) / mt
        thacc = (g * st - ct * temp) / (hl * (4.0 / 3.0 - mp * ct * ct / mt))
        xacc = temp - pml * thacc * ct / mt
        x, xd, th, thd = x + tau * xd, xd + tau * xacc, th + tau * thd, thd + tau * thacc
    return total


class TestHorizonRule:
    def test_default_horizon_meets_tolerance(self):
        n = default_horizon(0.5, 2.0, 1e-6)
        assert tail_bound(0.5, 2.0, n) < 1e-6 <= tail_bound(0.5, 2.0, n - 1)

    def test_gamma08_horizon_scale(self):
        assert 60 <= default_horizon(0.8, 1.0, 1e-6) <= 90


class TestEval:
    def test_constant_cost_geometric_limit(self):
        ev = TruncatedEvaluator(constant_cost_env(0.5), horizon=60)
        for l in (0.0, 0.3, 0.9):
            assert ev.eval(l, 0) == pytest.approx(2.0, abs=1e-12)

    def test_cycle_matches_direct_summation(self):
        oracle = sum(0.5**k * (k % 3) for k in range(61))
        ev = TruncatedEvaluator(cycle_mdp(3, 0.5), horizon=60)
        assert ev.eval(LifeValue.zero(2), 0) == pytest.approx(oracle, abs=1e-12)

    def test_cartpole_matches_independent_rollout(self):
        env = cartpole_env(cost="quadratic", gamma=0.5)
        ev = TruncatedEvaluator(env, horizon=40)
        rng = random.Random(3)
        for _ in range(5):
            digits = [rng.randint(0, 1) for _ in range(41)]
            l = encode(digits, 2)
            x0 = CartpoleState(rng.uniform(-0.1, 0.1), 0.0, rng.uniform(-0.05, 0.05), 0.0)
            assert ev.eval(l, x0) == pytest.approx(
                hand_cartpole_rollout_cost(x0, digits, 0.5), abs=1e-10
            )

    def test_truncation_tail_bound(self):
        env = cycle_mdp(4, 0.5)
        ev = TruncatedEvaluator(env)
        rng = random.Random(11)
        for _ in range(20):
            l = encode([rng.randint(0, 1) for _ in range(80)], 2)
            for n in (10, 20, 30):
                a = ev.eval(l, 1, n)
                b = ev.eval(l, 1, n + 25)
                assert abs(a - b) <= tail_bound(0.5, 3.0, n) + 1e-12

    def test_endpoint_one_is_all_max_sequence(self):
        env = cycle_mdp(3, 0.5)
        ev = TruncatedEvaluator(env, horizon=30)
        assert ev.eval(1.0, 0) == ev.eval(LifeValue.all_max(2, 31), 0)

    def test_generic_path_matches_kernel_path(self):
        env = cartpole_env(cost="quadratic", gamma=0.6)
        generic = dataclasses.replace(env, batch_scorer=None)
        ls = np.array([0.0, 0.3, 0.5, 0.71875, 0.9])
        x0 = CartpoleState(0.02, -0.1, 0.01, 0.05)
        a = TruncatedEvaluator(env, horizon=35).eval_batch(ls, x0)
        b = TruncatedEvaluator(generic, horizon=35).eval_batch(ls, x0)
        assert np.allclose(a, b, atol=1e-12)

    def test_short_digit_strings_pad_with_zero(self):
        env = cycle_mdp(3, 0.5)
        ev = TruncatedEvaluator(env, horizon=30)
        assert ev.eval(encode([1], 2), 0) == ev.eval(encode([1, 0, 0, 0], 2), 0)


class TestShiftRecursionResidual:
    def test_exact_on_matched_horizons_cycle(self):
        ev = TruncatedEvaluator(cycle_mdp(3, 0.5), horizon=50)
        rng = random.Random(5)
        for _ in range(50):
            l = encode([rng.randint(0, 1) for _ in range(51)], 2)
            x = rng.randrange(3)
            assert shift_recursion_residual(ev, l, x, 50) < 1e-12

    def test_cartpole_residual_small(self):
        env = cartpole_env(cost="quadratic", gamma=0.8)
        ev = TruncatedEvaluator(env, horizon=80)
        bound = 2 * tail_bound(0.8, env.g_max, 80)
        rng = random.Random(9)
        for _ in range(100):
            l = encode([rng.randint(0, 1) for _ in range(81)], 2)
            x = CartpoleState(
                rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.1, 0.1), rng.uniform(-1, 1)
            )
            r = shift_recursion_residual(ev, l, x, 80)
            assert r < 1e-6 and r <= bound + 1e-9

    def test_float_l_accepted(self):
        ev = TruncatedEvaluator(cycle_mdp(3, 0.5), horizon=40)
        assert shift_recursion_residual(ev, 0.65625, 1, 40) < 1e-12


class TestTabular:
    def test_constant_env_fixed_point_iteration(self):
        ts = TabularScore(constant_cost_env(0.5), states=(0,), depth=3)
        for k in range(1, 12):
            tabular_sweep(ts)
            assert np.all(ts.table == 2 * (1 - 0.5**k))

    def test_delta_contracts_geometrically(self):
        ts = TabularScore(cycle_mdp(3, 0.5), states=(0, 1, 2), depth=6)
        deltas, fired = tabular_converge(ts, tol=1e-9)
        assert fired == "tolerance"
        for a, b in zip(deltas[1:-1], deltas[2:]):
            assert b <= 0.5 * a + 1e-15

    def test_converged_min_matches_enumeration(self):
        env = cycle_mdp(3, 0.5)
        ts = TabularScore(env, states=(0, 1, 2), depth=10)
        tabular_converge(ts, tol=1e-12)
        cert = 0.5**10 * 2 / 0.5  # tail bound at depth 10
        for x in range(3):
            # independent oracle: every depth-10 action sequence, summed directly
            best = math.inf
            for bits in range(1024):
                s, acc = x, 0.0
                for k in range(10):
                    a = (bits >> (9 - k)) & 1
                    acc += 0.5**k * s
                    s = (s + 1 + a) % 3
                best = min(best, acc)
            got = ts.table[x].min()
            assert abs(got - best) <= cert + 1e-9

    def test_projection_counted_for_open_region(self):
        env = cycle_mdp(4, 0.5)
        ts = TabularScore(env, states=(0, 1, 2), depth=2)  # state 3 missing
        assert ts.projections > 0

    def test_value_fn_lookup(self):
        ts = TabularScore(cycle_mdp(3, 0.5), states=(0, 1, 2), depth=4)
        tabular_converge(ts)
        f = ts.value_fn(1)
        assert f(0.0) == ts.table[1, 0]
        assert f(15 / 16) == ts.table[1, 15]


class TestGridArgmin:
    def test_monotone_rep(self):
        l, v = grid_argmin(lambda x: x, depth=6)
        assert l.value == 0.0 and v == 0.0

    def test_quadratic_rep_depth8(self):
        l, v = grid_argmin(lambda x: (x - 0.5) ** 2, depth=8)
        assert l.value == 0.5 and v == 0.0

    def test_tie_breaks_to_smaller_l(self):
        l, _ = grid_argmin(lambda x: (x - 0.25) ** 2 * (x - 0.75) ** 2, depth=4)
        assert l.value == 0.25

    def test_matches_tabular_min_on_cycle(self):
        env = cycle_mdp(3, 0.5)
        ts = TabularScore(env, states=(0, 1, 2), depth=8)
        tabular_converge(ts, tol=1e-12)
        ev = TruncatedEvaluator(env, horizon=60)
        for x in range(3):
            _, v = grid_argmin(ev.at(x), depth=8)
            # table's zero-padded tail matches the evaluator's padding
            assert v == pytest.approx(ts.table[x].min(), abs=1e-9)


class TestBase4Env:
    def make_env(self):
        # cost equals the action's own code, state never moves: S(l, 0) is
        # exactly the discounted digit sum of l
        return EnvModel(
            name="acc4",
            n_actions=4,
            step=lambda s, u: s,
            stage_cost=lambda s, u: float(u),
            gamma=0.5,
            g_max=3.0,
            states=(0,),
        )

    def test_eval_is_discounted_digit_sum(self):
        ev = TruncatedEvaluator(self.make_env(), horizon=30)
        assert ev.eval(LifeValue([3, 2], 4), 0) == 4.0  # 3 + 0.5*2
        assert ev.eval(LifeValue([1, 1, 1], 4), 0) == 1.75

    def test_float_decode_in_base4(self):
        ev = TruncatedEvaluator(self.make_env(), horizon=30)
        assert ev.eval(0.875, 0) == 4.0  # digits (3, 2) in base 4

    def test_argmin_prefers_zero_digits(self):
        ev = TruncatedEvaluator(self.make_env(), horizon=20)
        l, v = grid_argmin(ev.at(0), depth=4, base=4)
        assert l.value == 0.0 and v == 0.0

    def test_recursion_residual(self):
        ev = TruncatedEvaluator(self.make_env(), horizon=30)
        assert shift_recursion_residual(ev, LifeValue([3, 2, 1], 4), 0, 30) < 1e-14

    def test_wrong_base_life_value_rejected(self):
        ev = TruncatedEvaluator(self.make_env(), horizon=10)
        with pytest.raises(ScoreLifeError):
            ev.eval(LifeValue([1, 0], 2), 0)


class TestExtractPolicy:
    def test_zero(self):
        assert extract_policy(LifeValue.zero(2)) == 0

    def test_three_quarters(self):
        assert extract_policy(LifeValue.from_float(0.75, 2, 4)) == 1

    def test_base4(self):
        assert extract_policy(LifeValue([2, 1], 4)) == 2
