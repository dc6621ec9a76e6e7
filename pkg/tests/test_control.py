import numpy as np

from scorelife.envs import EnvModel, cartpole_env, cycle_mdp
from scorelife.control import (
    compare_methods,
    initial_state,
    results_to_csv,
    run_approx,
    run_exact,
)
from scorelife.fractal_opt import OptimizerConfig
from scorelife.life import decode_prefix


def constant_env(gamma=0.5):
    """Single fixed point, constant cost: every action sequence is optimal."""
    return EnvModel(
        name="const",
        n_actions=2,
        step=lambda s, u: 0,
        stage_cost=lambda s, u: 1.0,
        gamma=gamma,
        g_max=1.0,
        states=(0,),
        episode_cap=60,
    )


FAST_OPT = OptimizerConfig(restarts=2, grid_depth=8, max_iters=2000, seed=0)


class TestRunExact:
    def test_constant_env_survives_to_cap(self):
        res = run_exact(constant_env(), 0, order=4, opt_cfg=FAST_OPT, max_steps=60, seed=1)
        assert res.steps == 60
        assert res.method == "exact"

    def test_replan_count_matches_loop_structure(self):
        res = run_exact(constant_env(), 0, order=3, opt_cfg=FAST_OPT, prefix=10, max_steps=55, seed=1)
        assert res.replans == -(-res.steps // 10)  # ceil

    def test_cartpole_survives_at_least_ten_steps(self):
        env = cartpole_env(cost="quadratic", gamma=0.5)
        res = run_exact(env, initial_state(env, 3), order=8, opt_cfg=FAST_OPT, max_steps=120, seed=3)
        assert res.steps >= 10

    def test_action_stream_is_concatenated_prefixes(self):
        env = cartpole_env(cost="quadratic", gamma=0.5)
        res = run_exact(env, initial_state(env, 5), order=6, opt_cfg=FAST_OPT, max_steps=40, seed=5)
        expected = []
        for plan in res.plans:
            expected.extend(decode_prefix(plan, 10))
        assert list(res.trajectory.actions) == expected[: res.steps]

    def test_deterministic_under_seed(self):
        env = cartpole_env(cost="quadratic", gamma=0.5)
        x0 = initial_state(env, 7)
        a = run_exact(env, x0, order=5, opt_cfg=FAST_OPT, max_steps=30, seed=7)
        b = run_exact(env, x0, order=5, opt_cfg=FAST_OPT, max_steps=30, seed=7)
        assert a.deterministic_fields() == b.deterministic_fields()

    def test_timings_recorded_per_replan(self):
        res = run_exact(constant_env(), 0, order=3, opt_cfg=FAST_OPT, max_steps=25, seed=0)
        assert len(res.timings_ms) == res.replans


class TestRunApprox:
    def test_cycle_matches_exhaustive_enumeration(self):
        env = cycle_mdp(3, gamma=0.5)
        res = run_approx(env, 2, degree=2, n_samples=150, max_steps=12, seed=4)

        # oracle: exhaustive depth-12 enumeration of the optimal sequence
        best_cost, best_bits = np.inf, 0
        for bits in range(2**12):
            s, acc = 2, 0.0
            for k in range(12):
                a = (bits >> (11 - k)) & 1
                acc += 0.5**k * s
                s = (s + 1 + a) % 3
            if acc < best_cost - 1e-12:
                best_cost, best_bits = acc, bits
        oracle_actions = [(best_bits >> (11 - k)) & 1 for k in range(12)]
        assert list(res.trajectory.actions) == oracle_actions

    def test_cumulative_reward_resums(self):
        env = cartpole_env(cost="reward", gamma=0.8)
        res = run_approx(env, initial_state(env, 2), max_steps=40, seed=2)
        assert res.cumulative_reward == -sum(res.trajectory.costs)
        assert res.cumulative_reward == res.steps  # reward cost is -1 per step

    def test_deterministic_under_seed(self):
        env = cartpole_env(cost="reward", gamma=0.8)
        x0 = initial_state(env, 9)
        a = run_approx(env, x0, max_steps=25, seed=9, n_samples=100)
        b = run_approx(env, x0, max_steps=25, seed=9, n_samples=100)
        assert a.deterministic_fields() == b.deterministic_fields()

    def test_mirror_symmetric_start_survives_both_ways(self):
        env = cartpole_env(cost="reward", gamma=0.8)
        from scorelife.envs import CartpoleState

        res = run_approx(env, CartpoleState(0, 0, 0, 0), max_steps=30, seed=1, n_samples=200)
        assert res.steps == 30

    def test_transform_path_matches_fresh_fits_early(self):
        # prefix transform is exact at small depth, so the first decisions
        # agree with refitting; later steps drift as 1/gamma**N amplifies
        # base-fit error, which is why fresh fits stay the default
        env = cycle_mdp(3, gamma=0.5)
        fresh = run_approx(env, 2, n_samples=150, max_steps=8, seed=4)
        via = run_approx(env, 2, n_samples=150, max_steps=8, seed=4, use_transform=True)
        assert via.trajectory.actions[:2] == fresh.trajectory.actions[:2]
        assert any("transform" in n for n in via.notes)

    def test_transform_path_deterministic(self):
        env = cycle_mdp(3, gamma=0.5)
        a = run_approx(env, 1, n_samples=100, max_steps=6, seed=3, use_transform=True)
        b = run_approx(env, 1, n_samples=100, max_steps=6, seed=3, use_transform=True)
        assert a.deterministic_fields() == b.deterministic_fields()

    def test_transform_path_constant_env_reaches_cap(self):
        res = run_approx(constant_env(), 0, n_samples=60, max_steps=40, seed=0, use_transform=True)
        assert res.steps == 40

    def test_fit_failure_falls_back_to_grid(self, monkeypatch):
        import scorelife.control as control
        from scorelife.errors import FitError

        calls = {"n": 0}
        real = control.fit_poly

        def flaky(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] == 1:
                raise FitError("synthetic failure")
            return real(*args, **kwargs)

        monkeypatch.setattr(control, "fit_poly", flaky)
        env = cycle_mdp(3, gamma=0.5)
        res = run_approx(env, 0, max_steps=3, seed=0, n_samples=60)
        assert res.steps == 3
        assert any("grid fallback" in n for n in res.notes)


class TestCompare:
    def test_constant_env_both_methods_tie_at_cap(self):
        env = constant_env()
        rows = compare_methods(
            env,
            seeds=[0],
            exact_kwargs=dict(order=3, opt_cfg=FAST_OPT, max_steps=30),
            approx_kwargs=dict(n_samples=60, max_steps=30),
        )
        assert [r.method for r in rows] == ["exact", "approx"]
        assert rows[0].steps == rows[1].steps == 30

    def test_csv_shape(self):
        env = cycle_mdp(3, gamma=0.5)
        rows = compare_methods(
            env,
            seeds=[1],
            exact_kwargs=dict(order=3, opt_cfg=FAST_OPT, max_steps=12),
            approx_kwargs=dict(n_samples=60, max_steps=12),
        )
        csv_text = results_to_csv(rows)
        lines = csv_text.strip().splitlines()
        assert lines[0] == "seed,method,t,action,stage_cost,cum_reward,replan_id,fit_ms,opt_ms"
        assert len(lines) == 1 + sum(r.steps for r in rows)

    def test_reproducible_table(self):
        env = cycle_mdp(3, gamma=0.5)
        kw = dict(
            exact_kwargs=dict(order=3, opt_cfg=FAST_OPT, max_steps=10),
            approx_kwargs=dict(n_samples=60, max_steps=10),
        )
        a = compare_methods(env, seeds=[2], **kw)
        b = compare_methods(env, seeds=[2], **kw)
        for ra, rb in zip(a, b):
            assert ra.deterministic_fields() == rb.deterministic_fields()


class TestMethodRanking:
    def test_approx_survives_at_least_as_long_as_exact(self):
        # capped episodes keep this quick; the approximate method reaches the
        # cap from every near-origin start while the exact method's fractal
        # optimizer plateaus earlier
        env = cartpole_env(cost="reward", gamma=0.8)
        wins = 0
        seeds = range(10)
        for seed in seeds:
            x0 = initial_state(env, seed)
            exact = run_exact(
                env, x0, order=8, opt_cfg=OptimizerConfig(restarts=4, grid_depth=9, seed=seed),
                max_steps=120, seed=seed,
            )
            approx = run_approx(env, x0, n_samples=300, max_steps=120, seed=seed)
            wins += approx.steps >= exact.steps
        assert wins >= 9


class TestInitialState:
    def test_cartpole_box(self):
        env = cartpole_env()
        s = initial_state(env, 0)
        assert all(abs(v) <= 0.05 for v in s)

    def test_finite_env_listed_state(self):
        env = cycle_mdp(5)
        assert initial_state(env, 1) in env.states
