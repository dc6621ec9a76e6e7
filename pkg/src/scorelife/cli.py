"""Command-line entry point: experiments, figure reproductions, verification.

Every command resolves its configuration (file, then flag overrides),
echoes the result to the output directory, and exits 0 on success, 2 on
configuration errors, 3 on numerical failures, 4 on verification failure.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import numpy as np

from .config import ExperimentConfig
from .control import compare_methods, initial_state, results_to_csv, run_approx, run_exact
from .envs import CartpoleState, cartpole_env, cycle_mdp
from .errors import ConfigError, ScoreLifeError
from .evaluate import TruncatedEvaluator
from .fractal_opt import OptimizerConfig
from .polyfit import PolyRep, fit_poly
from .schauder import SchauderCoeffs
from .schauder import fit as fit_schauder
from .svg import polyline_svg
from .transform import fit_params
from .verify import run_verification

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VERIFY = 4


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _resolve(config_path, **overrides) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.load(config_path) if config_path else ExperimentConfig()
        return cfg.override(**overrides)
    except FileNotFoundError as exc:
        _fail(EXIT_CONFIG, f"config file not found: {exc}")
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))


def _build_env(cfg: ExperimentConfig, gamma: float | None = None):
    g = cfg.gamma if gamma is None else gamma
    if cfg.env == "cartpole":
        return cartpole_env(cost=cfg.cost, gamma=g)
    return cycle_mdp(cfg.n_states, g)


def _parse_state(cfg: ExperimentConfig):
    vec = cfg.state_vector()
    if cfg.env == "cartpole":
        if len(vec) != 4:
            raise ConfigError(f"cartpole state needs 4 components, got {len(vec)}")
        return CartpoleState(*vec)
    return int(vec[0])


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg.echo_to(out)
    return out


config_opt = click.option("--config", type=click.Path(), default=None, help="key = value config file")
out_opt = click.option("--out", default=None, help="output directory")
n_states_opt = click.option("--n-states", type=int, default=None, help="state count for env = cycle")


@click.group()
def main():
    """Score-life programming experiments and verification."""


@main.command("plot-slf")
@config_opt
@out_opt
@click.option("--state", default=None, help="comma-separated state, e.g. 0,0,0,0")
@click.option("--gamma", "gammas_flag", multiple=True, type=float, help="repeatable; overrides the sweep")
@click.option("--env", "env_flag", default=None)
@n_states_opt
@click.option("--cost", default=None)
@click.option("--depth", type=int, default=None, help="dyadic sampling depth")
@click.option("--samples", "plot_samples", type=int, default=None, help="uniform sample count")
@click.option("--sampling", default=None, type=click.Choice(["dyadic", "uniform"]))
@click.option("--seed", type=int, default=None)
@click.option("--svg/--no-svg", default=False, help="also render an SVG per gamma")
def cmd_plot_slf(config, out, state, gammas_flag, env_flag, n_states, cost, depth, plot_samples, sampling, seed, svg):
    """Sample S(l, x) over [0, 1) for each gamma in the sweep; CSV (+SVG) per gamma."""
    cfg = _resolve(config, out=out, state=state, env=env_flag, n_states=n_states, cost=cost,
                   depth=depth, plot_samples=plot_samples, sampling=sampling, seed=seed)
    if gammas_flag:
        cfg = cfg.override(gammas=",".join(str(g) for g in gammas_flag))
    try:
        out_path = _out_dir(cfg)
        for g in cfg.gamma_list():
            env = _build_env(cfg, gamma=g)
            x = _parse_state(cfg)
            ev = TruncatedEvaluator(env, horizon=cfg.horizon or None)
            if cfg.sampling == "dyadic":
                ls = np.arange(2**cfg.depth) / 2**cfg.depth
            else:
                ls = np.sort(np.random.default_rng(cfg.seed).uniform(0, 1, cfg.plot_samples))
            scores = ev.eval_batch(ls, x)
            csv_path = out_path / f"slf_gamma{g}.csv"
            with csv_path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["l", "S"])
                for l, s in zip(ls, scores):
                    w.writerow([repr(float(l)), repr(float(s))])
            click.echo(f"wrote {csv_path} ({len(ls)} samples, horizon {ev.n})")
            if svg:
                svg_path = out_path / f"slf_gamma{g}.svg"
                polyline_svg(ls, scores, svg_path, title=f"S(l, x) at gamma={g}")
                click.echo(f"wrote {svg_path}")
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except (ScoreLifeError, FloatingPointError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


@main.command("fit-fs")
@config_opt
@out_opt
@click.option("--state", default=None)
@click.option("--order", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--env", "env_flag", default=None)
@n_states_opt
@click.option("--cost", default=None)
def cmd_fit_fs(config, out, state, order, gamma, env_flag, n_states, cost):
    """Fit the hat-basis representation at a state; writes fs_rep.json."""
    cfg = _resolve(config, out=out, state=state, order=order, gamma=gamma, env=env_flag,
                   n_states=n_states, cost=cost)
    try:
        out_path = _out_dir(cfg)
        env = _build_env(cfg)
        x = _parse_state(cfg)
        ev = TruncatedEvaluator(env, horizon=cfg.horizon or None)
        rep = fit_schauder(ev.at(x), cfg.order)
        path = out_path / "fs_rep.json"
        path.write_text(json.dumps(rep.to_json_obj()) + "\n")
        click.echo(f"wrote {path} (order {rep.order}, {2 + len(rep.alpha)} coefficients)")
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except (ScoreLifeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


@main.command("fit-poly")
@config_opt
@out_opt
@click.option("--state", default=None)
@click.option("--degree", type=int, default=None)
@click.option("--samples", "fit_samples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--env", "env_flag", default=None)
@n_states_opt
@click.option("--cost", default=None)
def cmd_fit_poly(config, out, state, degree, fit_samples, seed, gamma, env_flag, n_states, cost):
    """Least-squares polynomial fit at a state; writes poly_rep.json."""
    cfg = _resolve(config, out=out, state=state, degree=degree, fit_samples=fit_samples,
                   seed=seed, gamma=gamma, env=env_flag, n_states=n_states, cost=cost)
    try:
        out_path = _out_dir(cfg)
        env = _build_env(cfg)
        x = _parse_state(cfg)
        ev = TruncatedEvaluator(env, horizon=cfg.horizon or None)
        rep = fit_poly(ev.at(x), cfg.degree, n_samples=cfg.fit_samples, seed=cfg.seed)
        path = out_path / "poly_rep.json"
        path.write_text(json.dumps(rep.to_json_obj()) + "\n")
        click.echo(f"wrote {path} (degree {rep.degree}, rms {rep.residual_rms:.3e})")
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except (ScoreLifeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


def _load_rep(path: str):
    obj = json.loads(Path(path).read_text())
    if "order" in obj:
        return SchauderCoeffs.from_json_obj(obj)
    if "degree" in obj:
        return PolyRep.from_json_obj(obj)
    raise ConfigError(f"{path} is neither a hat-basis nor a polynomial rep")


@main.command("fit-transform")
@config_opt
@out_opt
@click.option("--base", "base_path", required=True, type=click.Path(exists=True),
              help="JSON rep fitted at the reference state")
@click.option("--state", default=None, help="downstream state to relate to the base")
@click.option("--samples", "fit_samples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--gamma", type=float, default=None)
@click.option("--env", "env_flag", default=None)
@n_states_opt
@click.option("--cost", default=None)
def cmd_fit_transform(config, out, base_path, state, fit_samples, seed, gamma, env_flag, n_states, cost):
    """Regress the (phi, psi, N) transform between two states; writes transform.json."""
    cfg = _resolve(config, out=out, state=state, fit_samples=fit_samples, seed=seed,
                   gamma=gamma, env=env_flag, n_states=n_states, cost=cost)
    try:
        out_path = _out_dir(cfg)
        env = _build_env(cfg)
        x = _parse_state(cfg)
        base_rep = _load_rep(base_path)
        ev = TruncatedEvaluator(env, horizon=cfg.horizon or None)
        fitres = fit_params(base_rep, ev.at(x), env, n_samples=cfg.fit_samples, seed=cfg.seed)
        payload = {
            "phi": fitres.params.phi,
            "psi": fitres.params.psi,
            "N": fitres.params.n,
            "residual": fitres.residual_rms,
            "reliable": fitres.reliable,
            "continuous": {"phi": fitres.continuous.phi, "psi": fitres.continuous.psi,
                           "N": fitres.continuous.n, "residual": fitres.continuous_rms},
            "snapped": {"phi": fitres.snapped.phi, "psi": fitres.snapped.psi,
                        "N": fitres.snapped.n, "residual": fitres.snapped_rms},
        }
        path = out_path / "transform.json"
        path.write_text(json.dumps(payload) + "\n")
        click.echo(f"wrote {path} (residual {fitres.residual_rms:.3e})")
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except (ScoreLifeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


@main.command("policy-life")
@config_opt
@out_opt
@click.option("--policy", "policy_path", required=True, type=click.Path(exists=True),
              help="CSV of state_index,action_code rows")
@click.option("--env", "env_flag", default=None)
@click.option("--n-states", type=int, default=None)
def cmd_policy_life(config, out, policy_path, env_flag, n_states):
    """Solve the policy life-value system; writes state_index,life_value CSV."""
    from .policy import build_system, solve

    cfg = _resolve(config, out=out, env=env_flag, n_states=n_states)
    try:
        if cfg.env != "cycle":
            raise ConfigError("policy-life needs a finite env (env = cycle)")
        out_path = _out_dir(cfg)
        env = _build_env(cfg)
        policy = {}
        with open(policy_path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().lower() in ("state_index", "state"):
                    continue
                policy[int(row[0])] = int(row[1])
        sys_ = build_system(env, policy)
        values = solve(sys_)
        path = out_path / "policy_life.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["state_index", "life_value"])
            for s, v in zip(sys_.states, values):
                w.writerow([s, repr(float(v))])
        flagged = int(sys_.boundary.sum())
        click.echo(f"wrote {path}" + (f" ({flagged} boundary state(s) at l=1)" if flagged else ""))
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except (ScoreLifeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


def _opt_cfg(cfg: ExperimentConfig) -> OptimizerConfig:
    return OptimizerConfig(eta=cfg.eta, delta=cfg.delta, max_iters=cfg.max_iters,
                           restarts=cfg.restarts, seed=cfg.seed, grid_depth=cfg.opt_grid_depth)


@main.command("control")
@config_opt
@out_opt
@click.option("--method", default=None, type=click.Choice(["exact", "approx"]))
@click.option("--env", "env_flag", default=None)
@n_states_opt
@click.option("--gamma", type=float, default=None)
@click.option("--cost", default=None)
@click.option("--seeds", type=int, default=None, help="number of seeded episodes")
@click.option("--samples", type=int, default=None)
@click.option("--degree", type=int, default=None)
@click.option("--order", type=int, default=None)
@click.option("--prefix", type=int, default=None)
@click.option("--max-steps", type=int, default=None)
@click.option("--eta", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--restarts", type=int, default=None)
@click.option("--max-iters", type=int, default=None)
@click.option("--use-transform", is_flag=True, default=None,
              help="approx: one base fit + trajectory transform for successors")
def cmd_control(config, out, method, env_flag, n_states, gamma, cost, seeds, samples, degree,
                order, prefix, max_steps, eta, delta, restarts, max_iters, use_transform):
    """Run closed-loop episodes; writes per-step results.csv."""
    cfg = _resolve(config, out=out, method=method, env=env_flag, n_states=n_states, gamma=gamma,
                   cost=cost, seeds=seeds, samples=samples, degree=degree, order=order,
                   prefix=prefix, max_steps=max_steps, eta=eta, delta=delta, restarts=restarts,
                   max_iters=max_iters, use_transform=use_transform)
    try:
        out_path = _out_dir(cfg)
        env = _build_env(cfg)
        results = []
        for seed in range(cfg.seeds):
            x0 = initial_state(env, seed, box=cfg.init_box)
            if cfg.method == "exact":
                r = run_exact(env, x0, order=cfg.order, opt_cfg=_opt_cfg(cfg),
                              prefix=cfg.prefix, max_steps=cfg.max_steps, seed=seed)
            else:
                r = run_approx(env, x0, degree=cfg.degree, n_samples=cfg.samples,
                               max_steps=cfg.max_steps, seed=seed,
                               use_transform=cfg.use_transform)
            results.append(r)
            click.echo(f"seed {seed}: {r.steps} steps, cumulative reward {r.cumulative_reward}")
        path = out_path / "results.csv"
        path.write_text(results_to_csv(results, prefix=cfg.prefix))
        click.echo(f"wrote {path}")
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except (ScoreLifeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


@main.command("compare")
@config_opt
@out_opt
@click.option("--env", "env_flag", default=None)
@n_states_opt
@click.option("--gamma", type=float, default=None)
@click.option("--cost", default=None)
@click.option("--seeds", type=int, default=None)
@click.option("--max-steps", type=int, default=None)
@click.option("--eta", type=float, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--restarts", type=int, default=None)
@click.option("--max-iters", type=int, default=None)
def cmd_compare(config, out, env_flag, n_states, gamma, cost, seeds, max_steps, eta, delta,
                restarts, max_iters):
    """Run both methods per seed; writes the combined per-step compare.csv."""
    cfg = _resolve(config, out=out, env=env_flag, n_states=n_states, gamma=gamma, cost=cost,
                   seeds=seeds, max_steps=max_steps, eta=eta, delta=delta, restarts=restarts,
                   max_iters=max_iters)
    try:
        out_path = _out_dir(cfg)
        env = _build_env(cfg)
        results = compare_methods(
            env,
            seeds=range(cfg.seeds),
            box=cfg.init_box,
            exact_kwargs=dict(order=cfg.order, opt_cfg=_opt_cfg(cfg), prefix=cfg.prefix,
                              max_steps=cfg.max_steps),
            approx_kwargs=dict(degree=cfg.degree, n_samples=cfg.samples,
                               max_steps=cfg.max_steps, use_transform=cfg.use_transform),
        )
        for r in results:
            click.echo(f"seed {r.seed} {r.method}: {r.steps} steps")
        path = out_path / "compare.csv"
        path.write_text(results_to_csv(results, prefix=cfg.prefix))
        click.echo(f"wrote {path}")
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except (ScoreLifeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


@main.command("verify")
@config_opt
@out_opt
@click.option("--scale", type=float, default=1.0, help="size multiplier for the property suite")
@click.option("--seed", type=int, default=None)
def cmd_verify(config, out, scale, seed):
    """Run the invariant suite; nonzero exit on any failing property."""
    cfg = _resolve(config, out=out, seed=seed)
    try:
        out_path = _out_dir(cfg)
        results = run_verification(scale=scale, seed=cfg.seed)
        report = [r.to_json_obj() for r in results]
        path = out_path / "verify_report.json"
        path.write_text(json.dumps(report, indent=2) + "\n")
        failed = 0
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            click.echo(f"[{status}] {r.name}: measured {r.measured:.3e} vs bound {r.bound:.3e}")
            failed += 0 if r.passed else 1
        click.echo(f"wrote {path}")
        if failed:
            _fail(EXIT_VERIFY, f"{failed} propert{'y' if failed == 1 else 'ies'} failed")
    except (ScoreLifeError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _fail(EXIT_NUMERIC, str(exc))


if __name__ == "__main__":
    main()
