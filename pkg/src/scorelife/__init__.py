"""Score-life programming: optimal control over digit-encoded action sequences."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .config import ExperimentConfig
from .control import EpisodeResult, compare_methods, run_approx, run_exact
from .envs import (
    CartpoleParams,
    CartpoleState,
    EnvModel,
    Trajectory,
    cartpole_env,
    cycle_mdp,
    rollout,
)
from .evaluate import (
    TabularScore,
    TruncatedEvaluator,
    default_horizon,
    extract_policy,
    grid_argmin,
    shift_recursion_residual,
    tabular_converge,
    tabular_sweep,
    tail_bound,
)
from .fractal_opt import OptimizerConfig, gradient_descent, multistart_min
from .life import ActionCode, LifeValue, compose, concat, decode_prefix, encode, prefix_phase, shift
from .policy import PolicyLifeSystem, build_system, solve, verify_against_rollout
from .polyfit import PolyRep, bellman_action, fit_poly, poly_min
from .schauder import SchauderCoeffs, basis_eval, derivative, reconstruct
from .schauder import fit as fit_schauder
from .transform import TransformParams, apply_transform, fit_params, params_from_trajectory

__all__ = [
    "ActionCode",
    "CartpoleParams",
    "CartpoleState",
    "EnvModel",
    "EpisodeResult",
    "ExperimentConfig",
    "KERNEL_BACKEND",
    "LifeValue",
    "OptimizerConfig",
    "PolicyLifeSystem",
    "PolyRep",
    "SchauderCoeffs",
    "TabularScore",
    "Trajectory",
    "TransformParams",
    "TruncatedEvaluator",
    "apply_transform",
    "basis_eval",
    "bellman_action",
    "build_system",
    "cartpole_env",
    "compare_methods",
    "compose",
    "concat",
    "cycle_mdp",
    "decode_prefix",
    "default_horizon",
    "derivative",
    "encode",
    "extract_policy",
    "fit_params",
    "fit_poly",
    "fit_schauder",
    "grid_argmin",
    "gradient_descent",
    "multistart_min",
    "params_from_trajectory",
    "poly_min",
    "prefix_phase",
    "reconstruct",
    "rollout",
    "run_approx",
    "run_exact",
    "shift",
    "shift_recursion_residual",
    "solve",
    "tabular_converge",
    "tabular_sweep",
    "tail_bound",
    "verify_against_rollout",
]

__version__ = "0.1.0"
