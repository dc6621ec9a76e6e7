"""Flat `key = value` experiment configuration with full echo-back.

Every run writes its resolved config (defaults included) next to its
outputs so results stay auditable; the text form round-trips exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass
class ExperimentConfig:
    env: str = "cartpole"
    n_states: int = 3            # finite cyclic env size
    cost: str = "quadratic"      # quadratic | reward
    gamma: float = 0.8
    gammas: str = "0.5,0.6,0.7,0.8"  # plot-slf sweep
    state: str = "0,0,0,0"
    horizon: int = 0             # 0 = auto from the tail-bound rule
    method: str = "approx"       # exact | approx
    order: int = 10
    degree: int = 2
    eta: float = 0.001
    delta: float = 0.01
    restarts: int = 8
    opt_grid_depth: int = 10
    max_iters: int = 100_000
    samples: int = 600           # rollouts per polynomial fit in control
    fit_samples: int = 200       # samples for standalone fit commands
    depth: int = 10              # dyadic grid depth
    plot_samples: int = 2048
    sampling: str = "dyadic"     # dyadic | uniform
    prefix: int = 10
    seeds: int = 5
    seed: int = 0
    max_steps: int = 500
    init_box: float = 0.05   # half-width of the cartpole reset box
    use_transform: bool = False  # approx method: one base fit + trajectory transform
    out: str = "out"

    def __post_init__(self):
        if self.env not in ("cartpole", "cycle"):
            raise ConfigError(f"env must be cartpole or cycle, got {self.env!r}")
        if self.cost not in ("quadratic", "reward"):
            raise ConfigError(f"cost must be quadratic or reward, got {self.cost!r}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.method not in ("exact", "approx"):
            raise ConfigError(f"method must be exact or approx, got {self.method!r}")

    def gamma_list(self) -> list[float]:
        try:
            return [float(g) for g in self.gammas.split(",") if g.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad gammas list {self.gammas!r}") from exc

    def state_vector(self) -> list[float]:
        try:
            return [float(v) for v in self.state.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad state vector {self.state!r}") from exc

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {getattr(self, f.name)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        values = {}
        known = {f.name for f in dataclasses.fields(cls)}
        defaults = cls()
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise ConfigError(f"line {ln}: unknown key {key!r}")
            current = getattr(defaults, key)
            try:
                if isinstance(current, bool):
                    values[key] = val.lower() in ("1", "true", "yes")
                elif isinstance(current, int):
                    values[key] = int(val)
                elif isinstance(current, float):
                    values[key] = float(val)
                else:
                    values[key] = val
            except ValueError as exc:
                raise ConfigError(f"line {ln}: bad value for {key}: {val!r}") from exc
        return cls(**values)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text())

    def override(self, **kwargs) -> "ExperimentConfig":
        clean = {k: v for k, v in kwargs.items() if v is not None}
        return dataclasses.replace(self, **clean)

    def echo_to(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "config_echo.txt"
        path.write_text(self.to_text())
        return path
