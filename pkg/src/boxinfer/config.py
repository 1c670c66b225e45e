"""Experiment configuration: presets, flat config-file parsing, validation.

Paper-scale presets are the full-size studies; desk-scale presets
shrink the Monte Carlo sizes so each experiment finishes in minutes
while staying statistically meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .exceptions import ConfigError

__all__ = ["ExperimentConfig", "PRESETS", "parse_config_file", "build_config"]

_EXPERIMENTS = ("simple", "stability", "multicv")
_LINKS = ("probit", "logit")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a simulation run depends on, frozen up front."""

    experiment: str
    # design
    n: int = 100
    p: int = 1
    rho: float = 0.0
    sigma: float = 1.0
    sparsity: int = 0
    amplitude: float = 0.0
    mu_true: float = 0.0
    # selector
    m: int = 1
    q: float = 0.5
    tau: float = 0.0
    n_s: int = 50
    n_folds: int = 5
    # learning
    B: int = 1000
    df: int = 10
    links: tuple = ("probit", "logit")
    # harness
    nsims: int = 100
    alphas: tuple = (0.05,)
    seed: int = 0
    threads: int = 1
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in _EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {_EXPERIMENTS}")
        for name in ("n", "p", "m", "n_s", "n_folds", "B", "df", "nsims"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not isinstance(self.sparsity, int) or self.sparsity < 0:
            raise ConfigError("sparsity must be a non-negative integer")
        if self.sparsity > self.p:
            raise ConfigError("sparsity cannot exceed p")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError("rho must lie in [0, 1)")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if not 0.0 < self.q < 1.0:
            raise ConfigError("q must lie in (0, 1)")
        if self.n_s > self.n:
            raise ConfigError("n_s cannot exceed n")
        if not self.links or any(l not in _LINKS for l in self.links):
            raise ConfigError(f"links must be a subset of {_LINKS}")
        if not self.alphas or any(not 0.0 < a < 1.0 for a in self.alphas):
            raise ConfigError("alpha levels must lie in (0, 1)")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ConfigError("threads must be a positive integer")


PRESETS = {
    "simple": {
        # scalar-mean threshold selection; amplitude/sparsity unused.
        # tau sits above the true mean so that ignoring selection visibly
        # under-covers; at tau = 0 the naive interval's two tail errors
        # cancel and it covers at the nominal rate by accident
        "desk": dict(
            n=100, n_s=50, m=20, q=0.5, sigma=1.0, mu_true=0.0, tau=1.25,
            B=2000, nsims=300, df=10, alphas=(0.05,),
        ),
        "paper": dict(
            n=100, n_s=50, m=20, q=0.5, sigma=1.0, mu_true=0.0, tau=1.25,
            B=10_000, nsims=1000, df=10, alphas=(0.05,),
        ),
    },
    "stability": {
        "desk": dict(
            n=100, p=20, rho=0.1, sigma=2.0, sparsity=5, amplitude=3.0,
            m=5, q=0.6, B=500, nsims=30, df=10, alphas=(0.1,),
        ),
        "paper": dict(
            n=200, p=100, rho=0.1, sigma=2.0, sparsity=20, amplitude=3.0,
            m=5, q=0.6, B=1000, nsims=50, df=10, alphas=(0.1,),
        ),
    },
    "multicv": {
        "desk": dict(
            n=100, p=20, rho=0.0, sigma=2.0, sparsity=5, amplitude=2.0,
            m=3, q=2.0 / 3.0, n_folds=5, B=100, nsims=40, df=10, alphas=(0.1,),
        ),
        "paper": dict(
            n=200, p=50, rho=0.0, sigma=2.0, sparsity=10, amplitude=2.0,
            m=3, q=2.0 / 3.0, n_folds=5, B=100, nsims=100, df=10, alphas=(0.1,),
        ),
    },
}

_INT_KEYS = {"n", "p", "sparsity", "m", "n_s", "n_folds", "B", "df", "nsims", "seed", "threads"}
_FLOAT_KEYS = {"rho", "sigma", "amplitude", "mu_true", "q", "tau"}
_TUPLE_FLOAT_KEYS = {"alphas"}
_TUPLE_STR_KEYS = {"links"}
_STR_KEYS = {"experiment", "out_dir"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _TUPLE_FLOAT_KEYS | _TUPLE_STR_KEYS | _STR_KEYS


def _coerce(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _TUPLE_FLOAT_KEYS:
            return tuple(float(tok) for tok in raw.split(",") if tok.strip())
        if key in _TUPLE_STR_KEYS:
            return tuple(tok.strip() for tok in raw.split(",") if tok.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"cannot parse value for {key!r}: {raw!r}") from exc


def parse_config_file(path: str) -> dict:
    """Read a flat key = value file; '#' starts a comment, blanks ignored."""
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def build_config(experiment: str, scale: str = "desk", config_path: str = None,
                 **overrides) -> ExperimentConfig:
    """Assemble a config: preset, then file values, then explicit overrides."""
    if experiment not in PRESETS:
        raise ConfigError(f"experiment must be one of {_EXPERIMENTS}")
    if scale not in ("desk", "paper"):
        raise ConfigError("scale must be 'desk' or 'paper'")
    values = dict(PRESETS[experiment][scale])
    if config_path is not None:
        file_values = parse_config_file(config_path)
        file_values.pop("experiment", None)
        values.update(file_values)
    for key, val in overrides.items():
        if val is None:
            continue
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown config override {key!r}")
        values[key] = val
    try:
        return ExperimentConfig(experiment=experiment, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def with_updates(config: ExperimentConfig, **kwargs) -> ExperimentConfig:
    return replace(config, **kwargs)
