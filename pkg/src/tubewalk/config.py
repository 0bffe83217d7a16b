"""Experiment configuration: YAML schema, validation, and object builders.

A config file has up to five tables (``environment``, ``tube``,
``estimator``, ``gamma``, ``output``) plus a top-level master ``seed``.
Unknown keys are rejected anywhere.  JSON files load through the same
path (JSON is a YAML subset), which lets a consolidated report's embedded
config be re-run directly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import yaml

from .env import EnvironmentSpec
from .tube import TubeTemplate

SCHEMA_VERSION = 1

_TOP_KEYS = {"seed", "environment", "tube", "estimator", "gamma", "output"}
_ENV_KEYS = {"family", "atoms", "d", "lattice_q", "sigma_a", "tau", "xi_scale", "seed", "shared"}
_TUBE_KEYS = {
    "alpha",
    "n",
    "n_list",
    "f_coeff",
    "f_power",
    "g",
    "h",
    "start_window",
    "end_window",
    "r_n",
    "xi_mode",
    "x0",
    "sweep_starts",
}
_EST_KEYS = {"method", "replicas", "particles", "checkpoints", "grid_points", "tolerance"}
_GAMMA_KEYS = {"beta", "t", "dt", "grid_points", "replicas"}
_OUT_KEYS = {"dir", "formats", "svg", "dump_path"}

_ESTIMATOR_DEFAULTS = {
    "method": "auto",
    "replicas": 100_000,
    "particles": 10_000,
    "checkpoints": 20,
    "grid_points": 400,
    "tolerance": 0.20,
}
_GAMMA_DEFAULTS = {"beta": [0.0], "t": 8.0, "dt": 1e-3, "grid_points": 400, "replicas": 8}
_OUTPUT_DEFAULTS = {"dir": "out", "formats": ["csv", "json"], "svg": False, "dump_path": False}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the bad key."""


def _check_keys(table: dict, allowed: set, where: str) -> None:
    if not isinstance(table, dict):
        raise ConfigError(f"{where} must be a table, got {type(table).__name__}")
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")


def _window(value, where: str):
    if value is None:
        return None
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        raise ConfigError(f"{where} must be a pair [lo, hi]")
    return (float(value[0]), float(value[1]))


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated, resolved configuration."""

    seed: int
    env_spec: EnvironmentSpec
    env_seed: int | None
    shared_env: bool
    template: TubeTemplate
    n_list: tuple[int, ...]
    x0: float | None
    xi_mode: str
    sweep_starts: bool
    estimator: dict
    gamma: dict
    output: dict
    raw: dict

    @property
    def config_hash(self) -> str:
        return config_hash(self.raw)


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _build_env(table: dict) -> EnvironmentSpec:
    family = table.get("family")
    if family is None:
        raise ConfigError("environment.family is required")
    xi_scale = float(table.get("xi_scale", 1.0))
    try:
        if family == "degenerate":
            if "atoms" not in table:
                raise ConfigError("environment.atoms is required for the degenerate family")
            return EnvironmentSpec.degenerate(table["atoms"], xi_scale=xi_scale)
        if family == "random_shift_bernoulli":
            if "d" not in table:
                raise ConfigError("environment.d is required for random_shift_bernoulli")
            q = table.get("lattice_q")
            return EnvironmentSpec.random_shift_bernoulli(
                float(table["d"]), q=int(q) if q is not None else None, xi_scale=xi_scale
            )
        if family == "random_mean_gaussian":
            for key in ("sigma_a", "tau"):
                if key not in table:
                    raise ConfigError(f"environment.{key} is required for random_mean_gaussian")
            return EnvironmentSpec.random_mean_gaussian(
                float(table["sigma_a"]), float(table["tau"]), xi_scale=xi_scale
            )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"environment: {exc}") from exc
    raise ConfigError(f"environment.family: unknown family {family!r}")


def _build_tube(table: dict) -> tuple[TubeTemplate, tuple[int, ...], float | None, str, bool]:
    for key in ("alpha", "g", "h"):
        if key not in table:
            raise ConfigError(f"tube.{key} is required")
    if ("n" in table) == ("n_list" in table):
        raise ConfigError("tube needs exactly one of n or n_list")
    n_list = [int(table["n"])] if "n" in table else [int(v) for v in table["n_list"]]
    if any(n < 1 for n in n_list):
        raise ConfigError("tube.n values must be >= 1")
    xi_mode = table.get("xi_mode", "analytic")
    if xi_mode not in ("analytic", "sampled"):
        raise ConfigError("tube.xi_mode must be 'analytic' or 'sampled'")
    try:
        template = TubeTemplate(
            g=table["g"],
            h=table["h"],
            alpha=float(table["alpha"]),
            start_window=_window(table.get("start_window"), "tube.start_window"),
            end_window=_window(table.get("end_window"), "tube.end_window"),
            xi_threshold=float(table["r_n"]) if table.get("r_n") is not None else None,
            f_coeff=float(table.get("f_coeff", 1.0)),
            f_power=float(table.get("f_power", 0.5)),
        )
        for n in n_list:
            template.make(n)  # validates windows against boundaries
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"tube: {exc}") from exc
    x0 = float(table["x0"]) if table.get("x0") is not None else None
    return template, tuple(n_list), x0, xi_mode, bool(table.get("sweep_starts", False))


def validate(raw: dict) -> ExperimentConfig:
    """Validate a raw config mapping and build the model objects."""
    _check_keys(raw, _TOP_KEYS, "config")
    for req in ("environment", "tube"):
        if req not in raw:
            raise ConfigError(f"config.{req} table is required")
    _check_keys(raw["environment"], _ENV_KEYS, "environment")
    _check_keys(raw["tube"], _TUBE_KEYS, "tube")
    est = dict(_ESTIMATOR_DEFAULTS)
    if "estimator" in raw:
        _check_keys(raw["estimator"], _EST_KEYS, "estimator")
        est.update(raw["estimator"])
    if est["method"] not in ("auto", "dp", "grid", "naive", "splitting", "brute"):
        raise ConfigError(f"estimator.method: unknown method {est['method']!r}")
    gam = dict(_GAMMA_DEFAULTS)
    if "gamma" in raw:
        _check_keys(raw["gamma"], _GAMMA_KEYS, "gamma")
        gam.update(raw["gamma"])
    if isinstance(gam["beta"], (int, float)):
        gam["beta"] = [float(gam["beta"])]
    gam["beta"] = [float(b) for b in gam["beta"]]
    if any(b < 0 for b in gam["beta"]):
        raise ConfigError("gamma.beta values must be >= 0")
    out = dict(_OUTPUT_DEFAULTS)
    if "output" in raw:
        _check_keys(raw["output"], _OUT_KEYS, "output")
        out.update(raw["output"])

    env_spec = _build_env(raw["environment"])
    template, n_list, x0, xi_mode, sweep = _build_tube(raw["tube"])
    env_seed = raw["environment"].get("seed")
    return ExperimentConfig(
        seed=int(raw.get("seed", 12345)),
        env_spec=env_spec,
        env_seed=int(env_seed) if env_seed is not None else None,
        shared_env=bool(raw["environment"].get("shared", False)),
        template=template,
        n_list=n_list,
        x0=x0,
        xi_mode=xi_mode,
        sweep_starts=sweep,
        estimator=est,
        gamma=gam,
        output=out,
        raw=raw,
    )


def load(path: str) -> ExperimentConfig:
    """Load and validate a YAML (or JSON) config file."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return validate(raw)


def parse_override(item: str) -> tuple[list[str], object]:
    """Parse a --set KEY.PATH=VALUE override; values use YAML scalars."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like table.key=value")
    key, _, value = item.partition("=")
    path = [p for p in key.strip().split(".") if p]
    if not path:
        raise ConfigError(f"override {item!r} has an empty key")
    return path, yaml.safe_load(value)


def apply_overrides(raw: dict, items) -> dict:
    out = json.loads(json.dumps(raw))  # deep copy of plain data
    for item in items:
        path, value = parse_override(item)
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {item!r}: {part} is not a table")
        node[path[-1]] = value
    return out


def builtin_config_names() -> list[str]:
    files = resources.files("tubewalk").joinpath("configs")
    return sorted(p.name[: -len(".yaml")] for p in files.iterdir() if p.name.endswith(".yaml"))


def load_builtin(name: str) -> dict:
    """Raw mapping of a packaged example config (by bare name)."""
    text = resources.files("tubewalk").joinpath("configs", f"{name}.yaml").read_text()
    return yaml.safe_load(text)
