"""Experiment configuration: flat INI-style files with strict key checking.

Unknown sections or keys are rejected outright; a silent typo in a regime
parameter would otherwise invalidate a whole reproduction run.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .lattice import LatticeModelSpec
from .models import (
    FhnParams,
    LinearParams,
    PresetNotFoundError,
    default_step_size,
    fhn_model,
    linear_model,
    regime,
)

PRODUCTS = (
    "cov-curve",
    "cov-vs-n",
    "bounds-overlay",
    "spatial-vs-mc",
    "localization-report",
)

_MODEL_KEYS = {
    "preset",
    "kind",
    "a",
    "d_u",
    "w",
    "sigma_u",
    "epsilon",
    "delta1",
    "delta2",
}
_RUN_KEYS = {"n_blocks", "n_samples", "t_end", "step_size", "master_seed", "threads"}
_OUTPUT_KEYS = {"products", "out_dir"}
_BOUNDS_KEYS = {"betas", "grad_g_sup", "t"}
_SECTIONS = {
    "model": _MODEL_KEYS,
    "run": _RUN_KEYS,
    "outputs": _OUTPUT_KEYS,
    "bounds": _BOUNDS_KEYS,
}


class ConfigError(ValueError):
    """Configuration file is malformed; the message names the offending field."""


@dataclass(frozen=True)
class ExperimentConfig:
    params: LinearParams | FhnParams
    n_blocks: int
    n_samples: int
    t_end: float
    master_seed: int
    step_size: float | None = None
    threads: int = 1
    products: tuple[str, ...] = ()
    out_dir: str = "out"
    betas: tuple[float, ...] = (0.2,)
    grad_g_sup: float = 1.0
    bounds_t: float | None = None

    def resolved_step_size(self) -> float:
        return self.step_size if self.step_size is not None else default_step_size(self.params)

    def build_model(self) -> LatticeModelSpec:
        if isinstance(self.params, LinearParams):
            return linear_model(self.params, self.n_blocks)
        return fhn_model(self.params, self.n_blocks)

    def as_dict(self) -> dict:
        """Fully resolved configuration for metadata records.

        Thread count and output directory are execution details that never
        affect results, so they are excluded: identical configs produce
        byte-identical records wherever they are written.
        """
        kind = "linear" if isinstance(self.params, LinearParams) else "fhn"
        out = {"model": {"kind": kind, **vars(self.params).copy()}}
        out["run"] = {
            "n_blocks": self.n_blocks,
            "n_samples": self.n_samples,
            "t_end": self.t_end,
            "step_size": self.resolved_step_size(),
            "master_seed": self.master_seed,
        }
        out["outputs"] = {"products": list(self.products)}
        out["bounds"] = {
            "betas": list(self.betas),
            "grad_g_sup": self.grad_g_sup,
            "t": self.bounds_t if self.bounds_t is not None else self.t_end,
        }
        return out


def _get(section, key, convert, where, required=False, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"missing required key {where}.{key}")
        return default
    raw = section[key]
    try:
        return convert(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"cannot parse {where}.{key} = {raw!r}") from None


def _parse_model(section) -> LinearParams | FhnParams:
    if "preset" in section:
        extra = set(section) - {"preset"}
        if extra:
            raise ConfigError(
                f"model.preset is exclusive; remove keys {sorted(extra)} or the preset"
            )
        try:
            return regime(section["preset"]).params
        except PresetNotFoundError as exc:
            raise ConfigError(f"model.preset: {exc}") from None
    kind = _get(section, "kind", str, "model", required=True)
    if kind == "linear":
        allowed = {"kind", "a", "d_u", "w", "sigma_u"}
        extra = set(section) - allowed
        if extra:
            raise ConfigError(f"unknown keys for a linear model: {sorted(extra)}")
        return LinearParams(
            a=_get(section, "a", float, "model", default=1.0),
            d_u=_get(section, "d_u", float, "model", default=0.0),
            w=_get(section, "w", float, "model", default=0.0),
            sigma_u=_get(section, "sigma_u", float, "model", default=0.5),
        )
    if kind == "fhn":
        allowed = {"kind", "epsilon", "a", "d_u", "w", "delta1", "delta2"}
        extra = set(section) - allowed
        if extra:
            raise ConfigError(f"unknown keys for an fhn model: {sorted(extra)}")
        return FhnParams(
            epsilon=_get(section, "epsilon", float, "model", default=0.01),
            a=_get(section, "a", float, "model", default=1.05),
            d_u=_get(section, "d_u", float, "model", default=0.0),
            w=_get(section, "w", float, "model", default=0.0),
            delta1=_get(section, "delta1", float, "model", default=0.4),
            delta2=_get(section, "delta2", float, "model", default=0.4),
        )
    raise ConfigError(f"model.kind must be 'linear' or 'fhn', got {kind!r}")


def _parse_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


def parse_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    for name in parser.sections():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        unknown = set(parser[name]) - _SECTIONS[name]
        if unknown:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    for required in ("model", "run"):
        if required not in parser:
            raise ConfigError(f"missing required section [{required}]")

    params = _parse_model(parser["model"])
    run = parser["run"]
    cfg = ExperimentConfig(
        params=params,
        n_blocks=_get(run, "n_blocks", int, "run", required=True),
        n_samples=_get(run, "n_samples", int, "run", default=1),
        t_end=_get(run, "t_end", float, "run", required=True),
        master_seed=_get(run, "master_seed", int, "run", required=True),
        step_size=_get(run, "step_size", float, "run"),
        threads=_get(run, "threads", int, "run", default=1),
        products=tuple(
            _get(parser["outputs"], "products", _parse_list, "outputs", default=[])
            if "outputs" in parser
            else []
        ),
        out_dir=(
            _get(parser["outputs"], "out_dir", str, "outputs", default="out")
            if "outputs" in parser
            else "out"
        ),
        betas=tuple(
            float(x)
            for x in (
                _get(parser["bounds"], "betas", _parse_list, "bounds", default=["0.2"])
                if "bounds" in parser
                else ["0.2"]
            )
        ),
        grad_g_sup=(
            _get(parser["bounds"], "grad_g_sup", float, "bounds", default=1.0)
            if "bounds" in parser
            else 1.0
        ),
        bounds_t=(
            _get(parser["bounds"], "t", float, "bounds") if "bounds" in parser else None
        ),
    )
    for product in cfg.products:
        if product not in PRODUCTS:
            raise ConfigError(
                f"unknown product {product!r} in outputs.products; valid: {PRODUCTS}"
            )
    if cfg.n_blocks < 3:
        raise ConfigError(f"run.n_blocks must be >= 3, got {cfg.n_blocks}")
    if cfg.n_samples < 1:
        raise ConfigError(f"run.n_samples must be >= 1, got {cfg.n_samples}")
    if cfg.t_end < 0:
        raise ConfigError(f"run.t_end must be nonnegative, got {cfg.t_end}")
    if cfg.threads < 1:
        raise ConfigError(f"run.threads must be >= 1, got {cfg.threads}")
    return cfg
