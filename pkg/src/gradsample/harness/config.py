"""Experiment configuration and its YAML file format.

A config file is a flat YAML mapping.  Every key is optional except that
the dataset must be given either as a synthetic ``preset`` or as ``csv``::

    # dataset: synthetic ...
    preset: MG2            # GA | MG1 | MG2 | MG3
    n: 20000
    d: 100
    sigma_x: 1.0
    sigma_eps: 10.0
    misspec: none          # none | hidden_predictor | ar_errors | error_predictor_corr
    rho: 0.0
    data_seed: null        # defaults to seed
    # ... or from a file
    csv: null              # relative to the config file's directory
    y_column: -1           # index or header name
    header: true

    methods: [uniform, leverage, gradient]   # entries may be "method/scheme"
    schemes: [poisson]     # crossed with bare method names
    r_ratios: [0.01, 0.05] # r as a fraction of n
    r_values: []           # absolute r, run after the ratios
    r0_policy: fraction    # fraction (of r) | fixed
    r0: 1.0
    replications: 1000
    seed: 0
    delta: 0.1
    redistribute: false
    sketch_rows: null      # approx_leverage sketch size, default 20 * d
    threads: null          # default: $GRADSAMPLE_THREADS or 1
    output: null
    format: csv            # csv | json
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from gradsample.errors import ParseError
from gradsample.probabilities import Method
from gradsample.sampling import Scheme
from gradsample.synthesis import PRESETS, Misspec

THREADS_ENV = "GRADSAMPLE_THREADS"


class ConfigError(ParseError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class MethodSpec:
    method: Method
    scheme: Scheme = Scheme.POISSON

    @classmethod
    def parse(cls, text: str) -> MethodSpec:
        method, _, scheme = str(text).partition("/")
        try:
            return cls(Method(method.strip()), Scheme(scheme.strip() or "poisson"))
        except ValueError:
            raise ConfigError(f"bad method entry {text!r}") from None

    def __str__(self) -> str:
        return f"{self.method.value}/{self.scheme.value}"


@dataclass
class ExperimentConfig:
    preset: str | None = None
    n: int = 20000
    d: int = 100
    sigma_x: float = 1.0
    sigma_eps: float = 10.0
    misspec: str = "none"
    rho: float = 0.0
    data_seed: int | None = None
    csv: str | None = None
    y_column: int | str = -1
    header: bool = True

    methods: list[Any] = field(default_factory=lambda: ["uniform", "leverage", "gradient"])
    schemes: list[str] = field(default_factory=lambda: ["poisson"])
    r_ratios: list[float] = field(default_factory=lambda: [0.01, 0.05])
    r_values: list[float] = field(default_factory=list)
    r0_policy: str = "fraction"
    r0: float = 1.0
    replications: int = 1000
    seed: int = 0
    delta: float = 0.1
    redistribute: bool = False
    sketch_rows: int | None = None
    threads: int | None = None
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if (self.preset is None) == (self.csv is None):
            raise ConfigError("give exactly one of 'preset' or 'csv'")
        if self.preset is not None and self.preset.upper() not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        try:
            Misspec(self.misspec)
        except ValueError:
            raise ConfigError(f"unknown misspec {self.misspec!r}") from None
        if self.replications < 1:
            raise ConfigError("replications must be at least 1")
        if not self.r_ratios and not self.r_values:
            raise ConfigError("no subsample sizes given")
        if any(not 0 < q <= 1 for q in self.r_ratios):
            raise ConfigError("r_ratios must lie in (0, 1]")
        if any(not r > 0 for r in self.r_values):
            raise ConfigError("r_values must be positive")
        if self.r0_policy not in ("fraction", "fixed"):
            raise ConfigError("r0_policy must be 'fraction' or 'fixed'")
        if not self.r0 > 0:
            raise ConfigError("r0 must be positive")
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be 'csv' or 'json'")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads must be at least 1")
        self.method_specs()

    def method_specs(self) -> list[MethodSpec]:
        specs = []
        for entry in self.methods:
            if "/" in str(entry):
                specs.append(MethodSpec.parse(entry))
            else:
                specs.extend(MethodSpec.parse(f"{entry}/{s}") for s in self.schemes)
        if not specs:
            raise ConfigError("no methods given")
        return specs

    def subsample_sizes(self, n: int) -> list[float]:
        return [q * n for q in self.r_ratios] + [float(r) for r in self.r_values]

    def pilot_size(self, r: float) -> float:
        return self.r0 * r if self.r0_policy == "fraction" else self.r0

    def resolved_threads(self) -> int:
        if self.threads is not None:
            return self.threads
        return int(os.environ.get(THREADS_ENV, "1") or 1)

    @classmethod
    def from_mapping(cls, mapping: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**mapping)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from None

    def to_mapping(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        mapping = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(
            f"invalid YAML: {getattr(exc, 'problem', exc)}",
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
        ) from None
    if not isinstance(mapping, dict):
        raise ConfigError("config must be a mapping of keys to values")
    # relative data paths are taken relative to the config file
    if isinstance(mapping.get("csv"), str) and not os.path.isabs(mapping["csv"]):
        mapping["csv"] = str(Path(path).parent / mapping["csv"])
    return ExperimentConfig.from_mapping(mapping)
