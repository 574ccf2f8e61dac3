"""Key-value config files for the command-line tool.

Three sections, all optional::

    [distribution]
    family = worst-case
    r_max = 8

    [experiment]
    seed = 7
    r_max_values = 2, 4, 8
    gamma_grid = 0.1, 0.5, 0.9
    replications = 10000

    [output]
    dir = results

Unknown keys are rejected with the line they appear on.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, fields
from typing import Optional

from .harness import ExperimentConfig
from .measures import FAMILIES, StaircaseTarget, make_family

__all__ = ["ConfigError", "CliConfig", "parse_config", "serialize_config", "load_config", "COMMANDS"]

COMMANDS = ("sample", "fit", "widths", "verify", "sweep")

DIST_KEYS = {
    "family": str,
    "r_max": float,
    "mean": float,
    "sd": float,
    "mode": float,
    "levels": int,
    "heights": "floats",
    "lows": "floats",
    "highs": "floats",
}
EXP_KEYS = {
    "seed": int,
    "r_max_values": "floats",
    "gamma_grid": "floats",
    "replications": int,
    "workers": int,
    "max_steps": int,
    "zn_cap": int,
    "markov_gamma": float,
    "mass_sequence": "floats",
    "mean_neg_replications": int,
}
OUT_KEYS = {"dir": str, "samples": str, "input": str, "n": int, "grid_size": int}
SECTIONS = {"distribution": DIST_KEYS, "experiment": EXP_KEYS, "output": OUT_KEYS}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass
class CliConfig:
    command: Optional[str] = None
    distribution: dict = field(default_factory=lambda: {"family": "worst-case"})
    experiment: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    @property
    def seed(self) -> Optional[int]:
        return self.experiment.get("seed")

    def target(self):
        d = dict(self.distribution)
        family = d.pop("family", "worst-case")
        if family == "staircase" and "heights" in d:
            try:
                return StaircaseTarget(d["heights"], d["lows"], d["highs"])
            except KeyError as exc:
                raise ConfigError(f"custom staircase needs heights, lows and highs (missing {exc})") from None
        if family not in FAMILIES:
            raise ConfigError(f"unknown family {family!r}; valid families: {', '.join(FAMILIES)}")
        return make_family(family, **d)

    def experiment_config(self) -> ExperimentConfig:
        d = dict(self.distribution)
        family = d.pop("family", "worst-case")
        d.pop("r_max", None)
        known = {f.name for f in fields(ExperimentConfig)}
        kwargs = {k: v for k, v in self.experiment.items() if k in known}
        if "r_max_values" not in kwargs and "r_max" in self.distribution:
            kwargs["r_max_values"] = [self.distribution["r_max"]]
        return ExperimentConfig(family=family, family_params=d, **kwargs)


def _line_of(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and "=" in s and s.split("=", 1)[0].strip() == key:
            return i
    return None


def _convert(kind, raw: str):
    if kind == "floats":
        return [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
    return kind(raw)


def parse_config(text: str, command: Optional[str] = None) -> CliConfig:
    """Parse config text; raises :class:`ConfigError` with line numbers."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    cfg = CliConfig(command=command)
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"line {_line_of_section(text, section)}: unknown section [{section}]")
        spec = SECTIONS[section]
        target = getattr(cfg, section)
        for key, raw in parser.items(section):
            if key not in spec:
                raise ConfigError(
                    f"line {_line_of(text, section, key)}: unknown key {key!r} in [{section}] "
                    f"(valid: {', '.join(spec)})"
                )
            if raw.strip() == "":
                continue
            try:
                target[key] = _convert(spec[key], raw.strip())
            except ValueError:
                raise ConfigError(f"line {_line_of(text, section, key)}: bad value {raw!r} for {key}") from None
    return cfg


def _line_of_section(text, section):
    for i, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return i
    return None


def _render(v) -> str:
    if isinstance(v, list):
        return ", ".join(_render(x) for x in v)
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def serialize_config(cfg: CliConfig) -> str:
    """Inverse of :func:`parse_config` (the command is not stored)."""
    out = []
    for section, spec in SECTIONS.items():
        values = getattr(cfg, section)
        if not values:
            continue
        out.append(f"[{section}]")
        for key in spec:
            if key in values:
                out.append(f"{key} = {_render(values[key])}")
        out.append("")
    return "\n".join(out)


def load_config(path: str, command: Optional[str] = None) -> CliConfig:
    with open(path) as fh:
        return parse_config(fh.read(), command)
