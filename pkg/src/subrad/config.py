"""Strict TOML run configuration.

Every experiment has a fixed schema of sections and keys. Unknown keys,
missing physical parameters and out-of-range values are all collected and
reported together. Only numerical knobs (grids, fit windows, budgets)
have defaults; the ones applied are recorded in ``RunConfig.defaults``.

Angles are given in units of pi, e.g. ``k0d_pi = 0.55`` means k0 d = 0.55 pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .freespace import MAX_CELLS, MAX_REGULAR

EXPERIMENTS = ("dispersion", "k4", "scaling", "infidelity", "dimer", "waveguide", "toy")


@dataclass(frozen=True)
class Field:
    check: Callable[[str, Any], Any]
    required: bool = True
    default: Any = None


def _number(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"{name} must be a number, got {v!r}")
    if not math.isfinite(v):
        raise ValueError(f"{name} must be finite, got {v!r}")
    return float(v)


def _integer(name, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValueError(f"{name} must be an integer, got {v!r}")
    return v


def open_interval(lo, hi):
    def check(name, v):
        x = _number(name, v)
        if not lo < x < hi:
            raise ValueError(f"{name} = {x} out of range: must satisfy {lo} < {name} < {hi}")
        return x

    return check


def int_range(lo, hi):
    def check(name, v):
        n = _integer(name, v)
        if not lo <= n <= hi:
            raise ValueError(f"{name} = {n} out of range: must satisfy {lo} <= {name} <= {hi}")
        return n

    return check


def positive(name, v):
    x = _number(name, v)
    if not x > 0:
        raise ValueError(f"{name} = {x} out of range: must be > 0")
    return x


def k0d_pi(name, v):
    if v == "k4":
        return "k4"
    return open_interval(0, 1)(name, v)


def size_list(lo, hi):
    def check(name, v):
        if not isinstance(v, list) or not v:
            raise ValueError(f"{name} must be a non-empty list of integers")
        ns = [int_range(lo, hi)(f"{name}[{i}]", x) for i, x in enumerate(v)]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError(f"{name} must be strictly ascending, got {ns}")
        return ns

    return check


def float_list(item):
    def check(name, v):
        if not isinstance(v, list) or not v:
            raise ValueError(f"{name} must be a non-empty list of numbers")
        return [item(f"{name}[{i}]", x) for i, x in enumerate(v)]

    return check


def window(name, v):
    if not (isinstance(v, list) and len(v) == 2):
        raise ValueError(f"{name} must be a two-element list [N_min, N_max]")
    lo, hi = (_integer(f"{name}[{i}]", x) for i, x in enumerate(v))
    if not 1 <= lo < hi:
        raise ValueError(f"{name} must satisfy 1 <= N_min < N_max, got {v}")
    return [lo, hi]


def choice(*options):
    def check(name, v):
        if v not in options:
            raise ValueError(f"{name} must be one of {list(options)}, got {v!r}")
        return v

    return check


def sine_nonzero(lo, hi):
    inner = open_interval(lo, hi)

    def check(name, v):
        x = inner(name, v)
        if abs(math.sin(math.pi * x)) < 1e-12:
            raise ValueError(f"{name} = {x} makes sin({name} pi) vanish")
        return x

    return check


_WINDOW = Field(window, required=False, default=[50, 400])
_BUDGET = Field(positive, required=False, default=None)

SCHEMA: dict[str, dict[str, dict[str, Field]]] = {
    "dispersion": {
        "model": {"k0d_pi": Field(k0d_pi)},
        "grid": {"n_points": Field(int_range(3, 100001), required=False, default=401)},
    },
    "k4": {},
    "scaling": {
        "model": {"k0d_pi": Field(k0d_pi)},
        "sweep": {"N_list": Field(size_list(2, MAX_REGULAR)), "budget": _BUDGET},
        "fit": {"window": _WINDOW},
    },
    "infidelity": {
        "model": {"k0d_pi": Field(k0d_pi), "reference": Field(choice("H1", "H2_s4"))},
        "sweep": {"N_list": Field(size_list(2, MAX_REGULAR))},
        "fit": {"window": _WINDOW},
    },
    "dimer": {
        "model": {
            "k0d_pi": Field(open_interval(0, 1)),
            "d1_over_d": Field(float_list(open_interval(0, 1))),
        },
        "sweep": {"N_list": Field(size_list(2, MAX_CELLS)), "budget": _BUDGET},
        "fit": {
            "window": _WINDOW,
            "window_modes": Field(positive, required=False, default=1.0),
        },
        "scan": {
            "d1_over_d": Field(float_list(open_interval(0, 1)), required=False, default=None),
            "n_cells": Field(int_range(2, MAX_CELLS), required=False, default=None),
        },
    },
    "waveguide": {
        "model": {
            "k0d1_pi": Field(sine_nonzero(0, 2)),
            "k0d2_pi": Field(sine_nonzero(0, 4)),
        },
        "sweep": {"N_list": Field(size_list(2, MAX_CELLS)), "budget": _BUDGET},
        "fit": {
            "window": Field(window, required=False, default=[50, 600]),
            "window_modes": Field(positive, required=False, default=1.5),
        },
    },
    "toy": {
        "model": {
            "h1": Field(positive),
            "h2": Field(positive),
            "n_sites": Field(int_range(5, 2000)),
        },
        "solver": {"count": Field(int_range(1, 10), required=False, default=3)},
    },
}

TOP_LEVEL = {"experiment", "output"}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``values[section][key]`` with defaults filled."""

    experiment: str
    values: dict
    output_dir: str | None = None
    defaults: tuple = ()
    source: str | None = None

    def get(self, section: str, key: str):
        return self.values[section][key]

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "values": self.values,
            "output_dir": self.output_dir,
            "defaults_applied": list(self.defaults),
        }


def validate(raw: dict, experiment: str | None = None, source: str | None = None) -> RunConfig:
    """Check a parsed TOML document against the schema; collect every problem."""
    problems: list[str] = []
    exp = raw.get("experiment", experiment)
    if experiment is not None and exp != experiment:
        problems.append(f"experiment mismatch: command line says {experiment!r}, config says {exp!r}")
    if exp not in EXPERIMENTS:
        raise ConfigError(problems + [f"experiment must be one of {list(EXPERIMENTS)}, got {exp!r}"])
    schema = SCHEMA[exp]

    for key in raw:
        if key not in TOP_LEVEL and key not in schema:
            problems.append(f"unknown key {key!r} for experiment {exp!r}")

    output_dir = None
    out = raw.get("output", {})
    if not isinstance(out, dict):
        problems.append("[output] must be a table")
    else:
        for key, v in out.items():
            if key != "dir":
                problems.append(f"unknown key output.{key}")
            elif not isinstance(v, str) or not v:
                problems.append("output.dir must be a non-empty string")
            else:
                output_dir = v

    values: dict = {}
    defaults: list[str] = []
    for section, fields in schema.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            problems.append(f"[{section}] must be a table")
            continue
        for key in given:
            if key not in fields:
                problems.append(f"unknown key {section}.{key}")
        values[section] = {}
        for key, f in fields.items():
            name = f"{section}.{key}"
            if key not in given:
                if f.required:
                    problems.append(f"missing required key {name}")
                else:
                    values[section][key] = f.default
                    defaults.append(f"{name}={f.default!r}")
                continue
            try:
                values[section][key] = f.check(name, given[key])
            except ValueError as exc:
                problems.append(str(exc))

    if exp == "dimer" and "scan" in values:
        scan = values["scan"]
        if (scan.get("d1_over_d") is None) != (scan.get("n_cells") is None):
            problems.append("scan.d1_over_d and scan.n_cells must be given together")
    if exp == "waveguide" and not problems:
        k0d = math.pi * (values["model"]["k0d1_pi"] + values["model"]["k0d2_pi"])
        if abs(math.cos(k0d) - 1) < 1e-12:
            problems.append("k0d1_pi + k0d2_pi must not be an even integer (band centre diverges)")

    if problems:
        raise ConfigError(problems)
    return RunConfig(exp, values, output_dir, tuple(defaults), source)


def parse_config(path, experiment: str | None = None) -> RunConfig:
    """Read and validate a TOML config file.

    Raises
    ------
    ConfigError
        Missing or unreadable file, TOML syntax error (including duplicate
        keys), unknown keys or out-of-range values. All schema violations
        are listed, not just the first.
    """
    p = Path(path)
    try:
        text = p.read_bytes().decode("utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {p}: {exc}") from None
    return validate(raw, experiment, str(p))
