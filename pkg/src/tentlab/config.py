"""Run configuration: ``key = value`` files with ``#`` comments.

Precedence is command-line flag, then config file, then built-in default.
Unknown keys and out-of-range values are rejected with the offending line.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None, path=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + msg)
        self.line = line


@dataclass(frozen=True)
class Field:
    kind: type
    default: Any
    check: Callable[[Any], bool]
    rule: str


def _slope(v):
    return 1.0 < v <= 2.0


def _pos(v):
    return v > 0


def _nonneg(v):
    return v >= 0


BASINS = ("interval", "collar", "annulus")
METHODS = ("ulam", "birkhoff", "markov")

FIELDS: dict[str, Field] = {
    "t": Field(float, 1.8, _slope, "in (1, 2]"),
    "t_star": Field(float, 1.8, _slope, "in (1, 2]"),
    "bins": Field(int, 4096, lambda v: v >= 2, ">= 2"),
    "tol": Field(float, 1e-10, _pos, "> 0"),
    "maxiter": Field(int, 100_000, _pos, "> 0"),
    "method": Field(str, "ulam", lambda v: v in METHODS, f"one of {', '.join(METHODS)}"),
    "orbit": Field(int, 1_000_000, lambda v: v >= 100_000, ">= 100000"),
    "burnin": Field(int, 1000, _nonneg, ">= 0"),
    "seed": Field(int, 0, lambda v: 0 <= v < 2**32, "in [0, 2^32)"),
    "samples": Field(int, 500, _pos, "> 0"),
    "depth": Field(int, 12, lambda v: 1 <= v <= 64, "in [1, 64]"),
    "eps": Field(float, 0.01, _pos, "> 0"),
    "kmin": Field(int, 3, lambda v: 1 <= v <= 40, "in [1, 40]"),
    "kmax": Field(int, 10, lambda v: 1 <= v <= 40, "in [1, 40]"),
    "birkhoff_n": Field(int, 0, _nonneg, ">= 0"),
    "threads": Field(int, 1_000_000, lambda v: v >= 10_000, ">= 10000"),
    "sets": Field(int, 20, _pos, "> 0"),
    "reference_n": Field(int, 10_000_000, lambda v: v >= 100_000, ">= 100000"),
    "basin": Field(str, "collar", lambda v: v in BASINS, f"one of {', '.join(BASINS)}"),
    "s_min": Field(float, 0.5, _nonneg, ">= 0"),
    "s_max": Field(float, 0.75, _nonneg, ">= 0"),
    "out_dir": Field(str, ".", lambda v: bool(v), "a non-empty path"),
    "workers": Field(int, 0, _nonneg, ">= 0 (0 = automatic)"),
}


def _coerce(key: str, raw: str, line: int | None = None, path=None):
    f = FIELDS[key]
    try:
        if f.kind is int:
            val = int(raw.replace("_", ""))
        elif f.kind is float:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError
        else:
            val = raw.strip().strip('"').strip("'")
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {f.kind.__name__}", line, path) from None
    if not f.check(val):
        raise ConfigError(f"{key} = {raw} out of range: must be {f.rule}", line, path)
    return val


def parse_config(text: str, path=None) -> dict:
    out: dict = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", i, path)
        key, val = (p.strip() for p in line.split("=", 1))
        if key not in FIELDS:
            raise ConfigError(f"unknown key {key!r}", i, path)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", i, path)
        out[key] = _coerce(key, val, i, path)
    return out


def load_config(path) -> dict:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=path) from None
    return parse_config(text, path)


def resolve(keys, file_values: dict | None = None, flags: dict | None = None,
            defaults: dict | None = None) -> dict:
    """Merge defaults, file values and flags (``None`` flags are unset).

    ``defaults`` overrides built-in defaults for a particular command.
    """
    out = {}
    for k in keys:
        v = (defaults or {}).get(k, FIELDS[k].default)
        if file_values and k in file_values:
            v = file_values[k]
        if flags and flags.get(k) is not None:
            v = _coerce(k, str(flags[k])) if not isinstance(flags[k], FIELDS[k].kind) else flags[k]
            if not FIELDS[k].check(v):
                raise ConfigError(f"--{k.replace('_', '-')} = {v} out of range: must be {FIELDS[k].rule}")
        out[k] = v
    if "kmin" in out and "kmax" in out and out["kmin"] > out["kmax"]:
        raise ConfigError("kmin must not exceed kmax")
    if "s_min" in out and "s_max" in out and out["s_min"] >= out["s_max"]:
        raise ConfigError("s_min must be below s_max")
    if "workers" in out and out["workers"] == 0:
        env = os.environ.get("TENTLAB_WORKERS")
        out["workers"] = int(env) if env and env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return out
