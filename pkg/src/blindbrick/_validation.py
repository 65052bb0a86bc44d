"""Input coercion shared by the estimator front-end and the CLI."""
from __future__ import annotations

import json
from os import PathLike
from pathlib import Path

from .circuit import CircuitError, LogicalCircuit
from .config import ConfigError, ProtocolConfig
from .protocol import ServerId

_INT_PARAMS = ("N", "K", "m", "W", "p")


def check_circuit(x) -> LogicalCircuit:
    """Accept a LogicalCircuit, its dict form, a JSON string or a path to a JSON file."""
    if isinstance(x, LogicalCircuit):
        return x
    if isinstance(x, dict):
        return LogicalCircuit.from_dict(x)
    if isinstance(x, PathLike) or (isinstance(x, str) and not x.lstrip().startswith("{")):
        path = Path(x)
        if not path.is_file():
            raise CircuitError(f"no circuit file at {path}")
        return LogicalCircuit.from_json(path.read_text())
    if isinstance(x, str):
        try:
            return LogicalCircuit.from_json(x)
        except json.JSONDecodeError as exc:
            raise CircuitError(f"invalid circuit JSON: {exc}") from None
    raise CircuitError(f"cannot interpret {type(x).__name__} as a circuit")


def check_circuits(X) -> list[LogicalCircuit]:
    if isinstance(X, (LogicalCircuit, dict, str, PathLike)):
        X = [X]
    circuits = [check_circuit(x) for x in X]
    if not circuits:
        raise CircuitError("no circuits given")
    return circuits


def parse_params(text: str | None) -> dict:
    """``"N=4,K=4,m=16"`` -> ``{"N": 4, "K": 4, "m": 16}``."""
    out: dict = {}
    if not text:
        return out
    for item in text.replace(" ", ",").split(","):
        if not item:
            continue
        key, sep, val = item.partition("=")
        if not sep or key not in _INT_PARAMS:
            raise ConfigError(f"bad parameter {item!r}; expected one of {', '.join(_INT_PARAMS)}")
        try:
            out[key] = int(val)
        except ValueError:
            raise ConfigError(f"parameter {key} must be an integer, got {val!r}") from None
    return out


def check_config(params: dict | None = None, **overrides) -> ProtocolConfig:
    merged = {**(params or {}), **{k: v for k, v in overrides.items() if v is not None}}
    return ProtocolConfig(**merged)


def parse_colluders(spec, N: int, budget: int | None) -> list[ServerId]:
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    ids = sorted({ServerId.parse(s) for s in spec})
    for s in ids:
        if s.index > N:
            raise ConfigError(f"server {s} does not exist with N={N}")
    if budget is not None and len(ids) > budget:
        raise ConfigError(f"{len(ids)} colluders exceed the budget K={budget}")
    return ids
