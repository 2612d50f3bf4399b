"""Shared test helpers: access to frozen reference values."""

from __future__ import annotations

from _oracles import ORACLES


def oracle(key: str) -> float:
    v = ORACLES[key]
    if isinstance(v, list):
        raise KeyError(f"{key} is a list entry; use oracle_list")
    return float(v)


def oracle_list(key: str) -> list[float]:
    v = ORACLES[key]
    if not isinstance(v, list):
        raise KeyError(f"{key} is a scalar entry; use oracle")
    return [float(s) for s in v]


def rel_err(got: float, want: float) -> float:
    return abs(got - want) / max(abs(want), 1e-300)
