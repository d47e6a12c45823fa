"""Registry of named automata and their reference table rows."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .automaton import MealyAutomaton, parse_recursion


@lru_cache(maxsize=None)
def _registry() -> dict[int, str]:
    text = resources.files("mealygroups.data").joinpath("presets.tsv").read_text(encoding="utf-8")
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        idx, rec = line.split("\t", 1)
        out[int(idx)] = rec.replace(";", "\n")
    return out


def preset_indices() -> list[int]:
    return sorted(_registry())


def preset_text(index: int) -> str:
    try:
        return _registry()[int(index)]
    except KeyError:
        raise KeyError(f"no preset {index}; known: {preset_indices()}") from None


def preset(index: int) -> MealyAutomaton:
    return parse_recursion(preset_text(index))


@lru_cache(maxsize=None)
def tables() -> dict[int, dict]:
    """Reference rows: relators, sf exponents, gr prefix and the two flags."""
    raw = json.loads(resources.files("mealygroups.data").joinpath("tables.json").read_text(encoding="utf-8"))
    return {int(k): v for k, v in raw.items()}


def table_indices() -> list[int]:
    return sorted(tables())
