"""Enumeration budgets. Hard caps: exceeding one raises, nothing is truncated."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

ENV_VAR = "GRAPHLIM_BUDGET"


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Budget:
    max_coloring_bits: float = 24.0  # v(G) * log2(k)
    max_tuples: int = 3_000_000
    max_pattern_l: int = 4

    @classmethod
    def default(cls) -> "Budget":
        return cls.from_env()

    @classmethod
    def from_env(cls, environ=None) -> "Budget":
        """Read overrides such as ``max_coloring_bits=20,max_tuples=100000``."""
        raw = (environ if environ is not None else os.environ).get(ENV_VAR, "").strip()
        base = cls()
        if not raw:
            return base
        names = {f.name: f.type for f in fields(cls)}
        updates = {}
        for item in raw.split(","):
            key, _, value = item.partition("=")
            key = key.strip()
            if key not in names:
                raise ValueError(f"{ENV_VAR}: unknown budget {key!r}; known: {sorted(names)}")
            updates[key] = float(value) if key == "max_coloring_bits" else int(value)
        budget = replace(base, **updates)
        budget.validate()
        return budget

    def validate(self) -> None:
        if self.max_coloring_bits <= 0 or self.max_tuples <= 0 or self.max_pattern_l <= 0:
            raise ValueError("budgets must be positive")
