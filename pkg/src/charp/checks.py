"""Tallies for identity checks run over many cases."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np


@dataclass
class Check:
    name: str
    cases: int = 0
    failed: int = 0
    counterexample: dict[str, Any] | None = None
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, mismatch, describe: Callable[[int], dict] | None = None) -> "Check":
        """Add a batch of cases; ``mismatch`` is a boolean per case."""
        mismatch = np.atleast_1d(np.asarray(mismatch, dtype=bool))
        self.cases += mismatch.size
        bad = np.flatnonzero(mismatch)
        self.failed += bad.size
        if bad.size and self.counterexample is None:
            self.counterexample = describe(int(bad[0])) if describe else {"case": int(bad[0])}
        return self

    def expect(self, ok: bool, describe: Callable[[], dict] | None = None) -> "Check":
        return self.record([not ok], (lambda _: describe()) if describe else None)

    def to_dict(self) -> dict[str, Any]:
        out = {"name": self.name, "cases": self.cases, "failed": self.failed,
               "counterexample": self.counterexample}
        if self.info:
            out["info"] = self.info
        return out


def rows_differ(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Per-row inequality of coefficient arrays mod p."""
    return np.any((np.asarray(a) - np.asarray(b)) % p != 0, axis=-1)


def all_ok(checks) -> bool:
    return all(c.ok for c in checks)
