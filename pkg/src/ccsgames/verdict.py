from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

EXIT_CODES = {PASS: 0, FAIL: 1, INCONCLUSIVE: 2}


class BudgetExceeded(RuntimeError):
    """A state or step budget ran out before an answer was reached."""

    def __init__(self, message: str, used: int = 0):
        super().__init__(message)
        self.used = used


@dataclass
class Verdict:
    status: str
    exact: bool = True
    witness: Any = None
    budget_used: int = 0
    depth: int = 0
    family_size: int = 0
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in EXIT_CODES:
            raise ValueError(f"bad status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    @property
    def definite(self) -> bool:
        return self.status != INCONCLUSIVE and self.exact

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> dict:
        return {"status": self.status, "exact": self.exact, "witness": _jsonable(self.witness),
                "budget_used": self.budget_used, "depth": self.depth,
                "family_size": self.family_size, "detail": self.detail,
                **{k: _jsonable(v) for k, v in self.extra.items()}}


def _jsonable(x):
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if x is None or isinstance(x, (int, float, str, bool)):
        return x
    return str(x)
