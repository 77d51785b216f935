"""Structured pass/fail records shared by every verification suite."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
INAPPLICABLE = "inapplicable"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


@dataclass
class Check:
    check_id: str
    anchor: str  # the identity under test, written as a formula
    status: str
    details: dict[str, Any] = field(default_factory=dict)
    counterexample: Any = None

    def __post_init__(self):
        if self.status not in (PASS, FAIL, INAPPLICABLE):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == FAIL and self.counterexample is None:
            raise ValueError(f"failed check {self.check_id} needs a counterexample payload")
        if not self.anchor:
            raise ValueError(f"check {self.check_id} has no anchor")


@dataclass
class VerifyReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add(self, check_id: str, anchor: str, ok: bool | None, details=None, counterexample=None) -> Check:
        """Append a check; ``ok=None`` records an inapplicable verdict."""
        if ok is None:
            status = INAPPLICABLE
        else:
            status = PASS if ok else FAIL
        if status == FAIL and counterexample is None:
            counterexample = details or {"check": check_id}
        check = Check(check_id, anchor, status, dict(details or {}), counterexample)
        self.checks.append(check)
        return check

    def extend(self, other: "VerifyReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.status != FAIL for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    def status_of(self, check_id: str) -> str:
        for c in self.checks:
            if c.check_id == check_id:
                return c.status
        raise KeyError(check_id)

    @property
    def exit_code(self) -> int:
        return EXIT_OK if self.passed else EXIT_FAIL

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "metadata": _jsonable(self.metadata),
            "checks": [_jsonable(asdict(c)) for c in self.checks],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=kw.pop("indent", 2), **kw)

    def summary_lines(self) -> list[str]:
        return [f"[{c.status.upper():>12}] {c.check_id}" for c in self.checks]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if hasattr(obj, "item"):  # numpy scalars
        return _jsonable(obj.item())
    return str(obj)
