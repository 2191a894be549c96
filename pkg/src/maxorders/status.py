"""Three-valued check outcomes shared by the pipeline and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

VERIFIED = "Verified"
REFUTED = "Refuted"
UNKNOWN = "Unknown"


class SearchBoundExceeded(RuntimeError):
    """A bounded search ran out of budget before reaching a decision."""


@dataclass(frozen=True)
class Check:
    status: str
    witness: object = None
    detail: str = ""
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in (VERIFIED, REFUTED, UNKNOWN):
            raise ValueError(f"bad status {self.status!r}")

    @property
    def ok(self) -> bool:
        return self.status == VERIFIED

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = jsonable(self.witness)
        if self.detail:
            out["detail"] = self.detail
        if self.bounds:
            out["bounds"] = dict(sorted(self.bounds.items()))
        return out


def verified(detail: str = "", **bounds) -> Check:
    return Check(VERIFIED, None, detail, bounds)


def refuted(witness, detail: str = "", **bounds) -> Check:
    return Check(REFUTED, witness, detail, bounds)


def unknown(detail: str, **bounds) -> Check:
    return Check(UNKNOWN, None, detail, bounds)


def combine(checks) -> str:
    statuses = [c.status for c in checks]
    if REFUTED in statuses:
        return REFUTED
    if UNKNOWN in statuses:
        return UNKNOWN
    return VERIFIED


def jsonable(x):
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(jsonable(v) for v in x)
    return x
