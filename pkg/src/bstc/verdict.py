from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Mapping

if TYPE_CHECKING:
    from .cgraph import CGraph
    from .fulfillment import Certificate
    from .semantics import SetOf

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


@dataclass(frozen=True)
class FiniteModel:
    assignment: Mapping[str, "SetOf"]

    kind = "model"


@dataclass(frozen=True)
class GraphWitness:
    """Satisfiability witnessed by an accessible fulfilling graph only."""

    graph: "CGraph"
    fulfill: Mapping[str, frozenset[int]]
    note: str = ""

    kind = "cgraph"


@dataclass
class Verdict:
    status: str
    witness: FiniteModel | GraphWitness | None = None
    certificate: "Certificate | None" = None
    stats: dict[str, Any] = field(default_factory=dict)
    # discrepancy reports produced under strict foundation checking
    issues: list[str] = field(default_factory=list)
    disjunct: int | None = None

    @classmethod
    def sat(cls, witness, **kw) -> "Verdict":
        return cls(SAT, witness, **kw)

    @classmethod
    def unsat(cls, **kw) -> "Verdict":
        return cls(UNSAT, **kw)

    @classmethod
    def unknown(cls, **kw) -> "Verdict":
        return cls(UNKNOWN, **kw)

    @property
    def is_sat(self) -> bool:
        return self.status == SAT

    @property
    def is_unsat(self) -> bool:
        return self.status == UNSAT
