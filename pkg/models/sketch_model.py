"""
Data models returned by the sketch engines.
"""

from dataclasses import dataclass, field
from typing import List, Optional
import json


@dataclass(frozen=True)
class QueryResult:
    """Answer of a weighted-median query on a RemedianSketch."""
    estimate: float
    n: int
    digits: List[int]          # fill count per row, least significant first
    at_capacity: bool = False  # True once the b^k-th value has been inserted

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "n": self.n,
            "digits": list(self.digits),
            "at_capacity": self.at_capacity,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class MultiQueryResult:
    """Per-quantile answers of an ℓ-remedian."""
    estimates: List[float]
    ptildes: List[float]       # target probability of each remedian
    n_consumed: int            # values that reached the remedians (n·N)
    pending: int               # buffered values ignored by the estimates
    at_capacity: bool = False
    remedian_n: int = 0

    def to_dict(self) -> dict:
        return {
            "estimates": list(self.estimates),
            "ptildes": list(self.ptildes),
            "n_consumed": self.n_consumed,
            "pending": self.pending,
            "at_capacity": self.at_capacity,
            "remedian_n": self.remedian_n,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class SketchSnapshot:
    """Consistent copy of a sketch's cells taken under its lock."""
    k: int
    b: int
    n: int
    rows: List[List[float]] = field(default_factory=list)
    final: Optional[float] = None

    @property
    def fill(self) -> List[int]:
        return [len(r) for r in self.rows]

    def to_dict(self) -> dict:
        return {"k": self.k, "b": self.b, "n": self.n,
                "rows": [list(r) for r in self.rows], "final": self.final}
