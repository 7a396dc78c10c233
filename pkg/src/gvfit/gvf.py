"""Feasibility and construction of gradually varied extensions.

A guiding set ``f: J -> {1..n}`` extends to a gradually varied field on the
whole graph exactly when ``d(x, y) >= |f(x) - f(y)|`` for all guiding pairs.
When it does, the pointwise envelopes

    lo(x) = max_j clamp(i_j - d(x, x_j), 1, n)
    hi(x) = min_j clamp(i_j + d(x, x_j), 1, n)

are themselves extensions, and every other extension lies between them.
"""
from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from .level_graph import (
    DomainGraph,
    GuidingError,
    GuidingSet,
    LevelScale,
    ScalarField,
    multi_source_distances,
)

__all__ = [
    "EnvelopePolicy",
    "Witness",
    "FeasibilityReport",
    "InfeasibleError",
    "OracleTooLarge",
    "check_feasible",
    "envelopes",
    "gvf_extend",
    "enumerate_extensions_oracle",
]

ORACLE_LIMIT = 10**7


class EnvelopePolicy(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    MIDPOINT = "midpoint"

    @classmethod
    def parse(cls, name: "str | EnvelopePolicy") -> "EnvelopePolicy":
        if isinstance(name, cls):
            return name
        key = {"lo": "lower", "hi": "upper", "mid": "midpoint"}.get(name, name)
        return cls(key)


class Witness(NamedTuple):
    x: int
    y: int
    d: int
    i: int
    j: int

    def __str__(self):
        return f"x={self.x} y={self.y}: d={self.d} < |{self.i}-{self.j}|"


class FeasibilityReport(NamedTuple):
    feasible: bool
    witness: Witness | None = None

    def __bool__(self):
        return self.feasible


class InfeasibleError(ValueError):
    def __init__(self, report: FeasibilityReport):
        super().__init__(f"no gradually varied extension exists: {report.witness}")
        self.report = report


class OracleTooLarge(ValueError):
    pass


def _int_entries(j: GuidingSet) -> list[tuple[int, int]]:
    out = []
    for v, x in j.entries:
        if int(x) != x:
            raise GuidingError(f"guiding value {x!r} at vertex {v} is not a level index")
        out.append((int(v), int(x)))
    return out


def _source_distances(g: DomainGraph, entries):
    # one BFS per guiding vertex
    return [multi_source_distances(g, [v]) for v, _ in entries]


def check_feasible(g: DomainGraph, j: GuidingSet) -> FeasibilityReport:
    """Test the pairwise distance condition; on failure report the first
    violating pair in guiding-set order."""
    j.validate(g)
    entries = _int_entries(j)
    dists = _source_distances(g, entries)
    for a, (x, i) in enumerate(entries):
        da = dists[a]
        for y, jj in entries[a + 1:]:
            d = int(da[y])
            if d < abs(i - jj):
                return FeasibilityReport(False, Witness(x, y, d, i, jj))
    return FeasibilityReport(True)


def envelopes(g: DomainGraph, j: GuidingSet, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper envelopes ``(lo, hi)`` as int arrays."""
    entries = _int_entries(j)
    lo = np.ones(g.vertex_count, dtype=np.int64)
    hi = np.full(g.vertex_count, n, dtype=np.int64)
    for (_, i), d in zip(entries, _source_distances(g, entries)):
        np.maximum(lo, np.clip(i - d, 1, n), out=lo)
        np.minimum(hi, np.clip(i + d, 1, n), out=hi)
    return lo, hi


def gvf_extend(g: DomainGraph, j: GuidingSet, n: int,
               policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT) -> ScalarField:
    """Gradually varied field on ``g`` that agrees with ``j``.

    Raises :class:`InfeasibleError` (carrying the witness) when no extension
    exists.
    """
    policy = EnvelopePolicy.parse(policy)
    j.validate(g)
    for v, i in _int_entries(j):
        if not 1 <= i <= n:
            raise GuidingError(f"level {i} at vertex {v} outside 1..{n}")
    report = check_feasible(g, j)
    if not report.feasible:
        raise InfeasibleError(report)
    lo, hi = envelopes(g, j, n)
    if policy is EnvelopePolicy.LOWER:
        out = lo
    elif policy is EnvelopePolicy.UPPER:
        out = hi
    else:
        out = (lo + hi) // 2
    return ScalarField(out, LevelScale.integers(n), integer=True)


def _labelings(v: int, n: int, chunk: int = 1 << 18):
    """All labelings in ``{1..n}^v`` as int8 row blocks, lexicographic order."""
    total = n**v
    powers = n ** np.arange(v - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield ((codes[:, None] // powers) % n + 1).astype(np.int8)


def enumerate_extensions_oracle(g: DomainGraph, j: GuidingSet, n: int) -> set[tuple[int, ...]]:
    """Every gradually varied interpolant, by exhaustive enumeration.

    Test oracle only; refuses instances with more than ``10**7`` labelings.
    """
    v = g.vertex_count
    if n**v > ORACLE_LIMIT:
        raise OracleTooLarge(f"{n}^{v} labelings exceeds the oracle limit {ORACLE_LIMIT}")
    entries = _int_entries(j)
    verts = np.array([x for x, _ in entries])
    vals = np.array([i for _, i in entries])
    e = g.edges
    found: set[tuple[int, ...]] = set()
    for block in _labelings(v, n):
        ok = np.all(block[:, verts] == vals, axis=1)
        if len(e):
            ok &= np.all(np.abs(block[:, e[:, 0]].astype(np.int16) - block[:, e[:, 1]]) <= 1, axis=1)
        found.update(tuple(int(x) for x in row) for row in block[ok])
    return found

