"""Seeded input streams, oblivious and adaptive.

All oblivious streams are plain lists of floats.  ``midpoint_adversary`` is
adaptive: it looks at the strategy's array before choosing each value, so it
is returned as a :class:`MidpointAdversary` object that :func:`sortbench.engine.run`
drives step by step.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Mapping

from .engine import ArrayState
from .errors import InvalidSpec
from .rng import XorShift64Star

__all__ = [
    "ADAPTIVE",
    "WORKLOADS",
    "MidpointAdversary",
    "WorkloadSpec",
    "generate",
    "incremental_cost",
    "midpoint_adversary_next",
]

WORKLOADS = (
    "uniform",
    "sorted_asc",
    "sorted_desc",
    "two_cluster",
    "interval_flood",
    "sawtooth",
    "midpoint_adversary",
)
ADAPTIVE = frozenset({"midpoint_adversary"})

DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "two_cluster": {"gap": 0.5},
    "interval_flood": {"flood_width": 0.01},
}

GOLDEN_FRACTION = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    n: int
    seed: int = 0
    params: Mapping[str, float] = field(default_factory=dict)

    def param(self, key: str) -> float:
        if key in self.params:
            return float(self.params[key])
        return DEFAULT_PARAMS[self.name][key]

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], n: int, seed: int) -> "WorkloadSpec":
        """Build from a config entry such as ``{"name": "two_cluster", "gap": 0.2}``."""
        if isinstance(d, str):
            return cls(d, n, seed)
        if "name" not in d:
            raise InvalidSpec(f"workload entry without a name: {d!r}")
        params = {k: v for k, v in d.items() if k not in ("name", "params")}
        params.update(d.get("params", {}))
        return cls(str(d["name"]), n, seed, params)


def _equally_spaced(m: int) -> list[float]:
    if m == 1:
        return [0.0]
    return [j / (m - 1) for j in range(m)]


def _two_cluster(spec: WorkloadSpec) -> list[float]:
    gap = spec.param("gap")
    if not 0.0 <= gap < 1.0:
        raise InvalidSpec(f"two_cluster gap must lie in [0, 1), got {gap}")
    rng = XorShift64Star(spec.seed)
    half = 0.5 - gap / 2.0
    lo_start, hi_start = 0.0, 0.5 + gap / 2.0
    out = []
    for t in range(spec.n):
        base = lo_start if t % 2 == 0 else hi_start
        out.append(base + rng.random() * half)
    return out


def _interval_flood(spec: WorkloadSpec) -> list[float]:
    width = spec.param("flood_width")
    if not 0.0 < width <= 1.0:
        raise InvalidSpec(f"interval_flood flood_width must lie in (0, 1], got {width}")
    head = math.isqrt(spec.n - 1) + 1
    out = _equally_spaced(head)
    rng = XorShift64Star(spec.seed)
    start = rng.random() * (1.0 - width)
    out.extend(start + rng.random() * width for _ in range(spec.n - head))
    return out


def generate(spec: WorkloadSpec) -> "list[float] | MidpointAdversary":
    """Materialize an oblivious stream, or build the adaptive generator."""
    if not isinstance(spec.n, int) or spec.n < 1:
        raise InvalidSpec(f"n must be a positive integer, got {spec.n!r}")
    name = spec.name
    if name == "uniform":
        rng = XorShift64Star(spec.seed)
        return [rng.random() for _ in range(spec.n)]
    if name == "sorted_asc":
        return _equally_spaced(spec.n)
    if name == "sorted_desc":
        return _equally_spaced(spec.n)[::-1]
    if name == "two_cluster":
        return _two_cluster(spec)
    if name == "interval_flood":
        return _interval_flood(spec)
    if name == "sawtooth":
        return [(t * GOLDEN_FRACTION) % 1.0 for t in range(spec.n)]
    if name == "midpoint_adversary":
        return MidpointAdversary(spec.n)
    raise InvalidSpec(f"unknown workload {name!r}; expected one of {WORKLOADS}")


# --- adaptive adversary -----------------------------------------------------


def incremental_cost(c: float, left: float | None, right: float | None) -> float:
    """Cost added by writing ``c`` into an empty cell between occupied ``left`` and ``right``.

    ``None`` marks a missing neighbour.  With both neighbours this is
    ``|left-c| + |c-right| - |left-right|``, written as twice the distance
    from ``c`` to ``[min, max]`` so that it is exactly 0 inside the range.
    """
    if left is None and right is None:
        return 0.0
    if left is None:
        return abs(c - right)  # type: ignore[operator]
    if right is None:
        return abs(c - left)
    lo, hi = (left, right) if left <= right else (right, left)
    if c < lo:
        return 2.0 * (lo - c)
    if c > hi:
        return 2.0 * (c - hi)
    return 0.0


def _candidates(distinct_sorted: list[float]) -> list[float]:
    cands = {0.0, 1.0}
    for a, b in zip(distinct_sorted, distinct_sorted[1:]):
        cands.add((a + b) / 2.0)
    return sorted(cands)


def _best(cands: list[float], gaps: list[tuple[float | None, float | None]]) -> float:
    best_c, best_s = cands[0], -1.0
    for c in cands:  # ascending, so strict > keeps the smallest on ties
        s = min((incremental_cost(c, l, r) for l, r in gaps), default=0.0)
        if s > best_s:
            best_c, best_s = c, s
    return best_c


def _gaps_of(array: ArrayState) -> list[tuple[float | None, float | None]]:
    """(left, right) neighbour values of every maximal run of empty cells."""
    gaps = []
    left = None
    in_gap = False
    for v in array.cells:
        if v is None:
            in_gap = True
        else:
            if in_gap:
                gaps.append((left, v))
            in_gap = False
            left = v
    if in_gap:
        gaps.append((left, None))
    return gaps


def midpoint_adversary_next(array: ArrayState, emitted: list[float]) -> float:
    """Stateless reference form of the adversary's rule.

    Scores every candidate against every empty cell's neighbourhood; used as
    the oracle for :class:`MidpointAdversary`.
    """
    return _best(_candidates(sorted(set(emitted))), _gaps_of(array))


class MidpointAdversary:
    """Adaptive generator: emit the candidate whose cheapest placement is most expensive.

    Candidates are 0, 1 and the midpoints of consecutive distinct values
    emitted so far.  A candidate's score is the smallest cost increase over
    all empty cells; the highest score wins, ties going to the smallest
    value.  Empty cells are grouped into runs between occupied cells, and
    runs are counted by their neighbour pair, so each step costs
    O(candidates x distinct neighbour pairs) instead of O(candidates x N).
    """

    def __init__(self, n: int) -> None:
        self.n = n
        self._distinct: list[float] = []
        self._occupied: list[int] = []
        self._runs: Counter[tuple[float | None, float | None]] = Counter()
        self._size: int | None = None
        self._cells: list[float | None] | None = None

    def _sync(self, array: ArrayState) -> None:
        if self._cells is not array.cells:
            if array.occupied:
                raise InvalidSpec("midpoint_adversary must start on an empty array")
            self._cells = array.cells
            self._size = len(array)
            self._runs = Counter({(None, None): 1}) if self._size else Counter()

    def next_value(self, array: ArrayState) -> float:
        self._sync(array)
        return _best(_candidates(self._distinct), list(self._runs))

    def observe(self, cell: int, value: float) -> None:
        cells = self._cells
        assert cells is not None and self._size is not None
        occ = self._occupied
        pos = bisect.bisect_left(occ, cell)
        left_idx = occ[pos - 1] if pos > 0 else -1
        right_idx = occ[pos] if pos < len(occ) else self._size
        left = cells[left_idx] if left_idx >= 0 else None
        right = cells[right_idx] if right_idx < self._size else None
        runs = self._runs
        key = (left, right)
        runs[key] -= 1
        if runs[key] == 0:
            del runs[key]
        if cell - left_idx > 1:
            runs[(left, value)] += 1
        if right_idx - cell > 1:
            runs[(value, right)] += 1
        occ.insert(pos, cell)
        d = self._distinct
        i = bisect.bisect_left(d, value)
        if i == len(d) or d[i] != value:
            d.insert(i, value)
