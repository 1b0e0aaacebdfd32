"""Cost functional, offline optimum, exhaustive oracle and the run auditor."""

from __future__ import annotations

import functools
import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .engine import ArrayState, NodeSnapshot, Placement
from .errors import TooLarge
from .params import TopLevelConfig, box_count_bound, routed_count_bound

__all__ = [
    "AuditReport",
    "CostReport",
    "LevelStat",
    "Violation",
    "audit",
    "brute_force_opt",
    "cost",
    "cost_decomposition",
    "cost_report",
    "opt_cost",
    "path_cost",
    "ratio",
]

BRUTE_FORCE_MAX_VALUES = 8
BRUTE_FORCE_MAX_CELLS = 10


def _exact_abs_diff_terms(seq: np.ndarray) -> np.ndarray:
    """Float pairs whose exact sum is ``sum |seq[i] - seq[i+1]|`` (TwoSum split)."""
    x, y = seq[:-1], -seq[1:]
    s = x + y
    bv = s - x
    err = (x - (s - bv)) + (y - bv)
    neg = s < 0
    return np.concatenate((np.where(neg, -s, s), np.where(neg, -err, err)))


def path_cost(values: Sequence[float]) -> float:
    """Correctly rounded ``sum |v[i] - v[i+1]|``.

    Every difference is split into two floats whose sum is exact and the
    total goes through ``math.fsum``, so the result is the exact cost rounded
    once.  Rounding is monotone, hence ``path_cost(v) >= max(v) - min(v)``
    holds in floating point too, and the value does not depend on order of
    accumulation.
    """
    if len(values) < 2:
        return 0.0
    return math.fsum(_exact_abs_diff_terms(np.asarray(values, dtype=float)).tolist())


def cost(array: ArrayState | Sequence[float | None]) -> float:
    """Cost of the occupied cells read left to right (empty cells skipped)."""
    cells = array.cells if isinstance(array, ArrayState) else array
    return path_cost([v for v in cells if v is not None])


def opt_cost(values: Iterable[float]) -> float:
    vals = list(values)
    if len(vals) <= 1:
        return 0.0
    return max(vals) - min(vals)


def ratio(cost_value: float, opt_value: float) -> float:
    """``cost / opt``; 1 when both are zero and ``inf`` when only ``opt`` is."""
    if opt_value == 0.0:
        return 1.0 if cost_value == 0.0 else math.inf
    return cost_value / opt_value


@functools.lru_cache(maxsize=None)
def _placement_orders(m: int, N: int) -> np.ndarray:
    # Row r lists, in increasing cell order, which input value sits in each
    # occupied cell for the r-th injective placement of m values into N cells.
    placements = np.array(list(itertools.permutations(range(N), m)), dtype=np.int64)
    return np.argsort(placements, axis=1, kind="stable")


def brute_force_opt(values: Sequence[float], N: int) -> float:
    """Minimum cost over every injective placement of ``values`` into ``N`` cells.

    Independent of :func:`opt_cost`: nothing about sortedness or empty cells
    is assumed, every placement is scored.
    """
    vals = np.asarray(list(values), dtype=float)
    m = len(vals)
    if m > BRUTE_FORCE_MAX_VALUES or N > BRUTE_FORCE_MAX_CELLS:
        raise TooLarge(
            f"brute force limited to {BRUTE_FORCE_MAX_VALUES} values and "
            f"{BRUTE_FORCE_MAX_CELLS} cells, got {m} and {N}"
        )
    if m > N:
        raise TooLarge(f"{m} values do not fit into {N} cells")
    if m <= 1:
        return 0.0
    orders = _placement_orders(m, N)
    seq = vals[orders]
    # float scores find the near-optimal placements, exact scores decide
    approx = np.abs(np.diff(seq, axis=1)).sum(axis=1)
    best = approx.min()
    close = np.flatnonzero(approx <= best + 1e-9 * max(1.0, abs(best)))
    return min(path_cost(seq[r]) for r in close)


@dataclass(frozen=True)
class CostReport:
    cost: float
    opt: float
    ratio: float
    occupied: int
    N: int


def cost_report(array: ArrayState) -> CostReport:
    c = cost(array)
    o = opt_cost(array.values())
    return CostReport(cost=c, opt=o, ratio=ratio(c, o), occupied=array.occupied, N=len(array))


def cost_decomposition(array: ArrayState, w: int, ell: int) -> tuple[float, float]:
    """Split the cost of a top-level sorter array into (inside boxes, between boxes)."""
    inside = 0.0
    for j in range(ell):
        inside += cost(array.cells[j * w : (j + 1) * w])
    return inside, cost(array) - inside


@dataclass(frozen=True)
class Violation:
    invariant: str
    step: int | None
    detail: str


@dataclass(frozen=True)
class LevelStat:
    path: str
    depth: int
    k: int
    ell: int
    b: int
    n_prime: int
    w: int
    s_count: int
    max_box_count: int


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)
    per_level: list[LevelStat] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def _sub_index(x: float, alpha: float, beta: float, b: int) -> int:
    i = math.floor((x - alpha) / beta * b)
    return min(max(i, 0), b - 1)


def _audit_node(node: NodeSnapshot, out: list[Violation]) -> LevelStat:
    lp = node.params
    k, d = lp.k, Fraction(lp.delta)
    where = f"{node.path} (k={k})"
    routed_limit = math.floor(lp.ell / (1 + 2 ** (k - 3) * d))

    box_sub: dict[int, int] = {}
    box_count: dict[int, int] = defaultdict(int)
    routed = 0
    load_reported = False
    for ev in node.events:
        sub = _sub_index(ev.value, lp.alpha, lp.beta, lp.b)
        if sub != ev.sub:
            out.append(Violation("subinterval index", ev.step,
                                 f"{where}: value {ev.value!r} maps to {sub}, logged {ev.sub}"))
        if ev.routed:
            routed += 1
            if ev.box in box_sub:
                out.append(Violation("box reuse", ev.step,
                                     f"{where}: box {ev.box} handed out twice by the box sorter"))
            box_sub[ev.box] = sub
            if routed > routed_limit and not load_reported:
                load_reported = True
                out.append(Violation("box sorter load", ev.step,
                                     f"{where}: {routed} values routed, limit {routed_limit} "
                                     f"for ell={lp.ell}"))
        elif ev.box not in box_sub:
            out.append(Violation("box purity", ev.step,
                                 f"{where}: box {ev.box} used before being assigned"))
        if box_sub.get(ev.box, sub) != sub:
            out.append(Violation("box purity", ev.step,
                                 f"{where}: value {ev.value!r} of subinterval {sub} "
                                 f"placed in box {ev.box} of subinterval {box_sub[ev.box]}"))
        box_count[ev.box] += 1
        if box_count[ev.box] == lp.n_prime + 1:
            out.append(Violation("box capacity", ev.step,
                                 f"{where}: box {ev.box} received more than n'={lp.n_prime}"))
        if not 0 <= ev.inner < lp.w:
            out.append(Violation("recursive consistency", ev.step,
                                 f"{where}: inner cell {ev.inner} outside box width {lp.w}"))
        else:
            cell = ev.box * lp.w + ev.inner
            if node.array is not None and node.array.cells[cell] != ev.value:
                out.append(Violation("recursive consistency", ev.step,
                                     f"{where}: cell {cell} = box {ev.box} * w + {ev.inner} "
                                     f"does not hold {ev.value!r}"))
            child = node.child_arrays.get(ev.box)
            if child is not None and child.cells[ev.inner] != ev.value:
                out.append(Violation("recursive consistency", ev.step,
                                     f"{where}: box {ev.box} cell {ev.inner} does not hold "
                                     f"{ev.value!r}"))

    if node.events and routed != node.s_count:
        out.append(Violation("box sorter load", None,
                             f"{where}: s_count={node.s_count} but {routed} routed events"))
    if node.s_count > routed_limit and not load_reported:
        out.append(Violation("box sorter load", None,
                             f"{where}: s_count={node.s_count} exceeds {routed_limit}"))
    if lp.ell * lp.w > lp.N:
        out.append(Violation("box layout", None, f"{where}: ell*w={lp.ell * lp.w} > N={lp.N}"))
    if lp.ell > box_count_bound(lp):
        out.append(Violation("box count bound", None,
                             f"{where}: ell={lp.ell} > {box_count_bound(lp):.6g}"))
    if node.s_count > routed_count_bound(lp):
        out.append(Violation("routed count bound", None,
                             f"{where}: s_count={node.s_count} > {routed_count_bound(lp):.6g}"))
    return LevelStat(
        path=node.path,
        depth=node.depth,
        k=k,
        ell=lp.ell,
        b=lp.b,
        n_prime=lp.n_prime,
        w=lp.w,
        s_count=node.s_count,
        max_box_count=max(box_count.values(), default=0),
    )


def audit(
    trace: Sequence[Placement],
    top: TopLevelConfig,
    tree: Sequence[NodeSnapshot] = (),
) -> AuditReport:
    """Check a finished run against the sorter's correctness conditions.

    Violations are returned as data.  ``tree`` is the output of
    ``strategy.snapshot()``; it is empty for non-recursive strategies, in
    which case only single occupancy is checked.
    """
    report = AuditReport()
    seen: dict[int, int] = {}
    for p in trace:
        if not 0 <= p.cell < top.N:
            report.violations.append(Violation("single occupancy", p.step,
                                               f"cell {p.cell} outside [0, {top.N})"))
        elif p.cell in seen:
            report.violations.append(Violation("single occupancy", p.step,
                                               f"cell {p.cell} already used at step "
                                               f"{seen[p.cell]}"))
        else:
            seen[p.cell] = p.step
    for node in tree:
        report.per_level.append(_audit_node(node, report.violations))
    return report
