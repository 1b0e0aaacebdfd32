"""Online placement strategies and the driver that feeds them a stream.

Every strategy owns an :class:`ArrayState` and answers one value at a time
with the index of a currently empty cell.  The recursive :class:`Sorter`
splits its array into boxes of width ``w``; which box a subinterval gets is
itself decided by a smaller sorter (the box sorter) that treats the boxes as
cells, and the cell inside a box is chosen by a per-box child sorter.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Protocol

from .errors import CapacityExceeded, InvalidParams, SortbenchError, ValueOutOfInterval
from .params import Degenerate, LevelParams, derive_level
from .rng import XorShift64Star

__all__ = [
    "STRATEGIES",
    "ArrayState",
    "Baseline",
    "NaiveSequential",
    "NodeSnapshot",
    "Placement",
    "RandomCell",
    "RunResult",
    "Sorter",
    "Strategy",
    "new_strategy",
    "run",
]

STRATEGIES = ("sorter", "baseline", "naive_sequential", "random_cell")


class ArrayState:
    """Fixed-size array of write-once cells."""

    __slots__ = ("cells", "occupied")

    def __init__(self, size: int) -> None:
        self.cells: list[float | None] = [None] * size
        self.occupied = 0

    def __len__(self) -> int:
        return len(self.cells)

    def write(self, index: int, value: float) -> None:
        if not 0 <= index < len(self.cells):
            raise CapacityExceeded(f"cell {index} outside array of size {len(self.cells)}")
        if self.cells[index] is not None:
            raise CapacityExceeded(f"cell {index} is already occupied")
        self.cells[index] = value
        self.occupied += 1

    def values(self) -> list[float]:
        """Occupied values in index order."""
        return [v for v in self.cells if v is not None]


class Strategy:
    """Common placement contract.

    ``place`` validates the value against ``[alpha, alpha + beta)`` and is
    meant for the outside world; parents inside a recursion call ``_put``,
    which skips the interval check because subinterval bounds are recomputed
    in floating point and may disagree with the parent's index by an ulp.
    """

    name = "strategy"

    def __init__(self, n_cap: int, N: int, alpha: float = 0.0, beta: float = 1.0) -> None:
        if not 1 <= n_cap <= N:
            raise InvalidParams(f"need 1 <= n_cap <= N, got n_cap={n_cap}, N={N}")
        if not beta > 0.0:
            raise InvalidParams(f"beta must be positive, got {beta}")
        self.n_cap = n_cap
        self.N = N
        self.alpha = alpha
        self.beta = beta
        self.array = ArrayState(N)
        self.placed = 0
        # shared by every node of one recursion tree; holds the global step
        self._clock = [0]

    def place(self, x: float) -> int:
        if not self.alpha <= x < self.alpha + self.beta:
            raise ValueOutOfInterval(
                f"{x!r} not in [{self.alpha!r}, {self.alpha + self.beta!r})"
            )
        return self._put(x)

    def _put(self, x: float) -> int:
        if self.placed >= self.n_cap:
            raise CapacityExceeded(
                f"{self.name}: capacity {self.n_cap} exhausted (N={self.N})"
            )
        idx = self._choose(x)
        self.array.write(idx, x)
        self.placed += 1
        return idx

    def _choose(self, x: float) -> int:
        raise NotImplementedError

    def _attach(self, clock: list[int]) -> None:
        self._clock = clock

    def depth(self) -> int:
        """Number of nested sorter levels (0 for non-recursive strategies)."""
        return 0

    def snapshot(self) -> list["NodeSnapshot"]:
        return []


class Baseline(Strategy):
    """Lazy block first-fit with a global fallback.

    The interval is cut into ``m = ceil(sqrt(n_cap))`` subintervals and the
    array into ``m`` blocks of ``ceil(N / m)`` cells.  A subinterval fills
    its open block left to right and takes the next unallocated block when
    it has none or its block is full.  Once every block is allocated,
    overflow goes to the leftmost empty cell of the whole array.
    """

    name = "baseline"

    def __init__(self, n_cap: int, N: int, alpha: float = 0.0, beta: float = 1.0) -> None:
        super().__init__(n_cap, N, alpha, beta)
        self.m = math.isqrt(n_cap - 1) + 1
        self.block_size = -(-N // self.m)
        self.n_blocks = -(-N // self.block_size)
        self.open_block = [-1] * self.m
        self.next_unallocated = 0
        self._cursor = list(range(0, N, self.block_size))
        self._global_cursor = 0

    def _first_empty_in_block(self, blk: int) -> int:
        cells = self.array.cells
        end = min((blk + 1) * self.block_size, self.N)
        c = self._cursor[blk]
        while c < end and cells[c] is not None:
            c += 1
        self._cursor[blk] = c
        return c if c < end else -1

    def _choose(self, x: float) -> int:
        m = self.m
        i = int((x - self.alpha) / self.beta * m)
        if i >= m:
            i = m - 1
        elif i < 0:
            i = 0
        blk = self.open_block[i]
        if blk >= 0:
            c = self._first_empty_in_block(blk)
            if c >= 0:
                return c
        if self.next_unallocated < self.n_blocks:
            blk = self.next_unallocated
            self.next_unallocated += 1
            self.open_block[i] = blk
            c = self._first_empty_in_block(blk)
            if c >= 0:
                return c
        cells = self.array.cells
        g = self._global_cursor
        while g < self.N and cells[g] is not None:
            g += 1
        self._global_cursor = g
        if g >= self.N:
            raise CapacityExceeded("baseline: array is full")
        return g


class NaiveSequential(Strategy):
    """Always the leftmost empty cell."""

    name = "naive_sequential"

    def _choose(self, x: float) -> int:
        return self.placed


class RandomCell(Strategy):
    """Uniformly random empty cell drawn from the portable seeded generator."""

    name = "random_cell"

    def __init__(
        self, n_cap: int, N: int, alpha: float = 0.0, beta: float = 1.0, seed: int = 0
    ) -> None:
        super().__init__(n_cap, N, alpha, beta)
        self._rng = XorShift64Star(seed)
        self._empty = list(range(N))

    def _choose(self, x: float) -> int:
        empty = self._empty
        r = self._rng.randbelow(len(empty))
        idx = empty[r]
        empty[r] = empty[-1]
        empty.pop()
        return idx


class Event(NamedTuple):
    """One placement as seen by a sorter node."""

    step: int
    value: float
    sub: int  # 0-based subinterval index
    box: int  # 0-based box index
    inner: int  # cell chosen inside the box
    routed: bool  # True when the box sorter was consulted


@dataclass
class NodeSnapshot:
    """Bookkeeping of one sorter node, consumed by the auditor."""

    path: str
    depth: int
    params: LevelParams
    s_count: int
    events: list[Event]
    child_arrays: dict[int, ArrayState] = field(default_factory=dict)
    array: ArrayState | None = None


class Sorter(Strategy):
    """Recursive ``Sorter_k`` for ``k >= 2`` with non-degenerate parameters."""

    name = "sorter"

    def __init__(self, params: LevelParams, record: bool = True) -> None:
        super().__init__(params.n_cap, params.N, params.alpha, params.beta)
        self.params = params
        self.record = record
        self.pointer = [-1] * params.b
        self.counts = [0] * params.ell
        self.s_count = 0
        self.in_box: dict[int, Strategy] = {}
        self.events: list[Event] = []
        self.box_sorter = new_strategy(
            "sorter",
            params.k - 4,
            params.delta,
            params.box_capacity,
            params.ell,
            params.alpha,
            params.beta,
            record=record,
        )
        self.box_sorter._attach(self._clock)
        # every in-box child has the same shape, only its interval differs
        inner = derive_level(params.k - 1, params.delta, params.n_prime, params.w) if params.k > 2 else None
        self._inner_template = inner if isinstance(inner, LevelParams) else None
        self._sub_width = params.beta / params.b

    def _attach(self, clock: list[int]) -> None:
        self._clock = clock
        self.box_sorter._attach(clock)
        for child in self.in_box.values():
            child._attach(clock)

    def _new_inner(self, sub: int) -> Strategy:
        lp = self.params
        alpha = lp.alpha + sub * self._sub_width
        if self._inner_template is None:
            child: Strategy = Baseline(lp.n_prime, lp.w, alpha, self._sub_width)
        else:
            child = Sorter(
                dataclasses.replace(self._inner_template, alpha=alpha, beta=self._sub_width),
                record=self.record,
            )
        child._attach(self._clock)
        return child

    def _choose(self, x: float) -> int:
        lp = self.params
        b = lp.b
        i = int((x - lp.alpha) / lp.beta * b)
        if i >= b:
            i = b - 1
        elif i < 0:
            i = 0
        j = self.pointer[i]
        routed = j < 0 or self.counts[j] >= lp.n_prime
        if routed:
            j = self.box_sorter._put(x)
            self.pointer[i] = j
            self.s_count += 1
            child = self.in_box[j] = self._new_inner(i)
        else:
            child = self.in_box[j]
        c = child._put(x)
        self.counts[j] += 1
        if self.record:
            self.events.append(Event(self._clock[0], x, i, j, c, routed))
        return j * lp.w + c

    def depth(self) -> int:
        deepest = self.box_sorter.depth()
        for child in self.in_box.values():
            d = child.depth()
            if d > deepest:
                deepest = d
        return 1 + deepest

    def snapshot(self, path: str = "root", depth: int = 0) -> list[NodeSnapshot]:
        out = [
            NodeSnapshot(
                path=path,
                depth=depth,
                params=self.params,
                s_count=self.s_count,
                events=list(self.events),
                child_arrays={j: c.array for j, c in self.in_box.items()},
                array=self.array,
            )
        ]
        if isinstance(self.box_sorter, Sorter):
            out.extend(self.box_sorter.snapshot(f"{path}/boxes", depth + 1))
        for j in sorted(self.in_box):
            child = self.in_box[j]
            if isinstance(child, Sorter):
                out.extend(child.snapshot(f"{path}/box{j}", depth + 1))
        return out


def new_strategy(
    spec: str,
    k: int = 0,
    delta: float = 0.25,
    n_cap: int = 1,
    N: int = 1,
    alpha: float = 0.0,
    beta: float = 1.0,
    *,
    seed: int = 0,
    record: bool = True,
) -> Strategy:
    """Build a strategy by name.

    For ``"sorter"``, ``k <= 1`` and degenerate level parameters both yield
    the baseline.  ``k`` and ``delta`` are ignored by the other strategies.
    """
    if not 1 <= n_cap <= N:
        raise InvalidParams(f"need 1 <= n_cap <= N, got n_cap={n_cap}, N={N}")
    if not beta > 0.0:
        raise InvalidParams(f"beta must be positive, got {beta}")
    if spec == "sorter":
        if not 0.0 < delta < 0.5:
            raise InvalidParams(f"delta must lie in (0, 1/2), got {delta}")
        if k <= 1:
            return Baseline(n_cap, N, alpha, beta)
        lp = derive_level(k, delta, n_cap, N, alpha, beta)
        if isinstance(lp, Degenerate):
            return Baseline(n_cap, N, alpha, beta)
        return Sorter(lp, record=record)
    if spec == "baseline":
        return Baseline(n_cap, N, alpha, beta)
    if spec == "naive_sequential":
        return NaiveSequential(n_cap, N, alpha, beta)
    if spec == "random_cell":
        return RandomCell(n_cap, N, alpha, beta, seed=seed)
    raise InvalidParams(f"unknown strategy {spec!r}; expected one of {STRATEGIES}")


class Placement(NamedTuple):
    step: int
    value: float
    cell: int


class AdaptiveStream(Protocol):
    n: int

    def next_value(self, array: ArrayState) -> float: ...

    def observe(self, cell: int, value: float) -> None: ...


@dataclass
class RunResult:
    array: ArrayState
    trace: list[Placement]


def run(strategy: Strategy, stream: Iterable[float] | AdaptiveStream) -> RunResult:
    """Feed ``stream`` to ``strategy`` one value at a time.

    ``stream`` is either an iterable of values or an adaptive generator that
    inspects the array before emitting each value.  Errors raised by the
    strategy carry the failing step in ``exc.step``.
    """
    trace: list[Placement] = []
    clock = strategy._clock
    adaptive = hasattr(stream, "next_value")
    values = range(stream.n) if adaptive else stream  # type: ignore[union-attr]
    step = 0
    try:
        for item in values:
            x = stream.next_value(strategy.array) if adaptive else item  # type: ignore[union-attr]
            clock[0] = step
            cell = strategy.place(x)
            if adaptive:
                stream.observe(cell, x)  # type: ignore[union-attr]
            trace.append(Placement(step, x, cell))
            step += 1
    except SortbenchError as exc:
        exc.step = step
        raise
    return RunResult(strategy.array, trace)
