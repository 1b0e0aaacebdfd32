"""Recursion schedule and per-level parameters of the recursive sorter.

All floors of the form ``floor(c * n ** (p / q))`` are first estimated in
double precision and then corrected with exact integer arithmetic, so a
value such as ``1000 ** (1 / 3)`` floors to 10 rather than 9.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidEpsilon, InvalidN, InvalidParams

__all__ = [
    "LOG_BASE",
    "Degenerate",
    "LevelParams",
    "MIN_RECURSIVE_CAPACITY",
    "TopLevelConfig",
    "box_count_bound",
    "derive_level",
    "derive_top",
    "growth_root",
    "omega",
    "omega_ratio",
    "routed_count_bound",
]

#: Base of the outer logarithm in the choice of the top-level depth.
LOG_BASE = 1.38

#: Instances of at most this many elements are always handed to the baseline.
MIN_RECURSIVE_CAPACITY = 17

_omega_memo: list[int] = [2, 2]  # indices 0 and 1
_omega_lock = threading.Lock()


def omega(i: int) -> int:
    """Return the ``i``-th term of ``w_i = w_{i-1} + w_{i-4}`` (``w_i = 2`` for ``i <= 1``)."""
    if i <= 1:
        return 2
    memo = _omega_memo
    if i < len(memo):
        return memo[i]
    with _omega_lock:
        while len(memo) <= i:
            j = len(memo)
            memo.append(memo[j - 1] + (memo[j - 4] if j >= 4 else 2))
        return memo[i]


def omega_ratio(num: int, den: int) -> Fraction:
    """``omega(num) / omega(den)`` as an exact fraction."""
    return Fraction(omega(num), omega(den))


def growth_root(tol: float = 1e-12) -> float:
    """Real root of ``x**4 = x**3 + 1`` in ``[1, 2]`` by bisection."""
    lo, hi = 1.0, 2.0
    f = lambda x: x**4 - x**3 - 1.0  # noqa: E731
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _floor_coef_power(coef: Fraction, n: int, exponent: Fraction) -> int:
    """Exact ``floor(coef * n ** exponent)`` for ``coef > 0``, ``n >= 1``."""
    p, q = exponent.numerator, exponent.denominator
    a, c = coef.numerator, coef.denominator
    rhs = a**q * n**p

    def fits(m: int) -> bool:
        return (m * c) ** q <= rhs

    try:
        m = max(0, math.floor(float(coef) * float(n) ** (p / q)))
    except OverflowError:  # pragma: no cover - far outside the supported range
        m = 0
    while m > 0 and not fits(m):
        m -= 1
    while fits(m + 1):
        m += 1
    return m


@dataclass(frozen=True)
class TopLevelConfig:
    n: int
    epsilon: float
    k: int
    delta: float
    N: int


def derive_top(n: int, epsilon: float) -> TopLevelConfig:
    """Pick the recursion depth ``k`` and slack unit ``delta`` for ``n`` values.

    ``k = floor(log_1.38(log2 n))`` clamped at 0, then raised by the minimal
    amount that brings ``delta = epsilon / 2**(k+1)`` below 1/2.
    """
    if not (isinstance(epsilon, (int, float)) and 0.0 < epsilon <= 3.0):
        raise InvalidEpsilon(f"epsilon must lie in (0, 3], got {epsilon!r}")
    if not isinstance(n, int) or n < 2:
        raise InvalidN(f"n must be an integer >= 2, got {n!r}")
    k = max(0, math.floor(math.log(math.log2(n)) / math.log(LOG_BASE)))
    while epsilon / 2 ** (k + 1) >= 0.5:
        k += 1
    delta = epsilon / 2 ** (k + 1)
    N = math.floor(Fraction(epsilon) * n + n)
    return TopLevelConfig(n=n, epsilon=float(epsilon), k=k, delta=delta, N=N)


@dataclass(frozen=True)
class LevelParams:
    """Derived quantities for one ``Sorter_k`` instance.

    ``n_prime`` is the per-box capacity, ``w`` the box width, ``ell`` the
    number of boxes, ``b`` the number of value subintervals and
    ``box_capacity`` the number of values the box-choosing child accepts.
    """

    k: int
    delta: float
    n_cap: int
    N: int
    n_prime: int
    w: int
    ell: int
    b: int
    box_capacity: int
    alpha: float
    beta: float

    @property
    def sub_width(self) -> float:
        return self.beta / self.b

    @property
    def worst_case_routed(self) -> int:
        """Most values that can ever reach the box-choosing child.

        Every routed value opens a fresh box; at most ``n_cap // n_prime``
        boxes end up full and every non-full box holds a distinct subinterval.
        """
        return min(self.n_cap, self.n_cap // self.n_prime + self.b)


@dataclass(frozen=True)
class Degenerate:
    """Parameters for which a ``Sorter_k`` instance cannot be built."""

    k: int
    n_cap: int
    N: int
    reason: str


def derive_level(
    k: int,
    delta: float,
    n_cap: int,
    N: int,
    alpha: float = 0.0,
    beta: float = 1.0,
) -> LevelParams | Degenerate:
    if k < 2:
        raise InvalidParams(f"derive_level needs k >= 2, got {k}")
    if not 0.0 < delta < 0.5:
        raise InvalidParams(f"delta must lie in (0, 1/2), got {delta}")
    if not 1 <= n_cap <= N:
        raise InvalidParams(f"need 1 <= n_cap <= N, got n_cap={n_cap}, N={N}")
    if not beta > 0.0:
        raise InvalidParams(f"beta must be positive, got {beta}")

    core = _level_core(k, delta, n_cap, N)
    if isinstance(core, Degenerate):
        return core
    n_prime, w, ell, b, box_capacity = core
    return LevelParams(
        k=k,
        delta=delta,
        n_cap=n_cap,
        N=N,
        n_prime=n_prime,
        w=w,
        ell=ell,
        b=b,
        box_capacity=box_capacity,
        alpha=alpha,
        beta=beta,
    )


@functools.lru_cache(maxsize=65536)
def _level_core(
    k: int, delta: float, n_cap: int, N: int
) -> tuple[int, int, int, int, int] | Degenerate:
    if n_cap < MIN_RECURSIVE_CAPACITY:
        return Degenerate(k, n_cap, N, f"n_cap < {MIN_RECURSIVE_CAPACITY}")
    d = Fraction(delta)
    grow = 1 + 2**k * d
    n_prime = _floor_coef_power(2 ** (k - 1) * d / grow, n_cap, omega_ratio(k - 1, k))
    b = _floor_coef_power(Fraction(1), n_cap, omega_ratio(k - 4, k))
    if n_prime < 1:
        return Degenerate(k, n_cap, N, "n_prime < 1")
    if b < 1:
        return Degenerate(k, n_cap, N, "b < 1")
    w = math.floor(grow * n_prime)
    if w > N:
        return Degenerate(k, n_cap, N, "w > N")
    ell = N // w
    if ell < 1:
        return Degenerate(k, n_cap, N, "ell < 1")
    box_capacity = math.floor(ell / (1 + 2 ** (k - 3) * d))
    worst_case_routed = min(n_cap, n_cap // n_prime + b)
    if worst_case_routed > box_capacity:
        return Degenerate(k, n_cap, N, "box sorter capacity below worst-case demand")
    return n_prime, w, ell, b, box_capacity


def box_count_bound(lp: LevelParams) -> float:
    """Upper bound on ``ell`` in terms of ``b`` from the cost analysis."""
    d = lp.delta
    return (1 + 2**lp.k * d) / (2.0 ** (lp.k - 5) * d) * lp.b


def routed_count_bound(lp: LevelParams) -> float:
    """Upper bound on the number of values routed through the box-choosing child."""
    k, d = lp.k, lp.delta
    coef = 2.0 ** (7 - 2 * k) / (d * d) + 2.0 ** (7 - k) / d
    return coef * lp.n_cap ** float(omega_ratio(k - 4, k))
