"""Experiment grids: configuration, execution and CSV/JSON output."""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping, Sequence

from .engine import STRATEGIES, new_strategy, run
from .errors import ConfigError, InvalidEpsilon, InvalidN, SortbenchError
from .metrics import audit, cost, opt_cost, ratio
from .params import derive_top
from .workloads import WORKLOADS, WorkloadSpec, generate

__all__ = [
    "COLUMNS",
    "NORMALIZED_BETA",
    "ExperimentConfig",
    "ExperimentRow",
    "emit",
    "format_rows",
    "load_config",
    "run_experiment",
    "run_point",
]

log = logging.getLogger(__name__)

#: Interval length used for every workload: [0, 1 + 2**-52) so that 1.0 is in range.
NORMALIZED_BETA = 1.0 + 2.0**-52


@dataclass(frozen=True)
class ExperimentRow:
    strategy: str
    workload: str
    n: int
    epsilon: float
    seed: int
    array_size: int
    cost: float
    opt: float
    ratio: float
    runtime_ms: float
    k: int
    delta: float
    max_recursion_depth: int
    audit_pass: bool


COLUMNS = tuple(f.name for f in fields(ExperimentRow))


@dataclass(frozen=True)
class ExperimentConfig:
    strategies: tuple[str, ...]
    workloads: tuple[Mapping[str, Any], ...]
    ns: tuple[int, ...]
    epsilons: tuple[float, ...]
    seeds: tuple[int, ...] = (0,)
    audit: bool = False
    timing: bool = False
    output_format: str = "csv"
    output_path: str | None = None

    def points(self) -> list[tuple[str, Mapping[str, Any], int, float, int]]:
        """Grid points in the fixed output order."""
        return list(
            itertools.product(self.strategies, self.workloads, self.ns, self.epsilons, self.seeds)
        )


def _as_list(raw: Mapping[str, Any], key: str, default: Any = None) -> list[Any]:
    value = raw.get(key, default)
    if value is None:
        raise ConfigError(f"config is missing {key!r}")
    if not isinstance(value, list) or not value:
        raise ConfigError(f"config key {key!r} must be a non-empty list")
    return value


def parse_config(raw: Mapping[str, Any]) -> ExperimentConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("config must be a JSON object")
    strategies = _as_list(raw, "strategies")
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigError(f"unknown strategy {s!r}; expected one of {STRATEGIES}")
    workloads = []
    for w in _as_list(raw, "workloads"):
        entry = {"name": w} if isinstance(w, str) else dict(w)
        if entry.get("name") not in WORKLOADS:
            raise ConfigError(f"unknown workload {entry.get('name')!r}; expected one of {WORKLOADS}")
        workloads.append(entry)
    ns = _as_list(raw, "ns")
    for n in ns:
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise ConfigError(f"every n must be an integer >= 2, got {n!r}")
    epsilons = _as_list(raw, "epsilons")
    for e in epsilons:
        if isinstance(e, bool) or not isinstance(e, (int, float)) or not 0.0 < e <= 3.0:
            raise ConfigError(f"every epsilon must lie in (0, 3], got {e!r}")
    seeds = _as_list(raw, "seeds", [0])
    for s in seeds:
        if isinstance(s, bool) or not isinstance(s, int):
            raise ConfigError(f"seeds must be integers, got {s!r}")
    output = raw.get("output") or {}
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output format must be csv or json, got {fmt!r}")
    return ExperimentConfig(
        strategies=tuple(strategies),
        workloads=tuple(workloads),
        ns=tuple(ns),
        epsilons=tuple(float(e) for e in epsilons),
        seeds=tuple(seeds),
        audit=bool(raw.get("audit", False)),
        timing=bool(raw.get("timing", False)),
        output_format=fmt,
        output_path=output.get("path"),
    )


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)


def run_point(
    strategy: str,
    workload: Mapping[str, Any] | str,
    n: int,
    epsilon: float,
    seed: int,
    *,
    do_audit: bool = False,
    timing: bool = False,
) -> ExperimentRow:
    """Run one grid point; placement failures come back as a failed row."""
    top = derive_top(n, epsilon)
    wspec = WorkloadSpec.from_dict(workload, n, seed)
    strat = new_strategy(
        strategy, top.k, top.delta, n, top.N, 0.0, NORMALIZED_BETA, seed=seed, record=do_audit
    )
    stream = generate(wspec)
    try:
        t0 = time.perf_counter()
        result = run(strat, stream)
        elapsed = (time.perf_counter() - t0) * 1000.0
    except SortbenchError as exc:
        log.error("%s/%s n=%d eps=%g seed=%d failed at step %s: %s",
                  strategy, wspec.name, n, epsilon, seed, exc.step, exc)
        nan = math.nan
        return ExperimentRow(strategy, wspec.name, n, epsilon, seed, top.N, nan, nan, nan,
                             0.0, top.k, top.delta, strat.depth(), False)
    c = cost(result.array)
    o = opt_cost(v for _, v, _ in result.trace)
    passed = True
    if do_audit:
        report = audit(result.trace, top, strat.snapshot())
        passed = report.passed
        for v in report.violations[:10]:
            log.error("%s/%s n=%d eps=%g seed=%d audit: %s at step %s: %s",
                      strategy, wspec.name, n, epsilon, seed, v.invariant, v.step, v.detail)
    return ExperimentRow(
        strategy=strategy,
        workload=wspec.name,
        n=n,
        epsilon=epsilon,
        seed=seed,
        array_size=top.N,
        cost=c,
        opt=o,
        ratio=ratio(c, o),
        runtime_ms=elapsed if timing else 0.0,
        k=top.k,
        delta=top.delta,
        max_recursion_depth=strat.depth(),
        audit_pass=passed,
    )


def _run_packed(args: tuple[Any, ...]) -> ExperimentRow:
    *point, do_audit, timing = args
    return run_point(*point, do_audit=do_audit, timing=timing)


def worker_count() -> int:
    raw = os.environ.get("SORTBENCH_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ConfigError(f"SORTBENCH_THREADS must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> list[ExperimentRow]:
    """Run every grid point; rows come back in grid order whatever the parallelism."""
    for e in config.epsilons:
        if not 0.0 < e <= 3.0:
            raise InvalidEpsilon(f"epsilon must lie in (0, 3], got {e}")
    for n in config.ns:
        if n < 2:
            raise InvalidN(f"n must be >= 2, got {n}")
    jobs = [(*p, config.audit, config.timing) for p in config.points()]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [_run_packed(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(_run_packed, jobs))


def _fmt(value: Any) -> str | int | bool | float:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def format_rows(rows: Sequence[ExperimentRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow(_fmt(getattr(row, c)) for c in COLUMNS)
        return buf.getvalue()
    if fmt == "json":
        out = []
        for row in rows:
            d = asdict(row)
            for key, value in d.items():
                if isinstance(value, float) and not math.isfinite(value):
                    d[key] = _fmt(value)
            out.append(d)
        return json.dumps(out, indent=2) + "\n"
    raise ConfigError(f"unknown output format {fmt!r}")


def emit(rows: Sequence[ExperimentRow], fmt: str = "csv", destination: str | None = None) -> str:
    """Write rows to ``destination`` (a path) or return the text when it is None.

    Raises ``OSError`` with the path in the message when writing fails.
    """
    text = format_rows(rows, fmt)
    if destination is not None:
        try:
            with open(destination, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(exc.errno, f"cannot write results to {destination}: {exc.strerror}") from exc
    return text
