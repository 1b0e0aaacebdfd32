"""``sortbench`` command line.

Exit codes: 0 all rows completed and every requested audit passed, 1 some
row failed, 2 bad configuration or arguments, 3 output could not be written.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from typing import Sequence

from .bench import ExperimentConfig, emit, load_config, run_experiment
from .engine import STRATEGIES
from .errors import ConfigError, SortbenchError
from .metrics import BRUTE_FORCE_MAX_CELLS, BRUTE_FORCE_MAX_VALUES, brute_force_opt, opt_cost
from .workloads import WORKLOADS

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sortbench", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single experiment")
    p_run.add_argument("--n", type=int, required=True)
    p_run.add_argument("--epsilon", type=float, required=True)
    p_run.add_argument("--strategy", choices=STRATEGIES, required=True)
    p_run.add_argument("--workload", choices=WORKLOADS, required=True)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--audit", action="store_true")
    p_run.add_argument("--timing", action="store_true", help="record runtime_ms (not byte-stable)")
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")
    p_run.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="run a grid described by a JSON config")
    p_sweep.add_argument("--config", required=True)

    p_oracle = sub.add_parser("oracle", help="check brute-force optimum against max - min")
    p_oracle.add_argument("--max-n", type=int, default=6)
    p_oracle.add_argument("--max-cells", type=int, default=9)
    p_oracle.add_argument("--trials", type=int, default=500)
    p_oracle.add_argument("--seed", type=int, default=0)
    return parser


def _finish(rows, fmt: str, path: str | None) -> int:
    try:
        text = emit(rows, fmt, path)
    except OSError as exc:
        print(f"sortbench: {exc}", file=sys.stderr)
        return EXIT_IO
    if path is None:
        sys.stdout.write(text)
    return EXIT_OK if all(r.audit_pass for r in rows) else EXIT_FAILED


def _oracle(args: argparse.Namespace) -> int:
    if not 1 <= args.max_n <= BRUTE_FORCE_MAX_VALUES:
        raise ConfigError(f"--max-n must lie in [1, {BRUTE_FORCE_MAX_VALUES}]")
    if not args.max_n <= args.max_cells <= BRUTE_FORCE_MAX_CELLS:
        raise ConfigError(f"--max-cells must lie in [max-n, {BRUTE_FORCE_MAX_CELLS}]")
    rnd = random.Random(args.seed)
    mismatches = 0
    for trial in range(args.trials):
        m = rnd.randint(1, args.max_n)
        N = rnd.randint(m, args.max_cells)
        values = [rnd.random() for _ in range(m)]
        bf, opt = brute_force_opt(values, N), opt_cost(values)
        if bf != opt:
            mismatches += 1
            print(f"mismatch trial={trial} N={N} values={values}: brute={bf!r} opt={opt!r}")
    print(f"oracle: {args.trials - mismatches}/{args.trials} multisets agree "
          f"(size <= {args.max_n}, N <= {args.max_cells})")
    return EXIT_OK if mismatches == 0 else EXIT_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command == "oracle":
            return _oracle(args)
        if args.command == "run":
            config = ExperimentConfig(
                strategies=(args.strategy,),
                workloads=({"name": args.workload},),
                ns=(args.n,),
                epsilons=(args.epsilon,),
                seeds=(args.seed,),
                audit=args.audit,
                timing=args.timing,
                output_format=args.format,
                output_path=args.out,
            )
        else:
            config = load_config(args.config)
        rows = run_experiment(config)
    except (ConfigError, SortbenchError) as exc:
        print(f"sortbench: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _finish(rows, config.output_format, config.output_path)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
