import csv
import io
import json
import math

import pytest

from sortbench import cli
from sortbench.bench import (
    COLUMNS,
    ExperimentConfig,
    ExperimentRow,
    emit,
    format_rows,
    parse_config,
    run_experiment,
    run_point,
    worker_count,
)
from sortbench.errors import ConfigError

EXPECTED_COLUMNS = (
    "strategy", "workload", "n", "epsilon", "seed", "array_size", "cost", "opt", "ratio",
    "runtime_ms", "k", "delta", "max_recursion_depth", "audit_pass",
)


def _config(**kw):
    base = dict(
        strategies=("sorter",), workloads=({"name": "uniform"},), ns=(1000,),
        epsilons=(1.0,), seeds=(42,), audit=True,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_columns_order():
    assert COLUMNS == EXPECTED_COLUMNS


def test_single_sorter_row_passes_audit():
    rows = run_experiment(_config())
    assert len(rows) == 1
    row = rows[0]
    assert row.audit_pass and row.array_size == 2000
    assert row.ratio == row.cost / row.opt
    assert row.max_recursion_depth >= 1
    assert row.runtime_ms == 0.0


def test_naive_sorted_ratio_is_exactly_one():
    row = run_point("naive_sequential", "sorted_asc", 1000, 1.0, 0)
    assert row.ratio == 1.0 and row.cost == 1.0


def test_timing_is_recorded_when_requested():
    row = run_point("baseline", "uniform", 500, 1.0, 0, timing=True)
    assert row.runtime_ms > 0.0


def test_grid_order_and_independence():
    cfg = _config(strategies=("baseline", "sorter"), ns=(200, 300), seeds=(1, 2), audit=False)
    rows = run_experiment(cfg, workers=1)
    assert [(r.strategy, r.n, r.seed) for r in rows] == [
        (s, n, seed) for s in ("baseline", "sorter") for n in (200, 300) for seed in (1, 2)
    ]
    smaller = run_experiment(_config(strategies=("sorter",), ns=(300,), seeds=(2,), audit=False))
    assert smaller[0] == rows[-1]


def test_parallel_matches_sequential():
    cfg = _config(strategies=("sorter", "random_cell"), ns=(300, 700), audit=True)
    assert run_experiment(cfg, workers=2) == run_experiment(cfg, workers=1)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("SORTBENCH_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SORTBENCH_THREADS", "x")
    with pytest.raises(ConfigError):
        worker_count()


def test_emit_empty_and_single():
    assert format_rows([], "csv") == ",".join(EXPECTED_COLUMNS) + "\n"
    rows = run_experiment(_config())
    assert len(format_rows(rows, "csv").splitlines()) == 2
    assert json.loads(format_rows([], "json")) == []


def test_csv_values_round_trip():
    row = run_experiment(_config())[0]
    parsed = next(csv.DictReader(io.StringIO(format_rows([row]))))
    assert float(parsed["cost"]) == row.cost
    assert float(parsed["delta"]) == row.delta
    assert parsed["audit_pass"] == "true"


def test_json_mirrors_csv_keys():
    row = run_experiment(_config())[0]
    data = json.loads(format_rows([row], "json"))
    assert list(data[0]) == list(EXPECTED_COLUMNS)
    assert data[0]["cost"] == row.cost


def test_non_finite_values_are_strings():
    row = ExperimentRow("sorter", "uniform", 2, 1.0, 0, 4, math.nan, 0.0, math.inf, 0.0, 2, 0.125,
                        0, False)
    assert "nan" in format_rows([row]) and ",inf," in format_rows([row])
    data = json.loads(format_rows([row], "json"))
    assert data[0]["ratio"] == "inf"


def test_emit_io_error(tmp_path):
    with pytest.raises(OSError, match="missing"):
        emit([], "csv", str(tmp_path / "missing" / "out.csv"))


@pytest.mark.parametrize(
    "raw",
    [
        {"strategies": [], "workloads": ["uniform"], "ns": [10], "epsilons": [1]},
        {"strategies": ["sorter"], "workloads": ["uniform"], "ns": [10], "epsilons": [4]},
        {"strategies": ["sorter"], "workloads": ["uniform"], "ns": [1], "epsilons": [1]},
        {"strategies": ["nope"], "workloads": ["uniform"], "ns": [10], "epsilons": [1]},
        {"strategies": ["sorter"], "workloads": ["nope"], "ns": [10], "epsilons": [1]},
        {"strategies": ["sorter"], "workloads": ["uniform"], "ns": [10], "epsilons": [1],
         "output": {"format": "xml"}},
        [],
    ],
)
def test_bad_configs_rejected(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


# --- CLI ----------------------------------------------------------------------


def _write_config(path, **overrides):
    cfg = {
        "strategies": ["sorter", "naive_sequential"],
        "workloads": ["uniform", {"name": "interval_flood", "flood_width": 0.02}],
        "ns": [300],
        "epsilons": [0.5, 1.0],
        "seeds": [1],
        "audit": True,
    }
    cfg.update(overrides)
    path.write_text(json.dumps(cfg))
    return path


def test_cli_sweep_writes_file(tmp_path):
    out = tmp_path / "rows.csv"
    cfg = _write_config(tmp_path / "c.json", output={"format": "csv", "path": str(out)})
    assert cli.main(["sweep", "--config", str(cfg)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 2 * 2 * 2


def test_cli_sweep_json_stdout(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.json", output={"format": "json"})
    assert cli.main(["sweep", "--config", str(cfg)]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 8


def test_cli_epsilon_out_of_range_is_config_error(tmp_path, capsys):
    cfg = _write_config(tmp_path / "c.json", epsilons=[4])
    assert cli.main(["sweep", "--config", str(cfg)]) == 2
    assert cli.main(["run", "--n", "1000", "--epsilon", "4", "--strategy", "sorter",
                     "--workload", "uniform"]) == 2
    assert "epsilon" in capsys.readouterr().err


def test_cli_missing_config_file(tmp_path):
    assert cli.main(["sweep", "--config", str(tmp_path / "absent.json")]) == 2


def test_cli_bad_arguments_exit_two():
    with pytest.raises(SystemExit) as info:
        cli.main(["run", "--n", "10"])
    assert info.value.code == 2


def test_cli_io_error_exit_three(tmp_path):
    assert cli.main(["run", "--n", "100", "--epsilon", "1", "--strategy", "baseline",
                     "--workload", "uniform", "--out", str(tmp_path / "no" / "x.csv")]) == 3


def test_cli_run_stdout(capsys):
    assert cli.main(["run", "--n", "1000", "--epsilon", "1", "--strategy", "naive_sequential",
                     "--workload", "sorted_asc", "--audit"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(rows) == 1 and rows[0]["ratio"] == "1.0" and rows[0]["audit_pass"] == "true"


def test_cli_oracle(capsys):
    assert cli.main(["oracle", "--max-n", "6", "--trials", "100"]) == 0
    assert "100/100" in capsys.readouterr().out
    assert cli.main(["oracle", "--max-n", "12"]) == 2
