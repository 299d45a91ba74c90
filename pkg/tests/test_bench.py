"""
实验流水线与网格测试（小规模配置）
"""

import csv
import json
import logging
import math

import pytest

from main import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, run_cli
from src.bench import (
    FIG3_TRAIN_N,
    GridRow,
    PipelineError,
    fig3_grid,
    render_summary,
    row_config,
    run_experiment,
    run_grid,
    run_preset,
    table1_grid,
)
from src.config import load_config
from src.evaluation import read_convergence_csv, read_prediction_trace
from src.models import parse_model_spec


@pytest.fixture(autouse=True)
def restore_root_logging():
    """run_cli 会重设根日志处理器，测试结束后还原"""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)


SMALL_ROWS = (
    GridRow("vanilla", "(1,3)", 1, "2"),
    GridRow("eids", "((1,2),(1,2),(1,2))", 5, "(1,1,2)"),
)


def _overrides(out, **changes):
    values = {
        "synthetic": "mackey-glass",
        "model": "(1,3)",
        "iterations": "2",
        "train-n": "60",
        "test-n": "20",
        "batch": "16",
        "out": str(out),
    }
    for key, value in changes.items():
        values[key.replace("_", "-")] = value
    return values


def _cfg(out, **changes):
    return load_config(overrides=_overrides(out, **changes))


def _metrics(path):
    payload = json.loads(path.read_text(encoding="utf-8"))
    payload.pop("wall_clock_seconds")
    return payload


def _write_series(path, count):
    path.write_text("Cz\n" + "".join(f"{math.sin(0.1 * k):.6f}\n" for k in range(count)), encoding="utf-8")
    return path


# ---------------------------------------------------------------- single experiment

def test_run_experiment_writes_results(tmp_path):
    result = run_experiment(_cfg(tmp_path / "run"))
    out = tmp_path / "run"
    metrics = json.loads((out / "metrics.json").read_text(encoding="utf-8"))

    assert metrics["model_name"] == "Vanilla LSTM"
    assert metrics["structure"] == "(1,3)"
    assert (metrics["horizon"], metrics["n_train"], metrics["n_test"], metrics["seed"]) == (1, 60, 20, 1)
    assert metrics["iterations"] == "2"
    assert metrics["param_count"] == result.param_count == 4 * 3 * 5 + 4
    assert metrics["config"]["train-n"] == 60
    assert "out" not in metrics["config"]
    assert metrics["wall_clock_seconds"] >= 0
    assert metrics["rmse"] >= metrics["mae"] >= 0

    trace = read_prediction_trace(out / "trace.csv")
    assert len(trace) == 80
    assert [row.index for row in trace.rows] == list(range(2, 82))
    assert len(read_convergence_csv(out / "convergence.csv")) == 2
    assert not (out / "embedding.csv").exists()


def test_run_experiment_is_deterministic(tmp_path):
    run_experiment(_cfg(tmp_path / "first"))
    run_experiment(_cfg(tmp_path / "second"))
    assert _metrics(tmp_path / "first" / "metrics.json") == _metrics(tmp_path / "second" / "metrics.json")
    for name in ("trace.csv", "convergence.csv"):
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_run_experiment_seed_changes_result(tmp_path):
    a = run_experiment(_cfg(tmp_path / "a"))
    b = run_experiment(_cfg(tmp_path / "b", seed="2"))
    assert a.report.rmse != b.report.rmse


def test_run_experiment_eids_stages(tmp_path):
    cfg = _cfg(tmp_path / "eids", model="eids ((1,2),(1,3),(1,2))", iterations="(2,3,4)", delta="5")
    result = run_experiment(cfg)
    rows = read_convergence_csv(tmp_path / "eids" / "convergence.csv")
    assert [r.stage for r in rows] == ["a"] * 2 + ["b"] * 3 + ["c"] * 4
    assert [r.iteration for r in rows] == list(range(1, 10))
    assert result.report.iterations == "(2,3,4)"
    assert result.report.model_name == "EiDS"
    assert result.forecaster.stage_trained == (True, True, True)


def test_run_experiment_emits_embedding(tmp_path):
    run_experiment(_cfg(tmp_path / "emb", emit_embedding="true"))
    with (tmp_path / "emb" / "embedding.csv").open(encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["index", "x1", "x2", "target"]
    assert len(rows) - 1 == 80


def test_run_experiment_from_csv(tmp_path):
    path = _write_series(tmp_path / "cz.csv", 100)
    cfg = load_config(overrides={**_overrides(tmp_path / "csv"), "synthetic": None, "data": str(path)})
    result = run_experiment(cfg)
    assert result.report.n_test == 20


def test_pipeline_error_stage_for_short_series(tmp_path):
    path = _write_series(tmp_path / "short.csv", 50)
    cfg = load_config(overrides={**_overrides(tmp_path / "short"), "synthetic": None, "data": str(path)})
    with pytest.raises(PipelineError) as info:
        run_experiment(cfg, row=3)
    assert info.value.stage == "split"
    error = json.loads(info.value.to_json_line())["error"]
    assert error["row"] == 3
    assert error["stage"] == "split"
    assert error["type"] == "SeriesError"
    assert not (tmp_path / "short" / "metrics.json").exists()


def test_pipeline_error_stage_for_bad_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0\n2.0\nnan\n", encoding="utf-8")
    cfg = load_config(overrides={**_overrides(tmp_path / "bad"), "synthetic": None, "data": str(path)})
    with pytest.raises(PipelineError) as info:
        run_experiment(cfg)
    assert info.value.stage == "load"
    assert type(info.value.cause).__name__ == "CsvFormatError"


# ---------------------------------------------------------------- grids

def test_table1_grid_rows():
    rows = table1_grid()
    assert len(rows) == 16
    assert [row.delta for row in rows] == [1, 5, 50, 75] * 4
    assert [row.family for row in rows[::4]] == ["vanilla", "stacked", "bidirectional", "eids"]
    assert rows[5].structure == "(3,15-8-5)"
    assert rows[12].iterations == "(100,150,400)"
    for row in rows:
        parse_model_spec(row.structure, row.family)


def test_fig3_grid_rows():
    rows = fig3_grid()
    assert [row.family for row in rows] == ["vanilla", "stacked", "bidirectional", "eids"]
    assert all(row.delta == 1 for row in rows)


def test_grid_row_matches_single_experiment(tmp_path):
    cfg = _cfg(tmp_path / "grid")
    result = run_grid(cfg, SMALL_ROWS)
    assert result.ok
    assert [o.index for o in result.outcomes] == [1, 2]

    single = run_experiment(row_config(cfg, SMALL_ROWS[1]), out_dir=tmp_path / "single")
    assert result.outcomes[1].report == single.report
    assert (tmp_path / "grid" / "rows" / "02_eids_d5" / "metrics.json").exists()

    with result.summary_csv.open(encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["Model's Name", "Model's Structure", "Steps", "RMSE", "MAE", "No.Iterations"]
    assert rows[2][:3] == ["EiDS", "((1,2),(1,2),(1,2))", "5"]
    assert float(rows[2][3]) == single.report.rmse
    assert rows[2][5] == "(1,1,2)"
    assert "Model's Name" in result.summary_txt.read_text(encoding="utf-8")


def test_failed_row_does_not_stop_grid(tmp_path):
    rows = (SMALL_ROWS[0], GridRow("vanilla", "(2,14)", 1, "2"), SMALL_ROWS[1])
    result = run_grid(_cfg(tmp_path / "grid"), rows)
    assert not result.ok
    assert [o.ok for o in result.outcomes] == [True, False, True]
    failure = result.first_failure
    assert (failure.row, failure.stage, failure.error_type) == (2, "config", "ConfigError")
    assert json.loads(failure.to_json_line())["error"]["row"] == 2

    with result.summary_csv.open(encoding="utf-8", newline="") as f:
        summary = list(csv.reader(f))
    assert summary[2][3:5] == ["", ""]


def test_failed_row_is_logged_as_warning(tmp_path, caplog):
    rows = (GridRow("vanilla", "(2,14)", 1, "2"),)
    with caplog.at_level(logging.WARNING, logger="src.bench.grid"):
        run_grid(_cfg(tmp_path / "grid"), rows)
    failures = [r for r in caplog.records if r.name == "src.bench.grid" and "失败" in r.getMessage()]
    assert [r.levelno for r in failures] == [logging.WARNING]


def test_grid_combined_convergence(tmp_path):
    result = run_grid(_cfg(tmp_path / "fig"), SMALL_ROWS, combine_convergence=True)
    rows = read_convergence_csv(tmp_path / "fig" / "convergence.csv")
    assert [r.model for r in rows] == ["Vanilla LSTM"] * 2 + ["EiDS"] * 4
    summary = (tmp_path / "fig" / "convergence_summary.csv").read_text(encoding="utf-8").splitlines()
    assert len(summary) == 3
    assert result.ok


def test_parallel_grid_matches_sequential(tmp_path):
    sequential = run_grid(_cfg(tmp_path / "seq"), SMALL_ROWS)
    parallel = run_grid(_cfg(tmp_path / "par"), SMALL_ROWS, workers=2)
    assert [o.report for o in parallel.outcomes] == [o.report for o in sequential.outcomes]


def test_grid_rejects_empty_and_bad_source(tmp_path):
    with pytest.raises(ValueError):
        run_grid(_cfg(tmp_path / "empty"), ())
    cfg = load_config(overrides={
        **_overrides(tmp_path / "missing"), "synthetic": None, "data": str(tmp_path / "absent.csv"),
    })
    with pytest.raises(PipelineError) as info:
        run_grid(cfg, SMALL_ROWS)
    assert info.value.stage == "load"


def test_render_summary_marks_failures(tmp_path):
    rows = (SMALL_ROWS[0], GridRow("stacked", "(2,3)", 1, "2"))
    result = run_grid(_cfg(tmp_path / "grid"), rows)
    text = render_summary(result.outcomes, title="small")
    assert "Vanilla LSTM" in text
    assert "config" in text


# ---------------------------------------------------------------- command line

def _argv(out, *extra):
    return [
        "--synthetic", "mackey-glass", "--model", "vanilla", "(1,3)", "--iterations", "2",
        "--train-n", "60", "--test-n", "20", "--batch", "16", "--out", str(out), *extra,
    ]


def test_cli_success(tmp_path, capsys):
    assert run_cli(_argv(tmp_path / "cli")) == EXIT_OK
    assert (tmp_path / "cli" / "metrics.json").exists()
    assert "RMSE" in capsys.readouterr().out


def test_cli_config_error_exit_code(tmp_path, capsys):
    code = run_cli(_argv(tmp_path / "cli", "--data", str(tmp_path / "x.csv")))
    assert code == EXIT_CONFIG
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]
    assert error["stage"] == "config"
    assert error["type"] == "ConfigError"


def test_cli_pipeline_failure_exit_code(tmp_path, capsys):
    path = _write_series(tmp_path / "short.csv", 30)
    argv = ["--data", str(path), "--model", "(1,3)", "--iterations", "2", "--out", str(tmp_path / "cli")]
    assert run_cli(argv) == EXIT_FAILED
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]
    assert error["stage"] == "split"
    assert error["row"] is None


def test_cli_preset_with_missing_data(tmp_path, capsys):
    argv = ["--preset", "table1", "--data", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "p")]
    assert run_cli(argv) == EXIT_FAILED
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"]
    assert error["stage"] == "load"


def test_cli_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "experiment.ini"
    path.write_text(
        "[experiment]\nsynthetic = mackey-glass\nmodel = (1,3)\niterations = 2\n"
        "train-n = 60\ntest-n = 20\nseed = 7\n\n[log]\nenable_console = false\n",
        encoding="utf-8",
    )
    out = tmp_path / "cli"
    assert run_cli(["--config", str(path), "--seed", "9", "--out", str(out)]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["seed"] == 9
    assert metrics["config"]["seed"] == 9


def test_eids_experiment_logs_every_stage_epoch(tmp_path):
    cfg = _cfg(tmp_path / "eids", model="eids ((1,6),(1,5),(1,8))", iterations="(100,100,100)", train_n="40")
    run_experiment(cfg)
    rows = read_convergence_csv(tmp_path / "eids" / "convergence.csv")
    assert len(rows) == 300
    assert {r.model for r in rows} == {"EiDS"}
    assert rows[-1].iteration == 300


def test_grid_rerun_is_byte_identical(tmp_path):
    run_grid(_cfg(tmp_path / "one"), SMALL_ROWS)
    run_grid(_cfg(tmp_path / "two"), SMALL_ROWS)
    assert (tmp_path / "one" / "summary.csv").read_bytes() == (tmp_path / "two" / "summary.csv").read_bytes()
    for row_dir in ("01_vanilla_d1", "02_eids_d5"):
        for name in ("trace.csv", "convergence.csv"):
            first = tmp_path / "one" / "rows" / row_dir / name
            assert first.read_bytes() == (tmp_path / "two" / "rows" / row_dir / name).read_bytes()


def test_fig3_preset_uses_large_training_set(tmp_path, monkeypatch):
    calls = []

    def fake_run_grid(cfg, grid, workers=1, combine_convergence=False, out_dir=None):
        calls.append((cfg, grid, workers, combine_convergence))
        return "done"

    monkeypatch.setattr("src.bench.grid.run_grid", fake_run_grid)
    cfg = load_config(overrides={"preset": "fig3", "out": str(tmp_path)})
    assert run_preset(cfg, "fig3", workers=3) == "done"
    derived, grid, workers, combined = calls[0]
    assert derived.split.train_n == FIG3_TRAIN_N == 7000
    assert derived.split.test_n == 1400
    assert grid == fig3_grid()
    assert (workers, combined) == (3, True)
    assert cfg.split.train_n == 2500

    run_preset(cfg, "table1")
    assert calls[1][1] == table1_grid()
    assert calls[1][3] is False
    with pytest.raises(ValueError):
        run_preset(cfg, "fig4")
