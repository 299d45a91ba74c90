"""
配置测试：默认值、配置文件、命令行覆盖与校验
"""

from pathlib import Path

import pytest

from src.config import (
    ConfigError,
    ExperimentConfig,
    config_echo,
    experiment_model_spec,
    load_config,
    parse_iterations,
    validate_config,
    with_overrides,
)
from src.models import ModelFamily, ModelSpec
from src.training import EidsIterationTriple

REPO_CONFIG = Path(__file__).resolve().parent.parent / "config.ini"

BASE = {"synthetic": "mackey-glass", "model": "(1,14)", "iterations": "1000"}


def _write(tmp_path, text: str) -> Path:
    path = tmp_path / "experiment.ini"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults():
    cfg = load_config(overrides=BASE)
    assert (cfg.embedding.embed_dim, cfg.embedding.delta) == (2, 1)
    assert (cfg.split.train_n, cfg.split.test_n) == (2500, 1400)
    assert (cfg.training.batch, cfg.training.lr, cfg.training.seed) == (32, 1e-3, 1)
    assert cfg.model.model_family == "vanilla"
    assert cfg.output.out == "results"
    assert cfg.output.emit_embedding is False


def test_repository_config_file_loads():
    cfg = load_config(REPO_CONFIG)
    assert cfg.data.synthetic == "mackey-glass"
    assert experiment_model_spec(cfg) == ModelSpec.vanilla(14)
    assert cfg.log.level == "INFO"


def test_flags_override_file(tmp_path):
    path = _write(tmp_path, "[experiment]\nsynthetic = lorenz\nmodel = (1,4)\niterations = 5\nseed = 7\n")
    assert load_config(path).training.seed == 7
    assert load_config(path, {"seed": 9}).training.seed == 9
    assert load_config(path, {"seed": "9", "delta": None}).embedding.delta == 1


def test_model_flag_may_carry_family():
    cfg = load_config(overrides={**BASE, "model": "eids ((1,6),(1,5),(1,7))", "iterations": "(100,150,400)"})
    assert cfg.model.model_family == "eids"
    assert experiment_model_spec(cfg) == ModelSpec.eids((1, 6), (1, 5), (1, 7))


@pytest.mark.parametrize("changes", [
    {"data": "series.csv"},
    {"synthetic": None, "model": "(1,14)"},
    {"synthetic": "henon"},
    {"lorenz-component": "w"},
    {"sample-period": "0"},
    {"transient": "-1"},
    {"train-n": "0"},
    {"batch": "0"},
    {"lr": "0"},
    {"seed": "-1"},
    {"preset": "table2"},
    {"model-family": "gru"},
    {"model": "(2,14)"},
    {"iterations": "(1,2,3)"},
    {"iterations": "0"},
    {"delta": "five"},
    {"emit-embedding": "maybe"},
])
def test_invalid_configurations(changes):
    overrides = dict(BASE)
    overrides.update(changes)
    with pytest.raises(ConfigError):
        load_config(overrides=overrides)


def test_missing_model_and_data_source():
    with pytest.raises(ConfigError):
        load_config(overrides={"synthetic": "mackey-glass"})
    with pytest.raises(ConfigError):
        load_config()


def test_preset_defaults_to_mackey_glass():
    cfg = load_config(overrides={"preset": "table1"})
    assert cfg.data.synthetic == "mackey-glass"
    assert cfg.model.model == ""


@pytest.mark.parametrize("text", [
    "[experiment]\nembed_dim = 3\n",
    "[experiment]\nlearning-rate = 0.1\n",
    "[training]\nlr = 0.1\n",
    "[DEFAULT]\nseed = 1\n",
    "[log]\nlevel = LOUD\n",
    "[log]\ncolor = true\n",
    "[log]\nenable_file = sometimes\n",
])
def test_invalid_config_files(tmp_path, text):
    path = _write(tmp_path, text)
    with pytest.raises(ConfigError):
        load_config(path, BASE)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.ini", BASE)


def test_log_section(tmp_path):
    path = _write(tmp_path, "[log]\nlevel = debug\nenable_file = yes\nfile_path = out/run.log\n")
    cfg = load_config(path, BASE)
    assert cfg.log.level == "DEBUG"
    assert cfg.log.enable_file is True
    assert cfg.log.file_path == "out/run.log"


def test_parse_iterations():
    assert parse_iterations("1000", ModelFamily.VANILLA) == 1000
    assert parse_iterations("(100,150,400)", ModelFamily.EIDS) == EidsIterationTriple(100, 150, 400)
    assert parse_iterations("50", ModelFamily.EIDS) == EidsIterationTriple(50, 50, 50)
    with pytest.raises(ConfigError):
        parse_iterations("(100,150,400)", ModelFamily.STACKED)
    with pytest.raises(ConfigError):
        parse_iterations("", ModelFamily.VANILLA)
    with pytest.raises(ConfigError):
        parse_iterations("(1,2)", ModelFamily.EIDS)


def test_config_echo_skips_output_keys():
    cfg = load_config(overrides={**BASE, "out": "elsewhere", "workers": "3"})
    echo = config_echo(cfg)
    assert "out" not in echo and "workers" not in echo and "preset" not in echo
    assert list(echo)[:3] == ["data", "synthetic", "sample-period"]
    assert echo["model"] == "(1,14)"
    assert echo["iterations"] == "1000"


def test_with_overrides_copies():
    cfg = load_config(overrides=BASE)
    derived = with_overrides(cfg, delta=50, model_family="stacked", model="(3,15-8-5)", iterations="500")
    assert derived.embedding.delta == 50
    assert derived.model.model == "(3,15-8-5)"
    assert derived.training.iterations == "500"
    assert cfg.embedding.delta == 1
    assert cfg.model.model_family == "vanilla"
    validate_config(derived)


def test_validate_config_on_fresh_object():
    cfg = ExperimentConfig()
    with pytest.raises(ConfigError):
        validate_config(cfg)
    cfg.data.synthetic = "lorenz"
    cfg.model.model = "(1,3)"
    cfg.training.iterations = "2"
    validate_config(cfg)
