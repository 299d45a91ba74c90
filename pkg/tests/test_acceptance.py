"""
长时间运行的验收检查（pytest -m slow）
"""

import numpy as np
import pytest

from conftest import make_dataset
from src.bench import run_experiment
from src.config import load_config
from src.models import ModelSpec, build_forecaster, subnet_outputs
from src.nn import AdamHyper, Prng
from src.series import EmbeddingSpec, embed, fit_normalizer, generate_mackey_glass, split_train_test
from src.training import EidsIterationTriple, StageSchedule, TrainConfig, loss_mse, train, train_eids_staged

SEEDS = (1, 2, 3)


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_vanilla_learns_mackey_glass(seed):
    series = generate_mackey_glass(2 + 2500 + 1400)
    train_raw, _ = split_train_test(embed(series, EmbeddingSpec(2, 1)), 2500, 1400)
    train_set = fit_normalizer(train_raw).apply_dataset(train_raw)

    f = build_forecaster(ModelSpec.vanilla(14), 2, Prng(seed))
    _, log = train(f, train_set, TrainConfig(iterations=500, seed=seed))
    assert len(log) == 500
    assert log.losses[-1] <= 0.1 * log.losses[0]


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_eids_error_grows_with_horizon(tmp_path, seed):
    maes = []
    for delta in (1, 17, 50):
        cfg = load_config(overrides={
            "synthetic": "mackey-glass",
            "model": "eids ((1,6),(1,5),(1,8))",
            "iterations": "(100,100,100)",
            "delta": delta,
            "seed": seed,
            "out": str(tmp_path / f"d{delta}"),
        })
        maes.append(run_experiment(cfg).report.mae)
    assert maes[0] < maes[1] < maes[2]


@pytest.mark.slow
@pytest.mark.parametrize("seed", SEEDS)
def test_inhibitory_stage_improves_on_excitatory_estimate(seed):
    gen = np.random.default_rng(seed)
    inputs = gen.uniform(-1.0, 1.0, (300, 2))
    targets = inputs.mean(axis=1)
    train_set = make_dataset(inputs[:200], targets[:200])
    test_set = make_dataset(inputs[200:], targets[200:])

    schedule = StageSchedule(
        EidsIterationTriple(20, 5, 200),
        TrainConfig(iterations=1, hyper=AdamHyper(lr=1e-2), seed=seed),
    )
    f = build_forecaster(ModelSpec.eids((1, 4), (1, 4), (1, 4)), 2, Prng(seed))
    f, _ = train_eids_staged(f, train_set, schedule)

    _, y_b, y_c = subnet_outputs(f, test_set.inputs)
    assert loss_mse(y_b - y_c, test_set.targets) < loss_mse(y_b, test_set.targets)
