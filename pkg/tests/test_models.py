"""
模型测试：结构记法、构建、EiDS 组合前向与参数量
"""

import numpy as np
import numpy.testing as npt
import pytest

from conftest import make_dataset
from src.bench import table1_grid
from src.models import (
    ModelFamily,
    ModelSpec,
    ModelSpecError,
    WindowError,
    build_forecaster,
    format_model_spec,
    param_count,
    parse_model_spec,
    predict,
    predict_batch,
    subnet_outputs,
)
from src.nn import NetworkParams, Prng, ReadoutParams


def _constant_readout(net: NetworkParams, bias: float) -> NetworkParams:
    return NetworkParams(net.layers, ReadoutParams(np.zeros(net.feature_size), bias), net.direction)


# ---------------------------------------------------------------- notation

@pytest.mark.parametrize("text, kind, expected", [
    ("(1,14)", "vanilla", ModelSpec.vanilla(14)),
    ("(1,20)", "vanilla", ModelSpec.vanilla(20)),
    ("(3,9,8,3)", "stacked", ModelSpec.stacked((9, 8, 3))),
    ("(3,15-8-5)", "stacked", ModelSpec.stacked((15, 8, 5))),
    ("(3,20,4,2)", "stacked", ModelSpec.stacked((20, 4, 2))),
    ("(1,28)", "bidirectional", ModelSpec.bidirectional(28)),
    ("((1,6),(1,5),(1,7))", "eids", ModelSpec.eids((1, 6), (1, 5), (1, 7))),
    ("((1,6),(1,5),(1,8))_5", "eids", ModelSpec.eids((1, 6), (1, 5), (1, 8))),
    ("( (2,4), (1,3), (1,2) )", "EiDS", ModelSpec.eids((2, 4), (1, 3), (1, 2))),
])
def test_parse_model_spec(text, kind, expected):
    assert parse_model_spec(text, kind) == expected


def test_eids_spec_layers_repeat_cells():
    spec = ModelSpec.eids((2, 4), (1, 3), (1, 2))
    assert spec.subnets == ((4, 4), (3,), (2,))


@pytest.mark.parametrize("text, kind", [
    ("(2,9,8,3)", "stacked"),
    ("(2,14)", "vanilla"),
    ("(1,0)", "vanilla"),
    ("(1,14", "vanilla"),
    ("1,14", "vanilla"),
    ("(1,x)", "vanilla"),
    ("(1)", "vanilla"),
    ("((1,6),(1,5))", "eids"),
    ("((0,6),(1,5),(1,7))", "eids"),
    ("(1,14)", "gru"),
])
def test_parse_model_spec_errors(text, kind):
    with pytest.raises(ModelSpecError):
        parse_model_spec(text, kind)


def test_format_model_spec_is_parseable():
    for spec in (
        ModelSpec.vanilla(14),
        ModelSpec.stacked((15, 8, 5)),
        ModelSpec.bidirectional(28),
        ModelSpec.eids((1, 6), (2, 5), (1, 8)),
    ):
        assert parse_model_spec(format_model_spec(spec), spec.family) == spec
    assert format_model_spec(ModelSpec.stacked((15, 8, 5))) == "(3,15,8,5)"
    assert format_model_spec(ModelSpec.eids((1, 6), (1, 5), (1, 7))) == "((1,6),(1,5),(1,7))"


@pytest.mark.parametrize("row", table1_grid(), ids=lambda row: f"{row.family}-d{row.delta}")
def test_benchmark_structures_round_trip(row):
    spec = parse_model_spec(row.structure, row.family)
    assert parse_model_spec(format_model_spec(spec), row.family) == spec


def test_model_family_parse():
    assert ModelFamily.parse(" Bidirectional ") is ModelFamily.BIDIRECTIONAL
    assert ModelSpec.eids((1, 6), (1, 5), (1, 7)).display_name == "EiDS"


# ---------------------------------------------------------------- build

def test_build_forecaster_shapes():
    f = build_forecaster(ModelSpec.eids((1, 6), (1, 5), (1, 7)), 2, Prng(1))
    assert [net.input_size for net in f.subnets] == [1, 2, 3]
    assert [net.layers[0].hidden_size for net in f.subnets] == [6, 5, 7]
    assert f.stage_trained == (False, False, False)

    bi = build_forecaster(ModelSpec.bidirectional(28), 2, Prng(1))
    assert len(bi.subnets) == 1
    assert bi.subnets[0].direction == "bidirectional"
    assert bi.subnets[0].feature_size == 56


def test_build_forecaster_is_deterministic():
    spec = ModelSpec.stacked((9, 8, 3))
    a = build_forecaster(spec, 2, Prng(42))
    b = build_forecaster(spec, 2, Prng(42))
    for x, y in zip(a.subnets[0].arrays(), b.subnets[0].arrays()):
        npt.assert_array_equal(x, y)
    c = build_forecaster(spec, 2, Prng(43))
    assert not np.array_equal(a.subnets[0].layers[0].w_input, c.subnets[0].layers[0].w_input)


def test_build_forecaster_rejects_zero_window():
    with pytest.raises(WindowError):
        build_forecaster(ModelSpec.vanilla(3), 0, Prng(1))


def test_with_subnet_sets_trained_flag():
    f = build_forecaster(ModelSpec.eids((1, 2), (1, 2), (1, 2)), 2, Prng(1))
    replaced = f.with_subnet(1, _constant_readout(f.subnets[1], 0.5), trained=True)
    assert replaced.stage_trained == (False, True, False)
    assert f.stage_trained == (False, False, False)
    assert replaced.subnets[0] is f.subnets[0]


# ---------------------------------------------------------------- predict

def test_predict_constant_baseline():
    f = build_forecaster(ModelSpec.vanilla(4), 3, Prng(2))
    f = f.with_subnet(0, _constant_readout(f.subnets[0], 0.3))
    assert predict(f, [0.1, -0.4, 2.0]) == 0.3


def test_predict_eids_is_excitation_minus_inhibition():
    f = build_forecaster(ModelSpec.eids((1, 3), (1, 3), (1, 3)), 2, Prng(2))
    f = f.with_subnet(1, _constant_readout(f.subnets[1], 0.75))
    f = f.with_subnet(2, _constant_readout(f.subnets[2], 0.25))
    assert predict(f, [0.2, -0.1]) == 0.5


def test_predict_eids_identity_with_subnet_outputs():
    f = build_forecaster(ModelSpec.eids((1, 6), (1, 5), (1, 7)), 2, Prng(11))
    gen = np.random.default_rng(4)
    for window in gen.uniform(-1.5, 1.5, (10, 2)):
        _, y_b, y_c = subnet_outputs(f, window[None, :])
        assert predict(f, window) == y_b[0] - y_c[0]


@pytest.mark.parametrize("target", [0.4, 0.6, 0.75, 1.1, 1.5])
def test_eids_inhibition_equal_to_residual_cancels_error(target):
    f = build_forecaster(ModelSpec.eids((1, 3), (1, 3), (1, 3)), 2, Prng(9))
    f = f.with_subnet(1, _constant_readout(f.subnets[1], 0.75))
    pair = make_dataset([[0.2, -0.1]], [target])[0]
    _, y_b, _ = subnet_outputs(f, np.array([pair.inputs]))
    f = f.with_subnet(2, _constant_readout(f.subnets[2], y_b[0] - pair.target))
    assert predict(f, pair.inputs) - pair.target == 0.0


def test_predict_window_errors():
    f = build_forecaster(ModelSpec.vanilla(2), 2, Prng(1))
    with pytest.raises(WindowError):
        predict(f, [0.1])
    with pytest.raises(WindowError):
        predict(f, [0.1, float("nan")])


def test_predict_batch_matches_single_predictions():
    gen = np.random.default_rng(8)
    ds = make_dataset(gen.uniform(-1, 1, (100, 2)), gen.uniform(-1, 1, 100))
    for spec in (ModelSpec.stacked((3, 2)), ModelSpec.bidirectional(3), ModelSpec.eids((1, 3), (1, 2), (1, 2))):
        f = build_forecaster(spec, 2, Prng(5))
        batch = predict_batch(f, ds)
        singles = [predict(f, pair.inputs) for pair in ds]
        npt.assert_allclose(batch, singles, rtol=1e-12, atol=1e-14)


def test_predict_batch_empty_and_singleton():
    f = build_forecaster(ModelSpec.vanilla(3), 2, Prng(5))
    assert predict_batch(f, make_dataset(np.zeros((0, 2)), [])).shape == (0,)
    single = make_dataset([[0.3, -0.2]], [0.0])
    assert predict_batch(f, single)[0] == predict(f, [0.3, -0.2])


def test_predict_batch_reports_bad_pair_index():
    f = build_forecaster(ModelSpec.vanilla(3), 2, Prng(5))
    inputs = np.zeros((6, 2))
    inputs[3, 1] = np.inf
    with pytest.raises(WindowError) as info:
        predict_batch(f, make_dataset(inputs, np.zeros(6)))
    assert info.value.pair_index == 3


# ---------------------------------------------------------------- parameter count

@pytest.mark.parametrize("spec, expected", [
    (ModelSpec.vanilla(14), 911),
    (ModelSpec.vanilla(1), 14),
    (ModelSpec.bidirectional(28), 6777),
    (ModelSpec.stacked((9, 8, 3)), 1120),
    (ModelSpec.eids((1, 6), (1, 5), (1, 7)), 681),
])
def test_param_count_values(spec, expected):
    assert param_count(spec, 2) == expected


@pytest.mark.parametrize("text, kind", [
    ("(1,14)", "vanilla"),
    ("(1,20)", "vanilla"),
    ("(3,15-8-5)", "stacked"),
    ("(3,20,4,2)", "stacked"),
    ("(1,28)", "bidirectional"),
    ("((1,6),(1,5),(1,8))", "eids"),
    ("((2,4),(3,2),(1,5))", "eids"),
])
def test_param_count_matches_allocation(text, kind):
    spec = parse_model_spec(text, kind)
    assert build_forecaster(spec, 2, Prng(1)).size() == param_count(spec, 2)
    assert param_count(spec, 2) == param_count(spec, 7)


@pytest.mark.parametrize("row", table1_grid(), ids=lambda row: f"{row.family}-d{row.delta}")
def test_benchmark_param_count_matches_allocation(row):
    spec = parse_model_spec(row.structure, row.family)
    assert build_forecaster(spec, 2, Prng(row.delta)).size() == param_count(spec, 2)
