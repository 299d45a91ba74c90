"""
模型模块

包含结构记法解析、四种预测器的构建以及 EiDS 组合前向。
"""

from src.models.spec import (
    ModelFamily,
    ModelSpec,
    ModelSpecError,
    DISPLAY_NAMES,
    EIDS_STAGES,
    parse_model_spec,
    format_model_spec,
)
from src.models.forecaster import (
    EIDS_INPUT_SIZES,
    Forecaster,
    WindowError,
    build_forecaster,
    subnet_input_sizes,
    windows_to_sequence,
    with_broadcast_inputs,
    subnet_outputs,
    combine_outputs,
    predict,
    predict_batch,
    param_count,
)

__all__ = [
    'ModelFamily',
    'ModelSpec',
    'ModelSpecError',
    'DISPLAY_NAMES',
    'EIDS_STAGES',
    'parse_model_spec',
    'format_model_spec',
    'EIDS_INPUT_SIZES',
    'Forecaster',
    'WindowError',
    'build_forecaster',
    'subnet_input_sizes',
    'windows_to_sequence',
    'with_broadcast_inputs',
    'subnet_outputs',
    'combine_outputs',
    'predict',
    'predict_batch',
    'param_count',
]
