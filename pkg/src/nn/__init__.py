"""
神经网络核心模块

包含 SplitMix64 随机数、LSTM 前向与 BPTT、Adam 优化器和有限差分梯度校验。
"""

from src.nn.prng import Prng
from src.nn.lstm import (
    GATE_ORDER,
    DIRECTIONS,
    ShapeError,
    StaleCacheError,
    LstmLayerParams,
    LstmState,
    ReadoutParams,
    StepCache,
    NetworkParams,
    GradientSet,
    SequenceCache,
    init_lstm_params,
    init_readout_params,
    init_network,
    lstm_step_forward,
    network_forward,
    lstm_sequence_forward,
    lstm_backward_with_inputs,
    lstm_backward_bptt,
)
from src.nn.adam import AdamHyper, AdamState, adam_step
from src.nn.gradcheck import (
    DEFAULT_EPSILON,
    NonFiniteLossError,
    relative_error,
    max_relative_error,
    finite_difference_gradients,
)

__all__ = [
    'Prng',
    'GATE_ORDER',
    'DIRECTIONS',
    'ShapeError',
    'StaleCacheError',
    'LstmLayerParams',
    'LstmState',
    'ReadoutParams',
    'StepCache',
    'NetworkParams',
    'GradientSet',
    'SequenceCache',
    'init_lstm_params',
    'init_readout_params',
    'init_network',
    'lstm_step_forward',
    'network_forward',
    'lstm_sequence_forward',
    'lstm_backward_with_inputs',
    'lstm_backward_bptt',
    'AdamHyper',
    'AdamState',
    'adam_step',
    'DEFAULT_EPSILON',
    'NonFiniteLossError',
    'relative_error',
    'max_relative_error',
    'finite_difference_gradients',
]
