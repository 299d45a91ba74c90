"""
有限差分梯度（校验用）

中心差分 (L(θ+ε) - L(θ-ε)) / 2ε，逐坐标计算。
"""

from typing import Callable, List, Sequence, Union

import numpy as np

from src.nn.lstm import GradientSet, NetworkParams

DEFAULT_EPSILON = 1e-5


class NonFiniteLossError(RuntimeError):
    """损失函数返回了 NaN 或 Inf"""


def relative_error(analytic, numeric) -> np.ndarray:
    """|a - n| / max(1e-8, |a| + |n|)，逐元素"""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(1e-8, np.abs(a) + np.abs(n))


def max_relative_error(analytic, numeric) -> float:
    """两组同结构梯度之间的最大相对误差"""
    a_arrays = analytic.arrays() if isinstance(analytic, NetworkParams) else list(analytic)
    n_arrays = numeric.arrays() if isinstance(numeric, NetworkParams) else list(numeric)
    worst = 0.0
    for a, n in zip(a_arrays, n_arrays):
        if np.size(a):
            worst = max(worst, float(np.max(relative_error(a, n))))
    return worst


def _evaluate(loss_fn, arrays) -> float:
    value = float(loss_fn(arrays))
    if not np.isfinite(value):
        raise NonFiniteLossError(f"损失为非有限值: {value}")
    return value


def finite_difference_gradients(
    loss_fn: Callable,
    params: Union[NetworkParams, np.ndarray, Sequence[np.ndarray]],
    epsilon: float = DEFAULT_EPSILON,
):
    """
    中心差分梯度

    Args:
        loss_fn: 参数 -> 实数，必须是确定性的；接受与 params 相同类型的参数
        params: NetworkParams、单个数组或数组列表
        epsilon: 扰动大小（> 0）

    Returns:
        与 params 同结构的梯度（NetworkParams 对应 GradientSet）
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon 必须为正: {epsilon}")

    if isinstance(params, NetworkParams):
        work = [np.array(a, dtype=np.float64) for a in params.arrays()]
        evaluate = lambda arrays: loss_fn(params.with_arrays(arrays))
    elif isinstance(params, np.ndarray):
        work = [np.array(params, dtype=np.float64)]
        evaluate = lambda arrays: loss_fn(arrays[0])
    else:
        work = [np.array(a, dtype=np.float64) for a in params]
        evaluate = loss_fn

    grads: List[np.ndarray] = []
    for array in work:
        flat = array.reshape(-1)
        grad = np.zeros(flat.size)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + epsilon
            plus = _evaluate(evaluate, work)
            flat[k] = original - epsilon
            minus = _evaluate(evaluate, work)
            flat[k] = original
            grad[k] = (plus - minus) / (2.0 * epsilon)
        grads.append(grad.reshape(array.shape))

    if isinstance(params, NetworkParams):
        return GradientSet(params.layers, params.readout, params.direction).with_arrays(grads)
    if isinstance(params, np.ndarray):
        return grads[0]
    return grads
