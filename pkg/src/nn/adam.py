"""
Adam 优化器（带偏差校正）

状态由调用方持有：adam_step 返回新的参数与新的 AdamState，不修改输入。
"""

from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from src.nn.lstm import NetworkParams, ShapeError


@dataclass(frozen=True)
class AdamHyper:
    """Adam 超参数"""
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


@dataclass(frozen=True)
class AdamState:
    """一阶/二阶矩估计与步数"""
    first_moment: Tuple[np.ndarray, ...]
    second_moment: Tuple[np.ndarray, ...]
    step_count: int = 0
    hyper: AdamHyper = AdamHyper()

    @classmethod
    def initial(cls, params, hyper: AdamHyper = AdamHyper()) -> "AdamState":
        """矩初始化为 0，步数为 0"""
        arrays = params.arrays() if isinstance(params, NetworkParams) else list(params)
        zeros = tuple(np.zeros_like(np.asarray(a, dtype=np.float64)) for a in arrays)
        return cls(zeros, tuple(np.zeros_like(z) for z in zeros), 0, hyper)


def _adam_arrays(
    params: Sequence[np.ndarray], grads: Sequence[np.ndarray], opt: AdamState
) -> Tuple[List[np.ndarray], AdamState]:
    if not (len(params) == len(grads) == len(opt.first_moment)):
        raise ShapeError(
            f"参数/梯度/矩的个数不一致: {len(params)}, {len(grads)}, {len(opt.first_moment)}"
        )
    hp = opt.hyper
    step = opt.step_count + 1
    bias1 = 1.0 - hp.beta1 ** step
    bias2 = 1.0 - hp.beta2 ** step

    new_params, new_m, new_v = [], [], []
    for theta, g, m, v in zip(params, grads, opt.first_moment, opt.second_moment):
        theta = np.asarray(theta, dtype=np.float64)
        g = np.asarray(g, dtype=np.float64)
        if not (theta.shape == g.shape == m.shape == v.shape):
            raise ShapeError(f"形状不一致: 参数 {theta.shape}, 梯度 {g.shape}, 矩 {m.shape}")
        m = hp.beta1 * m + (1.0 - hp.beta1) * g
        v = hp.beta2 * v + (1.0 - hp.beta2) * (g * g)
        m_hat = m / bias1
        v_hat = v / bias2
        new_params.append(theta - hp.lr * m_hat / (np.sqrt(v_hat) + hp.epsilon))
        new_m.append(m)
        new_v.append(v)

    return new_params, replace(opt, first_moment=tuple(new_m), second_moment=tuple(new_v), step_count=step)


def adam_step(params, grads, opt: AdamState):
    """
    执行一次 Adam 更新

    Args:
        params: NetworkParams 或数组列表
        grads: 与 params 同结构的 GradientSet 或数组列表
        opt: 当前优化器状态

    Returns:
        (新参数, 新 AdamState)，参数类型与输入一致
    """
    if isinstance(params, NetworkParams):
        arrays, new_opt = _adam_arrays(params.arrays(), grads.arrays(), opt)
        return params.with_arrays(arrays), new_opt
    return _adam_arrays(list(params), list(grads), opt)
