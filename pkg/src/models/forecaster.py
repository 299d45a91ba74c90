"""
预测器构建与推理

基线模型把长度为 D 的窗口当作 D 个标量时间步输入单个网络。
EiDS 由三个子网络组成：
    sub_a（感觉通路）   每步输入 [x_t]              -> ŷ_a
    sub_b（兴奋性估计） 每步输入 [x_t, ŷ_a]         -> ŷ_b
    sub_c（抑制性校正） 每步输入 [x_t, ŷ_a, ŷ_b]    -> ŷ_c
    输出 ŷ = ŷ_b - ŷ_c
辅助标量 ŷ_a、ŷ_b 在每个时间步作为额外输入坐标广播。
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from src.models.spec import ModelFamily, ModelSpec
from src.nn.lstm import NetworkParams, init_network, network_forward
from src.nn.prng import Prng
from src.series.embedding import SupervisedDataset

logger = logging.getLogger(__name__)

# EiDS 三个子网络每步的输入维度
EIDS_INPUT_SIZES = (1, 2, 3)


class WindowError(ValueError):
    """输入窗口长度或数值不合法"""

    def __init__(self, message: str, pair_index: Optional[int] = None):
        prefix = f"样本 {pair_index}: " if pair_index is not None else ""
        super().__init__(prefix + message)
        self.pair_index = pair_index


def subnet_input_sizes(spec: ModelSpec) -> Tuple[int, ...]:
    """各子网络每个时间步的输入维度"""
    return EIDS_INPUT_SIZES if spec.family is ModelFamily.EIDS else (1,)


@dataclass(frozen=True)
class Forecaster:
    """
    已构建的预测模型

    subnets 基线为 1 个网络，EiDS 为 3 个；stage_trained 标记各子网络是否已完成训练。
    训练不会原地修改，而是返回新的 Forecaster。
    """
    spec: ModelSpec
    window_dim: int
    subnets: Tuple[NetworkParams, ...]
    stage_trained: Tuple[bool, ...]

    def __post_init__(self):
        subnets = tuple(self.subnets)
        stage_trained = tuple(bool(v) for v in self.stage_trained)
        object.__setattr__(self, "subnets", subnets)
        object.__setattr__(self, "stage_trained", stage_trained)
        if self.window_dim < 1:
            raise WindowError(f"窗口长度 D 必须 >= 1: {self.window_dim}")
        sizes = subnet_input_sizes(self.spec)
        if len(subnets) != len(sizes) or len(stage_trained) != len(sizes):
            raise ValueError(f"{self.spec.family.value} 需要 {len(sizes)} 个子网络")
        for k, (net, size) in enumerate(zip(subnets, sizes)):
            if net.input_size != size:
                raise ValueError(f"子网络 {k} 每步输入维度应为 {size}，实际 {net.input_size}")

    @property
    def is_eids(self) -> bool:
        return self.spec.family is ModelFamily.EIDS

    def size(self) -> int:
        """实际分配的参数标量总数"""
        return sum(net.size() for net in self.subnets)

    def with_subnet(self, index: int, params: NetworkParams, trained: Optional[bool] = None) -> "Forecaster":
        """替换一个子网络（可同时设置其训练标记）"""
        subnets = list(self.subnets)
        subnets[index] = params
        flags = list(self.stage_trained)
        if trained is not None:
            flags[index] = trained
        return replace(self, subnets=tuple(subnets), stage_trained=tuple(flags))

    def predict(self, window: Sequence[float]) -> float:
        return predict(self, window)

    def predict_batch(self, dataset: SupervisedDataset) -> np.ndarray:
        return predict_batch(self, dataset)


def build_forecaster(spec: ModelSpec, window_dim: int, rng: Prng) -> Forecaster:
    """
    按结构分配并初始化参数

    子网络按 sub_a, sub_b, sub_c 的顺序依次消耗 rng。
    """
    if window_dim < 1:
        raise WindowError(f"窗口长度 D 必须 >= 1: {window_dim}")
    subnets = tuple(
        init_network(size, cells, rng, spec.direction)
        for size, cells in zip(subnet_input_sizes(spec), spec.subnets)
    )
    forecaster = Forecaster(spec, window_dim, subnets, (False,) * len(subnets))
    logger.debug(f"模型构建完成: {spec.display_name}, 参数量 {forecaster.size()}")
    return forecaster


def windows_to_sequence(windows: np.ndarray) -> np.ndarray:
    """(N, D) 窗口 -> (D, N, 1) 序列，时间步从旧到新"""
    return np.ascontiguousarray(windows.T[:, :, None])


def with_broadcast_inputs(sequence: np.ndarray, aux: Sequence[np.ndarray]) -> np.ndarray:
    """在每个时间步后追加广播的辅助标量，(T, N, 1) -> (T, N, 1 + len(aux))"""
    steps, batch, _ = sequence.shape
    columns = [sequence] + [np.broadcast_to(np.asarray(a)[None, :, None], (steps, batch, 1)) for a in aux]
    return np.concatenate(columns, axis=2)


def subnet_outputs(f: Forecaster, windows: np.ndarray) -> Tuple[np.ndarray, ...]:
    """
    各子网络的输出

    Args:
        f: 预测器
        windows: (N, D) 窗口（标准化单位）

    Returns:
        基线为 (ŷ,)，EiDS 为 (ŷ_a, ŷ_b, ŷ_c)，每项形状 (N,)
    """
    sequence = windows_to_sequence(windows)
    if not f.is_eids:
        out, _ = network_forward(f.subnets[0], sequence)
        return (out,)
    y_a, _ = network_forward(f.subnets[0], sequence)
    y_b, _ = network_forward(f.subnets[1], with_broadcast_inputs(sequence, [y_a]))
    y_c, _ = network_forward(f.subnets[2], with_broadcast_inputs(sequence, [y_a, y_b]))
    return y_a, y_b, y_c


def combine_outputs(f: Forecaster, outputs: Tuple[np.ndarray, ...]) -> np.ndarray:
    """EiDS 输出为兴奋减抑制 ŷ_b - ŷ_c；基线直接返回"""
    if f.is_eids:
        return outputs[1] - outputs[2]
    return outputs[0]


def _check_windows(f: Forecaster, windows: np.ndarray):
    if windows.ndim != 2 or windows.shape[1] != f.window_dim:
        raise WindowError(f"窗口长度应为 {f.window_dim}，实际形状 {windows.shape}")
    finite = np.isfinite(windows).all(axis=1)
    if not finite.all():
        raise WindowError("窗口包含非有限值", int(np.flatnonzero(~finite)[0]))


def predict(f: Forecaster, window: Sequence[float]) -> float:
    """
    单个窗口的预测（标准化单位）

    Raises:
        WindowError: 窗口长度不等于 D 或含非有限值
    """
    windows = np.asarray(window, dtype=np.float64)
    if windows.ndim != 1 or windows.size != f.window_dim:
        raise WindowError(f"窗口长度应为 {f.window_dim}，实际 {windows.size}")
    windows = windows[None, :]
    _check_windows(f, windows)
    return float(combine_outputs(f, subnet_outputs(f, windows))[0])


def predict_batch(f: Forecaster, dataset: SupervisedDataset) -> np.ndarray:
    """按数据集顺序逐个预测；出错时异常带样本下标"""
    if len(dataset) == 0:
        return np.zeros(0)
    windows = dataset.inputs
    _check_windows(f, windows)
    return combine_outputs(f, subnet_outputs(f, windows))


def param_count(spec: ModelSpec, window_dim: int = 1) -> int:
    """
    按结构计算参数量（与 D 无关，窗口按时间步输入）

    每层 4h(in + h + 1)，每个读出层 h_total + 1；双向时层项与读出特征宽度加倍。
    """
    if window_dim < 1:
        raise WindowError(f"窗口长度 D 必须 >= 1: {window_dim}")
    total = 0
    for fan_in, cells in zip(subnet_input_sizes(spec), spec.subnets):
        if spec.family is ModelFamily.BIDIRECTIONAL:
            h = cells[0]
            total += 2 * 4 * h * (fan_in + h + 1) + (2 * h + 1)
            continue
        for h in cells:
            total += 4 * h * (fan_in + h + 1)
            fan_in = h
        total += cells[-1] + 1
    return total
