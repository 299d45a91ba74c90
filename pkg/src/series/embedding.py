"""
时延嵌入与训练/测试切分

状态向量由 D 个间隔为 Δ 的滞后样本组成，目标位于最后一个输入之后 Δ 处：
    inputs = [x(t - D·Δ), ..., x(t - 2Δ), x(t - Δ)],  target = x(t)
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np

from src.series.timeseries import SeriesError, TimeSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmbeddingSpec:
    """嵌入参数 (D, Δ)"""
    embed_dim: int  # D：滞后输入个数
    horizon: int  # Δ：滞后间隔与预测距离（样本数）

    def __post_init__(self):
        if self.embed_dim < 1 or self.horizon < 1:
            raise SeriesError(f"嵌入参数必须 >= 1: D={self.embed_dim}, Δ={self.horizon}")

    @property
    def span(self) -> int:
        """最早输入到目标的距离 D·Δ"""
        return self.embed_dim * self.horizon


@dataclass(frozen=True)
class StateVectorPair:
    """一个 (输入窗口, 目标) 样本，输入按从旧到新排列"""
    inputs: Tuple[float, ...]
    target: float


@dataclass(frozen=True)
class SupervisedDataset:
    """
    嵌入得到的监督数据集

    inputs 形状 (N, D)，targets 形状 (N,)，按目标时间排列、步长 1；
    origin_offset 是第一个样本的目标在原序列中的下标。
    """
    inputs: np.ndarray
    targets: np.ndarray
    spec: EmbeddingSpec
    origin_offset: int = 0

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=np.float64).reshape(-1, self.spec.embed_dim)
        targets = np.array(self.targets, dtype=np.float64).reshape(-1)
        if inputs.shape[0] != targets.shape[0]:
            raise SeriesError(f"输入与目标数量不一致: {inputs.shape[0]} vs {targets.shape[0]}")
        inputs.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def __getitem__(self, i: int) -> StateVectorPair:
        return StateVectorPair(tuple(float(v) for v in self.inputs[i]), float(self.targets[i]))

    def __iter__(self) -> Iterator[StateVectorPair]:
        for i in range(len(self)):
            yield self[i]

    @property
    def pairs(self) -> List[StateVectorPair]:
        return list(self)

    def target_indices(self) -> np.ndarray:
        """每个样本的目标在原序列中的下标"""
        return self.origin_offset + np.arange(len(self), dtype=np.int64)

    def slice(self, start: int, stop: int) -> "SupervisedDataset":
        """按样本顺序截取 [start, stop)"""
        return SupervisedDataset(
            self.inputs[start:stop], self.targets[start:stop], self.spec, self.origin_offset + start
        )


def embed(series: TimeSeries, spec: EmbeddingSpec) -> SupervisedDataset:
    """
    构造时延嵌入数据集

    Args:
        series: 原始序列
        spec: 嵌入参数

    Returns:
        SupervisedDataset: 共 len(series) - D·Δ 个样本

    Raises:
        SeriesError: 序列长度不超过 D·Δ
    """
    length = len(series)
    span = spec.span
    if length <= span:
        raise SeriesError(
            f"序列太短: 长度 {length} <= D·Δ = {spec.embed_dim}·{spec.horizon} = {span}"
        )

    count = length - span
    targets_at = np.arange(span, length)
    # 第 k 列对应偏移 -(D - k)·Δ
    offsets = -(spec.embed_dim - np.arange(spec.embed_dim)) * spec.horizon
    inputs = series.values[targets_at[:, None] + offsets[None, :]]
    targets = series.values[targets_at]

    logger.debug(f"嵌入完成: D={spec.embed_dim}, Δ={spec.horizon}, 样本数 {count}")
    return SupervisedDataset(inputs, targets, spec, origin_offset=span)


def split_train_test(
    dataset: SupervisedDataset, n_train: int, n_test: int
) -> Tuple[SupervisedDataset, SupervisedDataset]:
    """
    按顺序切分训练集与测试集（不打乱）

    前 n_train 个样本为训练集，紧接着的 n_test 个为测试集。
    """
    if n_train < 0 or n_test < 0:
        raise SeriesError(f"切分数量不能为负: ({n_train}, {n_test})")
    if n_train + n_test > len(dataset):
        raise SeriesError(
            f"样本不足: 需要 {n_train} + {n_test} = {n_train + n_test}，仅有 {len(dataset)}"
        )
    return dataset.slice(0, n_train), dataset.slice(n_train, n_train + n_test)
