"""
标准化

均值与总体标准差只在训练集的输入和目标上拟合，避免测试集信息泄漏。
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from src.series.embedding import SupervisedDataset
from src.series.timeseries import SeriesError

ArrayLike = Union[float, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class NormalizationStats:
    """标准化参数"""
    mean: float
    std_dev: float

    def __post_init__(self):
        if not self.std_dev > 0:
            raise SeriesError(f"std_dev 必须为正: {self.std_dev}")

    def apply(self, values: ArrayLike) -> ArrayLike:
        """(x - mean) / std_dev"""
        if np.isscalar(values):
            return (float(values) - self.mean) / self.std_dev
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.std_dev

    def invert(self, values: ArrayLike) -> ArrayLike:
        """x * std_dev + mean"""
        if np.isscalar(values):
            return float(values) * self.std_dev + self.mean
        return np.asarray(values, dtype=np.float64) * self.std_dev + self.mean

    def apply_dataset(self, dataset: SupervisedDataset) -> SupervisedDataset:
        """返回标准化后的数据集（样本与起点不变）"""
        return SupervisedDataset(
            self.apply(dataset.inputs), self.apply(dataset.targets), dataset.spec, dataset.origin_offset
        )


def fit_normalizer(train: SupervisedDataset) -> NormalizationStats:
    """
    在训练集上拟合标准化参数

    Raises:
        SeriesError: 训练集为空或为常数
    """
    if len(train) == 0:
        raise SeriesError("训练集为空，无法拟合标准化参数")
    pool = np.concatenate([train.inputs.reshape(-1), train.targets])
    mean = float(np.mean(pool))
    std_dev = float(np.std(pool))
    if std_dev == 0.0:
        raise SeriesError("训练数据为常数 (std_dev = 0)，无法标准化")
    return NormalizationStats(mean, std_dev)
