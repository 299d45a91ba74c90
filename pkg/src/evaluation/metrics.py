"""
预测误差指标

RMSE 与 MAE 均在原始信号单位上计算（预测与目标先做逆标准化）。
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Protocol, Tuple

import numpy as np

from src.series.embedding import SupervisedDataset
from src.series.normalizer import NormalizationStats

logger = logging.getLogger(__name__)


class MetricsError(ValueError):
    """指标输入不合法"""


class Predictor(Protocol):
    """任何能对数据集批量预测（标准化单位）的对象"""

    def predict_batch(self, dataset: SupervisedDataset) -> np.ndarray:
        ...


@dataclass(frozen=True)
class ReportMeta:
    """报告中原样回显的实验信息"""
    model_name: str
    structure: str  # 结构记法
    horizon: int  # Δ
    iterations: str  # 单个数字或 "(a,b,c)"
    n_train: int
    seed: int


@dataclass(frozen=True)
class MetricsReport:
    """一次实验的指标报告"""
    model_name: str
    structure: str
    horizon: int
    rmse: float
    mae: float
    iterations: str
    n_train: int
    n_test: int
    seed: int

    def __post_init__(self):
        if self.mae < 0 or self.rmse < 0:
            raise MetricsError(f"指标不能为负: rmse={self.rmse}, mae={self.mae}")
        if self.rmse < self.mae * (1.0 - 1e-12):
            raise MetricsError(f"rmse 不应小于 mae: rmse={self.rmse}, mae={self.mae}")

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def compute_metrics(predicted, observed) -> Tuple[float, float]:
    """
    计算 (rmse, mae)

    Raises:
        MetricsError: 列表为空或长度不一致
    """
    p = np.asarray(predicted, dtype=np.float64).reshape(-1)
    o = np.asarray(observed, dtype=np.float64).reshape(-1)
    if p.size != o.size:
        raise MetricsError(f"预测与观测长度不一致: {p.size} vs {o.size}")
    if p.size == 0:
        raise MetricsError("预测与观测为空")
    error = p - o
    rmse = float(np.sqrt(np.mean(error * error)))
    mae = float(np.mean(np.abs(error)))
    return rmse, mae


def evaluate(
    f: Predictor, test: SupervisedDataset, stats: NormalizationStats, meta: ReportMeta
) -> MetricsReport:
    """
    在测试集上评估

    Args:
        f: 已训练的预测器（输出标准化单位）
        test: 用训练集统计量标准化后的测试集
        stats: 训练集上拟合的标准化参数
        meta: 回显到报告中的实验信息
    """
    if len(test) == 0:
        raise MetricsError("测试集为空")
    predicted = stats.invert(np.asarray(f.predict_batch(test), dtype=np.float64))
    observed = stats.invert(test.targets)
    rmse, mae = compute_metrics(predicted, observed)
    logger.info(f"{meta.model_name} {meta.structure} Δ={meta.horizon}: RMSE {rmse:.4f}, MAE {mae:.4f}")
    return MetricsReport(
        model_name=meta.model_name,
        structure=meta.structure,
        horizon=meta.horizon,
        rmse=rmse,
        mae=mae,
        iterations=meta.iterations,
        n_train=meta.n_train,
        n_test=len(test),
        seed=meta.seed,
    )
