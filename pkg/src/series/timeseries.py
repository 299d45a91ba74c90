"""
标量时间序列

定义均匀采样的单通道信号 TimeSeries 及本包共用的异常类型。
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class SeriesError(ValueError):
    """时间序列构造、读取或切分失败"""


class CsvFormatError(SeriesError):
    """CSV 内容不合法（带行号）"""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"第 {line_number} 行: {message}")
        self.line_number = line_number


class DivergenceInGeneratorError(SeriesError):
    """数值积分发散（带样本下标）"""

    def __init__(self, message: str, index: int):
        super().__init__(f"样本 {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class TimeSeries:
    """
    均匀采样的标量信号

    values 按时间顺序存放；sample_period 单位为毫秒，只作为元数据，不参与下标计算。
    """
    values: np.ndarray  # 信号值（只读 float64 数组）
    sample_period: float = 1.0  # 采样周期（毫秒/样本）
    label: str = ""  # 通道或来源名称（如 "Cz"）

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise SeriesError("时间序列不能为空")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise SeriesError(f"时间序列包含非有限值 (下标 {bad})")
        if not (math.isfinite(self.sample_period) and self.sample_period > 0):
            raise SeriesError(f"sample_period 必须为正数: {self.sample_period}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values: Sequence[float], sample_period: float = 1.0, label: str = "") -> "TimeSeries":
        return cls(np.asarray(values, dtype=np.float64), sample_period, label)

    def __len__(self) -> int:
        return int(self.values.size)

    def duration_ms(self) -> float:
        """信号覆盖的时长（毫秒）"""
        return len(self) * self.sample_period
