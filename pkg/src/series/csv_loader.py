"""
CSV 时间序列读取

每行一个十进制样本，可选一行表头（首行不是数字时自动跳过）。
"""

import logging
import math
from pathlib import Path
from typing import BinaryIO, Optional

from src.series.timeseries import CsvFormatError, SeriesError, TimeSeries

logger = logging.getLogger(__name__)


def _parse_float(text: str) -> Optional[float]:
    try:
        return float(text)
    except ValueError:
        return None


def load_csv(source: BinaryIO, sample_period: float = 1.0, label: str = "") -> TimeSeries:
    """
    从字节流读取单列 CSV

    Args:
        source: 二进制流（UTF-8 文本）
        sample_period: 采样周期（毫秒）
        label: 序列名称

    Returns:
        TimeSeries: 按文件顺序排列的样本

    Raises:
        SeriesError: 流为空或只有表头
        CsvFormatError: 正文出现非数字或非有限值
    """
    raw = source.read()
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise SeriesError(f"CSV 不是合法的 UTF-8: {e}") from e

    values = []
    first_content_line = True
    for line_number, line in enumerate(text.splitlines(), start=1):
        cell = line.strip()
        if not cell:
            continue

        value = _parse_float(cell)
        if value is None:
            if first_content_line:
                logger.warning(f"跳过表头: {cell!r}")
                first_content_line = False
                continue
            raise CsvFormatError(f"无法解析为数字: {cell!r}", line_number)

        first_content_line = False
        if not math.isfinite(value):
            raise CsvFormatError(f"非有限值: {cell!r}", line_number)
        values.append(value)

    if not values:
        raise SeriesError("CSV 中没有样本")

    logger.info(f"CSV 读取完成: {len(values)} 个样本")
    return TimeSeries.from_values(values, sample_period, label)


def load_csv_file(path: str, sample_period: float = 1.0, label: Optional[str] = None) -> TimeSeries:
    """从文件路径读取 CSV，label 默认取文件名"""
    csv_path = Path(path)
    if not csv_path.exists():
        raise SeriesError(f"数据文件不存在: {csv_path}")
    with csv_path.open("rb") as f:
        return load_csv(f, sample_period, label if label is not None else csv_path.stem)
