"""
绘图数据文件

prediction trace（预测值 vs 观测值）、收敛曲线、收敛对比摘要与嵌入状态向量，
均为带表头的 UTF-8 CSV，浮点数以 17 位有效数字写出，可无损解析回来。
"""

import csv
import io
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.evaluation.metrics import Predictor
from src.series.embedding import SupervisedDataset
from src.series.normalizer import NormalizationStats
from src.training.trainer import ConvergenceLog

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("index", "observed", "predicted", "split")
CONVERGENCE_COLUMNS = ("model", "stage", "iteration", "loss")
SUMMARY_COLUMNS = ("model", "iterations", "first_loss", "final_loss", "min_loss", "iteration_to_tenth")


def format_float(value: float) -> str:
    """17 位有效数字，保证解析后逐位相同"""
    return format(float(value), ".17g")


def write_text_atomic(path: Path, text: str):
    """先写临时文件再替换，避免留下写了一半的结果"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def csv_text(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _read_rows(path: Path, header: Sequence[str]) -> List[Dict[str, str]]:
    with Path(path).open("r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != tuple(header):
            raise ValueError(f"{path}: 表头应为 {','.join(header)}，实际 {reader.fieldnames}")
        return list(reader)


@dataclass(frozen=True)
class TraceRow:
    """一行预测记录（原始单位）"""
    index: int
    observed: float
    predicted: float
    split: str  # "train" / "test"


@dataclass(frozen=True)
class PredictionTrace:
    """下标严格递增，训练行全部在测试行之前"""
    rows: Tuple[TraceRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv(self) -> str:
        return csv_text(
            TRACE_COLUMNS,
            [(r.index, format_float(r.observed), format_float(r.predicted), r.split) for r in self.rows],
        )


def _trace_rows(f: Predictor, dataset: SupervisedDataset, stats: NormalizationStats, split: str) -> List[TraceRow]:
    if len(dataset) == 0:
        return []
    predicted = stats.invert(np.asarray(f.predict_batch(dataset), dtype=np.float64))
    observed = stats.invert(dataset.targets)
    return [
        TraceRow(int(i), float(o), float(p), split)
        for i, o, p in zip(dataset.target_indices(), observed, predicted)
    ]


def emit_prediction_trace(
    f: Predictor,
    train: SupervisedDataset,
    test: SupervisedDataset,
    stats: NormalizationStats,
    path: Optional[Path] = None,
) -> PredictionTrace:
    """
    生成训练集与测试集上的单步预测记录

    Args:
        f: 预测器（标准化单位）
        train / test: 同一次嵌入切分出的标准化数据集
        stats: 标准化参数，用于还原原始单位
        path: 若给出则写出 CSV（index,observed,predicted,split）
    """
    rows = _trace_rows(f, train, stats, "train") + _trace_rows(f, test, stats, "test")
    trace = PredictionTrace(tuple(rows))
    if path is not None:
        write_text_atomic(path, trace.to_csv())
        logger.debug(f"prediction trace 已写出: {path} ({len(rows)} 行)")
    return trace


def read_prediction_trace(path: Path) -> PredictionTrace:
    rows = _read_rows(path, TRACE_COLUMNS)
    return PredictionTrace(tuple(
        TraceRow(int(r["index"]), float(r["observed"]), float(r["predicted"]), r["split"]) for r in rows
    ))


@dataclass(frozen=True)
class ConvergenceRow:
    model: str
    stage: Optional[str]
    iteration: int
    loss: float


def convergence_rows(logs: Sequence[Tuple[str, ConvergenceLog]]) -> List[ConvergenceRow]:
    """
    长格式收敛数据

    同一模型的多个日志（EiDS 的 a/b/c 阶段）按给定顺序首尾相接，迭代序号全局递增。
    """
    counters: Dict[str, int] = {}
    rows = []
    for model, log in logs:
        for _, loss in log:
            counters[model] = counters.get(model, 0) + 1
            rows.append(ConvergenceRow(model, log.stage_label, counters[model], float(loss)))
    return rows


def emit_convergence_csv(logs: Sequence[Tuple[str, ConvergenceLog]], path: Optional[Path] = None) -> str:
    """
    写出 model,stage,iteration,loss 格式的收敛曲线

    Returns:
        CSV 文本
    """
    if not logs:
        raise ValueError("没有可写出的收敛日志")
    text = csv_text(
        CONVERGENCE_COLUMNS,
        [(r.model, r.stage or "", r.iteration, format_float(r.loss)) for r in convergence_rows(logs)],
    )
    if path is not None:
        write_text_atomic(path, text)
    return text


def read_convergence_csv(path: Path) -> List[ConvergenceRow]:
    return [
        ConvergenceRow(r["model"], r["stage"] or None, int(r["iteration"]), float(r["loss"]))
        for r in _read_rows(path, CONVERGENCE_COLUMNS)
    ]


@dataclass(frozen=True)
class ConvergenceSummary:
    """一条收敛曲线的对比摘要"""
    model: str
    iterations: int
    first_loss: float
    final_loss: float
    min_loss: float
    iteration_to_tenth: Optional[int]  # 损失首次 <= 0.1 × 首个损失的迭代序号


def summarize_convergence(logs: Sequence[Tuple[str, ConvergenceLog]]) -> List[ConvergenceSummary]:
    """按模型汇总收敛速度，模型顺序与首次出现顺序一致"""
    curves: Dict[str, List[float]] = {}
    for row in convergence_rows(logs):
        curves.setdefault(row.model, []).append(row.loss)

    summaries = []
    for model, losses in curves.items():
        threshold = 0.1 * losses[0]
        reached = next((k for k, loss in enumerate(losses, start=1) if loss <= threshold), None)
        summaries.append(ConvergenceSummary(
            model=model,
            iterations=len(losses),
            first_loss=losses[0],
            final_loss=losses[-1],
            min_loss=min(losses),
            iteration_to_tenth=reached,
        ))
    return summaries


def write_convergence_summary(summaries: Sequence[ConvergenceSummary], path: Path) -> str:
    text = csv_text(SUMMARY_COLUMNS, [
        (
            s.model,
            s.iterations,
            format_float(s.first_loss),
            format_float(s.final_loss),
            format_float(s.min_loss),
            "" if s.iteration_to_tenth is None else s.iteration_to_tenth,
        )
        for s in summaries
    ])
    write_text_atomic(path, text)
    return text


def emit_embedding_csv(dataset: SupervisedDataset, path: Path) -> str:
    """写出状态向量：index,x1..xD,target（index 为目标在原序列中的下标）"""
    dim = dataset.spec.embed_dim
    header = ["index"] + [f"x{k}" for k in range(1, dim + 1)] + ["target"]
    rows = [
        [int(i)] + [format_float(v) for v in inputs] + [format_float(t)]
        for i, inputs, t in zip(dataset.target_indices(), dataset.inputs, dataset.targets)
    ]
    text = csv_text(header, rows)
    write_text_atomic(path, text)
    return text
