"""
实验网格与内置预设

table1: 4 个模型族 × Δ ∈ {1, 5, 50, 75} 共 16 行，每行的结构与迭代次数固定。
fig3:   Δ=1 下四个模型族，训练集 7000 个样本，额外输出合并的收敛曲线。

网格共享同一数据源：序列只加载/生成一次（长度按最大 Δ 计算），每行按自己的 Δ 嵌入。
"""

import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from rich.console import Console
from rich.table import Table

from src.bench.runner import PipelineError, load_series, required_series_length, run_experiment
from src.config.defaults import ExperimentConfig
from src.config.loader import with_overrides
from src.evaluation.artifacts import (
    csv_text,
    emit_convergence_csv,
    format_float,
    summarize_convergence,
    write_convergence_summary,
    write_text_atomic,
)
from src.evaluation.metrics import MetricsReport
from src.models.spec import DISPLAY_NAMES, ModelFamily
from src.series.timeseries import TimeSeries
from src.training.trainer import ConvergenceLog

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("Model's Name", "Model's Structure", "Steps", "RMSE", "MAE", "No.Iterations")
FIG3_TRAIN_N = 7000


@dataclass(frozen=True)
class GridRow:
    """网格中的一行实验"""
    family: str
    structure: str
    delta: int
    iterations: str

    @property
    def model_name(self) -> str:
        return DISPLAY_NAMES[ModelFamily.parse(self.family)]

    def directory_name(self, index: int) -> str:
        return f"{index:02d}_{self.family}_d{self.delta}"


TABLE1_ROWS: Tuple[GridRow, ...] = (
    GridRow("vanilla", "(1,14)", 1, "1000"),
    GridRow("vanilla", "(1,15)", 5, "1000"),
    GridRow("vanilla", "(1,20)", 50, "2000"),
    GridRow("vanilla", "(1,20)", 75, "1000"),
    GridRow("stacked", "(3,9,8,3)", 1, "1000"),
    GridRow("stacked", "(3,15-8-5)", 5, "500"),
    GridRow("stacked", "(3,15-8-5)", 50, "500"),
    GridRow("stacked", "(3,20,4,2)", 75, "500"),
    GridRow("bidirectional", "(1,28)", 1, "1000"),
    GridRow("bidirectional", "(1,28)", 5, "500"),
    GridRow("bidirectional", "(1,28)", 50, "500"),
    GridRow("bidirectional", "(1,28)", 75, "500"),
    GridRow("eids", "((1,6),(1,5),(1,7))", 1, "(100,150,400)"),
    GridRow("eids", "((1,6),(1,5),(1,8))", 5, "(100,100,100)"),
    GridRow("eids", "((1,6),(1,5),(1,8))", 50, "(100,100,100)"),
    GridRow("eids", "((1,6),(1,5),(1,8))", 75, "(100,100,100)"),
)


def table1_grid() -> Tuple[GridRow, ...]:
    return TABLE1_ROWS


def fig3_grid() -> Tuple[GridRow, ...]:
    """table1 中 Δ=1 的四行（结构与迭代次数沿用）"""
    return tuple(row for row in TABLE1_ROWS if row.delta == 1)


@dataclass(frozen=True)
class RowFailure:
    """失败行的可序列化摘要"""
    row: int
    stage: str
    error_type: str
    message: str

    @classmethod
    def from_error(cls, error: PipelineError, row: int) -> "RowFailure":
        return cls(row, error.stage, type(error.cause).__name__, str(error.cause))

    def to_json_line(self) -> str:
        return json.dumps({
            "error": {"row": self.row, "stage": self.stage, "type": self.error_type, "message": self.message}
        }, ensure_ascii=False)


@dataclass(frozen=True)
class RowOutcome:
    """一行的结果：report 与 failure 二者必有其一"""
    index: int
    row: GridRow
    report: Optional[MetricsReport]
    logs: Tuple[Tuple[str, ConvergenceLog], ...]
    failure: Optional[RowFailure]

    @property
    def ok(self) -> bool:
        return self.failure is None


@dataclass(frozen=True)
class GridResult:
    outcomes: Tuple[RowOutcome, ...]
    summary_csv: Path
    summary_txt: Path

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes)

    @property
    def first_failure(self) -> Optional[RowFailure]:
        return next((o.failure for o in self.outcomes if o.failure is not None), None)


def row_config(cfg: ExperimentConfig, row: GridRow) -> ExperimentConfig:
    """由共享配置派生一行的配置"""
    derived = with_overrides(
        cfg,
        model_family=row.family,
        model=row.structure,
        delta=row.delta,
        iterations=row.iterations,
        preset="",
    )
    return derived


def _run_row(args: Tuple[int, GridRow, ExperimentConfig, TimeSeries, Path]) -> RowOutcome:
    index, row, cfg, series, out_dir = args
    logger.info(f"[{index:02d}] {row.model_name} {row.structure} Δ={row.delta} 开始")
    try:
        try:
            derived = row_config(cfg, row)
        except Exception as e:
            raise PipelineError("config", e, index) from e
        result = run_experiment(derived, series=series, out_dir=out_dir, row=index)
    except PipelineError as error:
        logger.warning(f"[{index:02d}] {row.model_name} Δ={row.delta} 失败: {error}")
        return RowOutcome(index, row, None, (), RowFailure.from_error(error, index))
    return RowOutcome(index, row, result.report, result.logs, None)


def _summary_rows(outcomes: Sequence[RowOutcome]) -> List[Tuple[str, ...]]:
    rows = []
    for o in outcomes:
        rmse = format_float(o.report.rmse) if o.ok else ""
        mae = format_float(o.report.mae) if o.ok else ""
        rows.append((o.row.model_name, o.row.structure, str(o.row.delta), rmse, mae, o.row.iterations))
    return rows


def render_summary(outcomes: Sequence[RowOutcome], title: str = "") -> str:
    """用 rich 渲染对齐的汇总表（纯文本）"""
    table = Table(title=title or None, show_header=True, header_style="bold cyan")
    table.add_column(SUMMARY_COLUMNS[0], style="bold")
    table.add_column(SUMMARY_COLUMNS[1])
    table.add_column(SUMMARY_COLUMNS[2], justify="right")
    table.add_column(SUMMARY_COLUMNS[3], justify="right")
    table.add_column(SUMMARY_COLUMNS[4], justify="right")
    table.add_column(SUMMARY_COLUMNS[5], justify="right")
    for o in outcomes:
        if o.ok:
            rmse, mae = f"{o.report.rmse:.4f}", f"{o.report.mae:.4f}"
        else:
            rmse = mae = f"失败 ({o.failure.stage})"
        table.add_row(o.row.model_name, o.row.structure, str(o.row.delta), rmse, mae, o.row.iterations)

    console = Console(file=io.StringIO(), record=True, width=120)
    console.print(table)
    return console.export_text()


def run_grid(
    cfg: ExperimentConfig,
    grid: Sequence[GridRow],
    workers: int = 1,
    combine_convergence: bool = False,
    out_dir: Optional[Union[str, Path]] = None,
) -> GridResult:
    """
    运行网格中的每一行并写出汇总

    Args:
        cfg: 共享配置（数据源、切分、batch、lr、seed）
        grid: 实验行
        workers: 并行进程数，1 表示顺序执行
        combine_convergence: 是否写出合并的 convergence.csv 与 convergence_summary.csv
        out_dir: 输出根目录，默认 cfg.output.out

    Returns:
        GridResult；失败行会被记录，其余行照常运行
    """
    out = Path(out_dir if out_dir is not None else cfg.output.out)
    if not grid:
        raise ValueError("网格为空")

    # 共享序列，长度覆盖最大 Δ
    longest = required_series_length(with_overrides(cfg, delta=max(row.delta for row in grid)))
    try:
        series = load_series(cfg, length=longest)
    except Exception as e:
        raise PipelineError("load", e) from e

    jobs = [
        (index, row, cfg, series, out / "rows" / row.directory_name(index))
        for index, row in enumerate(grid, start=1)
    ]
    logger.info(f"网格共 {len(jobs)} 行，并行进程数 {workers}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_row, jobs))
    else:
        outcomes = [_run_row(job) for job in jobs]

    summary_csv = out / "summary.csv"
    summary_txt = out / "summary.txt"
    write_text_atomic(summary_csv, csv_text(SUMMARY_COLUMNS, _summary_rows(outcomes)))
    write_text_atomic(summary_txt, render_summary(outcomes))

    if combine_convergence:
        logs = [entry for o in outcomes if o.ok for entry in o.logs]
        if logs:
            emit_convergence_csv(logs, out / "convergence.csv")
            write_convergence_summary(summarize_convergence(logs), out / "convergence_summary.csv")

    failed = sum(1 for o in outcomes if not o.ok)
    logger.info(f"网格完成: 成功 {len(outcomes) - failed} 行，失败 {failed} 行")
    return GridResult(tuple(outcomes), summary_csv, summary_txt)


def run_preset(cfg: ExperimentConfig, name: str, workers: int = 1) -> GridResult:
    """
    运行内置预设

    fig3 使用 7000 个训练样本（测试集大小不变），并写出合并的收敛曲线。
    """
    if name == "table1":
        return run_grid(cfg, table1_grid(), workers=workers)
    if name == "fig3":
        return run_grid(with_overrides(cfg, train_n=FIG3_TRAIN_N), fig3_grid(),
                        workers=workers, combine_convergence=True)
    raise ValueError(f"未知的 preset: {name}")
