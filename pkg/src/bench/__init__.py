"""
实验运行模块

单次实验流水线、实验网格与 table1 / fig3 内置预设。
"""

from src.bench.runner import (
    PIPELINE_STAGES,
    PipelineError,
    ExperimentResult,
    pipeline_stage,
    required_series_length,
    load_series,
    run_experiment,
)
from src.bench.grid import (
    SUMMARY_COLUMNS,
    FIG3_TRAIN_N,
    GridRow,
    RowFailure,
    RowOutcome,
    GridResult,
    table1_grid,
    fig3_grid,
    row_config,
    render_summary,
    run_grid,
    run_preset,
)

__all__ = [
    'PIPELINE_STAGES',
    'PipelineError',
    'ExperimentResult',
    'pipeline_stage',
    'required_series_length',
    'load_series',
    'run_experiment',
    'SUMMARY_COLUMNS',
    'FIG3_TRAIN_N',
    'GridRow',
    'RowFailure',
    'RowOutcome',
    'GridResult',
    'table1_grid',
    'fig3_grid',
    'row_config',
    'render_summary',
    'run_grid',
    'run_preset',
]
