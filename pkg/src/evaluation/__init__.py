"""
评估模块

包含原始单位下的 RMSE/MAE 计算，以及预测记录、收敛曲线等绘图数据文件的读写。
"""

from src.evaluation.metrics import (
    MetricsError,
    Predictor,
    ReportMeta,
    MetricsReport,
    compute_metrics,
    evaluate,
)
from src.evaluation.artifacts import (
    TRACE_COLUMNS,
    CONVERGENCE_COLUMNS,
    format_float,
    write_text_atomic,
    TraceRow,
    PredictionTrace,
    emit_prediction_trace,
    read_prediction_trace,
    ConvergenceRow,
    convergence_rows,
    emit_convergence_csv,
    read_convergence_csv,
    ConvergenceSummary,
    summarize_convergence,
    write_convergence_summary,
    emit_embedding_csv,
)

__all__ = [
    'MetricsError',
    'Predictor',
    'ReportMeta',
    'MetricsReport',
    'compute_metrics',
    'evaluate',
    'TRACE_COLUMNS',
    'CONVERGENCE_COLUMNS',
    'format_float',
    'write_text_atomic',
    'TraceRow',
    'PredictionTrace',
    'emit_prediction_trace',
    'read_prediction_trace',
    'ConvergenceRow',
    'convergence_rows',
    'emit_convergence_csv',
    'read_convergence_csv',
    'ConvergenceSummary',
    'summarize_convergence',
    'write_convergence_summary',
    'emit_embedding_csv',
]
