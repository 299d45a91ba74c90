"""
单次实验流水线

加载/生成序列 -> 嵌入 -> 切分 -> 在训练集上拟合标准化 -> 构建模型 -> 训练（EiDS 分阶段）
-> 评估 -> 写出 metrics.json / trace.csv / convergence.csv。
任一步失败都会被包装为带阶段名的 PipelineError。
"""

import json
import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

from src.config.defaults import ExperimentConfig
from src.config.loader import config_echo, experiment_model_spec, parse_iterations
from src.evaluation.artifacts import (
    emit_convergence_csv,
    emit_embedding_csv,
    emit_prediction_trace,
    write_text_atomic,
)
from src.evaluation.metrics import MetricsReport, ReportMeta, evaluate
from src.models.forecaster import Forecaster, build_forecaster, param_count
from src.nn.adam import AdamHyper
from src.nn.prng import Prng
from src.series.csv_loader import load_csv_file
from src.series.embedding import EmbeddingSpec, embed, split_train_test
from src.series.generators import generate_series
from src.series.normalizer import fit_normalizer
from src.series.timeseries import TimeSeries
from src.training.trainer import (
    ConvergenceLog,
    EidsIterationTriple,
    StageSchedule,
    TrainConfig,
    train,
    train_eids_staged,
)

logger = logging.getLogger(__name__)

PIPELINE_STAGES = ("config", "load", "embed", "split", "normalize", "build", "train", "evaluate", "emit")

METRICS_FILE = "metrics.json"
TRACE_FILE = "trace.csv"
CONVERGENCE_FILE = "convergence.csv"
EMBEDDING_FILE = "embedding.csv"


class PipelineError(RuntimeError):
    """流水线某一阶段失败，cause 为原始异常"""

    def __init__(self, stage: str, cause: BaseException, row: Optional[int] = None):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.row = row

    def to_json_line(self) -> str:
        """命令行在 stderr 上输出的机器可读错误行"""
        return json.dumps({
            "error": {
                "row": self.row,
                "stage": self.stage,
                "type": type(self.cause).__name__,
                "message": str(self.cause),
            }
        }, ensure_ascii=False)


@contextmanager
def pipeline_stage(stage: str, row: Optional[int] = None) -> Iterator[None]:
    """把阶段内抛出的异常包装为 PipelineError"""
    logger.debug(f"流水线阶段: {stage}")
    try:
        yield
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(stage, e, row) from e


@dataclass(frozen=True)
class ExperimentResult:
    """一次实验的结果"""
    report: MetricsReport
    param_count: int
    logs: Tuple[Tuple[str, ConvergenceLog], ...]
    wall_clock_seconds: float
    forecaster: Forecaster = field(repr=False)
    paths: Dict[str, Path] = field(default_factory=dict)


def required_series_length(cfg: ExperimentConfig) -> int:
    """生成序列所需的最少样本数：D·Δ + n_train + n_test"""
    span = cfg.embedding.embed_dim * cfg.embedding.delta
    return span + cfg.split.train_n + cfg.split.test_n


def load_series(cfg: ExperimentConfig, length: Optional[int] = None) -> TimeSeries:
    """
    读取 CSV 或生成合成序列

    Args:
        cfg: 实验配置
        length: 合成序列长度，默认为 required_series_length(cfg)
    """
    data = cfg.data
    if data.data:
        logger.info(f"读取 CSV: {data.data}")
        return load_csv_file(data.data, sample_period=data.sample_period)
    n = length if length is not None else required_series_length(cfg)
    logger.info(f"生成合成序列: {data.synthetic}, {n} 个样本")
    return generate_series(
        data.synthetic,
        n,
        history=data.history,
        component=data.lorenz_component,
        transient=data.transient,
        sample_period=data.sample_period,
    )


def _metrics_payload(result_report: MetricsReport, n_params: int, cfg: ExperimentConfig, seconds: float) -> str:
    payload = dict(result_report.to_dict())
    payload["param_count"] = n_params
    payload["config"] = config_echo(cfg)
    payload["wall_clock_seconds"] = seconds
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def run_experiment(
    cfg: ExperimentConfig,
    series: Optional[TimeSeries] = None,
    out_dir: Optional[Union[str, Path]] = None,
    row: Optional[int] = None,
) -> ExperimentResult:
    """
    运行一次完整实验并写出结果文件

    Args:
        cfg: 已验证的实验配置
        series: 预先加载的序列（网格共享数据时使用），None 时按配置加载或生成
        out_dir: 输出目录，默认 cfg.output.out
        row: 网格行号，仅用于错误标记

    Returns:
        ExperimentResult

    Raises:
        PipelineError: 带失败阶段与行号
    """
    out = Path(out_dir if out_dir is not None else cfg.output.out)
    started = time.perf_counter()

    with pipeline_stage("config", row):
        spec = experiment_model_spec(cfg)
        iterations = parse_iterations(cfg.training.iterations, spec.family)

    with pipeline_stage("load", row):
        if series is None:
            series = load_series(cfg)

    with pipeline_stage("embed", row):
        dataset = embed(series, EmbeddingSpec(cfg.embedding.embed_dim, cfg.embedding.delta))

    with pipeline_stage("split", row):
        train_raw, test_raw = split_train_test(dataset, cfg.split.train_n, cfg.split.test_n)

    with pipeline_stage("normalize", row):
        stats = fit_normalizer(train_raw)
        train_set = stats.apply_dataset(train_raw)
        test_set = stats.apply_dataset(test_raw)

    with pipeline_stage("build", row):
        forecaster = build_forecaster(spec, cfg.embedding.embed_dim, Prng(cfg.training.seed))
        n_params = param_count(spec, cfg.embedding.embed_dim)
        logger.info(f"模型: {spec.display_name} {cfg.model.model}, 参数量 {n_params}")

    with pipeline_stage("train", row):
        hyper = AdamHyper(lr=cfg.training.lr)
        label = spec.display_name
        if isinstance(iterations, EidsIterationTriple):
            base = TrainConfig(iterations=iterations.n_a, batch_size=cfg.training.batch,
                               hyper=hyper, seed=cfg.training.seed)
            forecaster, stage_logs = train_eids_staged(forecaster, train_set, StageSchedule(iterations, base))
            logs: List[Tuple[str, ConvergenceLog]] = [(label, log) for log in stage_logs]
        else:
            train_cfg = TrainConfig(iterations=iterations, batch_size=cfg.training.batch,
                                    hyper=hyper, seed=cfg.training.seed)
            forecaster, log = train(forecaster, train_set, train_cfg)
            logs = [(label, log)]

    with pipeline_stage("evaluate", row):
        meta = ReportMeta(
            model_name=spec.display_name,
            structure=cfg.model.model.strip(),
            horizon=cfg.embedding.delta,
            iterations=str(iterations),
            n_train=cfg.split.train_n,
            seed=cfg.training.seed,
        )
        report = evaluate(forecaster, test_set, stats, meta)

    seconds = time.perf_counter() - started

    with pipeline_stage("emit", row):
        paths = {
            "metrics": out / METRICS_FILE,
            "trace": out / TRACE_FILE,
            "convergence": out / CONVERGENCE_FILE,
        }
        emit_prediction_trace(forecaster, train_set, test_set, stats, paths["trace"])
        emit_convergence_csv(logs, paths["convergence"])
        if cfg.output.emit_embedding:
            paths["embedding"] = out / EMBEDDING_FILE
            emit_embedding_csv(dataset, paths["embedding"])
        write_text_atomic(paths["metrics"], _metrics_payload(report, n_params, cfg, seconds))
        logger.info(f"结果已写出: {out}")

    return ExperimentResult(
        report=report,
        param_count=n_params,
        logs=tuple(logs),
        wall_clock_seconds=seconds,
        forecaster=forecaster,
        paths=paths,
    )
