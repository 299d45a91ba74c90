"""
训练循环

一次迭代 = 对训练集的一个完整 epoch：带种子的洗牌、小批量、批内 MSE 均值梯度（BPTT）、
Adam 更新；epoch 结束后记录整个训练集上的 MSE。没有早停和学习率调度。

EiDS 按阶段依次训练：
    阶段 a  只训练 sub_a，目标为 y
    阶段 b  冻结 sub_a，只训练 sub_b，目标为 y
    阶段 c  冻结 sub_a、sub_b，只训练 sub_c，目标为残差 ŷ_b - y
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from src.models.forecaster import (
    Forecaster,
    subnet_outputs,
    windows_to_sequence,
    with_broadcast_inputs,
)
from src.models.spec import EIDS_STAGES
from src.nn.adam import AdamHyper, AdamState, adam_step
from src.nn.gradcheck import DEFAULT_EPSILON, finite_difference_gradients, max_relative_error
from src.nn.lstm import (
    GradientSet,
    NetworkParams,
    lstm_backward_bptt,
    lstm_backward_with_inputs,
    network_forward,
)
from src.nn.prng import Prng
from src.series.embedding import StateVectorPair, SupervisedDataset

logger = logging.getLogger(__name__)


class TrainingError(ValueError):
    """训练参数或调用方式不合法"""


class DivergenceError(RuntimeError):
    """训练损失变为非有限值"""

    def __init__(self, epoch: int, stage: Optional[str] = None):
        where = f"阶段 {stage}, " if stage else ""
        super().__init__(f"训练发散 ({where}epoch {epoch})")
        self.epoch = epoch
        self.stage = stage


@dataclass(frozen=True)
class TrainConfig:
    """训练配置"""
    iterations: int  # epoch 数
    batch_size: int = 32
    hyper: AdamHyper = field(default_factory=AdamHyper)
    seed: int = 1  # 洗牌种子
    shuffle: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise TrainingError(f"iterations 必须 >= 1: {self.iterations}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size 必须 >= 1: {self.batch_size}")


@dataclass(frozen=True)
class ConvergenceLog:
    """每个 epoch 结束后的训练集 MSE"""
    entries: Tuple[Tuple[int, float], ...]
    stage_label: Optional[str] = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[int, float]]:
        return iter(self.entries)

    @property
    def losses(self) -> Tuple[float, ...]:
        return tuple(loss for _, loss in self.entries)


@dataclass(frozen=True)
class EidsIterationTriple:
    """EiDS 三个阶段各自的 epoch 数"""
    n_a: int
    n_b: int
    n_c: int

    def __post_init__(self):
        if min(self.n_a, self.n_b, self.n_c) < 1:
            raise TrainingError(f"各阶段迭代数必须 >= 1: {self.as_tuple()}")

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.n_a, self.n_b, self.n_c)

    @classmethod
    def parse(cls, text: str) -> "EidsIterationTriple":
        """解析 "(100,150,400)" 记法"""
        match = re.fullmatch(r"\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*", text)
        if not match:
            raise TrainingError(f"迭代三元组格式应为 (a,b,c): {text!r}")
        return cls(*(int(v) for v in match.groups()))

    def __str__(self) -> str:
        return f"({self.n_a},{self.n_b},{self.n_c})"


@dataclass(frozen=True)
class StageSchedule:
    """
    EiDS 阶段计划

    base 提供批大小、优化器与种子；overrides 可为每个阶段单独替换 TrainConfig 字段。
    """
    triple: EidsIterationTriple
    base: TrainConfig
    overrides: Tuple[Dict[str, object], ...] = ({}, {}, {})

    def __post_init__(self):
        if len(self.overrides) != 3:
            raise TrainingError("StageSchedule 需要恰好三个阶段")

    def config_for(self, stage_index: int) -> TrainConfig:
        iterations = self.triple.as_tuple()[stage_index]
        return replace(self.base, iterations=iterations, **self.overrides[stage_index])


def loss_mse(predictions, targets) -> float:
    """残差平方的均值"""
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    t = np.asarray(targets, dtype=np.float64).reshape(-1)
    if p.size != t.size:
        raise TrainingError(f"预测与目标长度不一致: {p.size} vs {t.size}")
    if p.size == 0:
        raise TrainingError("预测与目标为空")
    residual = p - t
    return float(np.mean(residual * residual))


def _fit_network(
    network: NetworkParams,
    sequence: np.ndarray,
    targets: np.ndarray,
    cfg: TrainConfig,
    stage: Optional[str],
) -> Tuple[NetworkParams, ConvergenceLog]:
    count = targets.shape[0]
    rng = Prng(cfg.seed)
    opt = AdamState.initial(network, cfg.hyper)
    entries = []

    for epoch in range(1, cfg.iterations + 1):
        order = rng.permutation(count) if cfg.shuffle else np.arange(count)
        for start in range(0, count, cfg.batch_size):
            batch = order[start: start + cfg.batch_size]
            prediction, cache = network_forward(network, sequence[:, batch, :])
            d_prediction = 2.0 * (prediction - targets[batch]) / batch.size
            grads = lstm_backward_bptt(cache, d_prediction)
            network, opt = adam_step(network, grads, opt)

        full_prediction, _ = network_forward(network, sequence)
        loss = loss_mse(full_prediction, targets)
        if not math.isfinite(loss):
            raise DivergenceError(epoch, stage)
        entries.append((epoch, loss))
        logger.debug(f"epoch {epoch}/{cfg.iterations}{' [' + stage + ']' if stage else ''}: MSE {loss:.6g}")

    return network, ConvergenceLog(tuple(entries), stage)


def stage_problem(f: Forecaster, dataset: SupervisedDataset, stage_index: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    某个子网络的训练输入序列与目标

    Returns:
        (序列 (D, N, in), 目标 (N,))：阶段 c 的目标是残差 ŷ_b - y
    """
    sequence = windows_to_sequence(dataset.inputs)
    targets = dataset.targets
    if not f.is_eids or stage_index == 0:
        return sequence, targets
    y_a, _ = network_forward(f.subnets[0], sequence)
    input_b = with_broadcast_inputs(sequence, [y_a])
    if stage_index == 1:
        return input_b, targets
    y_b, _ = network_forward(f.subnets[1], input_b)
    return with_broadcast_inputs(sequence, [y_a, y_b]), y_b - targets


def _stage_index(f: Forecaster, stage: Optional[str]) -> int:
    if not f.is_eids:
        if stage is not None:
            raise TrainingError(f"基线模型没有阶段: {stage}")
        return 0
    if stage not in EIDS_STAGES:
        raise TrainingError(f"EiDS 需要指定阶段 {EIDS_STAGES}，实际 {stage!r}")
    index = EIDS_STAGES.index(stage)
    if not all(f.stage_trained[:index]):
        raise TrainingError(f"阶段 {stage} 之前的阶段尚未训练")
    return index


def train(
    f: Forecaster, train_set: SupervisedDataset, cfg: TrainConfig, stage: Optional[str] = None
) -> Tuple[Forecaster, ConvergenceLog]:
    """
    训练基线模型，或 EiDS 的一个指定阶段

    Args:
        f: 预测器
        train_set: 标准化后的训练集
        cfg: 训练配置
        stage: EiDS 阶段 "a" / "b" / "c"；基线模型必须为 None

    Returns:
        (训练后的新预测器, 收敛日志)

    Raises:
        TrainingError: 数据集为空或阶段不合法
        DivergenceError: 损失变为非有限值
    """
    if len(train_set) == 0:
        raise TrainingError("训练集为空")
    index = _stage_index(f, stage)
    sequence, targets = stage_problem(f, train_set, index)
    network, log = _fit_network(f.subnets[index], sequence, targets, cfg, stage)
    return f.with_subnet(index, network, trained=True), log


def train_eids_staged(
    f: Forecaster, train_set: SupervisedDataset, schedule: StageSchedule
) -> Tuple[Forecaster, Tuple[ConvergenceLog, ConvergenceLog, ConvergenceLog]]:
    """按 a -> b -> c 的顺序依次训练 EiDS 三个子网络"""
    if not f.is_eids:
        raise TrainingError(f"分阶段训练只适用于 EiDS，实际 {f.spec.family.value}")
    logs = []
    for index, stage in enumerate(EIDS_STAGES):
        cfg = schedule.config_for(index)
        logger.info(f"EiDS 阶段 {stage}: {cfg.iterations} 个 epoch")
        f, log = train(f, train_set, cfg, stage)
        logger.info(f"EiDS 阶段 {stage} 完成: 最终 MSE {log.losses[-1]:.6g}")
        logs.append(log)
    return f, tuple(logs)


def _default_check_stage(f: Forecaster) -> Optional[str]:
    if not f.is_eids:
        return None
    for stage, trained in zip(EIDS_STAGES, f.stage_trained):
        if not trained:
            return stage
    return "composite"


def pair_loss(f: Forecaster, pair: StateVectorPair, stage: Optional[str] = None) -> float:
    """
    单个样本上指定阶段的平方误差

    stage 为 None（基线）、"a"、"b"、"c" 或 "composite"（(ŷ_b - ŷ_c - y)²）。
    """
    windows = np.asarray(pair.inputs, dtype=np.float64)[None, :]
    outputs = [float(v[0]) for v in subnet_outputs(f, windows)]
    y = float(pair.target)
    if stage is None:
        error = outputs[0] - y
    elif stage == "a":
        error = outputs[0] - y
    elif stage == "b":
        error = outputs[1] - y
    elif stage == "c":
        error = outputs[2] - (outputs[1] - y)
    elif stage == "composite":
        error = outputs[1] - outputs[2] - y
    else:
        raise TrainingError(f"未知阶段: {stage}")
    return error * error


def model_gradients(
    f: Forecaster, pair: StateVectorPair, stage: Optional[str] = None
) -> Dict[int, GradientSet]:
    """
    BPTT 求出的样本损失梯度，只包含该阶段可训练的子网络

    "composite" 时三个子网络都可训练，梯度经过 ŷ_a、ŷ_b 的广播输入路径回传。
    """
    sequence = windows_to_sequence(np.asarray(pair.inputs, dtype=np.float64)[None, :])
    y = np.array([float(pair.target)])

    if not f.is_eids:
        if stage is not None:
            raise TrainingError(f"基线模型没有阶段: {stage}")
        prediction, cache = network_forward(f.subnets[0], sequence)
        return {0: lstm_backward_bptt(cache, 2.0 * (prediction - y))}

    y_a, cache_a = network_forward(f.subnets[0], sequence)
    y_b, cache_b = network_forward(f.subnets[1], with_broadcast_inputs(sequence, [y_a]))
    y_c, cache_c = network_forward(f.subnets[2], with_broadcast_inputs(sequence, [y_a, y_b]))

    if stage == "a":
        return {0: lstm_backward_bptt(cache_a, 2.0 * (y_a - y))}
    if stage == "b":
        return {1: lstm_backward_bptt(cache_b, 2.0 * (y_b - y))}
    if stage == "c":
        return {2: lstm_backward_bptt(cache_c, 2.0 * (y_c - (y_b - y)))}
    if stage != "composite":
        raise TrainingError(f"未知阶段: {stage}")

    error = y_b - y_c - y
    grads_c, d_input_c = lstm_backward_with_inputs(cache_c, -2.0 * error)
    d_y_b = 2.0 * error + d_input_c[:, :, 2].sum(axis=0)
    grads_b, d_input_b = lstm_backward_with_inputs(cache_b, d_y_b)
    d_y_a = d_input_b[:, :, 1].sum(axis=0) + d_input_c[:, :, 1].sum(axis=0)
    grads_a = lstm_backward_bptt(cache_a, d_y_a)
    return {0: grads_a, 1: grads_b, 2: grads_c}


def gradient_check_model(
    f: Forecaster,
    pair: StateVectorPair,
    epsilon: float = DEFAULT_EPSILON,
    stage: Optional[str] = None,
) -> float:
    """
    比较 BPTT 梯度与中心差分梯度

    EiDS 未指定 stage 时检查第一个未训练的阶段，全部训练完则检查 composite。

    Returns:
        可训练参数上的最大相对误差
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon 必须为正: {epsilon}")
    if stage is None:
        stage = _default_check_stage(f)

    analytic = model_gradients(f, pair, stage)
    worst = 0.0
    for index, grads in analytic.items():
        numeric = finite_difference_gradients(
            lambda net, k=index: pair_loss(f.with_subnet(k, net), pair, stage),
            f.subnets[index],
            epsilon,
        )
        worst = max(worst, max_relative_error(grads, numeric))
    logger.debug(f"梯度校验 (阶段 {stage}): 最大相对误差 {worst:.3g}")
    return worst
