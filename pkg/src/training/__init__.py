"""
训练模块

包含小批量训练循环、EiDS 分阶段训练、收敛日志与模型级梯度校验。
"""

from src.training.trainer import (
    TrainingError,
    DivergenceError,
    TrainConfig,
    ConvergenceLog,
    EidsIterationTriple,
    StageSchedule,
    loss_mse,
    stage_problem,
    train,
    train_eids_staged,
    pair_loss,
    model_gradients,
    gradient_check_model,
)

__all__ = [
    'TrainingError',
    'DivergenceError',
    'TrainConfig',
    'ConvergenceLog',
    'EidsIterationTriple',
    'StageSchedule',
    'loss_mse',
    'stage_problem',
    'train',
    'train_eids_staged',
    'pair_loss',
    'model_gradients',
    'gradient_check_model',
]
