"""
配置管理模块

提供实验配置的默认值定义、config.ini 加载、命令行覆盖与配置验证功能。
"""

from src.config.defaults import (
    DEFAULT_CONFIG,
    ExperimentConfig,
    DataConfig,
    EmbeddingConfig,
    SplitConfig,
    ModelConfig,
    TrainingConfig,
    OutputConfig,
    LogConfig,
)
from src.config.loader import (
    PRESETS,
    ConfigError,
    load_config,
    validate_config,
    parse_iterations,
    experiment_model_spec,
    config_echo,
    with_overrides,
)

__all__ = [
    # 导出默认配置
    'DEFAULT_CONFIG',
    # 导出配置类
    'ExperimentConfig',
    'DataConfig',
    'EmbeddingConfig',
    'SplitConfig',
    'ModelConfig',
    'TrainingConfig',
    'OutputConfig',
    'LogConfig',
    # 导出加载函数
    'PRESETS',
    'ConfigError',
    'load_config',
    'validate_config',
    'parse_iterations',
    'experiment_model_spec',
    'config_echo',
    'with_overrides',
]
