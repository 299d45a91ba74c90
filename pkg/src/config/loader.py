"""
配置加载器

从 config.ini 读取实验配置，按 默认值 < 配置文件 < 命令行参数 的顺序合并。
[experiment] 节的键名与命令行长参数相同（如 embed-dim、train-n），[log] 节为日志配置。
实验配置中的未知键直接报错。
"""

import configparser
import copy
import logging
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from src.config.defaults import ExperimentConfig
from src.models.spec import ModelFamily, ModelSpec, ModelSpecError, parse_model_spec
from src.series.generators import SYNTHETIC_SOURCES
from src.training.trainer import EidsIterationTriple, TrainingError

logger = logging.getLogger(__name__)

PRESETS = ("table1", "fig3")
LORENZ_COMPONENTS = ("x", "y", "z")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

# 不写入 metrics.json 配置回显的键（只影响输出位置与执行方式）
_NON_ECHO_KEYS = ("out", "preset", "workers")


class ConfigError(ValueError):
    """配置不合法：未知键、数据源冲突、缺少必填项或数值无法解析"""


def _parse_bool(value: str) -> bool:
    """解析布尔值"""
    lowered = value.strip().lower()
    if lowered in ('true', 'yes', '1', 'on'):
        return True
    if lowered in ('false', 'no', '0', 'off'):
        return False
    raise ValueError(f"不是布尔值: {value!r}")


# 键名 -> (ExperimentConfig 子配置名, 字段名, 文本解析函数)
_EXPERIMENT_KEYS: Dict[str, Tuple[str, str, Callable[[str], Any]]] = {
    'data': ('data', 'data', str),
    'synthetic': ('data', 'synthetic', str),
    'sample-period': ('data', 'sample_period', float),
    'history': ('data', 'history', float),
    'transient': ('data', 'transient', int),
    'lorenz-component': ('data', 'lorenz_component', str),
    'embed-dim': ('embedding', 'embed_dim', int),
    'delta': ('embedding', 'delta', int),
    'train-n': ('split', 'train_n', int),
    'test-n': ('split', 'test_n', int),
    'model-family': ('model', 'model_family', str),
    'model': ('model', 'model', str),
    'iterations': ('training', 'iterations', str),
    'batch': ('training', 'batch', int),
    'lr': ('training', 'lr', float),
    'seed': ('training', 'seed', int),
    'out': ('output', 'out', str),
    'preset': ('output', 'preset', str),
    'emit-embedding': ('output', 'emit_embedding', _parse_bool),
    'workers': ('output', 'workers', int),
}

_LOG_KEYS: Dict[str, Callable[[str], Any]] = {
    'level': lambda v: v.strip().upper(),
    'enable_console': _parse_bool,
    'enable_file': _parse_bool,
    'file_path': str,
}


def _split_model_value(value: str) -> Tuple[Optional[str], str]:
    """
    拆分 "--model" 的值

    支持 "(1,14)" 与 "vanilla (1,14)" 两种写法，后者同时给出模型族。
    """
    text = value.strip()
    head, _, rest = text.partition(" ")
    if rest and not head.startswith("("):
        return head, rest.strip()
    return None, text


def _assign(cfg: ExperimentConfig, key: str, value: Any, origin: str):
    if key not in _EXPERIMENT_KEYS:
        raise ConfigError(f"{origin}: 未知的配置键 {key!r}")
    section, name, parse = _EXPERIMENT_KEYS[key]
    target = getattr(cfg, section)

    if isinstance(value, str):
        try:
            value = parse(value.strip())
        except ValueError as e:
            raise ConfigError(f"{origin}: {key} 的值无法解析: {value!r} ({e})") from None
    elif parse is str:
        value = str(value)

    if key == 'model':
        family, value = _split_model_value(value)
        if family is not None:
            cfg.model.model_family = family
    setattr(target, name, value)


def _apply_file(cfg: ExperimentConfig, config_path: Path):
    if not config_path.exists():
        raise ConfigError(f"配置文件不存在: {config_path}")

    # 禁用插值，允许值中出现 % 符号
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(config_path, encoding='utf-8')
    except configparser.Error as e:
        raise ConfigError(f"配置文件解析失败: {e}") from e

    if parser.defaults():
        raise ConfigError(f"{config_path}: 不支持 [DEFAULT] 节")
    for section in parser.sections():
        if section not in ('experiment', 'log'):
            raise ConfigError(f"{config_path}: 未知的配置节 [{section}]")

    if parser.has_section('experiment'):
        for key, value in parser.items('experiment'):
            _assign(cfg, key, value, str(config_path))

    if parser.has_section('log'):
        for key, value in parser.items('log'):
            if key not in _LOG_KEYS:
                raise ConfigError(f"{config_path}: [log] 未知的配置键 {key!r}")
            try:
                setattr(cfg.log, key, _LOG_KEYS[key](value))
            except ValueError as e:
                raise ConfigError(f"{config_path}: [log] {key} 的值无法解析: {value!r} ({e})") from None


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    加载并校验实验配置

    Args:
        path: 配置文件路径，None 表示只用默认值与 overrides
        overrides: 命令行参数，键为长参数名（如 "embed-dim"），值为 None 表示未指定

    Returns:
        ExperimentConfig: 完整解析后的配置

    Raises:
        ConfigError: 未知键、数据源冲突、缺少必填项或数值不合法
    """
    cfg = ExperimentConfig()

    if path is not None:
        _apply_file(cfg, Path(path))
        logger.info(f"配置加载成功: {path}")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        _assign(cfg, key, value, "命令行参数")

    # 内置网格默认使用合成 Mackey-Glass 序列
    if cfg.output.preset and not cfg.data.data and not cfg.data.synthetic:
        cfg.data.synthetic = "mackey-glass"

    validate_config(cfg)
    return cfg


def parse_iterations(text: str, family: ModelFamily) -> Union[int, EidsIterationTriple]:
    """
    解析迭代次数

    EiDS 接受 "(a,b,c)" 或单个 N（视为 (N,N,N)）；基线模型只接受单个 N。
    """
    text = str(text).strip()
    if not text:
        raise ConfigError("缺少 iterations")
    if text.startswith("("):
        if family is not ModelFamily.EIDS:
            raise ConfigError(f"{family.value} 只接受单个迭代次数，实际 {text!r}")
        try:
            return EidsIterationTriple.parse(text)
        except TrainingError as e:
            raise ConfigError(str(e)) from None
    if not text.isdigit() or int(text) < 1:
        raise ConfigError(f"iterations 必须为正整数: {text!r}")
    n = int(text)
    if family is ModelFamily.EIDS:
        return EidsIterationTriple(n, n, n)
    return n


def experiment_model_spec(cfg: ExperimentConfig) -> ModelSpec:
    """按配置解析模型结构"""
    try:
        return parse_model_spec(cfg.model.model, cfg.model.model_family)
    except ModelSpecError as e:
        raise ConfigError(str(e)) from None


def validate_config(config: ExperimentConfig):
    """
    验证配置是否有效

    Args:
        config: 配置对象

    Raises:
        ConfigError: 第一个不满足的约束
    """
    data = config.data
    if data.data and data.synthetic:
        raise ConfigError("data 与 synthetic 不能同时指定")
    if not data.data and not data.synthetic:
        raise ConfigError("缺少数据源：请指定 data 或 synthetic")
    if data.synthetic and data.synthetic not in SYNTHETIC_SOURCES:
        raise ConfigError(f"未知的合成序列: {data.synthetic!r} (可选: {', '.join(SYNTHETIC_SOURCES)})")
    if data.lorenz_component not in LORENZ_COMPONENTS:
        raise ConfigError(f"lorenz-component 必须为 x/y/z: {data.lorenz_component!r}")
    if data.sample_period <= 0:
        raise ConfigError(f"sample-period 必须 > 0: {data.sample_period}")
    if data.transient < 0:
        raise ConfigError(f"transient 不能为负: {data.transient}")

    positive = {
        'embed-dim': config.embedding.embed_dim,
        'delta': config.embedding.delta,
        'train-n': config.split.train_n,
        'test-n': config.split.test_n,
        'batch': config.training.batch,
        'workers': config.output.workers,
    }
    for key, value in positive.items():
        if value < 1:
            raise ConfigError(f"{key} 必须 >= 1: {value}")
    if not config.training.lr > 0:
        raise ConfigError(f"lr 必须 > 0: {config.training.lr}")
    if config.training.seed < 0:
        raise ConfigError(f"seed 不能为负: {config.training.seed}")

    if config.output.preset and config.output.preset not in PRESETS:
        raise ConfigError(f"未知的 preset: {config.output.preset!r} (可选: {', '.join(PRESETS)})")
    if config.log.level not in LOG_LEVELS:
        raise ConfigError(f"未知的日志级别: {config.log.level!r}")

    try:
        family = ModelFamily.parse(config.model.model_family)
    except ModelSpecError as e:
        raise ConfigError(str(e)) from None

    if config.output.preset:
        return
    if not config.model.model:
        raise ConfigError("缺少 model（或使用 --preset）")
    experiment_model_spec(config)
    parse_iterations(config.training.iterations, family)


def config_echo(config: ExperimentConfig) -> Dict[str, Any]:
    """按参数表顺序回显影响结果的配置项（写入 metrics.json）"""
    echo = {}
    for key, (section, name, _) in _EXPERIMENT_KEYS.items():
        if key in _NON_ECHO_KEYS:
            continue
        echo[key] = getattr(getattr(config, section), name)
    return echo


def with_overrides(config: ExperimentConfig, **changes: Any) -> ExperimentConfig:
    """
    复制配置并替换字段（键为长参数名，连字符写作下划线）

    网格的每一行以此派生独立的配置副本。
    """
    derived = copy.deepcopy(config)
    for key, value in changes.items():
        _assign(derived, key.replace("_", "-"), value, "网格行")
    return derived
