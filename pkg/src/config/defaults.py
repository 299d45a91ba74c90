"""
默认配置定义

使用dataclass定义实验的所有配置项及默认值。
字段名与命令行长参数一一对应（下划线换成连字符即为 config.ini 中的键名）。
"""

from dataclasses import dataclass, field


@dataclass
class DataConfig:
    """数据源配置（CSV 与合成序列二选一）"""
    data: str = ""  # CSV 文件路径
    synthetic: str = ""  # 合成序列: mackey-glass / lorenz
    sample_period: float = 1.0  # 采样周期（毫秒）
    history: float = 1.2  # Mackey-Glass 初始历史值
    transient: int = 0  # 生成后丢弃的前导样本数
    lorenz_component: str = "x"  # Lorenz 输出分量: x / y / z


@dataclass
class EmbeddingConfig:
    """时间延迟嵌入配置"""
    embed_dim: int = 2  # 嵌入维度 D
    delta: int = 1  # 预测步长 Δ（样本数）


@dataclass
class SplitConfig:
    """训练/测试切分"""
    train_n: int = 2500
    test_n: int = 1400


@dataclass
class ModelConfig:
    """模型结构（括号记法）"""
    model_family: str = "vanilla"  # vanilla / stacked / bidirectional / eids
    model: str = ""  # 结构记法，如 "(1,14)"；使用 preset 时可为空


@dataclass
class TrainingConfig:
    """训练配置"""
    iterations: str = ""  # "N" 或 EiDS 的 "(a,b,c)"
    batch: int = 32  # mini-batch 大小
    lr: float = 1e-3  # Adam 学习率
    seed: int = 1  # 初始化与洗牌种子


@dataclass
class OutputConfig:
    """输出与执行配置"""
    out: str = "results"  # 输出目录
    preset: str = ""  # 内置网格: table1 / fig3
    emit_embedding: bool = False  # 额外写出 embedding.csv
    workers: int = 1  # 网格并行进程数


@dataclass
class LogConfig:
    """日志配置"""
    level: str = "INFO"  # 日志级别（DEBUG, INFO, WARNING, ERROR）
    enable_console: bool = True  # 启用控制台输出
    enable_file: bool = False  # 启用文件输出
    file_path: str = "logs/bench.log"  # 日志文件路径


@dataclass
class ExperimentConfig:
    """实验总配置"""
    data: DataConfig = field(default_factory=DataConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    log: LogConfig = field(default_factory=LogConfig)


# 默认配置实例（只读参考，加载时总是新建）
DEFAULT_CONFIG = ExperimentConfig()
