"""
时间序列模块

包含 CSV 读取、混沌序列生成、时延嵌入、训练/测试切分与标准化。
"""

from src.series.timeseries import (
    TimeSeries,
    SeriesError,
    CsvFormatError,
    DivergenceInGeneratorError,
)
from src.series.csv_loader import load_csv, load_csv_file
from src.series.generators import (
    SYNTHETIC_SOURCES,
    MackeyGlassParams,
    LorenzParams,
    generate_mackey_glass,
    generate_lorenz,
    generate_series,
)
from src.series.embedding import (
    EmbeddingSpec,
    StateVectorPair,
    SupervisedDataset,
    embed,
    split_train_test,
)
from src.series.normalizer import NormalizationStats, fit_normalizer

__all__ = [
    'TimeSeries',
    'SeriesError',
    'CsvFormatError',
    'DivergenceInGeneratorError',
    'load_csv',
    'load_csv_file',
    'SYNTHETIC_SOURCES',
    'MackeyGlassParams',
    'LorenzParams',
    'generate_mackey_glass',
    'generate_lorenz',
    'generate_series',
    'EmbeddingSpec',
    'StateVectorPair',
    'SupervisedDataset',
    'embed',
    'split_train_test',
    'NormalizationStats',
    'fit_normalizer',
]
