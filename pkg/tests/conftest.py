"""
共享测试夹具
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目根目录到Python路径
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.nn.prng import Prng
from src.series.embedding import EmbeddingSpec, SupervisedDataset


@pytest.fixture
def rng():
    return Prng(7)


def make_dataset(inputs, targets, embed_dim=None, horizon=1, origin_offset=0) -> SupervisedDataset:
    inputs = np.asarray(inputs, dtype=np.float64)
    dim = embed_dim if embed_dim is not None else inputs.shape[1]
    return SupervisedDataset(inputs, np.asarray(targets, dtype=np.float64),
                             EmbeddingSpec(dim, horizon), origin_offset)


@pytest.fixture
def random_dataset():
    """D=2 的随机数据集（标准化尺度）"""
    def build(count=20, dim=2, seed=3):
        gen = np.random.default_rng(seed)
        return make_dataset(gen.uniform(-1, 1, (count, dim)), gen.uniform(-1, 1, count))
    return build
