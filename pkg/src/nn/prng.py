"""
SplitMix64 伪随机数发生器

算法固定，相同种子在任何实现中都得到相同的序列。
"""

from typing import Tuple

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class Prng:
    """
    SplitMix64 序列

    单一所有者使用：由调用方持有并依次传入需要随机数的函数。
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        """下一个 64 位无符号整数"""
        self.state = (self.state + _GOLDEN_GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """[0, 1) 上的均匀分布（53 位精度）"""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float, shape: Tuple[int, ...]) -> np.ndarray:
        """按行主序填充 [low, high) 上的均匀分布数组"""
        count = int(np.prod(shape)) if shape else 1
        span = high - low
        values = [low + span * self.next_float() for _ in range(count)]
        return np.array(values, dtype=np.float64).reshape(shape)

    def below(self, bound: int) -> int:
        """[0, bound) 上的整数（取模，偏差在 bound 远小于 2^64 时可忽略）"""
        if bound <= 0:
            raise ValueError(f"bound 必须为正: {bound}")
        return self.next_u64() % bound

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates 洗牌得到 0..n-1 的排列"""
        order = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            order[i], order[j] = order[j], order[i]
        return np.array(order, dtype=np.int64)
