"""
LSTM 单元、序列前向与时间反向传播（BPTT）

门的顺序固定为 [输入门, 遗忘门, 候选值, 输出门]，无窥视孔连接：
    i = σ(W_i x + U_i h + b_i)    f = σ(W_f x + U_f h + b_f)
    g = tanh(W_g x + U_g h + b_g) o = σ(W_o x + U_o h + b_o)
    c' = f ⊙ c + i ⊙ g            h' = o ⊙ tanh(c')

所有计算使用 float64。输入可以是单条序列 (T, in)，也可以是一批序列 (T, B, in)；
单条序列在内部按 B = 1 处理：与 B = 1 的批量调用逐位一致，与更大批量的结果在数值上相等（BLAS 的累加顺序可能不同）。
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.nn.prng import Prng

logger = logging.getLogger(__name__)

GATE_ORDER = ("input", "forget", "candidate", "output")
DIRECTIONS = ("forward", "bidirectional")


class ShapeError(ValueError):
    """参数或输入的形状不一致"""


class StaleCacheError(ValueError):
    """反向传播收到的缓存与梯度不匹配"""


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class LstmLayerParams:
    """单层 LSTM 参数"""
    w_input: np.ndarray  # (4h, in)
    w_recurrent: np.ndarray  # (4h, h)
    bias: np.ndarray  # (4h,)

    def __post_init__(self):
        w_input = _frozen(self.w_input)
        w_recurrent = _frozen(self.w_recurrent)
        bias = _frozen(self.bias)
        if w_input.ndim != 2 or w_recurrent.ndim != 2 or bias.ndim != 1:
            raise ShapeError("LSTM 参数维度错误")
        four_h, h = w_recurrent.shape
        if h < 1 or four_h != 4 * h:
            raise ShapeError(f"w_recurrent 形状应为 (4h, h)，实际 {w_recurrent.shape}")
        if w_input.shape[0] != four_h or w_input.shape[1] < 1:
            raise ShapeError(f"w_input 形状应为 ({four_h}, in)，实际 {w_input.shape}")
        if bias.shape != (four_h,):
            raise ShapeError(f"bias 形状应为 ({four_h},)，实际 {bias.shape}")
        object.__setattr__(self, "w_input", w_input)
        object.__setattr__(self, "w_recurrent", w_recurrent)
        object.__setattr__(self, "bias", bias)

    @property
    def hidden_size(self) -> int:
        return self.w_recurrent.shape[1]

    @property
    def input_size(self) -> int:
        return self.w_input.shape[1]

    def size(self) -> int:
        return self.w_input.size + self.w_recurrent.size + self.bias.size


@dataclass(frozen=True)
class LstmState:
    """隐状态与细胞状态"""
    hidden: np.ndarray
    cell: np.ndarray

    @classmethod
    def zeros(cls, hidden_size: int, batch: Optional[int] = None) -> "LstmState":
        shape = (hidden_size,) if batch is None else (batch, hidden_size)
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass(frozen=True)
class ReadoutParams:
    """从最终隐特征到标量预测的仿射映射"""
    weights: np.ndarray  # (h_total,)
    bias: float

    def __post_init__(self):
        weights = _frozen(self.weights)
        if weights.ndim != 1 or weights.size < 1:
            raise ShapeError(f"readout 权重应为非空向量，实际形状 {weights.shape}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", float(self.bias))


@dataclass(frozen=True)
class StepCache:
    """单步前向缓存：输入、前一状态、预激活与各门激活值"""
    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    z: np.ndarray
    i: np.ndarray
    f: np.ndarray
    g: np.ndarray
    o: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray


@dataclass(frozen=True)
class NetworkParams:
    """
    一个循环网络：LSTM 层序列 + 读出层

    forward 方向时各层依次堆叠；bidirectional 时恰好两层，
    分别是正向层和反向层，输入维度与隐单元数相同。
    """
    layers: Tuple[LstmLayerParams, ...]
    readout: ReadoutParams
    direction: str = "forward"

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if self.direction not in DIRECTIONS:
            raise ShapeError(f"未知方向: {self.direction}")
        if not layers:
            raise ShapeError("网络至少需要一层")

        if self.direction == "bidirectional":
            if len(layers) != 2:
                raise ShapeError(f"双向网络需要恰好一对层，实际 {len(layers)} 层")
            fwd, bwd = layers
            if (fwd.input_size, fwd.hidden_size) != (bwd.input_size, bwd.hidden_size):
                raise ShapeError("双向网络两个方向的层形状必须相同")
        else:
            for lower, upper in zip(layers, layers[1:]):
                if upper.input_size != lower.hidden_size:
                    raise ShapeError(
                        f"层输入维度不匹配: 上层输入 {upper.input_size}，下层隐单元 {lower.hidden_size}"
                    )

        if self.readout.weights.size != self.feature_size:
            raise ShapeError(
                f"readout 权重长度 {self.readout.weights.size} 与特征维度 {self.feature_size} 不一致"
            )

    @property
    def input_size(self) -> int:
        return self.layers[0].input_size

    @property
    def feature_size(self) -> int:
        if self.direction == "bidirectional":
            return 2 * self.layers[0].hidden_size
        return self.layers[-1].hidden_size

    def size(self) -> int:
        """参数标量总数"""
        return sum(layer.size() for layer in self.layers) + self.readout.weights.size + 1

    def arrays(self) -> List[np.ndarray]:
        """按固定顺序展开为数组列表（读出偏置为长度 1 的数组）"""
        out: List[np.ndarray] = []
        for layer in self.layers:
            out.extend([layer.w_input, layer.w_recurrent, layer.bias])
        out.extend([self.readout.weights, np.array([self.readout.bias])])
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]):
        """用 arrays() 顺序的数组构造同结构的新对象（数组会被复制）"""
        expected = 3 * len(self.layers) + 2
        if len(arrays) != expected:
            raise ShapeError(f"数组个数应为 {expected}，实际 {len(arrays)}")
        layers = []
        for k, template in enumerate(self.layers):
            w_in, w_rec, bias = arrays[3 * k: 3 * k + 3]
            if (np.shape(w_in), np.shape(w_rec), np.shape(bias)) != (
                template.w_input.shape, template.w_recurrent.shape, template.bias.shape
            ):
                raise ShapeError(f"第 {k} 层数组形状不一致")
            layers.append(LstmLayerParams(w_in, w_rec, bias))
        weights, bias = arrays[-2], arrays[-1]
        if np.shape(weights) != self.readout.weights.shape or np.size(bias) != 1:
            raise ShapeError("readout 数组形状不一致")
        return type(self)(tuple(layers), ReadoutParams(weights, float(np.reshape(bias, -1)[0])), self.direction)

    def zeros_like(self) -> "GradientSet":
        return GradientSet(self.layers, self.readout, self.direction).with_arrays(
            [np.zeros_like(a) for a in self.arrays()]
        )


class GradientSet(NetworkParams):
    """与 NetworkParams 形状一致的梯度"""


@dataclass(frozen=True)
class SequenceCache:
    """整条序列的前向缓存，供 lstm_backward_bptt 使用"""
    network: NetworkParams
    xs: np.ndarray  # (T, B, in)
    layer_caches: Tuple[Tuple[StepCache, ...], ...]
    features: np.ndarray  # (B, F)
    batched: bool


def init_lstm_params(input_size: int, hidden_size: int, rng: Prng) -> LstmLayerParams:
    """
    Glorot 均匀初始化

    每个矩阵在 (-a, a) 上均匀采样，a = sqrt(6 / (fan_in + fan_out))；
    偏置为 0，遗忘门偏置为 1.0。依次消耗 rng：先 w_input，再 w_recurrent。
    """
    if input_size < 1 or hidden_size < 1:
        raise ShapeError(f"输入维度与隐单元数必须 >= 1: in={input_size}, h={hidden_size}")
    four_h = 4 * hidden_size
    a_in = math.sqrt(6.0 / (input_size + four_h))
    a_rec = math.sqrt(6.0 / (hidden_size + four_h))
    w_input = rng.uniform(-a_in, a_in, (four_h, input_size))
    w_recurrent = rng.uniform(-a_rec, a_rec, (four_h, hidden_size))
    bias = np.zeros(four_h)
    bias[hidden_size: 2 * hidden_size] = 1.0
    return LstmLayerParams(w_input, w_recurrent, bias)


def init_readout_params(feature_size: int, rng: Prng) -> ReadoutParams:
    """读出层 Glorot 均匀初始化，偏置为 0"""
    a = math.sqrt(6.0 / (feature_size + 1))
    return ReadoutParams(rng.uniform(-a, a, (feature_size,)), 0.0)


def init_network(
    input_size: int, cells: Sequence[int], rng: Prng, direction: str = "forward"
) -> NetworkParams:
    """
    构造并初始化一个网络

    Args:
        input_size: 每个时间步的输入维度
        cells: 各层隐单元数（双向时只给一个数，表示每个方向的单元数）
        rng: 随机数发生器
        direction: "forward" 或 "bidirectional"
    """
    if direction == "bidirectional":
        if len(cells) != 1:
            raise ShapeError(f"双向网络只支持单层，实际 {len(cells)} 层")
        layers = (
            init_lstm_params(input_size, cells[0], rng),
            init_lstm_params(input_size, cells[0], rng),
        )
    else:
        layers = []
        fan_in = input_size
        for h in cells:
            layers.append(init_lstm_params(fan_in, h, rng))
            fan_in = h
        layers = tuple(layers)
    feature_size = 2 * cells[0] if direction == "bidirectional" else cells[-1]
    return NetworkParams(layers, init_readout_params(feature_size, rng), direction)


def lstm_step_forward(
    x: np.ndarray, state: LstmState, p: LstmLayerParams
) -> Tuple[LstmState, StepCache]:
    """
    单步前向

    Args:
        x: 输入 (in,) 或 (B, in)
        state: 前一时刻状态
        p: 层参数

    Returns:
        (新状态, 单步缓存)
    """
    x = np.asarray(x, dtype=np.float64)
    h = p.hidden_size
    if x.shape[-1] != p.input_size:
        raise ShapeError(f"输入维度 {x.shape[-1]} 与层输入维度 {p.input_size} 不一致")
    if state.hidden.shape[-1] != h or state.cell.shape[-1] != h:
        raise ShapeError(f"状态维度与隐单元数 {h} 不一致")

    z = x @ p.w_input.T + state.hidden @ p.w_recurrent.T + p.bias
    i = _sigmoid(z[..., :h])
    f = _sigmoid(z[..., h: 2 * h])
    g = np.tanh(z[..., 2 * h: 3 * h])
    o = _sigmoid(z[..., 3 * h:])
    c = f * state.cell + i * g
    tanh_c = np.tanh(c)
    hidden = o * tanh_c

    cache = StepCache(x, state.hidden, state.cell, z, i, f, g, o, c, tanh_c)
    return LstmState(hidden, c), cache


def _run_layer(layer: LstmLayerParams, seq: np.ndarray) -> Tuple[np.ndarray, Tuple[StepCache, ...]]:
    steps, batch, _ = seq.shape
    state = LstmState.zeros(layer.hidden_size, batch)
    hs = np.empty((steps, batch, layer.hidden_size))
    caches = []
    for t in range(steps):
        state, cache = lstm_step_forward(seq[t], state, layer)
        hs[t] = state.hidden
        caches.append(cache)
    return hs, tuple(caches)


def network_forward(network: NetworkParams, xs) -> Tuple[Union[float, np.ndarray], SequenceCache]:
    """
    网络前向：初始状态为 0，读出层读取最后一步的隐特征

    Args:
        network: 网络参数
        xs: (T, in) 单条序列或 (T, B, in) 一批序列

    Returns:
        (预测值: 单条时为 float，批量时为 (B,) 数组, 序列缓存)
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim == 2:
        batched = False
        seq = xs[:, None, :]
    elif xs.ndim == 3:
        batched = True
        seq = xs
    else:
        raise ShapeError(f"输入序列应为 (T, in) 或 (T, B, in)，实际形状 {xs.shape}")
    if seq.shape[0] == 0:
        raise ShapeError("输入序列为空")
    if seq.shape[2] != network.input_size:
        raise ShapeError(f"每步输入维度 {seq.shape[2]} 与网络输入维度 {network.input_size} 不一致")

    if network.direction == "bidirectional":
        hs_fwd, cache_fwd = _run_layer(network.layers[0], seq)
        hs_bwd, cache_bwd = _run_layer(network.layers[1], seq[::-1])
        features = np.concatenate([hs_fwd[-1], hs_bwd[-1]], axis=-1)
        layer_caches = (cache_fwd, cache_bwd)
    else:
        layer_caches = []
        hs = seq
        for layer in network.layers:
            hs, cache = _run_layer(layer, hs)
            layer_caches.append(cache)
        features = hs[-1]
        layer_caches = tuple(layer_caches)

    prediction = features @ network.readout.weights + network.readout.bias
    cache = SequenceCache(network, seq, layer_caches, features, batched)
    return (prediction if batched else float(prediction[0])), cache


def lstm_sequence_forward(
    xs,
    layers: Sequence[LstmLayerParams],
    readout: ReadoutParams,
    direction: str = "forward",
) -> Tuple[Union[float, np.ndarray], SequenceCache]:
    """按层列表与读出层执行序列前向，见 network_forward"""
    return network_forward(NetworkParams(tuple(layers), readout, direction), xs)


def _backprop_layer(
    layer: LstmLayerParams, caches: Tuple[StepCache, ...], d_hs: np.ndarray
) -> Tuple[LstmLayerParams, np.ndarray]:
    h = layer.hidden_size
    d_w_input = np.zeros_like(layer.w_input)
    d_w_recurrent = np.zeros_like(layer.w_recurrent)
    d_bias = np.zeros_like(layer.bias)
    steps, batch, _ = d_hs.shape
    d_xs = np.empty((steps, batch, layer.input_size))
    dh_next = np.zeros((batch, h))
    dc_next = np.zeros((batch, h))

    for t in range(steps - 1, -1, -1):
        sc = caches[t]
        dh = d_hs[t] + dh_next
        do = dh * sc.tanh_c
        dc = dc_next + dh * sc.o * (1.0 - sc.tanh_c * sc.tanh_c)
        di = dc * sc.g
        dg = dc * sc.i
        df = dc * sc.c_prev
        dz = np.concatenate(
            [
                di * sc.i * (1.0 - sc.i),
                df * sc.f * (1.0 - sc.f),
                dg * (1.0 - sc.g * sc.g),
                do * sc.o * (1.0 - sc.o),
            ],
            axis=-1,
        )
        d_w_input += dz.T @ sc.x
        d_w_recurrent += dz.T @ sc.h_prev
        d_bias += dz.sum(axis=0)
        d_xs[t] = dz @ layer.w_input
        dh_next = dz @ layer.w_recurrent
        dc_next = dc * sc.f

    return LstmLayerParams(d_w_input, d_w_recurrent, d_bias), d_xs


def lstm_backward_with_inputs(cache: SequenceCache, d_prediction) -> Tuple[GradientSet, np.ndarray]:
    """
    BPTT：返回参数梯度以及对输入序列的梯度

    Args:
        cache: 对应前向的缓存
        d_prediction: 损失对预测值的梯度（单条时为标量，批量时为 (B,)）

    Returns:
        (GradientSet, d_inputs)：d_inputs 与前向输入形状相同
    """
    network = cache.network
    batch = cache.xs.shape[1]
    d_pred = np.asarray(d_prediction, dtype=np.float64)
    if cache.batched:
        if d_pred.shape != (batch,):
            raise StaleCacheError(f"d_prediction 形状 {d_pred.shape} 与缓存批量 ({batch},) 不一致")
    elif d_pred.ndim != 0:
        raise StaleCacheError("单条序列的 d_prediction 必须是标量")
    d_pred = d_pred.reshape(batch)

    d_readout_weights = cache.features.T @ d_pred
    d_readout_bias = float(d_pred.sum())
    d_features = d_pred[:, None] * network.readout.weights[None, :]
    steps = cache.xs.shape[0]

    if network.direction == "bidirectional":
        h = network.layers[0].hidden_size
        d_fwd = np.zeros((steps, batch, h))
        d_bwd = np.zeros((steps, batch, h))
        d_fwd[-1] = d_features[:, :h]
        d_bwd[-1] = d_features[:, h:]
        g_fwd, dx_fwd = _backprop_layer(network.layers[0], cache.layer_caches[0], d_fwd)
        g_bwd, dx_bwd = _backprop_layer(network.layers[1], cache.layer_caches[1], d_bwd)
        layer_grads = [g_fwd, g_bwd]
        d_xs = dx_fwd + dx_bwd[::-1]
    else:
        layer_grads = [None] * len(network.layers)
        d_hs = np.zeros((steps, batch, network.layers[-1].hidden_size))
        d_hs[-1] = d_features
        for k in range(len(network.layers) - 1, -1, -1):
            layer_grads[k], d_hs = _backprop_layer(network.layers[k], cache.layer_caches[k], d_hs)
        d_xs = d_hs

    grads = GradientSet(
        tuple(layer_grads), ReadoutParams(d_readout_weights, d_readout_bias), network.direction
    )
    return grads, (d_xs if cache.batched else d_xs[:, 0, :])


def lstm_backward_bptt(cache: SequenceCache, d_prediction) -> GradientSet:
    """BPTT：预测值对全部参数的精确梯度（跨所有时间步、层与方向）"""
    grads, _ = lstm_backward_with_inputs(cache, d_prediction)
    return grads
