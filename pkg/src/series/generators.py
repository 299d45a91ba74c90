"""
混沌序列生成器

Mackey-Glass 时滞方程与 Lorenz 系统，均使用四阶 Runge-Kutta 积分，作为不公开的
EEG 记录的公开替代数据。同样的参数总是产生逐位相同的序列。
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

from src.series.timeseries import DivergenceInGeneratorError, SeriesError, TimeSeries

logger = logging.getLogger(__name__)

SYNTHETIC_SOURCES = ("mackey-glass", "lorenz")


@dataclass(frozen=True)
class MackeyGlassParams:
    """Mackey-Glass 方程参数"""
    beta: float = 0.2
    gamma: float = 0.1
    tau: float = 17.0  # 时滞
    exponent: float = 10.0
    dt: float = 1.0  # 积分步长，同时也是输出采样间隔


@dataclass(frozen=True)
class LorenzParams:
    """Lorenz 系统参数"""
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01


def _check_count(n: int, transient: int):
    if n < 1:
        raise SeriesError(f"样本数必须 >= 1: {n}")
    if transient < 0:
        raise SeriesError(f"transient 不能为负: {transient}")


def generate_mackey_glass(
    n: int,
    history: float = 1.2,
    params: MackeyGlassParams = MackeyGlassParams(),
    transient: int = 0,
    sample_period: float = 1.0,
) -> TimeSeries:
    """
    生成 Mackey-Glass 序列

    dx/dt = beta * x(t-tau) / (1 + x(t-tau)^exponent) - gamma * x(t)

    t <= 0 时历史缓冲恒为 history；RK4 半步处的时滞项在已计算的网格值之间线性插值。
    时滞点落在当前步之后（tau < dt）时，取该 RK4 阶段的状态值，tau = 0 时即退化为
    普通 ODE。第一个样本就是 x(0) = history。

    Args:
        n: 输出样本数
        history: 历史缓冲的常数值
        params: 方程参数
        transient: 丢弃的前导样本数
        sample_period: 写入 TimeSeries 的采样周期（毫秒）

    Returns:
        TimeSeries: 长度为 n 的序列
    """
    _check_count(n, transient)
    if not params.dt > 0:
        raise SeriesError(f"dt 必须为正: {params.dt}")
    if params.tau < 0:
        raise SeriesError(f"tau 不能为负: {params.tau}")

    beta, gamma, dt = params.beta, params.gamma, params.dt
    exponent, tau = params.exponent, params.tau
    total = n + transient
    xs: List[float] = [float(history)]

    def rate(x: float, x_delayed: float) -> float:
        return beta * x_delayed / (1.0 + math.pow(x_delayed, exponent)) - gamma * x

    def delayed(time: float, now: float, stage_x: float) -> float:
        if time <= 0.0:
            return history
        if time > now:
            return stage_x
        pos = time / dt
        j = int(math.floor(pos))
        frac = pos - j
        # time/dt 的舍入可能越过最新的网格点
        if frac == 0.0 or j >= len(xs) - 1:
            return xs[min(j, len(xs) - 1)]
        return xs[j] + frac * (xs[j + 1] - xs[j])

    for k in range(total - 1):
        now = k * dt
        x = xs[k]
        try:
            k1 = rate(x, delayed(now - tau, now, x))
            x2 = x + 0.5 * dt * k1
            k2 = rate(x2, delayed(now + 0.5 * dt - tau, now, x2))
            x3 = x + 0.5 * dt * k2
            k3 = rate(x3, delayed(now + 0.5 * dt - tau, now, x3))
            x4 = x + dt * k3
            k4 = rate(x4, delayed(now + dt - tau, now, x4))
        except (ValueError, OverflowError, ZeroDivisionError) as e:
            raise DivergenceInGeneratorError(f"Mackey-Glass 积分失败: {e}", k + 1) from e

        x_next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(x_next):
            raise DivergenceInGeneratorError("Mackey-Glass 积分发散", k + 1)
        xs.append(x_next)

    logger.debug(f"Mackey-Glass 生成完成: {total} 个样本 (丢弃 {transient})")
    return TimeSeries.from_values(xs[transient:], sample_period, "mackey-glass")


def generate_lorenz(
    n: int,
    initial: Tuple[float, float, float] = (1.0, 1.0, 1.0),
    params: LorenzParams = LorenzParams(),
    component: str = "x",
    transient: int = 0,
    sample_period: float = 1.0,
) -> TimeSeries:
    """
    生成 Lorenz 系统的某一分量

    第一个样本是初始状态的对应分量，之后每个样本前进一个 RK4 步长。

    Args:
        n: 输出样本数
        initial: 初始状态 (x, y, z)
        params: 系统参数
        component: 输出分量 "x" / "y" / "z"
        transient: 丢弃的前导样本数
        sample_period: 写入 TimeSeries 的采样周期（毫秒）
    """
    _check_count(n, transient)
    if not params.dt > 0:
        raise SeriesError(f"dt 必须为正: {params.dt}")
    if component not in ("x", "y", "z"):
        raise SeriesError(f"未知的 Lorenz 分量: {component}")

    sigma, rho, beta, dt = params.sigma, params.rho, params.beta, params.dt
    axis = "xyz".index(component)

    def flow(s: Tuple[float, float, float]) -> Tuple[float, float, float]:
        x, y, z = s
        return (sigma * (y - x), x * (rho - z) - y, x * y - beta * z)

    def shift(s, d, h):
        return (s[0] + h * d[0], s[1] + h * d[1], s[2] + h * d[2])

    state = tuple(float(v) for v in initial)
    total = n + transient
    out = [state[axis]]
    for k in range(total - 1):
        k1 = flow(state)
        k2 = flow(shift(state, k1, 0.5 * dt))
        k3 = flow(shift(state, k2, 0.5 * dt))
        k4 = flow(shift(state, k3, dt))
        state = tuple(
            state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(3)
        )
        if not all(math.isfinite(v) for v in state):
            raise DivergenceInGeneratorError("Lorenz 积分发散", k + 1)
        out.append(state[axis])

    logger.debug(f"Lorenz 生成完成: {total} 个样本 (分量 {component}, 丢弃 {transient})")
    return TimeSeries.from_values(out[transient:], sample_period, f"lorenz-{component}")


def generate_series(
    name: str,
    n: int,
    history: float = 1.2,
    component: str = "x",
    transient: int = 0,
    sample_period: float = 1.0,
) -> TimeSeries:
    """按名称生成合成序列（命令行使用的默认参数）"""
    if name == "mackey-glass":
        return generate_mackey_glass(n, history=history, transient=transient, sample_period=sample_period)
    if name == "lorenz":
        return generate_lorenz(n, component=component, transient=transient, sample_period=sample_period)
    raise SeriesError(f"未知的合成数据源: {name} (可选: {', '.join(SYNTHETIC_SOURCES)})")
