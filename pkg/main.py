#!/usr/bin/env python3
"""
EiDS 时间序列预测工具 - 主程序入口

使用方法:
    python main.py --synthetic mackey-glass --model vanilla "(1,14)" --iterations 1000 [options]
    python main.py --preset table1 [options]

示例:
    python main.py --synthetic mackey-glass --delta 1 --model vanilla "(1,14)" --iterations 1000
    python main.py --data eeg.csv --model-family eids --model "((1,6),(1,5),(1,7))" --iterations "(100,150,400)"
    python main.py --preset table1 --workers 4 --out results/table1
    python main.py --config experiment.ini --seed 9 --debug
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import colorlog

from src import __version__
from src.bench.grid import run_preset
from src.bench.runner import PipelineError, run_experiment
from src.config.defaults import LogConfig
from src.config.loader import PRESETS, ConfigError, load_config
from src.models.spec import ModelFamily
from src.series.generators import SYNTHETIC_SOURCES

logger = logging.getLogger(__name__)

# argparse dest -> 配置键名（长参数名）
_FLAG_KEYS = (
    "data", "synthetic", "sample-period", "history", "transient", "lorenz-component",
    "embed-dim", "delta", "train-n", "test-n", "model-family", "model", "iterations",
    "batch", "lr", "seed", "out", "preset", "emit-embedding", "workers",
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """解析命令行参数（未给出的参数为 None，交由配置文件或默认值决定）"""
    parser = argparse.ArgumentParser(
        description="EiDS 时间序列预测工具：LSTM 基线与 EiDS 的训练、评估和实验网格",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  python main.py --synthetic mackey-glass --delta 1 --model vanilla "(1,14)" --iterations 1000
  python main.py --synthetic lorenz --model-family stacked --model "(3,15-8-5)" --iterations 500
  python main.py --data eeg.csv --sample-period 1 --model eids "((1,6),(1,5),(1,8))" --iterations "(100,100,100)"
  python main.py --preset table1 --workers 4     # 16 行基准网格
  python main.py --preset fig3                   # 7000 个训练样本的收敛对比
  python main.py --config experiment.ini --seed 9

注意：
  config.ini 的 [experiment] 节键名与长参数相同（如 embed-dim = 2），命令行参数优先。
  出错时退出码非 0，并在 stderr 输出一行 JSON 错误描述。
        """
    )

    source = parser.add_argument_group("数据源")
    source.add_argument("--data", metavar="PATH", help="CSV 文件（每行一个采样值，可带表头）")
    source.add_argument("--synthetic", choices=SYNTHETIC_SOURCES, help="合成混沌序列")
    source.add_argument("--sample-period", type=float, metavar="MS", help="采样周期（毫秒，默认: 1）")
    source.add_argument("--history", type=float, metavar="X", help="Mackey-Glass 初始历史值 (默认: 1.2)")
    source.add_argument("--transient", type=int, metavar="N", help="丢弃的前导样本数 (默认: 0)")
    source.add_argument("--lorenz-component", choices=("x", "y", "z"), help="Lorenz 输出分量 (默认: x)")

    experiment = parser.add_argument_group("实验")
    experiment.add_argument("--embed-dim", type=int, metavar="D", help="嵌入维度 (默认: 2)")
    experiment.add_argument("--delta", type=int, metavar="N", help="预测步长 Δ (默认: 1)")
    experiment.add_argument("--train-n", type=int, metavar="N", help="训练样本数 (默认: 2500)")
    experiment.add_argument("--test-n", type=int, metavar="N", help="测试样本数 (默认: 1400)")
    experiment.add_argument("--model-family", choices=[f.value for f in ModelFamily], help="模型族")
    experiment.add_argument("--model", nargs="+", metavar="SPEC",
                            help='结构记法，可带模型族前缀: "(1,14)" 或 vanilla "(1,14)"')
    experiment.add_argument("--iterations", metavar='N|"(a,b,c)"', help="epoch 数；EiDS 可给三元组")
    experiment.add_argument("--batch", type=int, metavar="N", help="mini-batch 大小 (默认: 32)")
    experiment.add_argument("--lr", type=float, metavar="X", help="Adam 学习率 (默认: 1e-3)")
    experiment.add_argument("--seed", type=int, metavar="N", help="随机种子 (默认: 1)")

    output = parser.add_argument_group("输出")
    output.add_argument("--out", metavar="DIR", help="输出目录 (默认: results)")
    output.add_argument("--preset", choices=PRESETS, help="运行内置实验网格")
    output.add_argument("--workers", type=int, metavar="N", help="网格并行进程数 (默认: 1)")
    output.add_argument("--emit-embedding", action="store_const", const=True, default=None,
                        help="额外写出 embedding.csv")

    parser.add_argument("--config", metavar="PATH", help="配置文件路径（INI）")
    parser.add_argument("--debug", action="store_true", help="启用调试日志")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    return parser.parse_args(argv)


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """命令行参数 -> 配置覆盖项"""
    overrides = {}
    for key in _FLAG_KEYS:
        value = getattr(args, key.replace("-", "_"))
        if key == "model" and value is not None:
            value = " ".join(value)
        overrides[key] = value
    return overrides


def setup_logging(log_config: Optional[LogConfig] = None, enable_debug: bool = False):
    """设置日志（控制台彩色输出，可选文件输出）"""
    log_config = log_config or LogConfig()
    level = "DEBUG" if enable_debug else log_config.level

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(getattr(logging, level.upper()))

    if log_config.enable_console:
        console = logging.StreamHandler()
        console.setFormatter(colorlog.ColoredFormatter(
            "%(log_color)s%(asctime)s [%(levelname)s]%(reset)s %(name)s - %(message)s",
            datefmt="%H:%M:%S",
        ))
        root.addHandler(console)

    if log_config.enable_file:
        log_path = Path(log_config.file_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(name)s - %(message)s",
            datefmt="%H:%M:%S",
        ))
        root.addHandler(file_handler)


def print_banner():
    """打印启动横幅"""
    banner = f"""
╔══════════════════════════════════════════════════╗
║     EiDS 时间序列预测工具 v{__version__:<22}║
║     LSTM baselines · EiDS · preset grids       ║
╚══════════════════════════════════════════════════╝
"""
    print(banner)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """
    执行命令行

    Returns:
        退出码：0 全部成功，1 有实验行失败，2 配置错误
    """
    args = parse_arguments(argv)
    setup_logging(enable_debug=args.debug)

    try:
        cfg = load_config(args.config, overrides_from_args(args))
    except ConfigError as e:
        logger.error(f"配置错误: {e}")
        print(PipelineError("config", e).to_json_line(), file=sys.stderr)
        return EXIT_CONFIG

    setup_logging(cfg.log, enable_debug=args.debug)

    if cfg.output.preset:
        logger.info(f"运行预设: {cfg.output.preset} -> {cfg.output.out}")
        try:
            result = run_preset(cfg, cfg.output.preset, workers=cfg.output.workers)
        except PipelineError as e:
            logger.error(f"预设运行失败: {e}")
            print(e.to_json_line(), file=sys.stderr)
            return EXIT_FAILED
        print(result.summary_txt.read_text(encoding="utf-8"))
        if not result.ok:
            print(result.first_failure.to_json_line(), file=sys.stderr)
            return EXIT_FAILED
        return EXIT_OK

    try:
        result = run_experiment(cfg)
    except PipelineError as e:
        logger.error(f"实验失败: {e}")
        print(e.to_json_line(), file=sys.stderr)
        return EXIT_FAILED

    report = result.report
    print(f"{report.model_name} {report.structure} Δ={report.horizon}: "
          f"RMSE {report.rmse:.6f}, MAE {report.mae:.6f} "
          f"({report.iterations} iterations, {result.param_count} 参数, {result.wall_clock_seconds:.1f}s)")
    print(f"结果目录: {cfg.output.out}")
    return EXIT_OK


def main():
    """主程序入口"""
    print_banner()

    try:
        sys.exit(run_cli())
    except KeyboardInterrupt:
        print("\n\n用户中断，正在退出...")
        sys.exit(130)


if __name__ == "__main__":
    main()
