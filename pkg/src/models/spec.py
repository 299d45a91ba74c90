"""
模型结构描述与括号记法解析

支持的记法（内部分隔符 "," 与 "-" 通用）：
    vanilla        "(1,14)"
    stacked        "(3,9,8,3)" / "(3,15-8-5)"
    bidirectional  "(1,28)"          每个方向 28 个单元
    eids           "((1,6),(1,5),(1,7))"，末尾的 "_5" 之类排版残留会被忽略
"""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Tuple


class ModelSpecError(ValueError):
    """模型结构记法不合法"""


class ModelFamily(str, Enum):
    """模型族"""
    VANILLA = "vanilla"
    STACKED = "stacked"
    BIDIRECTIONAL = "bidirectional"
    EIDS = "eids"

    @classmethod
    def parse(cls, name: str) -> "ModelFamily":
        try:
            return cls(name.strip().lower())
        except ValueError:
            options = ", ".join(f.value for f in cls)
            raise ModelSpecError(f"未知的模型族: {name!r} (可选: {options})") from None


# 供报告使用的模型名称
DISPLAY_NAMES = {
    ModelFamily.VANILLA: "Vanilla LSTM",
    ModelFamily.STACKED: "Stacked LSTM",
    ModelFamily.BIDIRECTIONAL: "Bidirectional LSTM",
    ModelFamily.EIDS: "EiDS",
}

EIDS_STAGES = ("a", "b", "c")


@dataclass(frozen=True)
class ModelSpec:
    """
    模型结构

    subnets 中每一项是一个子网络各层的单元数：基线模型只有一个子网络，
    EiDS 有三个（sub_a, sub_b, sub_c）。
    """
    family: ModelFamily
    subnets: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "family", ModelFamily(self.family))
        subnets = tuple(tuple(int(c) for c in cells) for cells in self.subnets)
        object.__setattr__(self, "subnets", subnets)

        expected = 3 if self.family is ModelFamily.EIDS else 1
        if len(subnets) != expected:
            raise ModelSpecError(f"{self.family.value} 需要 {expected} 个子网络，实际 {len(subnets)}")
        for cells in subnets:
            if not cells:
                raise ModelSpecError("子网络至少需要一层")
            if any(c < 1 for c in cells):
                raise ModelSpecError(f"单元数必须 >= 1: {cells}")

        if self.family in (ModelFamily.VANILLA, ModelFamily.BIDIRECTIONAL) and len(subnets[0]) != 1:
            raise ModelSpecError(f"{self.family.value} 只支持单层，实际 {len(subnets[0])} 层")
        if self.family is ModelFamily.EIDS:
            for cells in subnets:
                if len(set(cells)) != 1:
                    raise ModelSpecError(f"EiDS 子网络各层单元数必须相同: {cells}")

    @property
    def display_name(self) -> str:
        return DISPLAY_NAMES[self.family]

    @property
    def direction(self) -> str:
        return "bidirectional" if self.family is ModelFamily.BIDIRECTIONAL else "forward"

    @classmethod
    def vanilla(cls, cells: int) -> "ModelSpec":
        return cls(ModelFamily.VANILLA, ((cells,),))

    @classmethod
    def stacked(cls, cells_per_layer) -> "ModelSpec":
        return cls(ModelFamily.STACKED, (tuple(cells_per_layer),))

    @classmethod
    def bidirectional(cls, cells: int) -> "ModelSpec":
        return cls(ModelFamily.BIDIRECTIONAL, ((cells,),))

    @classmethod
    def eids(cls, sub_a: Tuple[int, int], sub_b: Tuple[int, int], sub_c: Tuple[int, int]) -> "ModelSpec":
        """每个子网络以 (层数, 单元数) 给出"""
        return cls(ModelFamily.EIDS, tuple((cells,) * layers for layers, cells in (sub_a, sub_b, sub_c)))


_STRAY_SUFFIX = re.compile(r"_\{?\w*\}?$")
_INNER_PAIR = re.compile(r"\(\s*(\d+)\s*[,\-]\s*(\d+)\s*\)")


def _clean(text: str) -> str:
    cleaned = text.replace("$", "").strip()
    cleaned = _STRAY_SUFFIX.sub("", cleaned).strip()
    return cleaned


def _strip_parens(text: str) -> str:
    if not (text.startswith("(") and text.endswith(")")):
        raise ModelSpecError(f"结构记法必须用括号包围: {text!r}")
    return text[1:-1]


def _parse_int(token: str, text: str) -> int:
    token = token.strip()
    if not token.isdigit():
        raise ModelSpecError(f"无法解析的数字 {token!r}: {text!r}")
    return int(token)


def parse_model_spec(text: str, kind) -> ModelSpec:
    """
    解析括号结构记法

    Args:
        text: 结构记法，如 "(3,15-8-5)"
        kind: 模型族名称或 ModelFamily

    Returns:
        ModelSpec

    Raises:
        ModelSpecError: 记法不合法或层数与单元数个数不符
    """
    family = kind if isinstance(kind, ModelFamily) else ModelFamily.parse(kind)
    cleaned = _clean(text)

    if family is ModelFamily.EIDS:
        body = _strip_parens(cleaned).strip()
        pairs = _INNER_PAIR.findall(body)
        remainder = _INNER_PAIR.sub("", body).replace(",", "").strip()
        if len(pairs) != 3 or remainder:
            raise ModelSpecError(f"EiDS 记法应为三个 (层数,单元数): {text!r}")
        triple = [(int(layers), int(cells)) for layers, cells in pairs]
        if any(layers < 1 for layers, _ in triple):
            raise ModelSpecError(f"层数必须 >= 1: {text!r}")
        return ModelSpec.eids(*triple)

    tokens = [t for t in re.split(r"[,\-]", _strip_parens(cleaned))]
    numbers = [_parse_int(t, text) for t in tokens]
    if len(numbers) < 2:
        raise ModelSpecError(f"结构记法至少需要 (层数, 单元数): {text!r}")
    layers, cells = numbers[0], tuple(numbers[1:])

    if family is ModelFamily.STACKED:
        if layers != len(cells):
            raise ModelSpecError(f"声明 {layers} 层，但给出了 {len(cells)} 个单元数: {text!r}")
        return ModelSpec.stacked(cells)

    if layers != 1 or len(cells) != 1:
        raise ModelSpecError(f"{family.value} 记法应为 (1, 单元数): {text!r}")
    if family is ModelFamily.VANILLA:
        return ModelSpec.vanilla(cells[0])
    return ModelSpec.bidirectional(cells[0])


def format_model_spec(spec: ModelSpec) -> str:
    """输出规范的括号记法，parse_model_spec 可原样解析回来"""
    if spec.family is ModelFamily.EIDS:
        inner = ",".join(f"({len(cells)},{cells[0]})" for cells in spec.subnets)
        return f"({inner})"
    cells = spec.subnets[0]
    return "(" + ",".join(str(v) for v in (len(cells),) + cells) + ")"
