"""
📄 报告序列化工具
功能：
  1. 🧾 JSON: 浮点数统一 17 位有效数字，拒绝 NaN/Inf，键顺序固定 → 字节级可复现
  2. 📊 CSV: 轨迹、时间序列、格点观测量与断言表
"""

import csv
import hashlib
import io
import math
import numbers
from pathlib import Path

import numpy as np

from modules.errors import ReportError


def format_float(x: float) -> str:
    """17 位有效数字；-0.0 归一为 0"""
    x = float(x)
    if not math.isfinite(x):
        raise ReportError(f"non-finite value {x!r} cannot enter a report")
    if x == 0.0:
        x = 0.0
    return format(x, ".17g")


def _scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return format_float(value)
    if isinstance(value, str):
        return _quote(value)
    raise ReportError(f"unsupported report value of type {type(value).__name__}")


def _quote(text: str) -> str:
    out = ['"']
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _emit(value, indent: int, level: int, parts: list) -> None:
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if isinstance(value, np.ndarray):
        value = value.tolist()
    if isinstance(value, complex):
        raise ReportError("complex values must be split into re/im before reporting")
    if isinstance(value, dict):
        if not value:
            parts.append("{}")
            return
        parts.append("{\n")
        for i, (key, item) in enumerate(value.items()):
            parts.append(f"{pad}{_quote(str(key))}: ")
            _emit(item, indent, level + 1, parts)
            parts.append(",\n" if i < len(value) - 1 else "\n")
        parts.append(end_pad + "}")
    elif isinstance(value, (list, tuple)):
        if not value:
            parts.append("[]")
            return
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in value):
            # 数值数组写在同一行
            parts.append("[" + ", ".join(_scalar(v) for v in value) + "]")
            return
        parts.append("[\n")
        for i, item in enumerate(value):
            parts.append(pad)
            _emit(item, indent, level + 1, parts)
            parts.append(",\n" if i < len(value) - 1 else "\n")
        parts.append(end_pad + "]")
    else:
        parts.append(_scalar(value))


def dumps(data, indent: int = 2) -> str:
    """确定性 JSON 文本 (字典按插入顺序输出)"""
    parts: list = []
    _emit(data, indent, 0, parts)
    parts.append("\n")
    return "".join(parts)


def write_json(path, data) -> str:
    """写入 JSON 报告，返回内容的 SHA-256"""
    text = dumps(data)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([
            format_float(v) if isinstance(v, numbers.Real) and not isinstance(v, (numbers.Integral, bool, np.bool_))
            else v
            for v in row
        ])
    return buffer.getvalue()


def write_csv(path, header, rows) -> str:
    """写入 CSV，返回内容的 SHA-256"""
    text = csv_text(header, rows)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def digest_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
