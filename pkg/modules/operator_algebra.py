"""
🧮 阶梯算符代数模块
功能：
  1. 🔤 玻色阶梯生成元 a_j, a_j⁺ (A族) 与 b_j, b_j⁺ (B族) 上的精确符号多项式
  2. 🔄 正规序重写 ([a_j, a_k⁺] = δ_jk, 不同族互相对易)
  3. 📐 经典多项式 (φ_j, π_j, φ̇_j) 及其形式偏导
  4. ⚛️ 正则量子化 f_c 与正规量子化 f_n (Wick 冒号积)
  5. 🧷 对易子计算与括号恒等式残差检查

约定 (标度账本):
  Φ_j = ½(a_j + a_j⁺),  Π_j = (1/2i)(a_j − a_j⁺),  相干本征值 z_j = φ_j + iπ_j
  于是 [Φ_j, Π_k] = (i/2)δ_jk，演化因子为 −2i
"""

from __future__ import annotations

import numbers
import re
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from config import config
from modules.errors import (
    AlgebraError,
    DegreeOverflowError,
    DomainError,
    ModeIndexError,
    NonFiniteCoefficientError,
)
from utils.logger import logger

FAMILY_A = "A"
FAMILY_B = "B"
FAMILIES = (FAMILY_A, FAMILY_B)

# 经典变量种类，按字典序排列 (序列化顺序)
VAR_KINDS = ("phi", "phidot", "pi")
VAR_PATTERN = re.compile(r"^(phidot|phi|pi)([1-9]\d*)$")


# ================================ 生成元 ================================

@dataclass(frozen=True)
class Generator:
    """阶梯生成元: family ∈ {A, B}, mode ≥ 1, dagger 表示产生算符"""

    family: str
    mode: int
    dagger: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise AlgebraError(f"unknown generator family: {self.family!r}")
        if self.mode < 1:
            raise ModeIndexError(f"mode index must be ≥ 1, got {self.mode}")

    @property
    def order_key(self) -> tuple:
        """正规序排序键: 产生算符在前，然后按 (族, 模式)"""
        return (not self.dagger, self.family, self.mode)

    def adjoint(self) -> "Generator":
        return Generator(self.family, self.mode, not self.dagger)

    def __str__(self) -> str:
        name = "a" if self.family == FAMILY_A else "b"
        return f"{name}{self.mode}{'+' if self.dagger else ''}"


Word = tuple  # tuple[Generator, ...]


def a(j: int) -> Generator:
    return Generator(FAMILY_A, j, False)


def a_dag(j: int) -> Generator:
    return Generator(FAMILY_A, j, True)


def b(j: int) -> Generator:
    return Generator(FAMILY_B, j, False)


def b_dag(j: int) -> Generator:
    return Generator(FAMILY_B, j, True)


def _contracts(left: Generator, right: Generator) -> bool:
    """left·right = right·left + 1 仅当 left 为湮灭、right 为同族同模式的产生算符"""
    return (not left.dagger) and right.dagger and left.family == right.family and left.mode == right.mode


@lru_cache(maxsize=1 << 16)
def _normal_order_word(word: Word) -> tuple:
    """
    单个单词的正规序展开，返回 ((word, 整数系数), ...)
    逐对冒泡交换，每次湮灭/产生交换附带一个收缩项
    """
    for i in range(len(word) - 1):
        left, right = word[i], word[i + 1]
        if left.order_key > right.order_key:
            acc: dict = defaultdict(int)
            for w, c in _normal_order_word(word[:i] + (right, left) + word[i + 2:]):
                acc[w] += c
            if _contracts(left, right):
                for w, c in _normal_order_word(word[:i] + word[i + 2:]):
                    acc[w] += c
            return tuple((w, c) for w, c in acc.items() if c != 0)
    return ((word, 1),)


def _colon_sort(word: Word) -> Word:
    """Wick 冒号: 只重排不产生收缩项"""
    return tuple(sorted(word, key=lambda g: g.order_key))


def _word_sort_key(word: Word) -> tuple:
    return (len(word), tuple(g.order_key for g in word))


def _clean_coefficients(raw: Mapping, rel_tol: float) -> dict:
    """检查有限性，并丢弃相对最大系数过小的项"""
    items = {}
    for key, coef in raw.items():
        if not np.isfinite(coef):
            raise NonFiniteCoefficientError(f"non-finite coefficient {coef!r} on term {key!r}")
        if coef != 0:
            items[key] = coef
    if not items:
        return {}
    largest = max(abs(c) for c in items.values())
    threshold = rel_tol * largest
    return {k: c for k, c in items.items() if abs(c) > threshold}


# ================================ 算符多项式 ================================

class OperatorPoly:
    """
    ⚛️ 阶梯生成元上的复系数多项式 (不可变, 始终为正规序规范形式)
    两个多项式相等当且仅当规范形式逐项相同
    """

    __slots__ = ("_terms", "mode_count")
    __array_ufunc__ = None

    def __init__(self, terms: Mapping | None = None, mode_count: int = 1, *, ordered: bool = False):
        """
        参数:
            terms: {单词: 系数}，单词是 Generator 元组，可以不是正规序
            mode_count: 声明的模式数 n
            ordered: 调用方保证单词已是正规序 (跳过重写)
        """
        self.mode_count = int(mode_count)
        if self.mode_count < 1:
            raise ModeIndexError(f"mode_count must be ≥ 1, got {mode_count}")
        acc: dict = defaultdict(complex)
        for word, coef in (terms or {}).items():
            word = tuple(word)
            if len(word) > config.MAX_DEGREE:
                raise DegreeOverflowError(
                    f"word length {len(word)} exceeds maximum degree {config.MAX_DEGREE}"
                )
            for g in word:
                if g.mode > self.mode_count:
                    raise ModeIndexError(f"generator {g} outside declared mode count {self.mode_count}")
            coef = complex(coef)
            if coef == 0:
                continue
            if ordered:
                acc[word] += coef
            else:
                for w, c in _normal_order_word(word):
                    acc[w] += coef * c
        cleaned = _clean_coefficients(acc, config.MERGE_RELATIVE_TOL)
        self._terms = tuple(sorted(cleaned.items(), key=lambda item: _word_sort_key(item[0])))

    # ----------------------- 构造 -----------------------

    @classmethod
    def zero(cls, mode_count: int = 1) -> "OperatorPoly":
        return cls({}, mode_count)

    @classmethod
    def constant(cls, value: complex, mode_count: int = 1) -> "OperatorPoly":
        return cls({(): value}, mode_count)

    @classmethod
    def from_generator(cls, g: Generator, mode_count: int | None = None) -> "OperatorPoly":
        return cls({(g,): 1.0}, mode_count or g.mode)

    # ----------------------- 访问 -----------------------

    @property
    def terms(self) -> tuple:
        return self._terms

    def as_dict(self) -> dict:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((len(w) for w, _ in self._terms), default=0)

    def families(self) -> set:
        return {g.family for w, _ in self._terms for g in w}

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for _, c in self._terms), default=0.0)

    def is_zero(self, tol: float | None = None) -> bool:
        """tol=None 时要求项集合为空；否则最大系数 ≤ tol 即视为零"""
        if tol is None:
            return not self._terms
        return self.max_abs_coefficient() <= tol

    def homogeneous_part(self, degree: int) -> "OperatorPoly":
        return OperatorPoly({w: c for w, c in self._terms if len(w) == degree}, self.mode_count, ordered=True)

    def with_mode_count(self, mode_count: int) -> "OperatorPoly":
        return OperatorPoly(self.as_dict(), mode_count, ordered=True)

    # ----------------------- 环运算 -----------------------

    def _coerce(self, other) -> "OperatorPoly":
        if isinstance(other, OperatorPoly):
            return other
        if isinstance(other, numbers.Number):
            return OperatorPoly.constant(other, self.mode_count)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = defaultdict(complex, self.as_dict())
        for w, c in other._terms:
            acc[w] += c
        return OperatorPoly(acc, max(self.mode_count, other.mode_count), ordered=True)

    __radd__ = __add__

    def __neg__(self):
        return OperatorPoly({w: -c for w, c in self._terms}, self.mode_count, ordered=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return OperatorPoly({w: c * other for w, c in self._terms}, self.mode_count, ordered=True)
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        raw: dict = defaultdict(complex)
        for w1, c1 in self._terms:
            for w2, c2 in other._terms:
                raw[w1 + w2] += c1 * c2
        return OperatorPoly(raw, max(self.mode_count, other.mode_count))

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return self * (1.0 / other)
        return NotImplemented

    def __pow__(self, exponent: int):
        if not isinstance(exponent, numbers.Integral) or exponent < 0:
            raise AlgebraError(f"only non-negative integer powers are supported, got {exponent!r}")
        result = OperatorPoly.constant(1.0, self.mode_count)
        for _ in range(int(exponent)):
            result = result * self
        return result

    def adjoint(self) -> "OperatorPoly":
        """反转单词、翻转 dagger、取共轭系数"""
        raw = {tuple(g.adjoint() for g in reversed(w)): complex(c).conjugate() for w, c in self._terms}
        return OperatorPoly(raw, self.mode_count)

    def is_hermitian(self, tol: float | None = None) -> bool:
        tol = config.SYMBOLIC_ZERO_TOL if tol is None else tol
        return (self - self.adjoint()).is_zero(tol)

    # ----------------------- 比较 / 显示 -----------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, numbers.Number):
            other = OperatorPoly.constant(other, self.mode_count)
        if not isinstance(other, OperatorPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def allclose(self, other: "OperatorPoly", tol: float | None = None) -> bool:
        tol = config.SYMBOLIC_ZERO_TOL if tol is None else tol
        return (self - other).is_zero(tol)

    def __repr__(self) -> str:
        return f"OperatorPoly({self}, mode_count={self.mode_count})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for word, coef in self._terms:
            text = f"({coef.real:.6g}{coef.imag:+.6g}j)"
            if word:
                text += "·" + " ".join(str(g) for g in word)
            parts.append(text)
        return " + ".join(parts)


# ================================ 经典多项式 ================================

def parse_variable(var) -> tuple:
    """'phi1' 或 ('phi', 1) → ('phi', 1)"""
    if isinstance(var, str):
        match = VAR_PATTERN.match(var)
        if not match:
            raise DomainError(f"unknown classical variable {var!r}")
        return match.group(1), int(match.group(2))
    kind, j = var
    if kind not in VAR_KINDS or int(j) < 1:
        raise DomainError(f"unknown classical variable {var!r}")
    return kind, int(j)


def variable_name(var: tuple) -> str:
    return f"{var[0]}{var[1]}"


def _monomial_degree(mono: tuple) -> int:
    return sum(e for _, e in mono)


def _multiply_monomials(m1: tuple, m2: tuple) -> tuple:
    exps: dict = defaultdict(int)
    for var, e in m1 + m2:
        exps[var] += e
    for var, e in exps.items():
        if e > config.MAX_DEGREE:
            raise DegreeOverflowError(f"exponent {e} of {variable_name(var)} exceeds {config.MAX_DEGREE}")
    return tuple(sorted(exps.items()))


class ClassicalPoly:
    """
    📐 φ_j, π_j, φ̇_j 上的实系数多项式 (不可变)
    单项式表示为 ((变量, 指数), ...) 按变量字典序排序
    """

    __slots__ = ("_terms", "mode_count")
    __array_ufunc__ = None

    def __init__(self, terms: Mapping | None = None, mode_count: int | None = None):
        acc: dict = defaultdict(float)
        used = 0
        for mono, coef in (terms or {}).items():
            if isinstance(coef, complex) or np.iscomplexobj(coef):
                if complex(coef).imag != 0:
                    raise DomainError("classical polynomial coefficients must be real")
                coef = complex(coef).real
            normalized: dict = defaultdict(int)
            for var, e in mono:
                var = parse_variable(var)
                if e < 0:
                    raise DomainError(f"negative exponent on {variable_name(var)}")
                if e > config.MAX_DEGREE:
                    raise DegreeOverflowError(f"exponent {e} of {variable_name(var)} exceeds {config.MAX_DEGREE}")
                if e:
                    normalized[var] += int(e)
                    used = max(used, var[1])
            acc[tuple(sorted(normalized.items()))] += float(coef)
        declared = used if mode_count is None else int(mode_count)
        if declared < used:
            raise ModeIndexError(f"variable index {used} exceeds declared mode count {declared}")
        self.mode_count = max(declared, 1)
        cleaned = _clean_coefficients(acc, config.MERGE_RELATIVE_TOL)
        self._terms = tuple(sorted(cleaned.items()))

    # ----------------------- 构造 -----------------------

    @classmethod
    def constant(cls, value: float, mode_count: int | None = None) -> "ClassicalPoly":
        return cls({(): value}, mode_count)

    @classmethod
    def variable(cls, var, mode_count: int | None = None) -> "ClassicalPoly":
        var = parse_variable(var)
        return cls({((var, 1),): 1.0}, mode_count)

    # ----------------------- 访问 -----------------------

    @property
    def terms(self) -> tuple:
        return self._terms

    def as_dict(self) -> dict:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((_monomial_degree(m) for m, _ in self._terms), default=0)

    def variables(self) -> set:
        return {var for mono, _ in self._terms for var, _ in mono}

    def uses(self, kind: str) -> bool:
        return any(var[0] == kind for var in self.variables())

    def is_zero(self, tol: float | None = None) -> bool:
        if tol is None:
            return not self._terms
        return self.max_abs_coefficient() <= tol

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for _, c in self._terms), default=0.0)

    # ----------------------- 运算 -----------------------

    def _coerce(self, other):
        if isinstance(other, ClassicalPoly):
            return other
        if isinstance(other, numbers.Real):
            return ClassicalPoly.constant(float(other), self.mode_count)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = defaultdict(float, self.as_dict())
        for m, c in other._terms:
            acc[m] += c
        return ClassicalPoly(acc, max(self.mode_count, other.mode_count))

    __radd__ = __add__

    def __neg__(self):
        return ClassicalPoly({m: -c for m, c in self._terms}, self.mode_count)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, numbers.Real):
            return ClassicalPoly({m: c * float(other) for m, c in self._terms}, self.mode_count)
        if not isinstance(other, ClassicalPoly):
            return NotImplemented
        acc: dict = defaultdict(float)
        for m1, c1 in self._terms:
            for m2, c2 in other._terms:
                acc[_multiply_monomials(m1, m2)] += c1 * c2
        return ClassicalPoly(acc, max(self.mode_count, other.mode_count))

    def __rmul__(self, other):
        if isinstance(other, numbers.Real):
            return self * other
        return NotImplemented

    def __pow__(self, exponent: int):
        if not isinstance(exponent, numbers.Integral) or exponent < 0:
            raise AlgebraError(f"only non-negative integer powers are supported, got {exponent!r}")
        result = ClassicalPoly.constant(1.0, self.mode_count)
        for _ in range(int(exponent)):
            result = result * self
        return result

    def partial_derivative(self, var) -> "ClassicalPoly":
        """精确的形式偏导"""
        var = parse_variable(var)
        acc: dict = defaultdict(float)
        for mono, coef in self._terms:
            exps = dict(mono)
            e = exps.get(var, 0)
            if e == 0:
                continue
            exps[var] = e - 1
            acc[tuple((v, k) for v, k in sorted(exps.items()) if k)] += coef * e
        return ClassicalPoly(acc, self.mode_count)

    def evaluate(self, phi=None, pi=None, phidot=None):
        """
        在相空间点上求值
        参数:
            phi, pi, phidot: 形如 (n,) 或 (n, K) 的数组，第二维为批量点
        返回:
            标量或形如 (K,) 的数组
        """
        values = {"phi": phi, "pi": pi, "phidot": phidot}
        template = None
        for arr in (phi, pi, phidot):
            if arr is not None:
                template = np.zeros(np.shape(arr)[1:])
                break
        total = 0.0 if template is None else template
        for mono, coef in self._terms:
            term = coef
            for (kind, j), e in mono:
                arr = values[kind]
                if arr is None:
                    raise DomainError(f"no value supplied for {kind}{j}")
                term = term * np.asarray(arr[j - 1]) ** e
            total = total + term
        return total

    # ----------------------- 比较 / 序列化 -----------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, numbers.Real):
            other = ClassicalPoly.constant(float(other), self.mode_count)
        if not isinstance(other, ClassicalPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def to_text(self) -> str:
        """规范序列化: 单项式按变量字典序，系数17位有效数字"""
        if not self._terms:
            return "0"
        pieces = []
        for index, (mono, coef) in enumerate(self._terms):
            magnitude = format(abs(coef), ".17g")
            factors = [
                variable_name(var) + (f"^{e}" if e != 1 else "")
                for var, e in mono
            ]
            body = "*".join([magnitude] + factors)
            if index == 0:
                pieces.append(("-" if coef < 0 else "") + body)
            else:
                pieces.append((" - " if coef < 0 else " + ") + body)
        return "".join(pieces)

    def __repr__(self) -> str:
        return f"ClassicalPoly({self.to_text()!r}, mode_count={self.mode_count})"

    __str__ = to_text


def partial_derivative(f: ClassicalPoly, var) -> ClassicalPoly:
    return f.partial_derivative(var)


# ================================ 算符运算 ================================

def normal_order(p, mode_count: int | None = None) -> OperatorPoly:
    """
    正规序: 产生算符在左，各块内按 (族, 模式) 排序
    接受 OperatorPoly (已规范, 幂等) 或 {单词: 系数} 原始映射
    """
    if isinstance(p, OperatorPoly):
        return OperatorPoly(p.as_dict(), mode_count or p.mode_count)
    return OperatorPoly(p, mode_count or 1)


def commutator(p: OperatorPoly, q: OperatorPoly) -> OperatorPoly:
    """[p, q] = pq − qp (规范形式)"""
    return p * q - q * p


def arith(kind: str, *operands):
    """
    算术分派: add / scale / multiply / adjoint
    scale 的第一个操作数为标量
    """
    if kind == "add":
        result = operands[0]
        for op in operands[1:]:
            result = result + op
        return result
    if kind == "scale":
        scalar, poly = operands
        return poly * scalar
    if kind == "multiply":
        result = operands[0]
        for op in operands[1:]:
            result = result * op
        return result
    if kind == "adjoint":
        (poly,) = operands
        return poly.adjoint()
    raise AlgebraError(f"unknown arithmetic kind {kind!r}")


def _check_mode(j: int, mode_count: int) -> None:
    if not 1 <= j <= mode_count:
        raise ModeIndexError(f"mode index {j} outside 1..{mode_count}")


def phi_op(j: int, mode_count: int | None = None, family: str = FAMILY_A) -> OperatorPoly:
    """Φ_j = ½(a_j + a_j⁺)"""
    n = mode_count or j
    _check_mode(j, n)
    lo, hi = Generator(family, j, False), Generator(family, j, True)
    return OperatorPoly({(lo,): 0.5, (hi,): 0.5}, n, ordered=True)


def pi_op(j: int, mode_count: int | None = None, family: str = FAMILY_A) -> OperatorPoly:
    """Π_j = (1/2i)(a_j − a_j⁺)"""
    n = mode_count or j
    _check_mode(j, n)
    lo, hi = Generator(family, j, False), Generator(family, j, True)
    return OperatorPoly({(lo,): -0.5j, (hi,): 0.5j}, n, ordered=True)


# ================================ 量子化 ================================

FieldMap = Callable[[str, int], OperatorPoly]


def _default_field_map(mode_count: int) -> FieldMap:
    def field(kind: str, j: int) -> OperatorPoly:
        return phi_op(j, mode_count) if kind == "phi" else pi_op(j, mode_count)
    return field


def _reject_phidot(f: ClassicalPoly) -> None:
    if f.uses("phidot"):
        raise DomainError("phidot variables cannot be quantized with Φ/Π field operators")


def quantize_canonical(f: ClassicalPoly, field_map: FieldMap | None = None,
                       mode_count: int | None = None) -> OperatorPoly:
    """
    正则量子化 f_c: 每个单项式写成 Φ 因子在左、Π 因子在右的算符乘积
    参数:
        field_map: (kind, j) → 线性算符，默认 Φ_j / Π_j
    """
    _reject_phidot(f)
    n = mode_count or f.mode_count
    fmap = field_map or _default_field_map(n)
    result = OperatorPoly.zero(n)
    for mono, coef in f.terms:
        term = OperatorPoly.constant(coef, n)
        # 单项式内部已按变量字典序: phi 块在 pi 块之前
        for (kind, j), e in mono:
            term = term * (fmap(kind, j) ** e)
        result = result + term
    return result


def wick_colon(factors: Sequence[OperatorPoly], mode_count: int | None = None) -> OperatorPoly:
    """
    严格 Wick 正规积 :F_1 F_2 … F_k:
    展开乘积后每个单词只重排 (产生算符在左)，丢弃全部收缩常数
    """
    n = mode_count or max((f.mode_count for f in factors), default=1)
    words: dict = {(): 1.0 + 0j}
    for factor in factors:
        expanded: dict = defaultdict(complex)
        for w, c in words.items():
            for fw, fc in factor.terms:
                if len(w) + len(fw) > config.MAX_DEGREE:
                    raise DegreeOverflowError(
                        f"normal product degree exceeds maximum degree {config.MAX_DEGREE}"
                    )
                expanded[w + fw] += c * fc
        words = expanded
    raw: dict = defaultdict(complex)
    for w, c in words.items():
        raw[_colon_sort(w)] += c
    return OperatorPoly(raw, n, ordered=True)


def quantize_normal(f: ClassicalPoly, field_map: FieldMap | None = None,
                    mode_count: int | None = None) -> OperatorPoly:
    """
    正规量子化 f_n = :f(Φ, Π):
    代入场算符展开，按冒号约定丢弃所有收缩常数
    """
    _reject_phidot(f)
    n = mode_count or f.mode_count
    fmap = field_map or _default_field_map(n)
    result = OperatorPoly.zero(n)
    for mono, coef in f.terms:
        factors = []
        for (kind, j), e in mono:
            factors.extend([fmap(kind, j)] * e)
        result = result + wick_colon(factors, n) * coef
    return result


def annihilator_poly(f: ClassicalPoly, mode_count: int | None = None) -> OperatorPoly:
    """
    只用湮灭算符实现的 f(a, b): φ_j → a_j, φ̇_j → b_j (与次序无关)
    π 变量没有对应的湮灭算符，抛出 DomainError
    """
    if f.uses("pi"):
        raise DomainError("pi variables have no annihilator-only realization; use phidot for the b family")
    n = mode_count or f.mode_count
    raw: dict = defaultdict(complex)
    for mono, coef in f.terms:
        word = []
        for (kind, j), e in mono:
            g = a(j) if kind == "phi" else b(j)
            word.extend([g] * e)
        raw[_colon_sort(tuple(word))] += coef
    return OperatorPoly(raw, n, ordered=True)


def check_bracket_identity(f: ClassicalPoly, j: int, side: str) -> OperatorPoly:
    """
    括号恒等式残差:
        side='phi': [Φ_j, f_n] − (i/2)(∂f/∂π_j)_n
        side='pi' : [Π_j, f_n] + (i/2)(∂f/∂φ_j)_n
    恒等式成立时返回零多项式 (在 SYMBOLIC_ZERO_TOL 内)
    """
    n = max(f.mode_count, j)
    fn = quantize_normal(f, mode_count=n)
    if side == "phi":
        derivative = quantize_normal(f.partial_derivative(("pi", j)), mode_count=n)
        residual = commutator(phi_op(j, n), fn) - derivative * 0.5j
    elif side == "pi":
        derivative = quantize_normal(f.partial_derivative(("phi", j)), mode_count=n)
        residual = commutator(pi_op(j, n), fn) + derivative * 0.5j
    else:
        raise AlgebraError(f"side must be 'phi' or 'pi', got {side!r}")
    logger.debug(f"🧷 括号恒等式 side={side} j={j}: 残差最大系数 {residual.max_abs_coefficient():.3e}")
    return residual


# ================================ 随机多项式 ================================

def random_classical_poly(rng: np.random.Generator, mode_count: int, max_degree: int,
                          n_terms: int = 4, kinds: Iterable[str] = ("phi", "pi")) -> ClassicalPoly:
    """
    生成可复现的随机多项式 (恒等式测试套件使用)
    每个单项式的总次数均匀取自 0..max_degree
    """
    kinds = tuple(kinds)
    variables = [(kind, j) for kind in kinds for j in range(1, mode_count + 1)]
    terms: dict = defaultdict(float)
    for _ in range(n_terms):
        degree = int(rng.integers(0, max_degree + 1))
        exps: dict = defaultdict(int)
        for _ in range(degree):
            exps[variables[int(rng.integers(0, len(variables)))]] += 1
        coef = float(np.round(rng.uniform(-1.0, 1.0), 3))
        terms[tuple(sorted(exps.items()))] += coef
    return ClassicalPoly(terms, mode_count)
