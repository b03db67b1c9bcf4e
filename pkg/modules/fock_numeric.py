"""
🔢 截断 Fock 空间数值模块
功能：
  1. 📦 FockSpace: 每模式占据数截断 N，混合基数排列 (最低位寄存器在前)
  2. 🪜 阶梯算符矩阵与符号多项式的矩阵实现
  3. 📐 矩向量 v 与相干态 w 编码，经典密度矩阵 ρ
  4. 🎯 迹恒等式 Tr(ρM) 与 Poisson 截断尾部估计

寄存器顺序: A 族模式 1..n，然后 B 族模式 1..n (仅扩展空间)
第 r 个寄存器嵌入为 kron(I_{(N+1)^(R-1-r)}, op, I_{(N+1)^r})
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce
from typing import Sequence

import numpy as np
import psutil
from scipy import linalg, sparse
from scipy.stats import poisson

from config import config
from modules.errors import (
    EnsembleError,
    FamilyMismatchError,
    FockBudgetError,
    ModeIndexError,
    NonPhysicalStateError,
    ShapeMismatchError,
    TailBoundError,
)
from modules.operator_algebra import FAMILIES, FAMILY_A, Generator, OperatorPoly
from utils.logger import logger

LAYOUT = "mixed-radix-lsb"


# ================================ 空间 ================================

@dataclass(frozen=True)
class FockSpace:
    """截断 Fock 空间: mode_count 个模式 × families 个族，每寄存器维数 N+1"""

    mode_count: int
    cutoff: int
    families: tuple = (FAMILY_A,)

    def __post_init__(self):
        if self.mode_count < 1:
            raise ModeIndexError(f"mode_count must be ≥ 1, got {self.mode_count}")
        if self.cutoff < 1:
            raise FockBudgetError(f"cutoff must be ≥ 1, got {self.cutoff}")
        if not self.families or any(f not in FAMILIES for f in self.families):
            raise FamilyMismatchError(f"invalid families {self.families!r}")
        if self.dimension > config.MAX_DIMENSION:
            raise FockBudgetError(
                f"dimension {self.dimension} exceeds budget {config.MAX_DIMENSION} "
                f"(modes={self.mode_count}, cutoff={self.cutoff}, families={self.families})"
            )

    @property
    def register_count(self) -> int:
        return self.mode_count * len(self.families)

    @property
    def local_dimension(self) -> int:
        return self.cutoff + 1

    @property
    def dimension(self) -> int:
        return self.local_dimension ** self.register_count

    def register_index(self, g: Generator) -> int:
        if g.family not in self.families:
            raise FamilyMismatchError(f"generator {g} has family {g.family}, space has {self.families}")
        if g.mode > self.mode_count:
            raise ModeIndexError(f"generator {g} outside mode count {self.mode_count}")
        return self.families.index(g.family) * self.mode_count + (g.mode - 1)

    @cached_property
    def occupations(self) -> np.ndarray:
        """形如 (dimension, register_count) 的占据数表"""
        index = np.arange(self.dimension)
        base = self.local_dimension
        return np.stack([(index // base ** r) % base for r in range(self.register_count)], axis=1)

    def basis_index(self, occupation: Sequence[int]) -> int:
        if len(occupation) != self.register_count:
            raise ShapeMismatchError(f"expected {self.register_count} occupations, got {len(occupation)}")
        return sum(int(k) * self.local_dimension ** r for r, k in enumerate(occupation))

    def describe(self) -> dict:
        info = {"modes": self.mode_count, "cutoff": self.cutoff, "layout": LAYOUT}
        if self.families != (FAMILY_A,):
            info["families"] = list(self.families)
            info["cutoffs"] = {f: self.cutoff for f in self.families}
        return info


def _check_memory(dimension: int, what: str) -> None:
    """稠密矩阵分配前检查可用内存"""
    needed = dimension * dimension * 16
    available = psutil.virtual_memory().available
    if needed > config.MEMORY_WARN_FRACTION * available:
        logger.warning(
            f"⚠️ {what}: 稠密矩阵需要 {needed / 2**20:.1f} MiB，可用内存 {available / 2**20:.1f} MiB"
        )


def interior_mask(space: FockSpace, margin: int) -> np.ndarray:
    """所有寄存器占据数 ≤ N − margin 的基矢掩码"""
    return np.all(space.occupations <= space.cutoff - margin, axis=1)


def restrict(matrix: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """矩阵限制到掩码子空间"""
    return matrix[np.ix_(mask, mask)]


def register_product(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """按 LSB 布局把各寄存器向量 (寄存器 0 在前) 做 Kronecker 积"""
    return reduce(np.kron, reversed([np.asarray(v, dtype=complex) for v in vectors]))


# ================================ 状态类型 ================================

@dataclass(frozen=True, eq=False)
class PhasePoint:
    """相空间点 (φ, π)；二阶系统中 π 解释为 φ̇"""

    phi: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        pi = np.atleast_1d(np.asarray(self.pi, dtype=float))
        if phi.shape != pi.shape or phi.ndim != 1:
            raise ShapeMismatchError(f"phi shape {phi.shape} and pi shape {pi.shape} differ")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(pi))):
            raise ShapeMismatchError("phase point has non-finite entries")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "pi", pi)

    @property
    def mode_count(self) -> int:
        return self.phi.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.phi + 1j * self.pi


@dataclass(frozen=True, eq=False)
class Ensemble:
    """有限点质量系综: 权重非负且和为 1 (1e-12 内)"""

    points: tuple
    weights: np.ndarray

    def __post_init__(self):
        points = tuple(self.points)
        weights = np.asarray(self.weights, dtype=float)
        if not points:
            raise EnsembleError("ensemble is empty")
        if weights.shape != (len(points),):
            raise EnsembleError(f"{len(points)} points but weights of shape {weights.shape}")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise EnsembleError("weights must be finite and non-negative")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise EnsembleError(f"weights sum to {weights.sum():.17g}, expected 1")
        if len({p.mode_count for p in points}) != 1:
            raise EnsembleError("points have different mode counts")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def point_mass(cls, point: PhasePoint) -> "Ensemble":
        return cls((point,), np.ones(1))

    @classmethod
    def normalized(cls, points: Sequence[PhasePoint], weights: Sequence[float] | None = None) -> "Ensemble":
        """权重按和重新归一 (默认均匀)"""
        w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=float)
        if len(points) == 0 or w.sum() <= 0:
            raise EnsembleError("cannot normalize an empty or zero-weight ensemble")
        return cls(tuple(points), w / w.sum())

    @property
    def mode_count(self) -> int:
        return self.points[0].mode_count

    @property
    def phi(self) -> np.ndarray:
        """形如 (n, K)"""
        return np.stack([p.phi for p in self.points], axis=1)

    @property
    def pi(self) -> np.ndarray:
        return np.stack([p.pi for p in self.points], axis=1)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=False)
class StateVector:
    space: FockSpace
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.space.dimension,):
            raise ShapeMismatchError(f"vector shape {entries.shape} vs dimension {self.space.dimension}")
        if not np.all(np.isfinite(entries)):
            raise ShapeMismatchError("state vector has non-finite entries")
        object.__setattr__(self, "entries", entries)

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector(self.space, self.entries + other.entries)

    def __mul__(self, scalar) -> "StateVector":
        return StateVector(self.space, self.entries * scalar)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {**self.space.describe(), "re": self.entries.real.tolist(), "im": self.entries.imag.tolist()}


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: FockSpace
    entries: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        dim = self.space.dimension
        if entries.shape != (dim, dim):
            raise ShapeMismatchError(f"density matrix shape {entries.shape} vs dimension {dim}")
        if np.max(np.abs(entries - entries.conj().T), initial=0.0) > config.HERMITIAN_TOL:
            raise ShapeMismatchError("density matrix is not Hermitian")
        lowest = float(linalg.eigvalsh(entries, subset_by_index=[0, 0])[0])
        floor = -config.PSD_TOL * max(1.0, abs(float(np.trace(entries).real)))
        if lowest < floor:
            raise NonPhysicalStateError(f"density matrix is not positive semidefinite (λ_min={lowest:.3e})")
        object.__setattr__(self, "entries", entries)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def to_dict(self) -> dict:
        return {
            **self.space.describe(),
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }


# ================================ 截断尾部 ================================

def suggest_cutoff(amplitude: float) -> int:
    """经验规则 N ≥ |z|² + 6|z| + 10 (目标尾部 < 1e-8)"""
    r = float(abs(amplitude))
    return int(math.ceil(r * r + 6 * r + 10))


def amplitude_tail(amplitudes, cutoff: int) -> float:
    """各模式 Poisson(|z|²) 占据数超过 cutoff 的概率之和 (并集上界)"""
    means = np.abs(np.asarray(amplitudes, dtype=complex).ravel()) ** 2
    return float(np.sum(poisson.sf(cutoff, means)))


def enforce_tail(amplitudes, cutoff: int, what: str) -> float:
    """
    尾部策略: 超过 TAIL_REFUSAL 拒绝并给出建议截断，超过 TAIL_TARGET 警告
    返回:
        尾部上界
    """
    bound = amplitude_tail(amplitudes, cutoff)
    largest = float(np.max(np.abs(amplitudes), initial=0.0))
    if bound > config.TAIL_REFUSAL:
        raise TailBoundError(f"{what}: truncation tail too large at cutoff {cutoff}", bound, suggest_cutoff(largest))
    if bound > config.TAIL_TARGET:
        logger.warning(f"⚠️ {what}: 截断尾部 {bound:.3e} 超过目标 {config.TAIL_TARGET:.0e}，建议截断 ≥ {suggest_cutoff(largest)}")
    return bound


def truncation_bound(space: FockSpace, ens: Ensemble) -> float:
    """系综各点尾部上界的最大值"""
    return max(amplitude_tail(p.z, space.cutoff) for p in ens.points)


# ================================ 矩阵实现 ================================

def _single_register_annihilator(cutoff: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), offsets=1, format="csr")


def embed_register(space: FockSpace, register: int, local) -> sparse.csr_matrix:
    """单寄存器算符嵌入全空间: kron(I, local, I)"""
    base = space.local_dimension
    left = sparse.identity(base ** (space.register_count - 1 - register), format="csr")
    right = sparse.identity(base ** register, format="csr")
    return sparse.kron(sparse.kron(left, sparse.csr_matrix(local)), right, format="csr").astype(complex)


@lru_cache(maxsize=256)
def _ladder_sparse(space: FockSpace, g: Generator) -> sparse.csr_matrix:
    local = _single_register_annihilator(space.cutoff)
    if g.dagger:
        local = local.T.tocsr()
    return embed_register(space, space.register_index(g), local)


def ladder_matrix(space: FockSpace, g: Generator) -> np.ndarray:
    """
    阶梯算符矩阵: a|k⟩ = √k|k−1⟩, a⁺|k⟩ = √(k+1)|k+1⟩ (在 N 处截断)，其余寄存器为单位阵
    """
    _check_memory(space.dimension, "ladder_matrix")
    return _ladder_sparse(space, g).toarray()


def realize_sparse(space: FockSpace, p: OperatorPoly, generator_matrix=None) -> sparse.csr_matrix:
    """
    稀疏实现；generator_matrix: Generator → 稀疏矩阵 (默认为阶梯算符矩阵)
    """
    generator_matrix = generator_matrix or (lambda g: _ladder_sparse(space, g))
    if p.mode_count > space.mode_count:
        raise ModeIndexError(f"polynomial has {p.mode_count} modes, space has {space.mode_count}")
    missing = p.families() - set(space.families)
    if missing:
        raise FamilyMismatchError(f"families {sorted(missing)} not present in space {space.families}")
    identity = sparse.identity(space.dimension, dtype=complex, format="csr")
    total = sparse.csr_matrix((space.dimension, space.dimension), dtype=complex)
    for word, coef in p.terms:
        product = identity
        for g in word:
            product = product @ generator_matrix(g)
        total = total + coef * product
    return total


def realize(space: FockSpace, p: OperatorPoly) -> np.ndarray:
    """
    逐单词矩阵乘积实现 OperatorPoly，对各项线性
    返回:
        稠密复矩阵 (dimension × dimension)
    """
    _check_memory(space.dimension, "realize")
    matrix = realize_sparse(space, p).toarray()
    logger.debug(f"🔢 realize: {len(p)} 项 → 维数 {space.dimension}")
    return matrix


def realize_word(space: FockSpace, word: Sequence[Generator]) -> np.ndarray:
    """原始单词 (不做正规序) 的矩阵乘积"""
    product = sparse.identity(space.dimension, dtype=complex, format="csr")
    for g in word:
        product = product @ _ladder_sparse(space, g)
    return product.toarray()


# ================================ 编码 ================================

def series_register(amplitude: complex, cutoff: int) -> np.ndarray:
    """单寄存器级数 amplitude^k / √(k!)，k = 0..cutoff"""
    out = np.empty(cutoff + 1, dtype=complex)
    out[0] = 1.0
    for k in range(1, cutoff + 1):
        out[k] = out[k - 1] * amplitude / math.sqrt(k)
    return out


def moment_vector(space: FockSpace, phi) -> StateVector:
    """
    v = exp(Σ_j φ_j a_j⁺)|0⟩ 的截断级数
    占据数 k 上的分量为 Π_j φ_j^{k_j}/√(k_j!)
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    if phi.shape != (space.mode_count,) or space.families != (FAMILY_A,):
        raise ShapeMismatchError(f"moment_vector needs {space.mode_count} amplitudes on an A-only space")
    enforce_tail(phi, space.cutoff, "moment_vector")
    return StateVector(space, register_product([series_register(x, space.cutoff) for x in phi]))


def coherent_vector(space: FockSpace, point: PhasePoint) -> StateVector:
    """w = exp(Σ_j z_j a_j⁺ − ½|z_j|²)|0⟩, z_j = φ_j + iπ_j"""
    if point.mode_count != space.mode_count or space.families != (FAMILY_A,):
        raise ShapeMismatchError(f"coherent_vector needs a {space.mode_count}-mode point on an A-only space")
    enforce_tail(point.z, space.cutoff, "coherent_vector")
    registers = [np.exp(-0.5 * abs(z) ** 2) * series_register(z, space.cutoff) for z in point.z]
    return StateVector(space, register_product(registers))


def density_matrix(space: FockSpace, ens: Ensemble) -> DensityMatrix:
    """
    ρ = Σ_k weight_k · w_k w_k^H
    返回:
        DensityMatrix (附带系综尾部上界)
    """
    _check_memory(space.dimension, "density_matrix")
    columns = np.stack([coherent_vector(space, p).entries for p in ens.points], axis=1)
    rho = (columns * ens.weights) @ columns.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    tail = truncation_bound(space, ens)
    trace = float(np.trace(rho).real)
    if not (1.0 - max(tail, 0.0) - 1e-12 <= trace <= 1.0 + 1e-12):
        logger.warning(f"⚠️ density_matrix: 迹 {trace:.17g} 超出 [1 − {tail:.3e}, 1]")
    logger.debug(f"📊 density_matrix: {len(ens)} 个点, 维数 {space.dimension}, 迹 {trace:.15f}")
    return DensityMatrix(space, rho, tail)


def expectation(rho: DensityMatrix, M: np.ndarray) -> complex:
    """
    Tr(ρM)，按固定下标顺序求和
    M 为 Hermitian 时虚部必须低于 EXPECTATION_IMAG_TOL (按 |M| 缩放)
    """
    M = np.asarray(M)
    if M.shape != rho.entries.shape:
        raise ShapeMismatchError(f"operator shape {M.shape} vs density matrix {rho.entries.shape}")
    value = complex(np.einsum("ij,ji->", rho.entries, M))
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    hermitian = np.max(np.abs(M - M.conj().T), initial=0.0) <= config.HERMITIAN_TOL * scale
    if hermitian and abs(value.imag) > config.EXPECTATION_IMAG_TOL * scale:
        raise NonPhysicalStateError(f"expectation of a Hermitian operator has imaginary part {value.imag:.3e}")
    return value


# ================================ 矩读出 ================================

def ensemble_moment_vector(space: FockSpace, ens: Ensemble) -> StateVector:
    """Σ_k weight_k · v(φ_k)"""
    total = np.zeros(space.dimension, dtype=complex)
    for weight, point in zip(ens.weights, ens.points):
        total = total + weight * moment_vector(space, point.phi).entries
    return StateVector(space, total)


def extract_moment(v: StateVector, modes: Sequence[int]) -> float:
    """
    从矩向量读出 ⟨φ_{i1}…φ_{im}⟩
    参数:
        modes: 模式下标序列，例如 (1, 1) 表示 ⟨φ_1²⟩
    """
    space = v.space
    occupation = [0] * space.register_count
    for j in modes:
        if not 1 <= j <= space.mode_count:
            raise ModeIndexError(f"mode index {j} outside 1..{space.mode_count}")
        occupation[j - 1] += 1
    if max(occupation, default=0) > space.cutoff:
        raise ShapeMismatchError(f"moment order exceeds cutoff {space.cutoff}")
    scale = math.prod(math.sqrt(math.factorial(k)) for k in occupation)
    return float(v.entries[space.basis_index(occupation)].real * scale)

