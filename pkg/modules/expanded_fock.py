"""
🧬 扩展 Fock 空间模块 (二阶系统)
功能：
  1. 🌀 二阶系统 φ̈_j = −w_j²φ_j + g_j(φ)，g_j = −∂f/∂φ_j
  2. 📦 (a, b) 双族空间上的 v 编码与湮灭算符函数作用
  3. 🪞 具体化算符 X: X a X⁻¹ = (a + a⁺)/√2, X a⁺ X⁻¹ = (a⁺ − a)/√2 (b 族相同)
  4. ⚡ 增益算符 G (v 图景与 z 图景)，z 图景生成元反 Hermitian
  5. 🔋 λ 型 / Q 型能量算符分类，平衡点稳态检查

每个构造都经过"转录守卫"数值验证后才返回：
  X 验证共轭关系，G 验证有限差分动力学，H_v/H_z 验证本征关系
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Sequence

import numpy as np
from scipy import linalg, optimize, sparse

from config import config
from modules.classical_dynamics import HamiltonianSystem, integrate
from modules.errors import (
    DegenerateSystemError,
    DomainError,
    EnergyTranscriptionError,
    GainTranscriptionError,
    NonEquilibriumError,
    ReificationError,
    ZeroNormStateError,
)
from modules.fock_numeric import (
    FockSpace,
    PhasePoint,
    StateVector,
    embed_register,
    enforce_tail,
    interior_mask,
    realize,
    realize_sparse,
    register_product,
    restrict,
    series_register,
)
from modules.operator_algebra import (
    FAMILY_A,
    FAMILY_B,
    ClassicalPoly,
    Generator,
    OperatorPoly,
    a,
    a_dag,
    annihilator_poly,
    b,
    b_dag,
)
from utils.logger import logger

# 超过该维数时跳过稠密的 X 交织检查
INTERTWINING_MAX_DIMENSION = 4096

# 平衡点方程残差上限
EQUILIBRIUM_TOL = 1e-10


def expanded_space(mode_count: int, cutoff: int) -> FockSpace:
    """扩展空间: 寄存器为 A 族 1..n 后接 B 族 1..n"""
    return FockSpace(mode_count, cutoff, (FAMILY_A, FAMILY_B))


# ================================ 二阶系统 ================================

@dataclass(frozen=True, eq=False)
class SecondOrderSystem:
    """频率 w_j > 0 与只含 φ 的相互作用 f；g_j = −∂f/∂φ_j"""

    w: np.ndarray
    f: ClassicalPoly
    g: tuple

    @classmethod
    def create(cls, w: Sequence[float], f: ClassicalPoly | None = None) -> "SecondOrderSystem":
        w = np.atleast_1d(np.asarray(w, dtype=float))
        n = w.shape[0]
        f = ClassicalPoly.constant(0.0, n) if f is None else f
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise DomainError(f"frequencies must be positive, got {w.tolist()}")
        if f.uses("pi") or f.uses("phidot"):
            raise DomainError("interaction f may only depend on phi variables")
        if f.mode_count > n:
            raise DomainError(f"interaction uses {f.mode_count} modes, only {n} frequencies given")
        f = ClassicalPoly(f.as_dict(), n)
        g = tuple(-f.partial_derivative(("phi", j)) for j in range(1, n + 1))
        return cls(w, f, g)

    @property
    def mode_count(self) -> int:
        return self.w.shape[0]

    def _quadratic(self, velocity_kind: str) -> ClassicalPoly:
        n = self.mode_count
        total = ClassicalPoly.constant(0.0, n)
        for j in range(1, n + 1):
            total = total + 0.5 * ClassicalPoly.variable((velocity_kind, j), n) ** 2
            total = total + 0.5 * self.w[j - 1] ** 2 * ClassicalPoly.variable(("phi", j), n) ** 2
        return total

    def hamiltonian(self) -> ClassicalPoly:
        """H = Σ½π_j² + Σ½w_j²φ_j² + f(φ)"""
        return self._quadratic("pi") + self.f

    def energy_poly(self) -> ClassicalPoly:
        """同一能量写成 φ, φ̇ 的多项式"""
        return self._quadratic("phidot") + self.f

    def lagrangian(self) -> ClassicalPoly:
        """L = Σ½φ̇_j² − Σ½w_j²φ_j² − f(φ)"""
        n = self.mode_count
        total = -self.f
        for j in range(1, n + 1):
            total = total + 0.5 * ClassicalPoly.variable(("phidot", j), n) ** 2
            total = total - 0.5 * self.w[j - 1] ** 2 * ClassicalPoly.variable(("phi", j), n) ** 2
        return total

    def acceleration(self, phi) -> np.ndarray:
        """φ̈_j = −w_j²φ_j + g_j(φ)"""
        phi = np.asarray(phi, dtype=float)
        return np.array([-self.w[j] ** 2 * phi[j] + self.g[j].evaluate(phi) for j in range(self.mode_count)])

    def hamiltonian_system(self) -> HamiltonianSystem:
        return HamiltonianSystem.from_hamiltonian(self.hamiltonian(), self.mode_count)

    def classical_energy(self, point: PhasePoint) -> float:
        return float(self.energy_poly().evaluate(point.phi, phidot=point.pi))

    def curvature(self, phi=None) -> np.ndarray:
        """diag(w²) + Hess f(φ)，默认在原点"""
        n = self.mode_count
        phi = np.zeros(n) if phi is None else np.asarray(phi, dtype=float)
        hess = np.empty((n, n))
        for j in range(n):
            first = self.f.partial_derivative(("phi", j + 1))
            for k in range(n):
                hess[j, k] = first.partial_derivative(("phi", k + 1)).evaluate(phi)
        return np.diag(self.w ** 2) + hess


def second_order_system(w: Sequence[float], f: ClassicalPoly | None = None) -> HamiltonianSystem:
    """二阶系统对应的一阶哈密顿系统 (π ≡ φ̇)"""
    return SecondOrderSystem.create(w, f).hamiltonian_system()


def check_nondegenerate(sys: SecondOrderSystem) -> None:
    """原点曲率矩阵 diag(w²) + Hess f(0) 奇异时拒绝"""
    curvature = sys.curvature()
    singular = np.linalg.svd(curvature, compute_uv=False).min()
    if singular <= 1e-12 * max(1.0, np.abs(curvature).max()):
        raise DegenerateSystemError(f"curvature matrix at the origin is singular (σ_min={singular:.3e})")


def find_equilibrium(sys: SecondOrderSystem, guess: Sequence[float]) -> np.ndarray:
    """
    用 scipy.optimize.root 求解 −w²φ + g(φ) = 0
    返回:
        平衡点 φ*
    """
    check_nondegenerate(sys)
    guess = np.atleast_1d(np.asarray(guess, dtype=float))

    def jacobian(phi):
        return -sys.curvature(phi)

    solution = optimize.root(sys.acceleration, guess, jac=jacobian, method="hybr", tol=1e-14)
    residual = float(np.max(np.abs(sys.acceleration(solution.x))))
    if residual > EQUILIBRIUM_TOL:
        raise NonEquilibriumError(f"root solver did not reach an equilibrium (residual {residual:.3e})")
    logger.info(f"⚖️ find_equilibrium: φ* = {solution.x.tolist()}, 残差 {residual:.3e}")
    return solution.x


# ================================ v 编码 ================================

def encode_v(space: FockSpace, point: PhasePoint) -> StateVector:
    """v = exp(Σ_j φ_j a_j⁺ + φ̇_j b_j⁺)|0⟩ (未归一)，point.pi 解释为 φ̇"""
    _require_expanded(space, point.mode_count)
    amplitudes = np.concatenate([point.phi, point.pi])
    enforce_tail(amplitudes, space.cutoff, "encode_v")
    return StateVector(space, register_product([series_register(x, space.cutoff) for x in amplitudes]))


def apply_classical_function(space: FockSpace, f: ClassicalPoly, v: StateVector) -> StateVector:
    """
    f(a, b)·v，只用湮灭算符 (φ → a, φ̇ → b)
    π 变量没有湮灭算符实现，抛出 DomainError
    """
    op = annihilator_poly(f, space.mode_count)
    return StateVector(space, realize_sparse(space, op) @ v.entries)


def _require_expanded(space: FockSpace, mode_count: int | None = None) -> None:
    if space.families != (FAMILY_A, FAMILY_B):
        raise DomainError(f"expected an expanded (A, B) space, got families {space.families}")
    if mode_count is not None and mode_count != space.mode_count:
        raise DomainError(f"point has {mode_count} modes, space has {space.mode_count}")


# ================================ 具体化算符 X ================================

def _hermite_at_zero(size: int) -> np.ndarray:
    """ψ_k(0)，k = 0..size-1"""
    h = np.zeros(size)
    h[0] = math.pi ** -0.25
    for k in range(1, size - 1, 2):
        h[k + 1] = -math.sqrt(k / (k + 1)) * h[k - 1]
    return h


def _derivative_matrix(size: int) -> np.ndarray:
    """Hermite 函数基中的 d/dy = (a − a⁺)/√2"""
    lower = np.diag(np.sqrt(np.arange(1, size, dtype=float)), 1)
    return (lower - lower.T) / math.sqrt(2.0)


@lru_cache(maxsize=32)
def reification_block(cutoff: int, columns: int | None = None) -> np.ndarray:
    """
    单寄存器 X1[m, n] = (2π)^{1/4}·ψ_m^{(n)}(0)/√(n!)
    即 exp(−(π/8)(a² + a⁺²)) 的解析矩阵元；columns > cutoff+1 时给出矩形块
    """
    rows = cutoff + 1
    columns = rows if columns is None else columns
    size = rows + columns + 1
    D = _derivative_matrix(size)
    r = _hermite_at_zero(size)
    kappa = (2.0 * math.pi) ** 0.25
    block = np.empty((rows, columns))
    log_factorial = 0.0
    for n in range(columns):
        if n:
            r = r @ D
            log_factorial += math.log(n)
        block[:, n] = kappa * r[:rows] * math.exp(-0.5 * log_factorial)
    return block


def _position_matrix(size: int) -> np.ndarray:
    lower = np.diag(np.sqrt(np.arange(1, size, dtype=float)), 1)
    return (lower + lower.T) / math.sqrt(2.0)


def _relative_interior(residual: np.ndarray, reference: np.ndarray, mask: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(restrict(reference, mask)), initial=0.0)), 1e-300)
    return float(np.max(np.abs(restrict(residual, mask)), initial=0.0)) / scale


def block_conjugation_residuals(cutoff: int) -> dict:
    """单寄存器上 X a − x X 与 X a⁺ + D X 的内部相对残差 (占据数 ≤ N−1)"""
    X1 = reification_block(cutoff)
    lower = np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1)
    x = _position_matrix(cutoff + 1)
    minus_d = -_derivative_matrix(cutoff + 1)
    mask = np.arange(cutoff + 1) <= cutoff - 1
    return {
        "annihilator": _relative_interior(X1 @ lower - x @ X1, X1 @ lower, mask),
        "creator": _relative_interior(X1 @ lower.T - minus_d @ X1, X1 @ lower.T, mask),
    }


def reification_X(space: FockSpace) -> np.ndarray:
    """
    全空间 X = ⊗_r X1 (LSB 布局)
    守卫: 单寄存器共轭残差 ≤ GUARD_TOL，否则抛出 ReificationError (附条件数)
    """
    _require_expanded(space)
    X1 = reification_block(space.cutoff)
    condition = float(np.linalg.cond(X1))
    residuals = block_conjugation_residuals(space.cutoff)
    worst = max(residuals.values())
    logger.info(f"🪞 reification_X: N={space.cutoff}, 条件数 {condition:.3e}, 共轭残差 {residuals}")
    if worst > config.GUARD_TOL:
        raise ReificationError(f"conjugation residual {worst:.3e} exceeds {config.GUARD_TOL}", condition)
    if condition > 1e12:
        logger.warning(f"⚠️ reification_X: X 病态 (条件数 {condition:.3e})，只使用线性求解")
    return reduce(np.kron, [X1] * space.register_count)


def conjugation_residuals(space: FockSpace, X: np.ndarray) -> dict:
    """
    全空间共轭残差: 每个生成元 g，比较 X·g 与 reified(g)·X 在内部子空间 (余量 1)
    """
    mask = interior_mask(space, 1)
    result = {}
    for family in space.families:
        for j in range(1, space.mode_count + 1):
            for g in (Generator(family, j, False), Generator(family, j, True)):
                plain = realize(space, OperatorPoly.from_generator(g, space.mode_count))
                reified = _reified_sparse(space, g).toarray()
                result[str(g)] = _relative_interior(X @ plain - reified @ X, X @ plain, mask)
    return result


def encode_z(space: FockSpace, point: PhasePoint) -> StateVector:
    """
    z = X·v，使用 REIFICATION_PAD 个额外占据数求和，z_m ≈ (2π)^{1/4}·ψ_m(φ)
    """
    _require_expanded(space, point.mode_count)
    amplitudes = np.concatenate([point.phi, point.pi])
    enforce_tail(amplitudes, space.cutoff, "encode_z")
    columns = space.cutoff + 1 + config.REIFICATION_PAD
    block = reification_block(space.cutoff, columns)
    registers = [block @ series_register(x, columns - 1) for x in amplitudes]
    return StateVector(space, register_product(registers))


def encode_z_ensemble(space: FockSpace, points: Sequence[PhasePoint], weights: Sequence[float]) -> StateVector:
    """系综叠加 Σ_k w_k z(point_k)"""
    total = np.zeros(space.dimension, dtype=complex)
    for weight, point in zip(weights, points):
        total = total + weight * encode_z(space, point).entries
    return StateVector(space, total)


# ================================ 增益算符 ================================

@lru_cache(maxsize=256)
def _reified_sparse(space: FockSpace, g: Generator) -> sparse.csr_matrix:
    """a → (a + a⁺)/√2, a⁺ → (a⁺ − a)/√2 (b 族同)"""
    size = space.local_dimension
    local = -_derivative_matrix(size) if g.dagger else _position_matrix(size)
    return embed_register(space, space.register_index(g), local)


def realize_reified(space: FockSpace, p: OperatorPoly) -> np.ndarray:
    """按 X 共轭替换每个生成元后的矩阵实现 (z 图景)"""
    return realize_sparse(space, p, lambda g: _reified_sparse(space, g)).toarray()


@dataclass(frozen=True, eq=False)
class GainOperators:
    G0: np.ndarray
    GI: np.ndarray
    picture: str
    G0_poly: OperatorPoly
    GI_poly: OperatorPoly

    @property
    def total(self) -> np.ndarray:
        return self.G0 + self.GI


def gain_polys(sys: SecondOrderSystem) -> tuple:
    """G0 = Σ(a_j⁺b_j − w_j² b_j⁺a_j)，GI = Σ b_j⁺·g_j(a)"""
    n = sys.mode_count
    G0, GI = OperatorPoly.zero(n), OperatorPoly.zero(n)
    for j in range(1, n + 1):
        G0 = G0 + OperatorPoly({(a_dag(j), b(j)): 1.0, (b_dag(j), a(j)): -sys.w[j - 1] ** 2}, n)
        GI = GI + OperatorPoly.from_generator(b_dag(j), n) * annihilator_poly(sys.g[j - 1], n)
    return G0, GI


def _guard_margin(sys: SecondOrderSystem) -> int:
    return max((g.degree for g in sys.g), default=0) + 2


def probe_point(sys: SecondOrderSystem) -> PhasePoint:
    """守卫使用的确定性探针点"""
    scale = config.GUARD_PROBE_AMPLITUDE / np.arange(1, sys.mode_count + 1)
    return PhasePoint(scale, -0.5 * scale)


def gain_finite_difference_residual(space: FockSpace, sys: SecondOrderSystem, G: np.ndarray,
                                    point: PhasePoint, h: float | None = None) -> float:
    """
    ‖(v(t+h) − v(t−h))/2h − G·v(t)‖ / ‖v(t)‖，限于内部子空间
    v(t±h) 由经典 RK4 单步得到
    """
    h = config.FINITE_DIFFERENCE_STEP if h is None else h
    hamiltonian = sys.hamiltonian_system()
    forward = integrate(hamiltonian, point, h, 1).final
    backward = integrate(hamiltonian, point, h, 1, backward=True).final
    v0 = encode_v(space, point).entries
    derivative = (encode_v(space, forward).entries - encode_v(space, backward).entries) / (2 * h)
    mask = interior_mask(space, _guard_margin(sys))
    residual = (derivative - G @ v0)[mask]
    return float(np.linalg.norm(residual) / np.linalg.norm(v0[mask]))


def antihermitian_residual(G: np.ndarray, mask: np.ndarray) -> float:
    block = restrict(G, mask)
    scale = max(float(np.max(np.abs(block), initial=0.0)), 1e-300)
    return float(np.max(np.abs(block + block.conj().T), initial=0.0)) / scale


def intertwining_residual(space: FockSpace, X: np.ndarray, A_v: np.ndarray, A_z: np.ndarray, margin: int) -> float:
    """X·A_v ≈ A_z·X 在内部子空间的相对残差 (无需求逆)"""
    mask = interior_mask(space, margin)
    return _relative_interior(X @ A_v - A_z @ X, X @ A_v, mask)


def gain_operators(space: FockSpace, sys: SecondOrderSystem, picture: str = "v") -> GainOperators:
    """
    增益算符 G = G0 + GI
    参数:
        picture: "v" (湮灭/产生算符直接实现) 或 "z" (X 共轭替换)
    守卫:
        有限差分残差 (两个图景都先检查 v 图景)；z 图景另检查内部反 Hermitian 与 X 交织
    """
    _require_expanded(space, sys.mode_count)
    if picture not in ("v", "z"):
        raise DomainError(f"picture must be 'v' or 'z', got {picture!r}")
    G0_poly, GI_poly = gain_polys(sys)
    G0_v, GI_v = realize(space, G0_poly), realize(space, GI_poly)

    fd = gain_finite_difference_residual(space, sys, G0_v + GI_v, probe_point(sys))
    logger.info(f"⚡ gain_operators: 有限差分残差 {fd:.3e}")
    if fd > config.GUARD_TOL:
        raise GainTranscriptionError(f"finite-difference residual {fd:.3e} exceeds {config.GUARD_TOL}")
    if picture == "v":
        return GainOperators(G0_v, GI_v, "v", G0_poly, GI_poly)

    G0_z, GI_z = realize_reified(space, G0_poly), realize_reified(space, GI_poly)
    margin = _guard_margin(sys)
    anti = antihermitian_residual(G0_z + GI_z, interior_mask(space, margin))
    logger.info(f"⚡ gain_operators(z): 内部反 Hermitian 残差 {anti:.3e}")
    if anti > config.GUARD_TOL:
        raise GainTranscriptionError(f"z-picture generator is not antiHermitian (residual {anti:.3e})")
    if space.dimension <= INTERTWINING_MAX_DIMENSION:
        X = reification_X(space)
        twist = intertwining_residual(space, X, G0_v + GI_v, G0_z + GI_z, margin)
        logger.info(f"⚡ gain_operators(z): X 交织残差 {twist:.3e}")
        if twist > config.GUARD_TOL:
            raise GainTranscriptionError(f"X·G_v and G_z·X disagree (residual {twist:.3e})")
    else:
        logger.warning(f"⚠️ 维数 {space.dimension} 超过 {INTERTWINING_MAX_DIMENSION}，跳过 X 交织检查")
    return GainOperators(G0_z, GI_z, "z", G0_poly, GI_poly)


def evolve_z(G: np.ndarray, z: StateVector, times: Sequence[float]) -> list:
    """exp(G t)·z (Padé 矩阵指数)"""
    return [StateVector(z.space, linalg.expm(G * t) @ z.entries) for t in times]


# ================================ 能量算符 ================================

def phi_vector_op(space: FockSpace, sys: SecondOrderSystem, j: int) -> np.ndarray:
    """Φ_j = (a_j + a_j⁺)/√(2w_j)"""
    _require_expanded(space, sys.mode_count)
    if not 1 <= j <= space.mode_count:
        raise DomainError(f"mode index {j} outside 1..{space.mode_count}")
    scale = 1.0 / math.sqrt(2.0 * sys.w[j - 1])
    return realize(space, OperatorPoly({(a(j),): scale, (a_dag(j),): scale}, space.mode_count))


def classify_energy_operator(Hm: np.ndarray, states: Sequence, tol: float | None = None,
                             mask: np.ndarray | None = None) -> dict:
    """
    λ 型: 每个态 H v = E v (E 实)；Q 型: v⁺Hv = E‖v‖² 且 E 实
    参数:
        mask: 只在该子空间上比较 (截断算符的内部)
    返回:
        {"verdict", "energies", "lambda_residuals", "q_residuals"}
    """
    tol = config.GUARD_TOL if tol is None else tol
    energies, lam_res, q_res = [], [], []
    for state in states:
        v = state.entries if isinstance(state, StateVector) else np.asarray(state, dtype=complex)
        Hv = Hm @ v
        if mask is not None:
            v, Hv = v[mask], Hv[mask]
        norm2 = float(np.vdot(v, v).real)
        if norm2 == 0.0:
            raise ZeroNormStateError("cannot classify against a zero-norm state")
        rayleigh = complex(np.vdot(v, Hv)) / norm2
        energies.append(rayleigh.real)
        q_res.append(abs(rayleigh.imag))
        lam_res.append(float(np.linalg.norm(Hv - rayleigh * v) / math.sqrt(norm2)))
    q_type = all(r <= tol for r in q_res)
    lambda_type = q_type and all(r <= tol for r in lam_res)
    verdict = "lambda_type" if lambda_type else ("q_type" if q_type else "neither")
    logger.debug(f"🔋 classify_energy_operator: {verdict}, E={energies}")
    return {"verdict": verdict, "energies": energies, "lambda_residuals": lam_res, "q_residuals": q_res}


def energy_operator_poly(sys: SecondOrderSystem) -> OperatorPoly:
    """H_v = Σ(½b_j² + ½w_j²a_j²) + f(a)，只含湮灭算符"""
    return annihilator_poly(sys.energy_poly(), sys.mode_count)


def _energy_guard(space: FockSpace, sys: SecondOrderSystem, Hm: np.ndarray, vector: StateVector, label: str) -> None:
    point = probe_point(sys)
    margin = max(sys.energy_poly().degree, 2) + 1
    verdict = classify_energy_operator(Hm, [vector], mask=interior_mask(space, margin))
    expected = sys.classical_energy(point)
    error = abs(verdict["energies"][0] - expected)
    logger.info(f"🔋 {label}: 本征残差 {verdict['lambda_residuals'][0]:.3e}, 能量误差 {error:.3e}")
    if verdict["verdict"] != "lambda_type" or error > config.GUARD_TOL * max(1.0, abs(expected)):
        raise EnergyTranscriptionError(
            f"{label} fails the eigen-relation on the probe point "
            f"(residual {verdict['lambda_residuals'][0]:.3e}, energy error {error:.3e})"
        )


def build_Hv(space: FockSpace, sys: SecondOrderSystem) -> np.ndarray:
    """v 图景能量算符，守卫: 探针点上本征值等于经典能量"""
    _require_expanded(space, sys.mode_count)
    Hv = realize(space, energy_operator_poly(sys))
    _energy_guard(space, sys, Hv, encode_v(space, probe_point(sys)), "build_Hv")
    return Hv


def build_Hz(space: FockSpace, sys: SecondOrderSystem) -> np.ndarray:
    """
    z 图景能量算符 = 乘法算符 Σ(½y_j² + ½w_j²x_j²) + f(x)，x_j = √w_j·Φ_j
    守卫: z 向量上的本征关系与 X·H_v ≈ H_z·X
    """
    _require_expanded(space, sys.mode_count)
    poly = energy_operator_poly(sys)
    positions = {
        j: sparse.csr_matrix(math.sqrt(sys.w[j - 1]) * phi_vector_op(space, sys, j))
        for j in range(1, sys.mode_count + 1)
    }

    def z_generator(g):
        # 势能部分: a_j → x_j = √w_j·Φ_j；动能部分 b_j 按 X 共轭
        if g.family == FAMILY_A and not g.dagger:
            return positions[g.mode]
        return _reified_sparse(space, g)

    Hz = realize_sparse(space, poly, z_generator).toarray()
    _energy_guard(space, sys, Hz, encode_z(space, probe_point(sys)), "build_Hz")
    if space.dimension <= INTERTWINING_MAX_DIMENSION:
        margin = max(sys.energy_poly().degree, 2) + 1
        twist = intertwining_residual(space, reification_X(space), realize(space, poly), Hz, margin)
        logger.info(f"🔋 build_Hz: X 交织残差 {twist:.3e}")
        if twist > config.GUARD_TOL:
            raise EnergyTranscriptionError(f"X·H_v and H_z·X disagree (residual {twist:.3e})")
    return Hz


def equilibrium_gain_check(space: FockSpace, sys: SecondOrderSystem, point: PhasePoint,
                           gains: GainOperators | None = None, gains_z: GainOperators | None = None) -> dict:
    """
    平衡点 (φ̇ = 0, −w²φ + g(φ) = 0) 的编码是稳态: ‖G v‖/‖v‖ 与 ‖G_z z‖/‖z‖ (内部)
    """
    accel = float(np.max(np.abs(sys.acceleration(point.phi))))
    velocity = float(np.max(np.abs(point.pi)))
    if max(accel, velocity) > EQUILIBRIUM_TOL:
        raise NonEquilibriumError(f"point is not an equilibrium (|φ̈|={accel:.3e}, |φ̇|={velocity:.3e})")
    gains = gains or gain_operators(space, sys, "v")
    gains_z = gains_z or gain_operators(space, sys, "z")
    mask = interior_mask(space, _guard_margin(sys))
    v = encode_v(space, point).entries
    z = encode_z(space, point).entries
    result = {
        "v": float(np.linalg.norm((gains.total @ v)[mask]) / np.linalg.norm(v[mask])),
        "z": float(np.linalg.norm((gains_z.total @ z)[mask]) / np.linalg.norm(z[mask])),
    }
    logger.info(f"⚖️ equilibrium_gain_check: {result}")
    return result
