"""
⚖️ 经典-Heisenberg 等价性模块
功能：
  1. ⚛️ 正规序哈密顿量 H_n 的矩阵实现 (Heisenberg 生成元)
  2. ⏱️ Q(t) = U⁺ Q U, U = exp(−2i·H_n·t)，缓存本征分解
  3. 🧷 瞬时恒等式与 t=0 处时间导数匹配
  4. 📈 经典系综轨迹与量子迹 Tr(ρ(0)Q(t)) 的逐时比较报告
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from config import config
from modules.classical_dynamics import (
    HamiltonianSystem,
    classical_expectation,
    ensemble_history,
    time_derivative_poly,
)
from modules.errors import EquivalenceError, NonHermitianGeneratorError, ShapeMismatchError, TailBoundError
from modules.fock_numeric import (
    DensityMatrix,
    Ensemble,
    FockSpace,
    PhasePoint,
    coherent_vector,
    density_matrix,
    expectation,
    realize,
    suggest_cutoff,
    truncation_bound,
)
from modules.operator_algebra import ClassicalPoly, OperatorPoly, commutator, phi_op, pi_op, quantize_normal
from utils.logger import logger

# 含时比较中 Schrödinger / Heisenberg 两条路径的交叉检查阈值
CROSS_CHECK_TOL = 1e-10

# 只断言这些阶的导数匹配
ASSERTED_DERIVATIVE_ORDERS = (0, 1, 2)


def _hermitian_defect(M: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    return float(np.max(np.abs(M - M.conj().T), initial=0.0)) / scale


# ================================ 生成元 ================================

def heisenberg_generator(space: FockSpace, H: ClassicalPoly, allow_non_hermitian: bool = False) -> np.ndarray:
    """
    H_n = realize(quantize_normal(H))
    参数:
        allow_non_hermitian: 允许非 Hermitian 结果 (否则抛出 NonHermitianGeneratorError)
    """
    Hn_poly = quantize_normal(H, mode_count=space.mode_count)
    Hn = realize(space, Hn_poly)
    defect = _hermitian_defect(Hn)
    if defect > config.HERMITIAN_TOL:
        if not allow_non_hermitian:
            raise NonHermitianGeneratorError(f"normal-ordered Hamiltonian is not Hermitian (defect {defect:.3e})")
        logger.warning(f"⚠️ heisenberg_generator: 非 Hermitian 生成元 (defect {defect:.3e})")
        return Hn
    logger.debug(f"⚛️ heisenberg_generator: {len(Hn_poly)} 项, Hermitian defect {defect:.3e}")
    return 0.5 * (Hn + Hn.conj().T)


class HeisenbergPropagator:
    """
    ⏱️ 缓存 H_n 的本征分解
    U(t) = V·diag(exp(−2iλt))·V⁺，所有时间点共享同一分解
    """

    def __init__(self, Hn: np.ndarray):
        if _hermitian_defect(Hn) > config.HERMITIAN_TOL:
            raise NonHermitianGeneratorError("propagation requires a Hermitian generator")
        self.eigenvalues, self.eigenvectors = linalg.eigh(Hn)
        self.dimension = Hn.shape[0]

    def phases(self, times) -> np.ndarray:
        """exp(−2iλ_m t)，形如 (T, D)"""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        return np.exp(-2j * np.outer(times, self.eigenvalues))

    def unitary(self, t: float) -> np.ndarray:
        d = self.phases(t)[0]
        return (self.eigenvectors * d) @ self.eigenvectors.conj().T

    def operator(self, Q0: np.ndarray, t: float) -> np.ndarray:
        """Q(t) = U⁺ Q0 U"""
        U = self.unitary(t)
        return U.conj().T @ Q0 @ U

    def expectation_series(self, rho: np.ndarray, Q0: np.ndarray, times) -> np.ndarray:
        """
        Tr(ρ Q(t)) 在一组时间上的值
        本征基中 value(t) = pᵀ·C·p̄，p_m = exp(2iλ_m t)，C = ρ̃ᵀ ⊙ Q̃
        """
        V = self.eigenvectors
        rho_t = V.conj().T @ rho @ V
        Q_t = V.conj().T @ Q0 @ V
        C = rho_t.T * Q_t
        p = np.conj(self.phases(times))
        return np.einsum("tm,mk,tk->t", p, C, p.conj())

    def evolved_states(self, vector: np.ndarray, times) -> np.ndarray:
        """Schrödinger 态 U(t)·w，形如 (T, D)"""
        coeffs = self.eigenvectors.conj().T @ vector
        return (self.phases(times) * coeffs) @ self.eigenvectors.T


def propagate_operator(space: FockSpace, Q0: np.ndarray, Hn: np.ndarray, t: float) -> np.ndarray:
    """Q(t) = U⁺ Q0 U，U = exp(−2i·Hn·t)"""
    if Q0.shape != (space.dimension, space.dimension) or Hn.shape != Q0.shape:
        raise ShapeMismatchError(f"operator shapes {Q0.shape}, {Hn.shape} vs dimension {space.dimension}")
    propagator = HeisenbergPropagator(Hn)
    U = propagator.unitary(t)
    unitarity = float(np.max(np.abs(U.conj().T @ U - np.eye(space.dimension))))
    if unitarity > config.UNITARITY_TOL:
        raise EquivalenceError(f"propagator unitarity defect {unitarity:.3e}")
    Qt = U.conj().T @ Q0 @ U
    if _hermitian_defect(Q0) <= config.HERMITIAN_TOL:
        Qt = 0.5 * (Qt + Qt.conj().T)
    logger.debug(f"⏱️ propagate_operator: t={t}, 幺正缺陷 {unitarity:.3e}")
    return Qt


# ================================ 瞬时恒等式 ================================

def instantaneous_identity_check(space: FockSpace, ens: Ensemble, H: ClassicalPoly, j: int,
                                 Hn: np.ndarray | None = None, rho: DensityMatrix | None = None) -> dict:
    """
    瞬时恒等式残差
        phi: |⟨∂H/∂π_j⟩ − Re Tr(ρ·(−2i)[Φ_j, H_n])|
        pi : |⟨−∂H/∂φ_j⟩ − Re Tr(ρ·(−2i)[Π_j, H_n])|
    返回:
        {"phi": r, "pi": r, "max": r}
    """
    n = space.mode_count
    Hn = heisenberg_generator(space, H) if Hn is None else Hn
    rho = density_matrix(space, ens) if rho is None else rho
    Phi = realize(space, phi_op(j, n))
    Pi = realize(space, pi_op(j, n))
    quantum_phi = expectation(rho, -2j * (Phi @ Hn - Hn @ Phi)).real
    quantum_pi = expectation(rho, -2j * (Pi @ Hn - Hn @ Pi)).real
    classical_phi = classical_expectation(ens, H.partial_derivative(("pi", j)))
    classical_pi = -classical_expectation(ens, H.partial_derivative(("phi", j)))
    result = {
        "phi": abs(classical_phi - quantum_phi),
        "pi": abs(classical_pi - quantum_pi),
    }
    result["max"] = max(result["phi"], result["pi"])
    logger.debug(f"🧷 instantaneous_identity_check j={j}: {result}")
    return result


def _exact_through_order_two(H: ClassicalPoly, j: int) -> bool:
    """∂H/∂π_j 至多线性时，二阶导数匹配由括号恒等式精确保证"""
    return H.partial_derivative(("pi", j)).degree <= 1


def derivative_match(space: FockSpace, ens: Ensemble, H: ClassicalPoly, j: int = 1, max_order: int = 3,
                     rho: DensityMatrix | None = None) -> dict:
    """
    t=0 处 k 阶导数匹配
    经典侧: ⟨{…{φ_j, H}…, H}⟩；量子侧: Re Tr(ρ·(−2i)^k ad_{H_n}^k Φ_j) (符号嵌套对易子)
    返回:
        {"residuals": [...], "classical": [...], "quantum": [...], "asserted_orders": [...]}
    """
    if not 0 <= max_order <= 3:
        raise EquivalenceError(f"max_order must be in 0..3, got {max_order}")
    n = space.mode_count
    rho = density_matrix(space, ens) if rho is None else rho
    Hn_poly = quantize_normal(H, mode_count=n)
    target = ClassicalPoly.variable(("phi", j), n)
    nested: OperatorPoly = phi_op(j, n)
    classical, quantum = [], []
    for order in range(max_order + 1):
        if order:
            nested = commutator(nested, Hn_poly) * (-2j)
        classical.append(classical_expectation(ens, time_derivative_poly(target, H, order, n)))
        quantum.append(expectation(rho, realize(space, nested)).real)
    residuals = [abs(c - q) for c, q in zip(classical, quantum)]
    asserted = [k for k in ASSERTED_DERIVATIVE_ORDERS if k <= max_order]
    if not _exact_through_order_two(H, j):
        asserted = [k for k in asserted if k <= 1]
    logger.info(f"🧮 derivative_match j={j}: 残差 {['%.3e' % r for r in residuals]}")
    return {"residuals": residuals, "classical": classical, "quantum": quantum, "asserted_orders": asserted}


# ================================ 轨迹比较 ================================

@dataclass
class EquivalenceConfig:
    """比较运行的全部输入"""

    H: ClassicalPoly
    ensemble: Ensemble
    cutoff: int = 40
    dt: float = 1e-3
    t_max: float = 10.0
    sample_every: int = 100
    identity_samples: int = 11
    max_order: int = 3
    gap_tolerance: float = 1e-5
    identity_tolerance: float = 1e-7
    derivative_tolerance: float = 1e-6
    seed: int = 0

    @property
    def mode_count(self) -> int:
        return self.ensemble.mode_count

    @property
    def steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class EquivalenceReport:
    """逐时间对齐的经典/量子期望值、差距与诊断"""

    times: np.ndarray
    classical_phi: np.ndarray
    classical_pi: np.ndarray
    quantum_phi: np.ndarray
    quantum_pi: np.ndarray
    gaps_phi: np.ndarray
    gaps_pi: np.ndarray
    derivative_residuals: dict
    identity_residuals: list
    boundary_population: np.ndarray
    cross_check: float
    tail_bound: float
    quadratic: bool
    truncated_at: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def max_gap(self) -> float:
        return float(max(np.max(self.gaps_phi, initial=0.0), np.max(self.gaps_pi, initial=0.0)))

    def to_dict(self) -> dict:
        n = self.classical_phi.shape[1]
        def per_mode(arr, name):
            return {f"{name}{j + 1}": arr[:, j].tolist() for j in range(n)}

        return {
            "times": self.times.tolist(),
            "classical": {**per_mode(self.classical_phi, "phi"), **per_mode(self.classical_pi, "pi")},
            "quantum": {**per_mode(self.quantum_phi, "phi"), **per_mode(self.quantum_pi, "pi")},
            "gaps": {**per_mode(self.gaps_phi, "phi"), **per_mode(self.gaps_pi, "pi"), "max": self.max_gap},
            "derivative_residuals": self.derivative_residuals,
            "identity_residuals": self.identity_residuals,
            "boundary_population": self.boundary_population.tolist(),
            "cross_check": self.cross_check,
            "tail_bound": self.tail_bound,
            "quadratic": self.quadratic,
            "truncated_at": self.truncated_at,
            "metadata": self.metadata,
        }

    def rows(self) -> tuple:
        """CSV: 每个时间一行"""
        n = self.classical_phi.shape[1]
        header = ["t"]
        columns = [self.times]
        for j in range(n):
            header += [f"classical_phi{j + 1}", f"quantum_phi{j + 1}", f"gap_phi{j + 1}",
                       f"classical_pi{j + 1}", f"quantum_pi{j + 1}", f"gap_pi{j + 1}"]
            columns += [self.classical_phi[:, j], self.quantum_phi[:, j], self.gaps_phi[:, j],
                        self.classical_pi[:, j], self.quantum_pi[:, j], self.gaps_pi[:, j]]
        return header, np.column_stack(columns).tolist()


def _boundary_mask(space: FockSpace) -> np.ndarray:
    return np.any(space.occupations == space.cutoff, axis=1)


def compare_trajectories(cfg: EquivalenceConfig) -> EquivalenceReport:
    """
    经典系综演化 vs Heisenberg 传播
    二次 H 的最大差距由调用方按 gap_tolerance 断言；非二次 H 只测量并报告
    边界占据超过尾部预算时报告在该时间截断
    """
    n = cfg.mode_count
    space = FockSpace(n, cfg.cutoff)
    ens = cfg.ensemble
    quadratic = cfg.H.degree <= 2
    logger.info(
        f"📈 compare_trajectories: n={n}, cutoff={cfg.cutoff}, dt={cfg.dt}, t_max={cfg.t_max}, "
        f"{len(ens)} 个点, quadratic={quadratic}"
    )

    rho = density_matrix(space, ens)
    tail = truncation_bound(space, ens)
    Hn = heisenberg_generator(space, cfg.H)
    propagator = HeisenbergPropagator(Hn)

    # ----------------------- 经典侧 -----------------------
    system = HamiltonianSystem.from_hamiltonian(cfg.H, n)
    phis, pis = ensemble_history(system, ens, cfg.dt, cfg.steps)
    stride = max(1, cfg.sample_every)
    sample_index = np.arange(0, cfg.steps + 1, stride)
    times = sample_index * cfg.dt
    classical_phi = phis[sample_index] @ ens.weights
    classical_pi = pis[sample_index] @ ens.weights

    # ----------------------- 量子侧 -----------------------
    quantum_phi = np.empty_like(classical_phi)
    quantum_pi = np.empty_like(classical_pi)
    for j in range(1, n + 1):
        Phi = realize(space, phi_op(j, n))
        Pi = realize(space, pi_op(j, n))
        quantum_phi[:, j - 1] = propagator.expectation_series(rho.entries, Phi, times).real
        quantum_pi[:, j - 1] = propagator.expectation_series(rho.entries, Pi, times).real

    # Schrödinger 路径交叉检查 (首/中/末时间)
    Phi1 = realize(space, phi_op(1, n))
    cross = 0.0
    for index in sorted({0, len(times) // 2, len(times) - 1}):
        U = propagator.unitary(times[index])
        schroedinger = expectation(DensityMatrix(space, U @ rho.entries @ U.conj().T, rho.tail_bound), Phi1).real
        cross = max(cross, abs(schroedinger - quantum_phi[index, 0]))
    if cross > CROSS_CHECK_TOL:
        logger.warning(f"⚠️ Schrödinger/Heisenberg 交叉检查偏差 {cross:.3e}")

    # ----------------------- 边界诊断 -----------------------
    boundary = _boundary_mask(space)
    population = np.zeros(len(times))
    for point in ens.points:
        evolved = propagator.evolved_states(coherent_vector(space, point).entries, times)
        population = np.maximum(population, np.sum(np.abs(evolved[:, boundary]) ** 2, axis=1))
    truncated_at = None
    over = np.nonzero(population > config.TAIL_REFUSAL)[0]
    if over.size:
        cut = int(over[0])
        if cut == 0:
            largest = max(float(np.max(np.abs(p.phi + 1j * p.pi))) for p in ens.points)
            raise TailBoundError("boundary population already over budget at t=0", float(population[0]),
                                 suggest_cutoff(largest))
        truncated_at = float(times[cut])
        logger.warning(f"⚠️ 边界占据 {population[cut]:.3e} 超过尾部预算，报告截断于 t={truncated_at}")
        keep = slice(0, cut)
        times, classical_phi, classical_pi = times[keep], classical_phi[keep], classical_pi[keep]
        quantum_phi, quantum_pi, population = quantum_phi[keep], quantum_pi[keep], population[keep]
        sample_index = sample_index[keep]

    gaps_phi = np.abs(classical_phi - quantum_phi)
    gaps_pi = np.abs(classical_pi - quantum_pi)

    # ----------------------- 导数 / 瞬时恒等式 -----------------------
    derivatives = {
        f"phi{j}": derivative_match(space, ens, cfg.H, j, cfg.max_order, rho) for j in range(1, n + 1)
    }
    identity_residuals = []
    picks = np.unique(np.linspace(0, len(sample_index) - 1, max(1, cfg.identity_samples)).astype(int))
    for pick in picks:
        step = sample_index[pick]
        points = [PhasePoint(phis[step][:, k], pis[step][:, k]) for k in range(len(ens))]
        evolved = Ensemble(tuple(points), ens.weights)
        rho_t = density_matrix(space, evolved)
        worst = max(
            instantaneous_identity_check(space, evolved, cfg.H, j, Hn, rho_t)["max"] for j in range(1, n + 1)
        )
        identity_residuals.append({"t": float(step * cfg.dt), "residual": worst})

    report = EquivalenceReport(
        times=times,
        classical_phi=classical_phi,
        classical_pi=classical_pi,
        quantum_phi=quantum_phi,
        quantum_pi=quantum_pi,
        gaps_phi=gaps_phi,
        gaps_pi=gaps_pi,
        derivative_residuals=derivatives,
        identity_residuals=identity_residuals,
        boundary_population=population,
        cross_check=cross,
        tail_bound=tail,
        quadratic=quadratic,
        truncated_at=truncated_at,
        metadata={"cutoff": cfg.cutoff, "dt": cfg.dt, "t_max": cfg.t_max, "seed": cfg.seed, "modes": n},
    )
    logger.info(f"📈 compare_trajectories 完成: 最大差距 {report.max_gap:.3e}, 交叉检查 {cross:.3e}")
    return report
