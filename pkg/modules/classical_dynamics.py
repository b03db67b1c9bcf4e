"""
🌀 经典哈密顿动力学模块
功能：
  1. 📐 由多项式哈密顿量构造一阶系统 φ̇ = ∂H/∂π, π̇ = −∂H/∂φ
  2. 🏃 定步长 RK4 积分 (单点与系综批量)
  3. 📊 系综期望值、Poisson 括号与时间导数多项式
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from modules.errors import IntegrationError
from modules.fock_numeric import Ensemble, PhasePoint
from modules.operator_algebra import ClassicalPoly
from utils.logger import logger


@dataclass(frozen=True, eq=False)
class HamiltonianSystem:
    """H 及其偏导 (逐项等于 partial_derivative)"""

    H: ClassicalPoly
    dH_dphi: tuple
    dH_dpi: tuple
    mode_count: int

    @classmethod
    def from_hamiltonian(cls, H: ClassicalPoly, mode_count: int | None = None) -> "HamiltonianSystem":
        n = mode_count or H.mode_count
        return cls(
            H=H,
            dH_dphi=tuple(H.partial_derivative(("phi", j)) for j in range(1, n + 1)),
            dH_dpi=tuple(H.partial_derivative(("pi", j)) for j in range(1, n + 1)),
            mode_count=n,
        )

    def energy(self, phi, pi):
        return self.H.evaluate(phi, pi)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    times: 经过的时间 (严格递增)，phi/pi: 形如 (len(times), n)
    backward=True 表示以 −dt 积分得到
    """

    times: np.ndarray
    phi: np.ndarray
    pi: np.ndarray
    backward: bool = False

    @property
    def states(self) -> list:
        return [PhasePoint(p, q) for p, q in zip(self.phi, self.pi)]

    @property
    def final(self) -> PhasePoint:
        return PhasePoint(self.phi[-1], self.pi[-1])

    def rows(self) -> tuple:
        """CSV 表头与数据行: t,phi1..phin,pi1..pin"""
        n = self.phi.shape[1]
        header = ["t"] + [f"phi{j}" for j in range(1, n + 1)] + [f"pi{j}" for j in range(1, n + 1)]
        data = np.column_stack([self.times, self.phi, self.pi])
        return header, data.tolist()


def _as_arrays(point) -> tuple:
    if isinstance(point, PhasePoint):
        return point.phi, point.pi
    phi, pi = point
    return np.asarray(phi, dtype=float), np.asarray(pi, dtype=float)


def hamilton_vector_field(sys: HamiltonianSystem, point) -> tuple:
    """
    哈密顿向量场
    参数:
        point: PhasePoint 或 (phi, pi)，数组形如 (n,) 或 (n, K)
    返回:
        (φ̇, π̇)，与输入同形
    """
    phi, pi = _as_arrays(point)
    phidot = np.stack([d.evaluate(phi, pi) for d in sys.dH_dpi])
    pidot = -np.stack([d.evaluate(phi, pi) for d in sys.dH_dphi])
    return phidot, pidot


def _rk4_history(sys: HamiltonianSystem, phi: np.ndarray, pi: np.ndarray, h: float, steps: int) -> tuple:
    """批量 RK4，返回全部步的历史 (steps+1, n, ...)"""
    phis = np.empty((steps + 1,) + phi.shape)
    pis = np.empty((steps + 1,) + pi.shape)
    phis[0], pis[0] = phi, pi
    for step in range(1, steps + 1):
        k1p, k1q = hamilton_vector_field(sys, (phi, pi))
        k2p, k2q = hamilton_vector_field(sys, (phi + 0.5 * h * k1p, pi + 0.5 * h * k1q))
        k3p, k3q = hamilton_vector_field(sys, (phi + 0.5 * h * k2p, pi + 0.5 * h * k2q))
        k4p, k4q = hamilton_vector_field(sys, (phi + h * k3p, pi + h * k3q))
        phi = phi + (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        pi = pi + (h / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(pi))):
            raise IntegrationError("non-finite state", step)
        phis[step], pis[step] = phi, pi
    return phis, pis


def _validate_step(dt: float, steps: int, method: str) -> None:
    if method != "rk4":
        raise IntegrationError(f"unsupported integrator {method!r}", 0)
    if not dt > 0:
        raise IntegrationError(f"dt must be positive, got {dt}", 0)
    if steps < 0:
        raise IntegrationError(f"steps must be non-negative, got {steps}", 0)


def integrate(sys: HamiltonianSystem, start: PhasePoint, dt: float, steps: int,
              method: str = "rk4", backward: bool = False) -> Trajectory:
    """
    定步长 RK4 积分
    参数:
        dt: 正步长；backward=True 时以 −dt 积分 (可逆性检查)
    返回:
        Trajectory
    """
    _validate_step(dt, steps, method)
    h = -dt if backward else dt
    phis, pis = _rk4_history(sys, start.phi.copy(), start.pi.copy(), h, steps)
    times = dt * np.arange(steps + 1)
    logger.debug(f"🏃 integrate: {steps} 步, dt={dt}, backward={backward}")
    return Trajectory(times, phis, pis, backward)


def ensemble_history(sys: HamiltonianSystem, ens: Ensemble, dt: float, steps: int,
                     backward: bool = False) -> tuple:
    """系综逐点独立积分，返回 (phi, pi) 历史，形如 (steps+1, n, K)"""
    _validate_step(dt, steps, "rk4")
    h = -dt if backward else dt
    return _rk4_history(sys, ens.phi, ens.pi, h, steps)


def evolve_ensemble(sys: HamiltonianSystem, ens: Ensemble, dt: float, steps: int,
                    backward: bool = False) -> Ensemble:
    """各点独立演化，权重不变"""
    phis, pis = ensemble_history(sys, ens, dt, steps, backward)
    points = tuple(PhasePoint(phis[-1][:, k], pis[-1][:, k]) for k in range(len(ens)))
    return Ensemble(points, ens.weights.copy())


def classical_expectation(ens: Ensemble, f: ClassicalPoly) -> float:
    """精确加权和 Σ_k w_k f(φ_k, π_k)"""
    values = np.broadcast_to(f.evaluate(ens.phi, ens.pi), ens.weights.shape)
    return float(np.dot(ens.weights, values))


def poisson_bracket(f: ClassicalPoly, g: ClassicalPoly, mode_count: int | None = None) -> ClassicalPoly:
    """{f, g} = Σ_j ∂f/∂φ_j ∂g/∂π_j − ∂f/∂π_j ∂g/∂φ_j"""
    n = mode_count or max(f.mode_count, g.mode_count)
    result = ClassicalPoly.constant(0.0, n)
    for j in range(1, n + 1):
        result = result + f.partial_derivative(("phi", j)) * g.partial_derivative(("pi", j))
        result = result - f.partial_derivative(("pi", j)) * g.partial_derivative(("phi", j))
    return result


def time_derivative_poly(f: ClassicalPoly, H: ClassicalPoly, order: int = 1,
                         mode_count: int | None = None) -> ClassicalPoly:
    """沿哈密顿流的 order 阶时间导数 d^k f/dt^k = {…{f, H}, …, H}"""
    n = mode_count or max(f.mode_count, H.mode_count)
    result = f
    for _ in range(order):
        result = poisson_bracket(result, H, n)
    return result


def energy_drift(sys: HamiltonianSystem, traj: Trajectory) -> float:
    """轨迹上 max_t |H(t) − H(0)|"""
    energies = sys.H.evaluate(traj.phi.T, traj.pi.T)
    energies = np.broadcast_to(energies, traj.times.shape)
    return float(np.max(np.abs(energies - energies[0])))
