"""
🕸️ 周期格点场模块
功能：
  1. 📐 d 维周期格点 (d ≤ 3)、动量网格与色散 w_j(p) = √(m_j² + |p|²)
  2. 🔁 离散 Fourier 振幅 θ, τ 及其逆变换
  3. ⚛️ 动量模式作为 Fock 模式的相干编码与场算符 Φ_j(x), Π_j(x)
  4. 🎯 常数 c 的最小二乘标定与离散泛函对易子检查
  5. 🐸 谱拉普拉斯蛙跳积分、能量与频率测量

约定:
  θ(p) = (2π)^{−d/2}·Δx^d·Σ_x φ(x)e^{−ipx}，动量按 fftshift 顺序排列
  Fock 模式编号: 场 j (从1开始)、动量下标 q → (j−1)·sites + q + 1
  Φ_j(x) = Σ_p K(2w)^{−½}(a_p e^{ipx} + a_p⁺e^{−ipx})，K = (2M^dΔx^d)^{−½}
  编码振幅 α_{j,p} = c·(√w·θ + i·τ/√w)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import optimize

from config import config
from modules.errors import (
    CalibrationError,
    LatticeError,
    LatticeInstabilityError,
    MasslessZeroModeError,
    ModeIndexError,
)
from modules.fock_numeric import (
    FockSpace,
    PhasePoint,
    StateVector,
    coherent_vector,
    interior_mask,
    realize,
    realize_sparse,
    restrict,
)
from modules.operator_algebra import (
    ClassicalPoly,
    OperatorPoly,
    a,
    a_dag,
    commutator,
    quantize_normal,
)
from utils.logger import logger


# ================================ 几何 ================================

@dataclass(frozen=True)
class LatticeSpec:
    """d 维周期格点，每轴 M 个格点，间距 dx，n 个场及其质量"""

    d: int
    M: int
    dx: float
    masses: tuple

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if self.d not in (1, 2, 3):
            raise LatticeError(f"spatial dimension must be 1, 2 or 3, got {self.d}")
        if self.M < 1 or not self.dx > 0:
            raise LatticeError(f"invalid lattice M={self.M}, dx={self.dx}")
        if not self.masses or any(m < 0 for m in self.masses):
            raise LatticeError(f"masses must be non-negative, got {self.masses}")
        if self.sites * self.fields > config.MAX_LATTICE_MODES:
            raise LatticeError(
                f"{self.sites} sites × {self.fields} fields exceeds mode budget {config.MAX_LATTICE_MODES}"
            )

    @property
    def fields(self) -> int:
        return len(self.masses)

    @property
    def sites(self) -> int:
        return self.M ** self.d

    @property
    def shape(self) -> tuple:
        return (self.M,) * self.d

    @property
    def mode_count(self) -> int:
        return self.fields * self.sites

    @property
    def cell_volume(self) -> float:
        """动量空间体积元 (2π/(MΔx))^d"""
        return (2.0 * math.pi / (self.M * self.dx)) ** self.d

    @cached_property
    def positions(self) -> np.ndarray:
        """形如 (sites, d) 的格点坐标 (C 顺序)"""
        index = np.stack(np.unravel_index(np.arange(self.sites), self.shape), axis=1)
        return index * self.dx

    def fock_mode(self, j: int, q: int) -> int:
        """场 j、动量下标 q 对应的 Fock 模式编号"""
        if not 1 <= j <= self.fields or not 0 <= q < self.sites:
            raise ModeIndexError(f"field {j} / momentum index {q} out of range")
        return (j - 1) * self.sites + q + 1

    def site_variable(self, kind: str, j: int, x: int) -> tuple:
        """格点变量 (kind, 编号)，供 ClassicalPoly 使用"""
        if not 1 <= j <= self.fields or not 0 <= x < self.sites:
            raise ModeIndexError(f"field {j} / site {x} out of range")
        return kind, (j - 1) * self.sites + x + 1


@dataclass(frozen=True, eq=False)
class LatticeState:
    """phi, pi: 形如 (fields, sites) 的实数组"""

    phi: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        phi = np.atleast_2d(np.asarray(self.phi, dtype=float))
        pi = np.atleast_2d(np.asarray(self.pi, dtype=float))
        if phi.shape != pi.shape:
            raise LatticeError(f"phi shape {phi.shape} and pi shape {pi.shape} differ")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(pi))):
            raise LatticeError("lattice state has non-finite entries")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "pi", pi)

    def check(self, spec: LatticeSpec) -> None:
        if self.phi.shape != (spec.fields, spec.sites):
            raise LatticeError(f"state shape {self.phi.shape} vs lattice {(spec.fields, spec.sites)}")


@dataclass(frozen=True, eq=False)
class MomentumAmplitudes:
    theta: np.ndarray
    tau: np.ndarray


@dataclass(frozen=True, eq=False)
class DispersionTable:
    w: np.ndarray
    massless: tuple


@dataclass(frozen=True)
class CalibrationResult:
    c: float
    residual: float
    reference: float
    deviation: float
    samples: int


def momentum_grid(spec: LatticeSpec) -> np.ndarray:
    """
    动量分量 2πk/(MΔx)，k ∈ {−⌊M/2⌋, …, ⌈M/2⌉−1}
    返回:
        形如 (sites, d)，与 fftshift 后的 C 顺序一致
    """
    axis = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(spec.M, d=spec.dx))
    mesh = np.meshgrid(*([axis] * spec.d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def dispersion(spec: LatticeSpec) -> DispersionTable:
    """w_j(p) = √(m_j² + |p|²)；m=0 的零模式记录警告"""
    p2 = np.sum(momentum_grid(spec) ** 2, axis=1)
    w = np.sqrt(np.asarray(spec.masses)[:, None] ** 2 + p2[None, :])
    massless = tuple(j + 1 for j in range(spec.fields) if spec.masses[j] == 0.0)
    for j in massless:
        logger.warning(f"⚠️ 场 {j} 无质量: p=0 模式 w=0，无法编码")
    return DispersionTable(w, massless)


def _require_massive(table: DispersionTable) -> None:
    if table.massless:
        raise MasslessZeroModeError(f"fields {list(table.massless)} have a massless zero mode (w=0 at p=0)")


# ================================ Fourier ================================

def _forward(spec: LatticeSpec, values: np.ndarray) -> np.ndarray:
    scale = (2.0 * math.pi) ** (-spec.d / 2) * spec.dx ** spec.d
    out = np.empty(values.shape, dtype=complex)
    for j, row in enumerate(values):
        out[j] = scale * np.fft.fftshift(np.fft.fftn(row.reshape(spec.shape))).ravel()
    return out


def _inverse(spec: LatticeSpec, amplitudes: np.ndarray) -> np.ndarray:
    scale = (2.0 * math.pi) ** (-spec.d / 2) * spec.cell_volume * spec.sites
    out = np.empty(amplitudes.shape, dtype=complex)
    for j, row in enumerate(amplitudes):
        out[j] = scale * np.fft.ifftn(np.fft.ifftshift(row.reshape(spec.shape))).ravel()
    return out


def fourier_amplitudes(spec: LatticeSpec, state: LatticeState) -> MomentumAmplitudes:
    """θ, τ: φ, π 的离散 Fourier 变换"""
    state.check(spec)
    return MomentumAmplitudes(_forward(spec, state.phi), _forward(spec, state.pi))


def inverse_amplitudes(spec: LatticeSpec, amps: MomentumAmplitudes) -> LatticeState:
    """逆变换 (丢弃舍入级虚部)"""
    return LatticeState(_inverse(spec, amps.theta).real, _inverse(spec, amps.tau).real)


# ================================ 编码 ================================

def reference_c(spec: LatticeSpec) -> float:
    """连续常数的离散对应 (2π)^{d/2}(MΔx)^{−d/2} = √cellvol"""
    return math.sqrt(spec.cell_volume)


def lattice_space(spec: LatticeSpec, cutoff: int) -> FockSpace:
    return FockSpace(spec.mode_count, cutoff)


def coherent_amplitudes(spec: LatticeSpec, state: LatticeState, c: float) -> np.ndarray:
    """α_{j,p} = c·(√w·θ + i·τ/√w)，形如 (fields, sites)"""
    table = dispersion(spec)
    _require_massive(table)
    amps = fourier_amplitudes(spec, state)
    root = np.sqrt(table.w)
    return c * (root * amps.theta + 1j * amps.tau / root)


def encode_lattice_state(spec: LatticeSpec, space: FockSpace, state: LatticeState, c: float) -> StateVector:
    """动量模式相干态 (归一)；模式顺序见模块说明"""
    if space.mode_count != spec.mode_count:
        raise LatticeError(f"space has {space.mode_count} modes, lattice needs {spec.mode_count}")
    alpha = coherent_amplitudes(spec, state, c).ravel()
    return coherent_vector(space, PhasePoint(alpha.real, alpha.imag))


def positive_frequency_eigenvalue(spec: LatticeSpec, state: LatticeState, c: float, j: int, x: int) -> complex:
    """Φ_j⁺(x)·v = λ·v 的本征值 Σ_p K(2w)^{−½}α_p e^{ipx}；c 正确时 Re λ = φ_j(x)/2"""
    alpha = coherent_amplitudes(spec, state, c)[j - 1]
    table = dispersion(spec)
    phases = np.exp(1j * momentum_grid(spec) @ spec.positions[x])
    K = (2.0 * spec.sites * spec.dx ** spec.d) ** -0.5
    return complex(np.sum(K / np.sqrt(2.0 * table.w[j - 1]) * alpha * phases))


# ================================ 场算符 ================================

class FieldOperators:
    """
    ⚛️ Φ_j(x), Π_j(x) 及其正/负频部分
    符号多项式即时构造，稀疏矩阵按需实现并缓存
    """

    KINDS = ("phi", "pi", "phi_plus", "phi_minus", "pi_plus", "pi_minus")

    def __init__(self, spec: LatticeSpec, space: FockSpace):
        if space.mode_count != spec.mode_count:
            raise LatticeError(f"space has {space.mode_count} modes, lattice needs {spec.mode_count}")
        self.spec = spec
        self.space = space
        self.table = dispersion(spec)
        _require_massive(self.table)
        self.grid = momentum_grid(spec)
        self.K = (2.0 * spec.sites * spec.dx ** spec.d) ** -0.5
        self._matrices: dict = {}

    def poly(self, kind: str, j: int, x: int) -> OperatorPoly:
        if kind not in self.KINDS:
            raise LatticeError(f"unknown field operator kind {kind!r}")
        if not 0 <= x < self.spec.sites:
            raise ModeIndexError(f"site {x} outside 0..{self.spec.sites - 1}")
        base, _, part = kind.partition("_")
        w = self.table.w[j - 1]
        phases = np.exp(1j * self.grid @ self.spec.positions[x])
        if base == "phi":
            amp = self.K / np.sqrt(2.0 * w)
        else:
            amp = -1j * self.K * np.sqrt(w / 2.0)
        terms = {}
        for q in range(self.spec.sites):
            mode = self.spec.fock_mode(j, q)
            if part in ("", "plus"):
                terms[(a(mode),)] = amp[q] * phases[q]
            if part in ("", "minus"):
                terms[(a_dag(mode),)] = np.conj(amp[q] * phases[q])
        return OperatorPoly(terms, self.space.mode_count, ordered=True)

    def matrix(self, kind: str, j: int, x: int) -> np.ndarray:
        key = (kind, j, x)
        if key not in self._matrices:
            self._matrices[key] = realize_sparse(self.space, self.poly(kind, j, x))
        return self._matrices[key]

    def field_map(self, kind: str, index: int) -> OperatorPoly:
        """格点变量编号 → 线性场算符 (供量子化使用)"""
        j, x = divmod(index - 1, self.spec.sites)
        return self.poly(kind, j + 1, x)


def field_operators(spec: LatticeSpec, space: FockSpace) -> FieldOperators:
    return FieldOperators(spec, space)


def field_expectations(ops: FieldOperators, vector: StateVector) -> tuple:
    """纯态 ⟨v|Φ_j(x)|v⟩, ⟨v|Π_j(x)|v⟩，形如 (fields, sites)"""
    spec = ops.spec
    v = vector.entries
    phi = np.empty((spec.fields, spec.sites))
    pi = np.empty((spec.fields, spec.sites))
    for j in range(1, spec.fields + 1):
        for x in range(spec.sites):
            phi[j - 1, x] = np.vdot(v, ops.matrix("phi", j, x) @ v).real
            pi[j - 1, x] = np.vdot(v, ops.matrix("pi", j, x) @ v).real
    return phi, pi


# ================================ 标定 ================================

def sample_lattice_states(spec: LatticeSpec, rng: np.random.Generator, count: int,
                          amplitude: float = 0.1) -> list:
    """均匀分布 [−A, A] 的随机格点态 (带种子)"""
    return [
        LatticeState(rng.uniform(-amplitude, amplitude, (spec.fields, spec.sites)),
                     rng.uniform(-amplitude, amplitude, (spec.fields, spec.sites)))
        for _ in range(count)
    ]


def _supported_momenta(spec: LatticeSpec, samples: Sequence[LatticeState]) -> int:
    support = np.zeros(spec.sites, dtype=bool)
    for state in samples:
        amps = fourier_amplitudes(spec, state)
        support |= np.any(np.abs(amps.theta) + np.abs(amps.tau) > 1e-12, axis=0)
    return int(support.sum())


def calibrate_c(spec: LatticeSpec, space: FockSpace, samples: Sequence[LatticeState],
                ops: FieldOperators | None = None) -> CalibrationResult:
    """
    最小二乘标定 c: 使 ⟨Φ_j(x)⟩ = φ_j(x)、⟨Π_j(x)⟩ = π_j(x) 在所有样本上成立
    先用线性估计，再用 scipy.optimize.least_squares 精化
    """
    if len(samples) < 3:
        raise CalibrationError(f"calibration needs at least 3 sample states, got {len(samples)}")
    supported = _supported_momenta(spec, samples)
    if supported < min(3, spec.sites):
        raise CalibrationError(f"samples span only {supported} distinct momenta")
    ops = ops or field_operators(spec, space)
    targets = np.concatenate([np.concatenate([s.phi.ravel(), s.pi.ravel()]) for s in samples])

    def predictions(c: float) -> np.ndarray:
        out = []
        for state in samples:
            phi, pi = field_expectations(ops, encode_lattice_state(spec, space, state, c))
            out.append(np.concatenate([phi.ravel(), pi.ravel()]))
        return np.concatenate(out)

    unit = predictions(1.0)
    norm = float(np.dot(unit, unit))
    if norm == 0.0:
        raise CalibrationError("samples carry no signal (all-zero states)")
    c0 = float(np.dot(unit, targets) / norm)
    fit = optimize.least_squares(lambda c: predictions(c[0]) - targets, x0=[c0], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    c = float(fit.x[0])
    residual = float(np.max(np.abs(predictions(c) - targets)))
    reference = reference_c(spec)
    result = CalibrationResult(c, residual, reference, abs(c - reference) / reference, len(samples))
    logger.info(f"🎯 calibrate_c: c={c:.15g}, 残差 {residual:.3e}, 参考值 {reference:.15g}")
    tol = config.CALIBRATION_TOL
    if residual > tol:
        raise CalibrationError(f"calibration residual {residual:.3e} exceeds {tol:.3e} (c={c:.15g})")
    if result.deviation > tol:
        raise CalibrationError(
            f"calibrated c={c:.15g} deviates from the reference {reference:.15g} by {result.deviation:.3e}"
        )
    return result


# ================================ 泛函对易子 ================================

def functional_derivative(spec: LatticeSpec, f: ClassicalPoly, kind: str, j: int, x: int) -> ClassicalPoly:
    """离散泛函导数: 单格点偏导 / Δx^d"""
    return f.partial_derivative(spec.site_variable(kind, j, x)) * (1.0 / spec.dx ** spec.d)


def functional_commutator_check(spec: LatticeSpec, space: FockSpace, f: ClassicalPoly, j: int, x: int,
                                ops: FieldOperators | None = None) -> dict:
    """
    [Φ_j(x), f_n] − (i/2)(δf/δπ_j(x))_n
    返回:
        {"symbolic": 残差多项式最大系数, "interior": 内部子空间矩阵残差}
    """
    ops = ops or field_operators(spec, space)
    fn = quantize_normal(f, field_map=ops.field_map, mode_count=space.mode_count)
    derivative = quantize_normal(functional_derivative(spec, f, "pi", j, x), field_map=ops.field_map,
                                 mode_count=space.mode_count)
    residual = commutator(ops.poly("phi", j, x), fn) - derivative * 0.5j
    mask = interior_mask(space, f.degree + 1)
    interior = float(np.max(np.abs(restrict(realize(space, residual), mask)), initial=0.0))
    result = {"symbolic": residual.max_abs_coefficient(), "interior": interior}
    logger.info(f"🧷 functional_commutator_check j={j} x={x}: {result}")
    return result


def equal_time_commutator(ops: FieldOperators, j: int, x: int, k: int, y: int) -> np.ndarray:
    """矩阵对易子 [Φ_j(x), Π_k(y)] (截断矩阵，稠密返回)"""
    P, Q = ops.matrix("phi", j, x), ops.matrix("pi", k, y)
    return (P @ Q - Q @ P).toarray()


# ================================ 经典格点动力学 ================================

def _laplacian(spec: LatticeSpec, values: np.ndarray) -> np.ndarray:
    """谱拉普拉斯 (色散精确为 √(m² + p²))"""
    freqs = 2.0 * math.pi * np.fft.fftfreq(spec.M, d=spec.dx)
    mesh = np.meshgrid(*([freqs] * spec.d), indexing="ij")
    p2 = sum(m ** 2 for m in mesh)
    out = np.empty_like(values)
    for j, row in enumerate(values):
        out[j] = np.fft.ifftn(-p2 * np.fft.fftn(row.reshape(spec.shape))).real.ravel()
    return out


def _force_polys(spec: LatticeSpec, f: ClassicalPoly | None) -> list:
    """每个格点变量的偏导多项式 (空列表表示无相互作用)"""
    if f is None or f.is_zero():
        return []
    return [f.partial_derivative(("phi", index)) for index in range(1, spec.mode_count + 1)]


def _interaction_force(spec: LatticeSpec, forces: list, phi: np.ndarray) -> np.ndarray:
    if not forces:
        return np.zeros_like(phi)
    flat = phi.ravel()
    force = np.array([float(p.evaluate(flat)) for p in forces])
    return force.reshape(phi.shape) / spec.dx ** spec.d


def lattice_energy(spec: LatticeSpec, state: LatticeState, f: ClassicalPoly | None = None) -> float:
    """E = Σ_x Δx^d [½π² + ½φ(−Δφ) + ½m²φ²] + f(φ)"""
    masses = np.asarray(spec.masses)[:, None]
    density = 0.5 * state.pi ** 2 - 0.5 * state.phi * _laplacian(spec, state.phi) + 0.5 * masses ** 2 * state.phi ** 2
    energy = float(np.sum(density) * spec.dx ** spec.d)
    if f is not None and not f.is_zero():
        energy += float(f.evaluate(state.phi.ravel()))
    return energy


def leapfrog_step_bound(spec: LatticeSpec) -> float:
    """
    蛙跳步长上限 min(Δx/√d, 2/w_max)
    w_max 取谱拉普拉斯下的最大色散频率 (线性部分)
    """
    p2 = np.sum(momentum_grid(spec) ** 2, axis=1)
    w_max = float(np.sqrt(max(spec.masses) ** 2 + p2.max()))
    bound = spec.dx / math.sqrt(spec.d)
    return min(bound, 2.0 / w_max) if w_max > 0 else bound


def _check_step(spec: LatticeSpec, dt: float) -> None:
    if not dt > 0:
        raise LatticeInstabilityError(f"dt must be positive, got {dt}", 0)
    bound = leapfrog_step_bound(spec)
    if dt >= bound:
        raise LatticeInstabilityError(f"dt={dt} exceeds the leapfrog stability bound {bound:.6g}", 0)


def leapfrog_trajectory(spec: LatticeSpec, f: ClassicalPoly | None, state: LatticeState, dt: float, steps: int,
                        record_every: int = 1, backward: bool = False) -> tuple:
    """
    辛蛙跳 (kick-drift-kick): π̇ = Δφ − m²φ − δf/δφ，φ̇ = π
    返回:
        (times, states, energies)，每 record_every 步记录一次
    """
    state.check(spec)
    _check_step(spec, dt)
    h = -dt if backward else dt
    masses2 = np.asarray(spec.masses)[:, None] ** 2
    forces = _force_polys(spec, f)
    phi, pi = state.phi.copy(), state.pi.copy()

    def acceleration(phi_now):
        return _laplacian(spec, phi_now) - masses2 * phi_now - _interaction_force(spec, forces, phi_now)

    e0 = lattice_energy(spec, state, f)
    limit = 1e3 * (abs(e0) + 1.0)
    times, states, energies = [0.0], [state], [e0]
    accel = acceleration(phi)
    for step in range(1, steps + 1):
        pi = pi + 0.5 * h * accel
        phi = phi + h * pi
        accel = acceleration(phi)
        pi = pi + 0.5 * h * accel
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(pi))):
            raise LatticeInstabilityError("non-finite lattice state", step)
        if step % record_every == 0 or step == steps:
            current = LatticeState(phi, pi)
            energy = lattice_energy(spec, current, f)
            if not abs(energy - e0) <= limit:
                raise LatticeInstabilityError("energy blow-up", step)
            times.append(step * dt)
            states.append(current)
            energies.append(energy)
    return np.asarray(times), states, np.asarray(energies)


def leapfrog_evolve(spec: LatticeSpec, f: ClassicalPoly | None, state: LatticeState, dt: float, steps: int,
                    backward: bool = False) -> LatticeState:
    """蛙跳积分到终态"""
    _, states, energies = leapfrog_trajectory(spec, f, state, dt, steps, record_every=max(steps, 1),
                                              backward=backward)
    logger.debug(f"🐸 leapfrog_evolve: {steps} 步, 能量漂移 {abs(energies[-1] - energies[0]):.3e}")
    return states[-1]


def measure_frequency(times: np.ndarray, signal: np.ndarray) -> float:
    """零点穿越 (线性插值) 估计角频率 ω = π·(穿越数 − 1)/(末次 − 首次)"""
    signal = np.asarray(signal, dtype=float)
    sign = np.signbit(signal)
    idx = np.nonzero(sign[1:] != sign[:-1])[0]
    if idx.size < 2:
        raise LatticeError("signal has fewer than two zero crossings")
    t0, t1 = times[idx], times[idx + 1]
    s0, s1 = signal[idx], signal[idx + 1]
    crossings = t0 - s0 * (t1 - t0) / (s1 - s0)
    return float(math.pi * (crossings.size - 1) / (crossings[-1] - crossings[0]))


# ================================ 序列化 ================================

def state_to_dict(spec: LatticeSpec, state: LatticeState) -> dict:
    return {
        "d": spec.d,
        "M": spec.M,
        "dx": spec.dx,
        "fields": spec.fields,
        "masses": list(spec.masses),
        "phi": state.phi.tolist(),
        "pi": state.pi.tolist(),
    }


def state_from_dict(data: dict) -> tuple:
    """JSON 字典 → (LatticeSpec, LatticeState)"""
    try:
        spec = LatticeSpec(int(data["d"]), int(data["M"]), float(data["dx"]), tuple(data["masses"]))
        state = LatticeState(np.asarray(data["phi"], dtype=float), np.asarray(data["pi"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise LatticeError(f"malformed lattice state: {exc}") from exc
    if int(data.get("fields", spec.fields)) != spec.fields:
        raise LatticeError("'fields' disagrees with the number of masses")
    state.check(spec)
    return spec, state


def observable_rows(spec: LatticeSpec, times: np.ndarray, states: Sequence[LatticeState]) -> tuple:
    """CSV 观测量: (t, j, x, phi, pi) 每行一个格点"""
    header = ["t", "j", "x", "phi", "pi"]
    rows = []
    for t, state in zip(times, states):
        for j in range(spec.fields):
            for x in range(spec.sites):
                rows.append([float(t), j + 1, x, float(state.phi[j, x]), float(state.pi[j, x])])
    return header, rows
