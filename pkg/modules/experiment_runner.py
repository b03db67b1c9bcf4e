"""
🧪 实验运行器
功能：
  1. 📥 读取 TOML / JSON 实验配置，校验失败时给出 JSON pointer
  2. 🧮 五个子命令套件: verify-algebra, encode, compare, appendix-a, lattice
  3. 📄 组装报告 (配置回显、版本、种子、结果、带容差的断言)，写入 JSON 或 CSV
  4. 🗄️ 写入运行台账并检查可复现性

退出码: 0 全部断言通过，1 断言失败或数值拒绝，2 用法/配置错误
"""

from __future__ import annotations

import copy
import hashlib
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from config import config
from modules.classical_dynamics import classical_expectation
from modules.equivalence import CROSS_CHECK_TOL, EquivalenceConfig, compare_trajectories
from modules.errors import ConfigError, FockLabError, PolySyntaxError, ReportError
from modules.expanded_fock import (
    SecondOrderSystem,
    antihermitian_residual,
    build_Hv,
    build_Hz,
    classify_energy_operator,
    conjugation_residuals,
    encode_v,
    encode_z,
    equilibrium_gain_check,
    evolve_z,
    expanded_space,
    find_equilibrium,
    gain_finite_difference_residual,
    gain_operators,
    intertwining_residual,
    probe_point,
    reification_X,
)
from modules.fock_numeric import (
    Ensemble,
    FockSpace,
    PhasePoint,
    coherent_vector,
    density_matrix,
    expectation,
    interior_mask,
    ladder_matrix,
    realize,
    truncation_bound,
)
from modules.lattice_field import (
    LatticeSpec,
    LatticeState,
    calibrate_c,
    dispersion,
    encode_lattice_state,
    equal_time_commutator,
    field_expectations,
    field_operators,
    functional_commutator_check,
    lattice_space,
    leapfrog_step_bound,
    leapfrog_trajectory,
    measure_frequency,
    momentum_grid,
    observable_rows,
    positive_frequency_eigenvalue,
    sample_lattice_states,
)
from modules.operator_algebra import (
    ClassicalPoly,
    OperatorPoly,
    a,
    commutator,
    phi_op,
    pi_op,
    quantize_normal,
    random_classical_poly,
    check_bracket_identity,
)
from modules.poly_dsl import format_poly, parse_poly
from utils.database import run_ledger
from utils.logger import logger
from utils.report_io import dumps, write_csv, write_json

SUBCOMMANDS = ("verify-algebra", "encode", "compare", "appendix-a", "lattice")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# CLI 覆盖项 → 配置中的 JSON pointer
OVERRIDE_POINTERS = {
    "modes": "/system/modes",
    "cutoff": "/system/cutoff",
    "t_max": "/evolve/t_max",
    "dt": "/evolve/dt",
    "seed": "/seed",
    "max_degree": "/algebra/max_degree",
    "trials": "/algebra/trials",
}

_MISSING = object()


# ================================ 断言与结果 ================================

@dataclass
class Assertion:
    """bound="upper": value ≤ tolerance；bound="lower": value ≥ tolerance"""

    name: str
    value: float
    tolerance: float
    bound: str = "upper"

    @property
    def passed(self) -> bool:
        if self.value is None or not math.isfinite(self.value):
            return False
        if self.bound == "lower":
            return self.value >= self.tolerance
        return self.value <= self.tolerance

    def to_dict(self) -> dict:
        finite = self.value is not None and math.isfinite(self.value)
        return {
            "name": self.name,
            "value": float(self.value) if finite else None,
            "tolerance": float(self.tolerance),
            "bound": self.bound,
            "passed": self.passed,
        }


@dataclass
class SuiteResult:
    results: dict
    assertions: list = field(default_factory=list)
    table: tuple | None = None

    def check(self, name: str, value: float, tolerance: float, bound: str = "upper") -> None:
        self.assertions.append(Assertion(name, float(value), float(tolerance), bound))

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.assertions)

    def assertion_table(self) -> tuple:
        header = ["name", "value", "tolerance", "bound", "passed"]
        rows = []
        for item in self.assertions:
            d = item.to_dict()
            rows.append([d["name"], d["value"] if d["value"] is not None else "nan", d["tolerance"], d["bound"],
                         str(d["passed"]).lower()])
        return header, rows


# ================================ 配置 ================================

def load_config(path) -> dict:
    """读取 .toml 或 .json 配置文件"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError("/", f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        elif path.suffix.lower() == ".json":
            data = json.loads(raw.decode("utf-8"))
        else:
            raise ConfigError("/", f"unsupported config format {path.suffix!r} (use .toml or .json)")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError("/", f"cannot parse config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("/", "config root must be a table/object")
    return data


class ExperimentConfig:
    """
    ⚙️ 生效配置 (文件内容 + CLI 覆盖)
    所有读取都经过带 JSON pointer 的校验
    """

    def __init__(self, raw: dict | None = None, overrides: dict | None = None):
        self.raw = copy.deepcopy(raw or {})
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key not in OVERRIDE_POINTERS:
                raise ConfigError("/", f"unknown override {key!r}")
            self._set(OVERRIDE_POINTERS[key], value)
        try:
            self.text = dumps(self.raw)
        except ReportError as exc:
            raise ConfigError("/", f"config contains unsupported values: {exc}") from exc
        self.sha256 = hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    def _set(self, pointer: str, value) -> None:
        parts = pointer.strip("/").split("/")
        node = self.raw
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError("/" + part, "expected a table")
            node = child
        node[parts[-1]] = value

    def get(self, pointer: str, default=_MISSING):
        node = self.raw
        for part in pointer.strip("/").split("/"):
            if isinstance(node, dict) and part in node:
                node = node[part]
            elif isinstance(node, list) and part.isdigit() and int(part) < len(node):
                node = node[int(part)]
            else:
                if default is _MISSING:
                    raise ConfigError(pointer, "required field is missing")
                return default
        return node

    def has(self, pointer: str) -> bool:
        return self.get(pointer, None) is not None

    # ----------------------- 类型化读取 -----------------------

    def get_int(self, pointer: str, default=_MISSING, minimum: int | None = None) -> int:
        value = self.get(pointer, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(pointer, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(pointer, f"must be ≥ {minimum}, got {value}")
        return value

    def get_float(self, pointer: str, default=_MISSING, positive: bool = False) -> float:
        value = self.get(pointer, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(pointer, f"expected a finite number, got {value!r}")
        if positive and value <= 0:
            raise ConfigError(pointer, f"must be positive, got {value}")
        return float(value)

    def get_floats(self, pointer: str, default=_MISSING, length: int | None = None) -> list:
        value = self.get(pointer, default)
        if not isinstance(value, list):
            raise ConfigError(pointer, f"expected a list of numbers, got {value!r}")
        out = []
        for k, item in enumerate(value):
            if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
                raise ConfigError(f"{pointer}/{k}", f"expected a finite number, got {item!r}")
            out.append(float(item))
        if length is not None and len(out) != length:
            raise ConfigError(pointer, f"expected {length} entries, got {len(out)}")
        return out

    def get_poly(self, pointer: str, default=_MISSING, mode_count: int | None = None) -> ClassicalPoly:
        text = self.get(pointer, default)
        if not isinstance(text, str):
            raise ConfigError(pointer, f"expected a polynomial string, got {text!r}")
        try:
            return parse_poly(text, mode_count)
        except PolySyntaxError as exc:
            raise ConfigError(pointer, f"line {exc.line}, column {exc.column}: {exc}") from exc
        except FockLabError as exc:
            raise ConfigError(pointer, str(exc)) from exc

    def seed(self, required: bool = False):
        if not self.has("/seed"):
            if required:
                raise ConfigError("/seed", "a seed is required for sampling")
            return None
        value = self.get_int("/seed", minimum=0)
        if value >= 2 ** 64:
            raise ConfigError("/seed", "seed must fit in an unsigned 64-bit integer")
        return value

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed(required=True))


def load_ensemble(cfg: ExperimentConfig, modes: int | None = None) -> Ensemble:
    """
    /ensemble: 显式点 (points + weights) 或带种子的采样器 (sampler)
    """
    if cfg.has("/ensemble/sampler"):
        count = cfg.get_int("/ensemble/sampler/count", minimum=1)
        amplitude = cfg.get_float("/ensemble/sampler/amplitude", 1.0, positive=True)
        n = modes or cfg.get_int("/system/modes", minimum=1)
        rng = cfg.rng()
        points = [PhasePoint(rng.uniform(-amplitude, amplitude, n), rng.uniform(-amplitude, amplitude, n))
                  for _ in range(count)]
        return Ensemble.normalized(points)

    raw_points = cfg.get("/ensemble/points")
    if not isinstance(raw_points, list) or not raw_points:
        raise ConfigError("/ensemble/points", "expected a non-empty list of points")
    n = modes or (cfg.get_int("/system/modes", minimum=1) if cfg.has("/system/modes") else None)
    points = []
    for k in range(len(raw_points)):
        phi = cfg.get_floats(f"/ensemble/points/{k}/phi")
        n = n or len(phi)
        if len(phi) != n:
            raise ConfigError(f"/ensemble/points/{k}/phi", f"expected {n} entries, got {len(phi)}")
        pi = cfg.get_floats(f"/ensemble/points/{k}/pi", length=n)
        points.append(PhasePoint(phi, pi))

    weights = cfg.get_floats("/ensemble/weights", [1.0 / len(points)] * len(points))
    if len(weights) != len(points):
        raise ConfigError("/ensemble/weights", f"expected {len(points)} weights, got {len(weights)}")
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
        raise ConfigError("/ensemble/weights", f"weights must be non-negative and sum to 1, got {weights}")
    try:
        return Ensemble(tuple(points), np.asarray(weights))
    except FockLabError as exc:
        raise ConfigError("/ensemble", str(exc)) from exc


# ================================ verify-algebra ================================

def suite_verify_algebra(cfg: ExperimentConfig) -> SuiteResult:
    """正则对易关系、幂次规则与随机多项式括号恒等式 (全部符号计算)"""
    modes = cfg.get_int("/system/modes", 2, minimum=1)
    max_degree = cfg.get_int("/algebra/max_degree", 4, minimum=0)
    trials = cfg.get_int("/algebra/trials", 100, minimum=0)
    rng = cfg.rng()
    tol = config.SYMBOLIC_ZERO_TOL

    ccr = 0.0
    for n in range(1, 4):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                expected = OperatorPoly.constant(0.5j if j == k else 0.0, n)
                ccr = max(ccr, (commutator(phi_op(j, n), pi_op(k, n)) - expected).max_abs_coefficient())

    power = []
    for m in range(1, 6):
        residual = commutator(phi_op(1, 1) ** m, pi_op(1, 1)) - phi_op(1, 1) ** (m - 1) * (0.5j * m)
        power.append(residual.max_abs_coefficient())

    worst = {"phi": 0.0, "pi": 0.0}
    for _ in range(trials):
        f = random_classical_poly(rng, modes, max_degree)
        for j in range(1, modes + 1):
            for side in ("phi", "pi"):
                worst[side] = max(worst[side], check_bracket_identity(f, j, side).max_abs_coefficient())

    result = SuiteResult({
        "modes": modes,
        "max_degree": max_degree,
        "trials": trials,
        "ccr_residual": ccr,
        "power_rule_residuals": power,
        "bracket_identity": {"phi_residual": worst["phi"], "pi_residual": worst["pi"]},
    })
    result.check("ccr", ccr, tol)
    result.check("power_rule", max(power), tol)
    result.check("bracket_identity_phi", worst["phi"], tol)
    result.check("bracket_identity_pi", worst["pi"], tol)
    return result


# ================================ encode ================================

def _random_pair(rng: np.random.Generator, modes: int) -> tuple:
    f = random_classical_poly(rng, modes, 4)
    count = int(rng.integers(1, 6))
    points = [PhasePoint(rng.uniform(-0.7, 0.7, modes), rng.uniform(-0.7, 0.7, modes)) for _ in range(count)]
    weights = rng.uniform(0.1, 1.0, count)
    return f, Ensemble.normalized(points, weights / weights.sum())


def _trace_residual(space: FockSpace, ens: Ensemble, f: ClassicalPoly, rho=None) -> tuple:
    rho = rho or density_matrix(space, ens)
    quantum = expectation(rho, realize(space, quantize_normal(f, mode_count=space.mode_count))).real
    classical = classical_expectation(ens, f)
    return classical, quantum, abs(classical - quantum)


def suite_encode(cfg: ExperimentConfig) -> SuiteResult:
    """相干本征关系 a_j w = z_j w 与迹恒等式 Tr(ρ f_n) = ⟨f⟩"""
    ens = load_ensemble(cfg)
    n = ens.mode_count
    if cfg.has("/system/modes") and cfg.get_int("/system/modes") != n:
        raise ConfigError("/system/modes", f"ensemble points have {n} modes")
    cutoff = cfg.get_int("/system/cutoff", 30, minimum=1)
    space = FockSpace(n, cutoff)
    rho = density_matrix(space, ens)

    points = []
    eigen = 0.0
    for point in ens.points:
        w = coherent_vector(space, point).entries
        residual = max(
            float(np.linalg.norm(ladder_matrix(space, a(j)) @ w - point.z[j - 1] * w)) for j in range(1, n + 1)
        )
        eigen = max(eigen, residual)
        points.append({"phi": point.phi.tolist(), "pi": point.pi.tolist(), "eigen_residual": residual})

    observables = []
    texts = cfg.get("/encode/observables", None)
    polys = []
    if texts is None:
        for j in range(1, n + 1):
            polys += [ClassicalPoly.variable(("phi", j), n), ClassicalPoly.variable(("pi", j), n)]
        if cfg.has("/hamiltonian"):
            polys.append(cfg.get_poly("/hamiltonian", mode_count=n))
    else:
        if not isinstance(texts, list):
            raise ConfigError("/encode/observables", "expected a list of polynomial strings")
        polys = [cfg.get_poly(f"/encode/observables/{k}", mode_count=n) for k in range(len(texts))]
        for k, f in enumerate(polys):
            if f.uses("phidot"):
                raise ConfigError(f"/encode/observables/{k}", "phidot variables have no Φ/Π quantization")
    trace_worst = 0.0
    for f in polys:
        classical, quantum, residual = _trace_residual(space, ens, f, rho)
        trace_worst = max(trace_worst, residual)
        observables.append({"poly": format_poly(f), "classical": classical, "quantum": quantum, "residual": residual})

    pairs = cfg.get_int("/encode/random_pairs", 0, minimum=0)
    pair_worst = 0.0
    if pairs:
        rng = cfg.rng()
        for _ in range(pairs):
            f, pair_ens = _random_pair(rng, n)
            pair_worst = max(pair_worst, _trace_residual(space, pair_ens, f)[2])

    result = SuiteResult({
        "modes": n,
        "cutoff": cutoff,
        "tail_bound": truncation_bound(space, ens),
        "trace": rho.trace(),
        "points": points,
        "observables": observables,
        "random_pairs": {"count": pairs, "max_residual": pair_worst},
    })
    if cfg.get("/encode/emit_density", False) is True:
        result.results["density_matrix"] = rho.to_dict()
    result.check("coherent_eigen_relation", eigen, cfg.get_float("/tolerances/eigen", 1e-8, positive=True))
    trace_tol = cfg.get_float("/tolerances/trace", 1e-7, positive=True)
    result.check("trace_identity", trace_worst, trace_tol)
    if pairs:
        result.check("trace_identity_random_pairs", pair_worst, trace_tol)
    result.check("unit_trace", abs(rho.trace() - 1.0), max(rho.tail_bound, 0.0) + 1e-12)
    return result


# ================================ compare ================================

def suite_compare(cfg: ExperimentConfig) -> SuiteResult:
    """经典系综演化 vs Heisenberg 传播"""
    ens = load_ensemble(cfg)
    n = ens.mode_count
    if cfg.has("/system/modes") and cfg.get_int("/system/modes") != n:
        raise ConfigError("/system/modes", f"ensemble points have {n} modes")
    eq = EquivalenceConfig(
        H=cfg.get_poly("/hamiltonian", mode_count=n),
        ensemble=ens,
        cutoff=cfg.get_int("/system/cutoff", 40, minimum=1),
        dt=cfg.get_float("/evolve/dt", 1e-3, positive=True),
        t_max=cfg.get_float("/evolve/t_max", 10.0, positive=True),
        sample_every=cfg.get_int("/evolve/sample_every", 100, minimum=1),
        identity_samples=cfg.get_int("/evolve/identity_samples", 11, minimum=1),
        max_order=cfg.get_int("/evolve/max_order", 3, minimum=0),
        gap_tolerance=cfg.get_float("/tolerances/gap", 1e-5, positive=True),
        identity_tolerance=cfg.get_float("/tolerances/identity", 1e-7, positive=True),
        derivative_tolerance=cfg.get_float("/tolerances/derivative", 1e-6, positive=True),
        seed=cfg.seed() or 0,
    )
    report = compare_trajectories(eq)
    results = report.to_dict()
    results["seed"] = cfg.seed()
    result = SuiteResult(results, table=report.rows())
    if report.quadratic:
        result.check("max_gap", report.max_gap, eq.gap_tolerance)
    result.check("identity_residual",
                 max((r["residual"] for r in report.identity_residuals), default=0.0), eq.identity_tolerance)
    for mode, match in report.derivative_residuals.items():
        for order in match["asserted_orders"]:
            result.check(f"derivative_{mode}_order{order}", match["residuals"][order], eq.derivative_tolerance)
    result.check("schroedinger_cross_check", report.cross_check, CROSS_CHECK_TOL)
    return result


# ================================ appendix-a ================================

def _equal_energy_points(cfg: ExperimentConfig, system: SecondOrderSystem) -> list:
    """给定能量 E 与若干 φ，取 φ̇ = s·e_1 使能量相等"""
    n = system.mode_count
    energy = cfg.get_float("/appendix/equal_energy/energy", 0.2)
    raw = cfg.get("/appendix/equal_energy/phi", [[0.2] * n, [-0.3] * n, [0.0] * n])
    if not isinstance(raw, list) or len(raw) < 2:
        raise ConfigError("/appendix/equal_energy/phi", "expected at least two phi vectors")
    points = []
    for k in range(len(raw)):
        pointer = f"/appendix/equal_energy/phi/{k}"
        phi = np.asarray(cfg.get_floats(pointer, length=n))
        potential = float(system.energy_poly().evaluate(phi, phidot=np.zeros(n)))
        if potential > energy:
            raise ConfigError(pointer, f"potential {potential:.6g} exceeds the target energy {energy}")
        phidot = np.zeros(n)
        phidot[0] = math.sqrt(2.0 * (energy - potential))
        points.append(PhasePoint(phi, phidot))
    return points


def suite_appendix_a(cfg: ExperimentConfig) -> SuiteResult:
    """扩展 Fock 空间: X 共轭、增益算符、能量算符分类与平衡点"""
    w = cfg.get_floats("/system/frequencies", [1.0])
    n = len(w)
    f = cfg.get_poly("/system/interaction", "-0.75*phi1^2 + 0.25*phi1^4", mode_count=n)
    try:
        system = SecondOrderSystem.create(w, f)
    except FockLabError as exc:
        raise ConfigError("/system", str(exc)) from exc
    cutoff = cfg.get_int("/system/cutoff", 24, minimum=2)
    space = expanded_space(n, cutoff)
    tol = config.GUARD_TOL

    # ----------------------- X 共轭 -----------------------
    X = reification_X(space)
    conjugation = conjugation_residuals(space, X)

    # ----------------------- 增益算符 -----------------------
    gains_v = gain_operators(space, system, "v")
    gains_z = gain_operators(space, system, "z")
    margin = max((g.degree for g in system.g), default=0) + 2
    fd = gain_finite_difference_residual(space, system, gains_v.total, probe_point(system))
    anti = antihermitian_residual(gains_z.total, interior_mask(space, margin))
    twist = intertwining_residual(space, X, gains_v.total, gains_z.total, margin)

    t_max = cfg.get_float("/evolve/t_max", 5.0, positive=True)
    times = np.linspace(0.0, t_max, 11)
    z0 = encode_z(space, probe_point(system))
    norms = [z.norm() for z in evolve_z(gains_z.total, z0, times)]
    drift = max(abs(v - norms[0]) for v in norms) / norms[0]

    # ----------------------- 能量算符 -----------------------
    Hv = build_Hv(space, system)
    Hz = build_Hz(space, system)
    energy_mask = interior_mask(space, max(system.energy_poly().degree, 2) + 1)
    raw_points = cfg.get("/appendix/points", [{"phi": [0.5] * n, "phidot": [0.3] * n},
                                              {"phi": [-0.4] * n, "phidot": [0.6] * n}])
    if not isinstance(raw_points, list) or len(raw_points) < 2:
        raise ConfigError("/appendix/points", "expected at least two points")
    points = [
        PhasePoint(cfg.get_floats(f"/appendix/points/{k}/phi", length=n),
                   cfg.get_floats(f"/appendix/points/{k}/phidot", length=n))
        for k in range(len(raw_points))
    ]
    pure = []
    energy_error = 0.0
    for point in points:
        expected = system.classical_energy(point)
        on_v = classify_energy_operator(Hv, [encode_v(space, point)], mask=energy_mask)
        on_z = classify_energy_operator(Hz, [encode_z(space, point)], mask=energy_mask)
        error = max(abs(on_v["energies"][0] - expected), abs(on_z["energies"][0] - expected))
        energy_error = max(energy_error, error, on_v["lambda_residuals"][0], on_z["lambda_residuals"][0])
        pure.append({"phi": point.phi.tolist(), "phidot": point.pi.tolist(), "classical_energy": expected,
                     "Hv_energy": on_v["energies"][0], "Hz_energy": on_z["energies"][0],
                     "Hv_verdict": on_v["verdict"], "Hz_verdict": on_z["verdict"]})

    equal_points = _equal_energy_points(cfg, system)
    equal_vector = sum(encode_v(space, p).entries for p in equal_points) / len(equal_points)
    equal = classify_energy_operator(Hv, [equal_vector], mask=energy_mask)
    unequal_vector = 0.5 * (encode_v(space, points[0]).entries + encode_v(space, points[1]).entries)
    unequal = classify_energy_operator(Hv, [unequal_vector], mask=energy_mask)

    # ----------------------- 平衡点 -----------------------
    guess = cfg.get_floats("/appendix/equilibrium_guess", [1.0] * n, length=n)
    phi_star = find_equilibrium(system, guess)
    equilibrium = equilibrium_gain_check(space, system, PhasePoint(phi_star, np.zeros(n)), gains_v, gains_z)

    result = SuiteResult({
        "families": list(space.families),
        "cutoffs": {family: cutoff for family in space.families},
        "frequencies": w,
        "interaction": format_poly(system.f),
        "conjugation_residuals": conjugation,
        "gain": {"finite_difference": fd, "antihermitian_z": anti, "intertwining": twist},
        "z_norms": {"times": times.tolist(), "norms": norms, "drift": drift},
        "pure_states": pure,
        "equal_energy": {"verdict": equal["verdict"], "energy": equal["energies"][0],
                         "lambda_residual": equal["lambda_residuals"][0]},
        "unequal_energy": {"verdict": unequal["verdict"], "lambda_residual": unequal["lambda_residuals"][0]},
        "equilibrium": {"phi": phi_star.tolist(), **equilibrium},
    })
    result.check("conjugation", max(conjugation.values()), tol)
    result.check("gain_finite_difference", fd, tol)
    result.check("gain_intertwining", twist, tol)
    result.check("gain_z_antihermitian", anti, 1e-8)
    result.check("z_norm_drift", drift, 1e-8)
    result.check("energy_eigenvalue", energy_error, tol)
    result.check("equal_energy_eigenvector", equal["lambda_residuals"][0], tol)
    result.check("unequal_energy_counterexample", unequal["lambda_residuals"][0], 10 * tol, bound="lower")
    result.check("equilibrium_gain_v", equilibrium["v"], tol)
    result.check("equilibrium_gain_z", equilibrium["z"], tol)
    return result


# ================================ lattice ================================

def _lattice_spec(cfg: ExperimentConfig) -> LatticeSpec:
    try:
        return LatticeSpec(
            d=cfg.get_int("/lattice/d", 1, minimum=1),
            M=cfg.get_int("/lattice/M", 3, minimum=1),
            dx=cfg.get_float("/lattice/dx", 1.0, positive=True),
            masses=tuple(cfg.get_floats("/lattice/masses", [1.0])),
        )
    except FockLabError as exc:
        raise ConfigError("/lattice", str(exc)) from exc


def _mode_state(spec: LatticeSpec, q: int, amplitude: float) -> LatticeState:
    """单个动量模式 φ_1(x) = A·cos(p·x)，π = 0"""
    p = momentum_grid(spec)[q]
    phi = np.zeros((spec.fields, spec.sites))
    phi[0] = amplitude * np.cos(spec.positions @ p)
    return LatticeState(phi, np.zeros_like(phi))


def suite_lattice(cfg: ExperimentConfig) -> SuiteResult:
    """格点场: c 标定、迹恒等式、正频本征关系、泛函对易子与蛙跳色散"""
    spec = _lattice_spec(cfg)
    cutoff = cfg.get_int("/system/cutoff", 10, minimum=1)
    space = lattice_space(spec, cutoff)
    ops = field_operators(spec, space)
    tol = cfg.get_float("/tolerances/lattice", 1e-6, positive=True)
    seed = cfg.seed(required=True)
    samples = cfg.get_int("/lattice/samples", 4, minimum=3)
    amplitude = cfg.get_float("/lattice/amplitude", 0.1, positive=True)

    # ----------------------- 标定 -----------------------
    seeds = cfg.get("/lattice/calibration_seeds", [seed, seed + 1, seed + 2])
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("/lattice/calibration_seeds", "expected a non-empty list of seeds")
    calibrations = []
    for k in range(len(seeds)):
        rng = np.random.default_rng(cfg.get_int(f"/lattice/calibration_seeds/{k}", minimum=0))
        calibrations.append(calibrate_c(spec, space, sample_lattice_states(spec, rng, samples, amplitude), ops))
    c = calibrations[0].c
    spread = max(r.c for r in calibrations) - min(r.c for r in calibrations)

    # ----------------------- 迹恒等式与正频本征关系 -----------------------
    rng = np.random.default_rng(seed)
    trace_worst, eigen_worst, half_worst = 0.0, 0.0, 0.0
    for state in sample_lattice_states(spec, rng, samples, amplitude):
        vector = encode_lattice_state(spec, space, state, c)
        phi, pi = field_expectations(ops, vector)
        trace_worst = max(trace_worst, float(np.max(np.abs(phi - state.phi))), float(np.max(np.abs(pi - state.pi))))
        for j in range(1, spec.fields + 1):
            for x in range(spec.sites):
                lam = positive_frequency_eigenvalue(spec, state, c, j, x)
                applied = ops.matrix("phi_plus", j, x) @ vector.entries
                eigen_worst = max(eigen_worst, float(np.linalg.norm(applied - lam * vector.entries)))
                half_worst = max(half_worst, abs(lam.real - 0.5 * state.phi[j - 1, x]))

    # ----------------------- 对易子 -----------------------
    mask = interior_mask(space, 1)
    ccr_worst = 0.0
    identity = np.eye(int(mask.sum()))
    for j, x, k, y in itertools.product(range(1, spec.fields + 1), range(spec.sites), repeat=2):
        expected = 0.5j / spec.dx ** spec.d if (j, x) == (k, y) else 0.0
        C = equal_time_commutator(ops, j, x, k, y)
        ccr_worst = max(ccr_worst, float(np.max(np.abs(C[np.ix_(mask, mask)] - expected * identity))))
    functional = cfg.get_poly("/lattice/functional", "phi1^2*pi2 + 0.5*pi1^3 + phi3*pi3", mode_count=spec.mode_count)
    functional_worst = {"symbolic": 0.0, "interior": 0.0}
    for j in range(1, spec.fields + 1):
        for x in range(spec.sites):
            check = functional_commutator_check(spec, space, functional, j, x, ops)
            functional_worst = {k: max(functional_worst[k], check[k]) for k in functional_worst}

    # ----------------------- 蛙跳色散 -----------------------
    table = dispersion(spec)
    target = np.zeros(spec.d)
    if spec.M > 1:
        target[-1] = 2.0 * math.pi / (spec.M * spec.dx)
    q = int(np.argmin(np.linalg.norm(momentum_grid(spec) - target, axis=1)))
    omega = float(table.w[0, q])
    dt = cfg.get_float("/evolve/dt", min(0.005, 0.5 * leapfrog_step_bound(spec)), positive=True)
    periods = cfg.get_int("/lattice/periods", 10, minimum=2)
    steps = int(math.ceil((periods + 0.5) * 2.0 * math.pi / omega / dt))
    times, states, energies = leapfrog_trajectory(spec, None, _mode_state(spec, q, 0.05), dt, steps)
    measured = measure_frequency(times, np.array([s.phi[0, 0] for s in states]))
    energy_drift = float(np.max(np.abs(energies - energies[0])))

    result = SuiteResult(
        {
            "lattice": {"d": spec.d, "M": spec.M, "dx": spec.dx, "fields": spec.fields,
                        "masses": list(spec.masses), "cutoff": cutoff},
            "calibration": [
                {"c": r.c, "residual": r.residual, "reference": r.reference, "deviation": r.deviation,
                 "samples": r.samples} for r in calibrations
            ],
            "c_spread": spread,
            "trace_residual": trace_worst,
            "positive_frequency": {"eigen_residual": eigen_worst, "half_field_residual": half_worst},
            "commutator": {"equal_time": ccr_worst, "functional": functional_worst,
                           "functional_poly": format_poly(functional)},
            "dispersion": {"momentum_index": q, "momentum": momentum_grid(spec)[q].tolist(), "expected": omega,
                           "measured": measured, "dt": dt, "energy_drift": energy_drift},
        },
        table=observable_rows(spec, times[::max(1, len(times) // 200)], states[::max(1, len(times) // 200)]),
    )
    result.check("calibration_residual", max(r.residual for r in calibrations), tol)
    result.check("calibration_stability", spread, 1e-10)
    result.check("trace_identity", trace_worst, tol)
    result.check("positive_frequency_eigen", eigen_worst, tol)
    result.check("positive_frequency_half_field", half_worst, tol)
    result.check("equal_time_commutator", ccr_worst, tol)
    result.check("functional_commutator", max(functional_worst.values()), tol)
    result.check("leapfrog_dispersion", abs(measured - omega), 1e-4)
    return result


SUITES = {
    "verify-algebra": suite_verify_algebra,
    "encode": suite_encode,
    "compare": suite_compare,
    "appendix-a": suite_appendix_a,
    "lattice": suite_lattice,
}


# ================================ 运行 ================================

def build_report(subcommand: str, cfg: ExperimentConfig | None, result: SuiteResult | None,
                 error: Exception | None = None) -> dict:
    """报告内容只依赖 (配置, 种子, 版本)"""
    seed = None
    if cfg is not None and cfg.has("/seed"):
        seed = cfg.raw.get("seed")
    report = {
        "subcommand": subcommand,
        "version": config.VERSION,
        "seed": seed,
        "config": cfg.raw if cfg is not None else {},
        "results": result.results if result is not None else {},
        "assertions": [item.to_dict() for item in result.assertions] if result is not None else [],
        "passed": bool(result is not None and error is None and result.passed),
    }
    if error is not None:
        report["error"] = {"type": type(error).__name__, "message": str(error)}
        if isinstance(error, ConfigError):
            report["error"]["pointer"] = error.pointer
    return report


def run(subcommand: str, config_path=None, out_path=None, fmt: str = "json", overrides: dict | None = None) -> int:
    """
    🚀 执行一个子命令
    参数:
        config_path: TOML / JSON 配置 (verify-algebra 可省略)
        out_path: 报告路径，默认 REPORT_DIR/<subcommand>.<fmt>
        fmt: "json" 或 "csv"；csv 时 JSON 报告写在同名 .json 文件
    返回:
        退出码
    """
    if fmt not in ("json", "csv"):
        logger.error(f"❌ 不支持的输出格式 {fmt!r}")
        return EXIT_USAGE
    out = Path(out_path) if out_path else config.REPORT_DIR / f"{subcommand}.{fmt}"
    cfg, result, error = None, None, None
    exit_code = EXIT_OK
    logger.info(f"🚀 {subcommand}: config={config_path}, out={out}")
    try:
        if subcommand not in SUITES:
            raise ConfigError("/", f"unknown subcommand {subcommand!r}")
        raw = load_config(config_path) if config_path else {}
        cfg = ExperimentConfig(raw, overrides)
        result = SUITES[subcommand](cfg)
        if not result.passed:
            exit_code = EXIT_FAILED
            for item in result.assertions:
                if not item.passed:
                    logger.error(f"❌ 断言失败 {item.name}: {item.value:.3e} vs {item.tolerance:.3e}")
    except ConfigError as exc:
        error, exit_code = exc, EXIT_USAGE
        logger.error(f"❌ 配置错误 {exc.pointer}: {exc}")
    except FockLabError as exc:
        error, exit_code = exc, EXIT_FAILED
        logger.error(f"❌ {subcommand} 被拒绝: {type(exc).__name__}: {exc}")
    except Exception as exc:
        # 数值库内部失败 (LinAlgError, ValueError …) 同样写出报告
        error, exit_code = exc, EXIT_FAILED
        logger.exception(f"💥 {subcommand} 意外失败: {type(exc).__name__}: {exc}")

    report = build_report(subcommand, cfg, result, error)
    json_path = out if fmt == "json" else out.with_suffix(".json")
    digest = write_json(json_path, report)
    if fmt == "csv":
        header, rows = (result.table or result.assertion_table()) if result is not None else (["error"], [])
        digest = write_csv(out, header, rows)

    config_digest = cfg.sha256 if cfg is not None else hashlib.sha256(b"").hexdigest()
    reproducible = run_ledger.record_run(subcommand, config_digest, report["seed"], config.VERSION, exit_code,
                                         str(out), digest)
    if not reproducible:
        logger.warning(f"⚠️ {subcommand}: 相同配置/种子/版本的报告内容与上次不同")
    logger.info(f"✅ {subcommand} 完成: exit={exit_code}, 报告 {out}")
    return exit_code
