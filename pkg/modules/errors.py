"""
⚠️ 异常层次
所有模块抛出的异常都派生自 FockLabError，CLI 层统一捕获并转换为退出码
"""


class FockLabError(Exception):
    """项目异常根类"""


# ================================ 代数 ================================

class AlgebraError(FockLabError):
    """阶梯算符代数错误"""


class DegreeOverflowError(AlgebraError):
    """单词长度或指数超过 MAX_DEGREE (从不静默截断)"""


class ModeIndexError(AlgebraError):
    """模式编号越界"""


class DomainError(AlgebraError):
    """变量不属于该操作允许的集合"""


class NonFiniteCoefficientError(AlgebraError):
    """系数为 NaN/Inf"""


# ================================ DSL ================================

class PolySyntaxError(FockLabError):
    """多项式 DSL 语法错误，带行列号"""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownVariableError(PolySyntaxError):
    """未知变量名"""


class ExponentOverflowError(DegreeOverflowError):
    """DSL 指数超过 MAX_DEGREE"""


# ================================ Fock 数值 ================================

class FockError(FockLabError):
    """截断 Fock 空间错误"""


class FockBudgetError(FockError):
    """维数超过预算"""


class FamilyMismatchError(FockError):
    """算符族 (A/B) 与空间不匹配"""


class TailBoundError(FockError):
    """截断尾部超过拒绝阈值"""

    def __init__(self, message: str, bound: float, suggested_cutoff: int):
        super().__init__(f"{message}; tail bound {bound:.3e}, suggested cutoff ≥ {suggested_cutoff}")
        self.bound = bound
        self.suggested_cutoff = suggested_cutoff


class ShapeMismatchError(FockError):
    """矩阵 / 向量形状不匹配"""


class EnsembleError(FockError):
    """系综不合法 (空、负权重、权重和不为1)"""


class NonPhysicalStateError(FockError):
    """密度矩阵非半正定，或 Hermitian 观测量期望值含虚部"""


# ================================ 经典动力学 ================================

class IntegrationError(FockLabError):
    """积分出现非有限状态"""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} at step {step}")
        self.step = step


# ================================ 等价性 ================================

class EquivalenceError(FockLabError):
    """Heisenberg 传播错误"""


class NonHermitianGeneratorError(EquivalenceError):
    """生成元不是 Hermitian"""


# ============================= 扩展 Fock 空间 =============================

class ExpandedFockError(FockLabError):
    """扩展 Fock 空间构造错误"""


class ReificationError(ExpandedFockError):
    """X 的共轭守卫未通过"""

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message}; condition estimate {condition:.3e}")
        self.condition = condition


class GainTranscriptionError(ExpandedFockError):
    """增益算符的有限差分守卫未通过"""


class EnergyTranscriptionError(ExpandedFockError):
    """能量算符的本征守卫未通过"""


class DegenerateSystemError(ExpandedFockError):
    """原点曲率矩阵奇异"""


class NonEquilibriumError(ExpandedFockError):
    """输入点不是经典平衡点"""


class ZeroNormStateError(ExpandedFockError):
    """零范数态无法分类"""


# ================================ 格点场 ================================

class LatticeError(FockLabError):
    """格点场错误"""


class MasslessZeroModeError(LatticeError):
    """m=0, p=0 模式无法编码"""


class CalibrationError(LatticeError):
    """标定样本退化"""


class LatticeInstabilityError(LatticeError):
    """蛙跳积分能量发散"""

    def __init__(self, message: str, step: int):
        super().__init__(f"{message} at step {step}")
        self.step = step


# ================================ 配置 ================================

class ConfigError(FockLabError):
    """实验配置不合法，带 JSON pointer"""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


# ================================ 报告 ================================

class ReportError(FockLabError):
    """报告无法序列化 (非有限数值或不支持的类型)"""
