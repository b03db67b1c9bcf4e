import os
from pathlib import Path
from dotenv import load_dotenv

# 加载环境变量文件 (.env)
load_dotenv()


def _env(name: str, default):
    """
    读取 FOCKLAB_ 前缀的环境变量，并按默认值的类型解析
    未设置时返回默认值
    """
    raw = os.getenv(f"FOCKLAB_{name}")
    if raw is None:
        return default
    if isinstance(default, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, Path):
        return Path(raw)
    return raw


class Config:
    """
    项目配置类，集中管理所有数值预算、容差和目录
    1. 所有容差参数集中管理，避免散落在各模块
    2. 通过 .env 或 FOCKLAB_* 环境变量覆盖默认值
    3. 自动创建日志、报告和数据库目录
    """

    def __init__(self):
        # ----------------------- 基础路径配置 -----------------------
        # 项目根目录
        self.BASE_DIR = Path(__file__).resolve().parent

        # 日志目录
        self.LOG_DIR = _env("LOG_DIR", self.BASE_DIR / "log")

        # 报告目录 - CLI 默认输出位置
        self.REPORT_DIR = _env("REPORT_DIR", self.BASE_DIR / "reports")

        # 数据库目录 - 运行台账 (SQLite)
        self.DB_DIR = _env("DB_DIR", self.BASE_DIR / "db")
        self.DB_PATH = self.DB_DIR / "runs.db"

        # 创建所有必要目录
        self._create_directories()

        # ----------------------- 版本 -----------------------
        # 写入每一份报告
        self.VERSION = "1.0.0"

        # ----------------------- 代数配置 -----------------------
        # 单词长度 / 指数上限
        self.MAX_DEGREE = _env("MAX_DEGREE", 16)

        # 合并同类项时丢弃的相对系数阈值
        self.MERGE_RELATIVE_TOL = _env("MERGE_RELATIVE_TOL", 1e-14)

        # 残差多项式最大系数不超过该值即视为"符号零"
        self.SYMBOLIC_ZERO_TOL = _env("SYMBOLIC_ZERO_TOL", 1e-12)

        # ----------------------- Fock 空间配置 -----------------------
        # 稠密矩阵维数上限
        self.MAX_DIMENSION = _env("MAX_DIMENSION", 65536)

        # 截断尾部: 超过 TAIL_REFUSAL 拒绝编码, 超过 TAIL_TARGET 记录警告
        self.TAIL_REFUSAL = _env("TAIL_REFUSAL", 1e-6)
        self.TAIL_TARGET = _env("TAIL_TARGET", 1e-8)

        # Hermitian / 幺正性检查
        self.HERMITIAN_TOL = _env("HERMITIAN_TOL", 1e-12)
        self.UNITARITY_TOL = _env("UNITARITY_TOL", 1e-10)

        # 密度矩阵最小本征值下限 (按迹缩放) 与 Hermitian 期望值虚部上限
        self.PSD_TOL = _env("PSD_TOL", 1e-10)
        self.EXPECTATION_IMAG_TOL = _env("EXPECTATION_IMAG_TOL", 1e-10)

        # 稠密矩阵占用超过可用内存的该比例时发出警告
        self.MEMORY_WARN_FRACTION = _env("MEMORY_WARN_FRACTION", 0.5)

        # ----------------------- 扩展Fock空间 -----------------------
        # encode_z 求和时在截断之外额外保留的占据数
        self.REIFICATION_PAD = _env("REIFICATION_PAD", 40)

        # 所有"转录守卫"的接受阈值
        self.GUARD_TOL = _env("GUARD_TOL", 1e-6)

        # 守卫使用的探针相空间点幅度
        self.GUARD_PROBE_AMPLITUDE = _env("GUARD_PROBE_AMPLITUDE", 0.3)

        # 有限差分步长
        self.FINITE_DIFFERENCE_STEP = _env("FINITE_DIFFERENCE_STEP", 1e-4)

        # ----------------------- 格点场 -----------------------
        # 格点数 × 场数 上限
        self.MAX_LATTICE_MODES = _env("MAX_LATTICE_MODES", 27)

        # 格点场标定残差阈值
        self.CALIBRATION_TOL = _env("CALIBRATION_TOL", 1e-6)

        # ----------------------- 日志配置 -----------------------
        # 日志级别: DEBUG, INFO, WARNING, ERROR, CRITICAL
        self.LOG_LEVEL = _env("LOG_LEVEL", "INFO")

        # 按天轮转的日志保留天数
        self.LOG_BACKUP_DAYS = _env("LOG_BACKUP_DAYS", 7)

    def _create_directories(self):
        """创建项目所需的所有目录"""
        for directory in [self.LOG_DIR, self.REPORT_DIR, self.DB_DIR]:
            directory.mkdir(parents=True, exist_ok=True)


# 创建全局配置实例
config = Config()
