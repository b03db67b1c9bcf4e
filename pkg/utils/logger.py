import logging
import sys
from logging.handlers import TimedRotatingFileHandler

from config import config


class Logger:
    """
    📝 项目日志记录器
    功能：
    1. 📁 文件日志按天轮转，保留 config.LOG_BACKUP_DAYS 天
    2. 📺 控制台输出走 stderr，stdout 留给报告
    3. 📊 文件日志级别由 config.LOG_LEVEL 控制
    """

    def __init__(self, name="focklab"):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG)

        # 已配置过处理器时直接复用 (测试中会重复导入)
        if self.logger.handlers:
            return

        formatter = logging.Formatter(
            "🕐 %(asctime)s - 📦 %(name)s - 📊 %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        )

        # ----------------------- 📁 文件处理器 -----------------------
        file_handler = TimedRotatingFileHandler(
            config.LOG_DIR / "focklab.log",
            when="midnight",
            backupCount=config.LOG_BACKUP_DAYS,
            encoding="utf-8",
        )
        file_handler.suffix = "%Y-%m-%d"
        file_handler.setLevel(getattr(logging, config.LOG_LEVEL.upper(), logging.INFO))
        file_handler.setFormatter(formatter)

        # ----------------------- 📺 控制台处理器 -----------------------
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(formatter)

        self.logger.addHandler(file_handler)
        self.logger.addHandler(console_handler)
        self.logger.propagate = False

        self.logger.debug(f"📝 日志系统初始化完成，日志级别: {config.LOG_LEVEL}")

    def get_logger(self):
        """📤 获取配置好的日志记录器"""
        return self.logger


# 🌍 创建全局日志记录器
logger = Logger().get_logger()
