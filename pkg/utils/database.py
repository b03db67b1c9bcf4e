import sqlite3
import uuid
from datetime import datetime
from pathlib import Path

from config import config
from utils.logger import logger


def _seed_key(seed) -> str | None:
    return None if seed is None else str(seed)


class RunLedger:
    """
    🗄️ 运行台账
    功能：
        1. ✅ 每次 CLI 运行记录一行 (子命令、配置摘要、种子、版本、退出码、报告摘要)
        2. 🔁 相同 (子命令, 配置, 种子, 版本) 的报告摘要不一致时记为可复现性违例
        3. 🔄 自动初始化数据库结构

    时间戳只写入台账，从不进入报告
    """

    def __init__(self, db_path=None):
        # 📄 使用配置中的数据库路径
        self.db_path = db_path or config.DB_PATH

        # 📋 确保数据库目录存在
        Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)

        self._init_db()

    # ================================ 数据库初始化 ================================

    def _init_db(self):
        conn = self.get_connection()
        cursor = conn.cursor()
        try:
            cursor.execute('''
                CREATE TABLE IF NOT EXISTS runs (
                    run_id TEXT PRIMARY KEY,      -- 运行ID (UUID)
                    created TEXT NOT NULL,        -- ISO 时间戳
                    subcommand TEXT NOT NULL,     -- 子命令
                    config_sha256 TEXT NOT NULL,  -- 配置内容摘要
                    seed TEXT,                    -- 随机种子 (u64 以文本保存)
                    version TEXT NOT NULL,        -- 程序版本
                    exit_code INTEGER NOT NULL,   -- 退出码
                    report_path TEXT,             -- 报告路径
                    report_sha256 TEXT            -- 报告内容摘要
                )
            ''')
            cursor.execute(
                'CREATE INDEX IF NOT EXISTS idx_runs_key ON runs(subcommand, config_sha256, seed, version)'
            )
            conn.commit()
        except sqlite3.Error as e:
            logger.error(f"❌ 运行台账初始化失败: {str(e)}")
            conn.rollback()
        finally:
            conn.close()

    # ================================ 记录与查询 ================================

    def previous_digest(self, subcommand: str, config_sha256: str, seed, version: str) -> str | None:
        """同一运行键最近一次的报告摘要"""
        conn = self.get_connection()
        try:
            cursor = conn.cursor()
            cursor.execute(
                '''SELECT report_sha256 FROM runs
                   WHERE subcommand = ? AND config_sha256 = ? AND seed IS ? AND version = ?
                     AND report_sha256 IS NOT NULL
                   ORDER BY created DESC LIMIT 1''',
                (subcommand, config_sha256, _seed_key(seed), version),
            )
            row = cursor.fetchone()
            return row[0] if row else None
        except sqlite3.Error as e:
            logger.error(f"❌ 查询运行台账失败: {str(e)}")
            return None
        finally:
            conn.close()

    def record_run(self, subcommand: str, config_sha256: str, seed, version: str, exit_code: int,
                   report_path: str | None, report_sha256: str | None) -> bool:
        """
        ➕ 记录一次运行
        返回:
            True 表示与已有记录一致 (或首次运行)，False 表示可复现性违例
        """
        reproducible = True
        previous = self.previous_digest(subcommand, config_sha256, seed, version)
        if previous is not None and report_sha256 is not None and previous != report_sha256:
            reproducible = False
            logger.warning(
                f"⚠️ 可复现性违例: {subcommand} (seed={seed}, version={version}) 报告摘要 {previous[:12]} → {report_sha256[:12]}"
            )

        conn = self.get_connection()
        try:
            cursor = conn.cursor()
            cursor.execute(
                "INSERT INTO runs VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (str(uuid.uuid4()), datetime.now().isoformat(), subcommand, config_sha256, _seed_key(seed), version,
                 int(exit_code), report_path, report_sha256),
            )
            conn.commit()
            logger.debug(f"📝 运行已记录: {subcommand} exit={exit_code}")
        except sqlite3.Error as e:
            logger.error(f"❌ 记录运行失败: {str(e)}")
            conn.rollback()
        finally:
            conn.close()
        return reproducible

    def get_runs(self, subcommand: str | None = None, limit: int = 50) -> list[dict]:
        conn = self.get_connection()
        try:
            cursor = conn.cursor()
            if subcommand:
                cursor.execute("SELECT * FROM runs WHERE subcommand = ? ORDER BY created DESC LIMIT ?",
                               (subcommand, limit))
            else:
                cursor.execute("SELECT * FROM runs ORDER BY created DESC LIMIT ?", (limit,))
            columns = [c[0] for c in cursor.description]
            return [dict(zip(columns, row)) for row in cursor.fetchall()]
        except sqlite3.Error as e:
            logger.error(f"❌ 查询运行记录失败: {str(e)}")
            return []
        finally:
            conn.close()

    def get_connection(self) -> sqlite3.Connection:
        return sqlite3.connect(self.db_path)


run_ledger = RunLedger()
