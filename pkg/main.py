"""
🚀 主程序入口 (批处理)
用法:
    python main.py verify-algebra --modes 2 --max-degree 4 --trials 100 --seed 7
    python main.py compare --config configs/harmonic.toml --out reports/harmonic.json
"""

import argparse
import sys

from config import config
from modules.experiment_runner import EXIT_USAGE, SUBCOMMANDS, run
from utils.logger import logger


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


class _Parser(argparse.ArgumentParser):
    """用法错误统一以退出码 2 结束"""

    def error(self, message):
        self.print_usage(sys.stderr)
        logger.error(f"❌ 用法错误: {message}")
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="focklab", description="Fock 编码验证实验室")
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.VERSION}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML / JSON 实验配置")
        p.add_argument("--out", help="报告输出路径")
        p.add_argument("--seed", type=_u64)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--modes", type=int)
        p.add_argument("--cutoff", type=int)
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--dt", type=float)
        if name == "verify-algebra":
            p.add_argument("--max-degree", dest="max_degree", type=int)
            p.add_argument("--trials", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key, None)
        for key in ("modes", "cutoff", "t_max", "dt", "seed", "max_degree", "trials")
    }
    return run(args.subcommand, args.config, args.out, args.format, overrides)


if __name__ == "__main__":
    sys.exit(main())
