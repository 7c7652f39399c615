# app.py - Command-line entry point for scenario runs
import argparse
import logging
import sys

import config
from phasefield_engine.scenarios import exit_code, run

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pflab",
        description="Run a cohesive phase-field scenario and write its report and tables.",
    )
    parser.add_argument("--config", required=True, metavar="PATH", help="scenario TOML file")
    parser.add_argument("--out-dir", default=None, metavar="PATH",
                        help="output directory (default: the scenario's [output] dir, then $PFLAB_OUT_DIR or ./out)")
    parser.add_argument("--threads", type=int, default=config.THREADS, metavar="N",
                        help="worker threads (default: available parallelism)")
    parser.add_argument("--strict", action="store_true", help="treat hypothesis failures as fatal")
    parser.add_argument("--seed", type=int, default=config.SEED, metavar="U64",
                        help="seed for perturbed multistarts (default 42)")
    return parser


def progress(percentage: int, message: str):
    logger.info(f"📊 [{percentage:3d}%] {message}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config.configure_logging()
    if args.threads < 1:
        logger.error(f"❌ --threads must be ≥ 1, got {args.threads}")
        return 2
    report = run(args.config, out_dir=args.out_dir, threads=args.threads, seed=args.seed,
                 strict=args.strict, progress_callback=progress, default_out_dir=config.OUT_DIR)
    if report.get("success"):
        logger.info(f"✅ {report['kind']} run finished")
    else:
        logger.error(f"❌ {report.get('error')}")
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
