# config.py - Environment-driven defaults for the scenario runner
import logging
import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

OUT_DIR = os.getenv("PFLAB_OUT_DIR", "./out")
THREADS = int(os.getenv("PFLAB_THREADS", os.cpu_count() or 1))
SEED = int(os.getenv("PFLAB_SEED", 42))
LOG_LEVEL = os.getenv("PFLAB_LOG_LEVEL", "INFO")

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def configure_logging(level: str | None = None):
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT)
