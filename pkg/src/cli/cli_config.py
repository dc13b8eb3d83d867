"""Configuration module for the command line.
Everything that is used globally by the commands (environment, defaults,
exit codes) should be stored in this module.
"""
import os

from dotenv import load_dotenv

from util.log_config import setup_logging

load_dotenv()

logger = setup_logging("cli_config")

ARTIFACT_VERSION = "0.1.0"

# Config params
OUT_DIR_ENV = "COINLENS_OUT"
DEFAULT_OUT_DIR = "./out"

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_INVARIANT = 3

BASELINE_CHOICES = ("none", "buy-and-hold", "ma-crossover", "all")
INGEST_MODES = ("pre-joined", "raw")


def default_out_dir() -> str:
    """Output directory from COINLENS_OUT, ``./out`` when unset."""
    out_dir = os.getenv(OUT_DIR_ENV) or DEFAULT_OUT_DIR
    logger.debug("Default output directory: %s", out_dir)
    return out_dir
