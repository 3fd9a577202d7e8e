"""
Configuration module for loading environment variables and constants.
"""
import logging
import os
import sys

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), '..', '.env'))

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))

# Tree and scoring constants
INDEX_SCALE = 100.0
WEIGHT_TOLERANCE = 1e-6
CONTRIBUTION_TOLERANCE = 1e-9

MISSING_POLICIES = ('fail', 'reweight', 'zero_fill')
OUTPUT_FORMATS = ('machine', 'table')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')

# Runtime defaults
DEFAULT_MISSING_POLICY = os.getenv('INDEX_MISSING_POLICY', 'reweight')
DEFAULT_OUTPUT_FORMAT = os.getenv('INDEX_OUTPUT_FORMAT', 'table')
LOG_LEVEL = os.getenv('INDEX_LOG_LEVEL', 'WARNING')
FIXTURES_DIR = os.getenv('INDEX_FIXTURES_DIR', os.path.join(REPO_ROOT, 'fixtures'))
SENSITIVITY_CHUNK_SIZE = os.getenv('INDEX_SENSITIVITY_CHUNK', '1000')

# Reproduction tolerances per built-in case
REPRODUCTION_TOLERANCES = {
    'china-regions': 0.05,
    'us-china': 0.10,
}


def sensitivity_chunk_size() -> int:
    """Number of samples scored per vectorised block."""
    return int(SENSITIVITY_CHUNK_SIZE)


def validate_config():
    """Validate that configured values are usable."""
    problems = []

    if DEFAULT_MISSING_POLICY not in MISSING_POLICIES:
        problems.append(
            f"INDEX_MISSING_POLICY={DEFAULT_MISSING_POLICY!r} (expected one of {', '.join(MISSING_POLICIES)})"
        )
    if DEFAULT_OUTPUT_FORMAT not in OUTPUT_FORMATS:
        problems.append(
            f"INDEX_OUTPUT_FORMAT={DEFAULT_OUTPUT_FORMAT!r} (expected one of {', '.join(OUTPUT_FORMATS)})"
        )
    if LOG_LEVEL.upper() not in LOG_LEVELS:
        problems.append(f"INDEX_LOG_LEVEL={LOG_LEVEL!r} (expected one of {', '.join(LOG_LEVELS)})")
    try:
        if sensitivity_chunk_size() <= 0:
            problems.append(f"INDEX_SENSITIVITY_CHUNK={SENSITIVITY_CHUNK_SIZE!r} (must be positive)")
    except ValueError:
        problems.append(f"INDEX_SENSITIVITY_CHUNK={SENSITIVITY_CHUNK_SIZE!r} (not an integer)")
    if not os.path.isdir(FIXTURES_DIR):
        problems.append(f"INDEX_FIXTURES_DIR={FIXTURES_DIR!r} (no such directory)")

    if problems:
        raise ValueError(f"Invalid configuration: {'; '.join(problems)}")

    return True


def configure_logging(level: str = None):
    """Send log records to stderr so stdout stays machine-readable."""
    logging.basicConfig(
        stream=sys.stderr,
        level=(level or LOG_LEVEL).upper(),
        format='%(levelname)s %(name)s: %(message)s',
    )
