"""
IO*Star - Configuration and constants
"""

import logging
import os
from typing import Tuple

# Application metadata
APP_NAME = "iostar"
APP_TITLE = "IO*Star"
VERSION = "1.0.0"

# File extensions
BEHAVIOR_SUFFIX = ".iostd"
MANIFEST_SUFFIX = ".manifest"
TRACE_SUFFIX = ".trace"

# Reserved identity of the environment (script injections, returns to it)
ENVIRONMENT_ID = "env"

# Object configuration defaults
DEFAULT_POOL_SIZE = 4

# Tags each peer calls on when a machine is unfolded
DEFAULT_PEER_TAGS = 2

# Exploration / simulation budgets
DEFAULT_STATE_BOUND = 20000
DEFAULT_STEP_LIMIT = 1000

# Integer arithmetic outside this closed range raises DomainOverflow
INT_LIMIT: Tuple[int, int] = (-(2 ** 31), 2 ** 31 - 1)

# Object ids used when validation enumerates `id`-typed variables.
# The first one plays `self`.
VALIDATION_IDS: Tuple[str, ...] = ("obj0", "obj1")

# Exit codes
EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

# Logging
LOG_LEVEL_ENV = "IOSTAR_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "WARNING"
LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def get_log_level(verbosity: int = 0) -> int:
    """
    Resolve the logging level for the command-line tool.

    Each ``-v`` lowers the level by one step starting from the
    environment (or default) level.

    Args:
        verbosity: Number of ``-v`` flags given on the command line

    Returns:
        int: A ``logging`` level
    """
    name = os.environ.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL).upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        level = logging.WARNING
    return max(logging.DEBUG, level - 10 * verbosity)
