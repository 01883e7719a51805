"""
Worker parallelism, controlled by the TSR_THREADS environment variable.
Only scipy.fft calls are covered. numpy linear algebra uses the threads of
the BLAS library it is linked against
"""

import os

from .exception import ConfigError

ENV_THREADS = "TSR_THREADS"


def fft_workers() -> int:
    """
    Number of workers to pass to scipy.fft calls. 0 (or unset) means all
    available cores, which scipy spells as -1
    """
    value = os.environ.get(ENV_THREADS, "").strip()
    if not value:
        return -1
    try:
        num = int(value)
    except ValueError:
        raise ConfigError("invalid {} value: '{}'", ENV_THREADS, value)
    if num < 0:
        raise ConfigError("{} must be >= 0, got {}", ENV_THREADS, num)
    return num or -1
