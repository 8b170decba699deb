# app/config.py

import os
import logging
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Iterator, List, Optional
from dotenv import load_dotenv

from .errors import GuardExceeded

load_dotenv() # Load variables from .env file

logger = logging.getLogger(__name__)


def _int_list(value: str) -> List[int]:
    return [int(part) for part in value.split(",") if part.strip()]


def _flag(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "on")


# Ground-set capacity of a SubsetMask
K_MAX = int(os.getenv("SEPSPLIT_K_MAX", "65536"))

# Per-operation guards for the exhaustive routines
UNION_GUARD = int(os.getenv("SEPSPLIT_UNION_GUARD", "24"))
EVAL_GUARD = int(os.getenv("SEPSPLIT_EVAL_GUARD", "100000000"))
SPLIT_K_GUARD = int(os.getenv("SEPSPLIT_SPLIT_K_GUARD", "24"))
NSPLIT_K_GUARDS = _int_list(os.getenv("SEPSPLIT_NSPLIT_K_GUARDS", "20,10,6"))
EXPLICIT_K_GUARD = int(os.getenv("SEPSPLIT_EXPLICIT_K_GUARD", "12"))
CUBE_M_GUARD = int(os.getenv("SEPSPLIT_CUBE_M_GUARD", "5"))
CENSUS_M_GUARD = int(os.getenv("SEPSPLIT_CENSUS_M_GUARD", "4"))
# SEPARATING, N_SEPARATING, SPLITTING, N_SPLITTING
SEARCH_K_GUARDS = _int_list(os.getenv("SEPSPLIT_SEARCH_K_GUARDS", "10,6,8,6"))

# Process-wide default; --unsafe-limits and experiment specs override it per call through unsafe_limits()
UNSAFE_LIMITS = _flag(os.getenv("SEPSPLIT_UNSAFE_LIMITS", "false"))
_unsafe_override: ContextVar[Optional[bool]] = ContextVar("unsafe_limits", default=None)

# Experiment harness
WORKERS = int(os.getenv("SEPSPLIT_WORKERS", "4"))
REPORT_DIR = os.getenv("SEPSPLIT_REPORT_DIR", "reports")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")


def nsplit_k_guard(n: int) -> int:
    """Largest k that is_n_splitting accepts for collections of n sets."""
    index = min(max(n, 1), len(NSPLIT_K_GUARDS)) - 1
    return NSPLIT_K_GUARDS[index]


def enforce_guard(operation: str, cost: int, limit: int) -> None:
    """
    Fail fast when an exhaustive routine would exceed its configured budget.

    Args:
        operation: Name of the guarded operation (used in the error message)
        cost: The size the operation is about to enumerate
        limit: The configured maximum for that size

    Raises:
        GuardExceeded: If cost > limit and unsafe limits are off
    """
    if cost <= limit:
        return
    if limits_disabled():
        logger.warning(f"Guard for {operation} bypassed: {cost} > {limit}")
        return
    raise GuardExceeded(operation, cost, limit)


def limits_disabled() -> bool:
    override = _unsafe_override.get()
    return UNSAFE_LIMITS if override is None else override


@contextmanager
def unsafe_limits(enabled: bool = True) -> Iterator[None]:
    """
    Disable the guards for the current context (thread or task) only.

    Nested scopes can turn the guards off but never back on; leaving the
    block restores whatever was in force before.
    """
    token = _unsafe_override.set(limits_disabled() or enabled)
    try:
        yield
    finally:
        _unsafe_override.reset(token)


# Vectorized subset sweeps hold one subset per uint64 word
WORD_BITS = 64


def enforce_word_width(operation: str, bits: int) -> None:
    """
    Reject sweeps over universes wider than a machine word. Unsafe limits do
    not lift this.

    Raises:
        GuardExceeded: If bits > WORD_BITS
    """
    if bits > WORD_BITS:
        raise GuardExceeded(operation, bits, WORD_BITS)
