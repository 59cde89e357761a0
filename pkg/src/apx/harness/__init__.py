"""Verification harness: explicit constants, inequality checks and reports."""

from .checks import CHECK_IDS, CheckReport, CheckSpec, estimate_decay_exponent, run_check
from .constants import explicit_constants

__all__ = ["CHECK_IDS", "CheckReport", "CheckSpec", "estimate_decay_exponent", "explicit_constants",
           "run_check"]
