"""Closed-form upper bounds on the chromatic number of R^n_K."""

import math
import warnings

from .errors import InputError


def theorem1_log_bracket(n, k, gamma):
    """``n ln n + n ln ln n + 2 ln k + 2n(1 + ln 2 gamma)``."""
    return n * math.log(n) + n * math.log(math.log(n)) + 2.0 * math.log(k) + 2.0 * n * (1.0 + math.log(2.0 * gamma))


def _check_n(n, what):
    if int(n) != n or n < 2:
        raise InputError(f"{what} needs an integer n >= 2")
    if n == 2:
        warnings.warn(f"{what} at n = 2: ln ln 2 < 0, the formula is outside its intended range", stacklevel=3)


def theorem1_bound(n, k, gamma):
    """Natural log of ``(1 + gamma)^n * bracket`` where the bracket is
    ``n ln n + n ln ln n + 2 ln k + 2n(1 + ln(2 gamma))``.

    Evaluated in the log domain, so any n is representable.
    """
    _check_n(n, "theorem1_bound")
    if int(k) != k or k < 1:
        raise InputError("k must be a positive integer")
    if not gamma >= 1:
        raise InputError("gamma must be >= 1")
    bracket = theorem1_log_bracket(n, k, gamma)
    if bracket <= 0:
        raise InputError(f"bracket is not positive ({bracket:.4g})")
    return n * math.log1p(gamma) + math.log(bracket)


def butler_bound(n, vol_ratio, c=3.0):
    """``[vol_ratio * n^(log2(ln n) + c)]^(1/n)``; ``vol_ratio = vol(DK)/vol(K)``.

    ``vol_ratio`` may be a Python int of any size (e.g. ``2**1000``).
    """
    _check_n(n, "butler_bound")
    if not vol_ratio >= 1:
        raise InputError("vol_ratio must be >= 1")
    log_ratio = math.log(vol_ratio)
    exponent = math.log2(math.log(n)) + c
    return math.exp((log_ratio + exponent * math.log(n)) / n)


def finite_run_bound(max_set_size, tau_star):
    """Greedy guarantee ``(1 + ln max_set_size) * tau_star``."""
    if max_set_size < 1:
        raise InputError("max_set_size must be >= 1")
    if not tau_star > 0:
        raise InputError("tau_star must be positive")
    return (1.0 + math.log(max_set_size)) * tau_star
