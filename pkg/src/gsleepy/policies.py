"""Named members of the locking-LPT family and their target ratios."""

from __future__ import annotations

import math

from .core import InvalidArgument, PolicyParams

SLEEPY_TWO_ALPHA = (3 - math.sqrt(5)) / 2
DYNAMIC_LAMBDA = 4 ** (25 / 6)
M3_STATIC_ALPHA = 0.07066
M3_TARGET_GAMMA = 0.482

POLICY_NAMES = ("lpt", "sleepy2", "gsleepy-static", "gsleepy-dynamic")


def lpt() -> PolicyParams:
    return PolicyParams(0.0, 1.0)


def sleepy_two() -> PolicyParams:
    return PolicyParams(SLEEPY_TWO_ALPHA, 1.0)


def gsleepy(m: int, dynamic: bool) -> PolicyParams:
    """Recommended parameters for ``m`` machines.

    One machine needs no lock, two machines use the classic two-machine lock,
    three machines without dynamic locking use the tested static point, and
    everything else uses ``alpha = 1/(4 m^2)`` with ``lam = 4**(25/6)`` when
    dynamic.
    """
    if m < 1:
        raise InvalidArgument(f"machine count must be >= 1, got {m}")
    if m == 1:
        return lpt()
    if m == 2:
        return sleepy_two()
    if m == 3 and not dynamic:
        return PolicyParams(M3_STATIC_ALPHA, 1.0)
    return PolicyParams(1 / (4 * m * m), DYNAMIC_LAMBDA if dynamic else 1.0)


def target_gamma(m: int) -> float:
    """Guaranteed ratio minus one."""
    if m < 1:
        raise InvalidArgument(f"machine count must be >= 1, got {m}")
    if m == 1:
        return 0.0
    if m == 2:
        return SLEEPY_TWO_ALPHA
    if m == 3:
        return M3_TARGET_GAMMA
    return 0.5 - 4.0 ** -20 / (m * m)


def by_name(name: str, m: int, alpha: float | None = None, lam: float | None = None) -> PolicyParams:
    if name == "lpt":
        base = lpt()
    elif name == "sleepy2":
        base = sleepy_two()
    elif name == "gsleepy-static":
        base = gsleepy(m, dynamic=False)
    elif name == "gsleepy-dynamic":
        base = gsleepy(m, dynamic=True)
    else:
        raise InvalidArgument(f"unknown policy {name!r}; expected one of {', '.join(POLICY_NAMES)}")
    return PolicyParams(base.alpha if alpha is None else alpha, base.lam if lam is None else lam)
