"""Exact rational checks of the parameter conditions behind the ratio guarantees.

Every condition is stored in a canonical form ``margin REL 0`` with
``REL`` one of ``>``, ``>=``, ``<=``, and the margin is an exact ``Fraction``.
The only irrational coefficient, ``4 ** -17.75 = sqrt(2) * 2 ** -36``, is
replaced by a slightly smaller rational so that a pass stays sound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .core import InvalidArgument

SQRT2_BELOW = Fraction(1414213562, 10**9)
FOUR_POW_M17_75 = SQRT2_BELOW / 2**36  # < 4 ** -17.75
FOUR_POW_M18_75 = SQRT2_BELOW / 2**38  # < 4 ** -18.75
DYNAMIC_LAMBDA = 4 ** (25 / 6)

GENERAL_IDS = tuple(str(i) for i in range(1, 16))
GENERAL_ALT_IDS = ("6-alt", "10-alt", "13-alt")
M3_IDS = ("m3-1", "m3-2", "m3-3", "m3-9", "m3-10", "m3-11", "m3-12", "m3-13", "m3-14", "m3-15")


def parse_rational(text: str | int | float | Fraction) -> Fraction:
    """Exact value of ``"p/q"``, a decimal string, an int or a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(repr(text))
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"not a rational number: {text!r}") from exc


@dataclass(frozen=True)
class Params:
    m: int
    alpha: Fraction
    gamma: Fraction

    def __post_init__(self):
        if self.m < 2:
            raise InvalidArgument(f"m must be >= 2, got {self.m}")
        if self.alpha < 0:
            raise InvalidArgument("alpha must be non-negative")
        if not 0 < self.gamma < 1:
            raise InvalidArgument("gamma must lie in (0, 1)")


@dataclass(frozen=True)
class Condition:
    id: str
    relation: str
    margin: Fraction | None
    satisfied: bool
    note: str = ""


@dataclass(frozen=True)
class ConditionReport:
    conditions: tuple[Condition, ...]
    substituted: dict[str, Fraction]

    def __getitem__(self, cid: str) -> Condition:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def all_pass(self, ids: Iterable[str] | None = None) -> bool:
        wanted = set(ids) if ids is not None else None
        return all(c.satisfied for c in self.conditions if wanted is None or c.id in wanted)

    def failed(self) -> list[str]:
        return [c.id for c in self.conditions if not c.satisfied]


def _holds(relation: str, margin: Fraction) -> bool:
    if relation == ">":
        return margin > 0
    if relation == ">=":
        return margin >= 0
    if relation == "<=":
        return margin <= 0
    raise ValueError(relation)


def _evaluate(cid: str, relation: str, margin: Callable[[], Fraction], note: str = "") -> Condition:
    try:
        value = margin()
    except ZeroDivisionError:
        return Condition(cid, relation, None, False, "undefined (division by zero)")
    return Condition(cid, relation, value, _holds(relation, value), note)


def _positive_denominator(den: Fraction) -> Fraction:
    if den <= 0:
        raise ZeroDivisionError
    return den


def check_general(params: Params) -> ConditionReport:
    m, a, g = params.m, params.alpha, params.gamma
    q = FOUR_POW_M17_75
    d3 = lambda: _positive_denominator(Fraction(3, 4) * m - 1 - (m - 1) * a)
    conds = [
        _evaluate("1", ">", lambda: g / a - m) if a > 0 else Condition("1", ">", None, False, "alpha = 0"),
        _evaluate("2", ">=", lambda: g - (m - 1) * a - Fraction(2, 5)),
        _evaluate("3", ">", lambda: (m * g - Fraction(m, 4) - m * (m - 1) * a) / d3() - Fraction(1, 3)),
        _evaluate("4", ">=", lambda: g - (1 + Fraction(7, 2) * (m - 1) * a) / Fraction(5, 2)),
        _evaluate("5", ">=", lambda: 4 * g - 2 * (2 * m - 3) * a - 1),
        _evaluate("6", ">", lambda: (2 + q * a) * g - 1, "4**-17.75 replaced by a rational lower bound"),
        _evaluate("7", ">=", lambda: 1 - m * a / (1 + (m - 1) * a)),
        _evaluate("8", ">=", lambda: 2 * g / (1 + (m - 1) * a)
                  + (g - Fraction(1, 4) - (m - 1) * a) / d3() - 1),
        _evaluate("9", ">=", lambda: 1 - (m - 1) * a),
        _evaluate("10", ">=", lambda: Fraction(3, 4) * m - 1 - m * (m - 1) * a),
        _evaluate("11", ">=", lambda: 1 + a - 2 * m * a * (1 - (m - 1) * a)),
        _evaluate("12", "<=", lambda: m * (1 - 2 * g) + (2 * m * (m - 1) * a + 1) * g - 1),
        _evaluate("13", "<=", lambda: -Fraction(m, 2) + (m - 1) * a + 1),
        _evaluate("14", ">=", lambda: 1 - m * a * (1 - (m - 1) * a)),
        _evaluate("15", "<=", lambda: m * (Fraction(1, 2) - g) + m * (m - 1) * a * (Fraction(1, 2) + g) - Fraction(1, 2)),
        # Variants of 6, 10 and 13 as they appear in the derivations.
        _evaluate("6-alt", ">", lambda: (2 + FOUR_POW_M18_75 * a) * g - 1, "4**-18.75 variant"),
        _evaluate("10-alt", ">=", lambda: Fraction(3, 4) * m - 1 - m * (m - 1) * a + 1, "with +1"),
        _evaluate("13-alt", ">=", lambda: Fraction(m, 2) - 1 - m * (m - 1) * a, "m(m-1) alpha form"),
    ]
    return ConditionReport(tuple(conds), {"4**-17.75": q, "4**-18.75": FOUR_POW_M18_75})


def check_m3(alpha, gamma) -> ConditionReport:
    a, g = parse_rational(alpha), parse_rational(gamma)
    conds = [
        _evaluate("m3-1", ">", lambda: 3 * g - 5 * a - 1),
        _evaluate("m3-2", ">=", lambda: (2 - a) / _positive_denominator(1 - a) * g - 1),
        _evaluate("m3-3", ">=", lambda: g * (6 / _positive_denominator(1 + 2 * a) - 1) - 2),
        _evaluate("m3-9", ">=", lambda: 1 - 2 * a),
        _evaluate("m3-10", ">=", lambda: Fraction(5, 4) - 6 * a),
        _evaluate("m3-11", ">=", lambda: 1 - 5 * a + 12 * a * a),
        _evaluate("m3-12", "<=", lambda: 3 * (1 - 2 * g) + (12 * a + 1) * g - 1),
        _evaluate("m3-13", ">=", lambda: Fraction(1, 2) - 6 * a),
        _evaluate("m3-14", ">=", lambda: 1 - 3 * a * (1 - 2 * a)),
        _evaluate("m3-15", "<=", lambda: 3 * (Fraction(1, 2) - g) + 6 * a * (Fraction(1, 2) + g) - Fraction(1, 2)),
    ]
    return ConditionReport(tuple(conds), {})


@dataclass(frozen=True)
class Recommended:
    m: int
    alpha: Fraction | float
    gamma: Fraction | float
    lam: float
    mode: str | None  # "general", "m3" or None when no condition list applies
    feasibility_gamma: Fraction | None = None

    def params(self) -> Params:
        return Params(self.m, Fraction(self.alpha), Fraction(self.gamma))


def recommended_params(m: int) -> Recommended:
    if m < 2:
        raise InvalidArgument(f"m must be >= 2, got {m}")
    if m == 2:
        a = (3 - math.sqrt(5)) / 2
        return Recommended(2, a, a, 1.0, None)
    if m == 3:
        return Recommended(3, Fraction(7066, 100000), Fraction(482, 1000), 1.0, "m3", Fraction(4817, 10000))
    return Recommended(m, Fraction(1, 4 * m * m), Fraction(1, 2) - Fraction(1, 4**20 * m * m), DYNAMIC_LAMBDA, "general")


def check_recommended(m: int) -> ConditionReport:
    rec = recommended_params(m)
    if rec.mode == "general":
        return check_general(rec.params())
    if rec.mode == "m3":
        return check_m3(rec.alpha, rec.feasibility_gamma)
    raise InvalidArgument(f"no condition list applies to m={m}")


def grid(lo, hi, steps: int) -> list[Fraction]:
    """``steps + 1`` evenly spaced exact points from ``lo`` to ``hi``."""
    lo, hi = parse_rational(lo), parse_rational(hi)
    if steps < 0 or (steps == 0 and lo != hi):
        raise InvalidArgument("steps must be positive")
    if steps == 0:
        return [lo]
    return [lo + (hi - lo) * i / steps for i in range(steps + 1)]


def scan_m3_region(alphas: Iterable, gammas: Iterable) -> list[tuple]:
    """Rows ``(alpha, gamma, bit per m=3 condition..., all_pass)`` in alpha-major order."""
    gammas = [parse_rational(g) for g in gammas]
    rows = []
    for a in (parse_rational(x) for x in alphas):
        for g in gammas:
            rep = check_m3(a, g)
            bits = tuple(rep[c].satisfied for c in M3_IDS)
            rows.append((a, g, *bits, all(bits)))
    return rows
