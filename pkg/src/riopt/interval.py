"""Closed bounded real intervals with Minkowski arithmetic, the gH-difference
and the Hausdorff metric.

Values are immutable; all operations are pure. Ordering follows the
endpointwise partial order: ``A <= B`` iff both endpoints are ``<=``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "Interval",
    "OrderRelation",
    "ZERO",
    "add",
    "scale",
    "neg",
    "gh_diff",
    "hausdorff",
    "norm",
    "compare",
    "isum",
    "render",
]


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"invalid interval: lo={self.lo!r} > hi={self.hi!r}")

    @classmethod
    def point(cls, a: float) -> "Interval":
        return cls(a, a)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def __add__(self, other: "Interval") -> "Interval":
        return add(self, other)

    def __neg__(self) -> "Interval":
        return neg(self)

    def __rmul__(self, lam: float) -> "Interval":
        return scale(lam, self)

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return render(self)


ZERO = Interval(0.0, 0.0)


@dataclass(frozen=True)
class OrderRelation:
    """Outcome of comparing two intervals under the endpointwise order."""

    leq: bool
    lt: bool
    geq: bool
    gt: bool
    incomparable: bool

    @property
    def equal(self) -> bool:
        return self.leq and self.geq


def add(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def scale(lam: float, a: Interval) -> Interval:
    if lam >= 0:
        return Interval(lam * a.lo, lam * a.hi)
    return Interval(lam * a.hi, lam * a.lo)


def neg(a: Interval) -> Interval:
    return Interval(-a.hi, -a.lo)


def gh_diff(a: Interval, b: Interval) -> Interval:
    """Generalized Hukuhara difference ``a -gH b``.

    Always defined: ``[min(dl, du), max(dl, du)]`` where ``dl = a.lo - b.lo``
    and ``du = a.hi - b.hi``. The result ``c`` satisfies ``a = b + c`` when
    ``a`` is at least as wide as ``b``, and ``b = a - c`` otherwise.
    """
    dl = a.lo - b.lo
    du = a.hi - b.hi
    return Interval(min(dl, du), max(dl, du))


def hausdorff(a: Interval, b: Interval) -> float:
    return max(abs(a.lo - b.lo), abs(a.hi - b.hi))


def norm(a: Interval) -> float:
    return hausdorff(a, ZERO)


def compare(a: Interval, b: Interval) -> OrderRelation:
    leq = a.lo <= b.lo and a.hi <= b.hi
    geq = b.lo <= a.lo and b.hi <= a.hi
    same = a == b
    return OrderRelation(
        leq=leq,
        lt=leq and not same,
        geq=geq,
        gt=geq and not same,
        incomparable=not leq and not geq,
    )


def isum(items: Iterable[Interval]) -> Interval:
    lo = hi = 0.0
    for it in items:
        lo += it.lo
        hi += it.hi
    return Interval(lo, hi)


def render(a: Interval, digits: int = 6) -> str:
    return f"[{a.lo:.{digits}g}, {a.hi:.{digits}g}]"
