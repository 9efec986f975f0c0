"""Seeded generators for random intervals, RIVFs and convex test problems.

Geodesic convexity is obtained through a chart in which geodesics are
straight lines: ``u = x`` on Euclidean coordinates and ``u = ln x`` on
positive-orthant coordinates (along ``exp_x(tv)`` each ``ln x_i`` moves
linearly in ``t``). A function convex in ``u`` is geodesically convex.

Upper endpoints are always written as ``(lower) + (w)`` with ``w >= 0``, so
``lower <= upper`` holds exactly in floating point as well.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .interval import Interval
from .manifold import Euclidean, ManifoldKind, PositiveOrthant, Product
from .problem import Riop
from .rivf import Rivf

__all__ = [
    "random_interval",
    "coord_kinds",
    "u_box",
    "smooth_rivf",
    "convex_rivf",
    "concave_rivf",
    "PlantedProblem",
    "planted_problem",
    "random_kind",
]

U_LO, U_HI = -2.0, 2.0
ACTIVE_OFFSET = -1e-12


def random_interval(rng: np.random.Generator, lo_range=(-100.0, 100.0), max_width=50.0) -> Interval:
    lo = float(rng.uniform(*lo_range))
    return Interval(lo, lo + float(rng.uniform(0.0, max_width)))


def coord_kinds(kind: ManifoldKind) -> list[str]:
    """``'e'`` or ``'p'`` for each coordinate of ``kind``."""
    if isinstance(kind, Euclidean):
        return ["e"] * kind.dim
    if isinstance(kind, PositiveOrthant):
        return ["p"] * kind.dim
    if isinstance(kind, Product):
        return [c for f in kind.factors for c in coord_kinds(f)]
    raise TypeError(f"unsupported manifold kind {kind!r}")


def u_box(kind: ManifoldKind) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Coordinate box whose image in the straightening chart is ``(-2, 2)^n``."""
    lo, hi = [], []
    for c in coord_kinds(kind):
        lo.append(U_LO if c == "e" else math.exp(U_LO))
        hi.append(U_HI if c == "e" else math.exp(U_HI))
    return tuple(lo), tuple(hi)


def random_kind(rng: np.random.Generator, max_dim: int = 2) -> ManifoldKind:
    n = int(rng.integers(1, max_dim + 1))
    pick = int(rng.integers(0, 3))
    if pick == 0:
        return Euclidean(n)
    if pick == 1:
        return PositiveOrthant(n)
    return Product((Euclidean(1), PositiveOrthant(1)))


def _num(a: float, digits: int = 3) -> str:
    a = round(float(a), digits)
    return f"({a!r})" if a < 0 else repr(a)


def _u(kind: ManifoldKind) -> list[str]:
    return [f"x{i + 1}" if c == "e" else f"ln(x{i + 1})" for i, c in enumerate(coord_kinds(kind))]


def _sq(u: str, c: float) -> str:
    return f"({u} - {_num(c)})^2"


def _convex_terms(rng: np.random.Generator, us: list[str], smooth: bool) -> list[str]:
    n = len(us)
    terms = [_num(rng.uniform(-2, 2))]
    for i, u in enumerate(us):
        terms.append(f"{_num(rng.uniform(-1.5, 1.5))}*{u}")
        pick = int(rng.integers(0, 5 if smooth else 7))
        a, c = rng.uniform(0.1, 2.0), rng.uniform(-1, 1)
        if pick == 0:
            terms.append(f"{_num(a)}*{_sq(u, c)}")
        elif pick == 1:
            terms.append(f"{_num(a)}*exp({_num(rng.uniform(-1, 1))}*{u})")
        elif pick == 2:
            terms.append(f"{_num(a)}*sqrt(1 + {_sq(u, c)})")
        elif pick == 3 and n > 1:
            j = (i + 1) % n
            terms.append(f"{_num(a)}*({u} + {_num(rng.uniform(-1, 1))}*{us[j]} - {_num(c)})^2")
        elif pick == 4:
            terms.append(f"{_num(a)}*({u} - {_num(c)})^4")
        elif pick == 5:
            terms.append(f"{_num(a)}*abs({u} - {_num(c)})")
        elif pick == 6:
            terms.append(f"max({_num(rng.uniform(-1, 1))}*{u}, {_num(rng.uniform(-1, 1))}*{u} + {_num(c)})")
    return terms


def _nonneg_convex(rng: np.random.Generator, us: list[str], smooth: bool) -> str:
    terms = [_num(rng.uniform(0.0, 2.0))]
    for u in us:
        if rng.random() < 0.7:
            terms.append(f"{_num(rng.uniform(0.0, 1.0))}*{_sq(u, rng.uniform(-1, 1))}")
        if not smooth and rng.random() < 0.3:
            terms.append(f"{_num(rng.uniform(0.0, 1.0))}*abs({u})")
    return " + ".join(terms)


def convex_rivf(rng: np.random.Generator, kind: ManifoldKind, smooth: bool = False) -> Rivf:
    """Random geodesically convex RIVF (both endpoints convex in the chart)."""
    us = _u(kind)
    lower = " + ".join(_convex_terms(rng, us, smooth))
    upper = f"({lower}) + ({_nonneg_convex(rng, us, smooth)})"
    return Rivf.parse(lower, upper, kind)


def concave_rivf(rng: np.random.Generator, kind: ManifoldKind, smooth: bool = False) -> Rivf:
    """``-f`` for a random convex ``f``."""
    return -convex_rivf(rng, kind, smooth)


def smooth_rivf(rng: np.random.Generator, kind: ManifoldKind) -> Rivf:
    """Random smooth RIVF, not necessarily convex."""
    us = _u(kind)
    n = len(us)
    terms = [_num(rng.uniform(-2, 2))]
    for i, u in enumerate(us):
        terms.append(f"{_num(rng.uniform(-2, 2))}*{u}")
        pick = int(rng.integers(0, 4))
        if pick == 0:
            terms.append(f"{_num(rng.uniform(-1, 1))}*{u}^3")
        elif pick == 1:
            terms.append(f"{_num(rng.uniform(-1, 1))}*exp({_num(rng.uniform(-1, 1))}*{u})")
        elif pick == 2 and n > 1:
            terms.append(f"{_num(rng.uniform(-1, 1))}*{u}*{us[(i + 1) % n]}")
        else:
            terms.append(f"{_num(rng.uniform(-1, 1))}*{u}^2")
    lower = " + ".join(terms)
    w = f"{_num(rng.uniform(0, 2))} + {_num(rng.uniform(0, 1))}*exp({_num(rng.uniform(-1, 1))}*{us[0]})"
    return Rivf.parse(lower, f"({lower}) + ({w})", kind)


@dataclass
class PlantedProblem:
    problem: Riop
    center: np.ndarray  # chart coordinates x of the planted point
    mu: tuple[float, ...]
    active: tuple[bool, ...]


def planted_problem(rng: np.random.Generator, kind: ManifoldKind, r: int = 1, active: bool = True) -> PlantedProblem:
    """Convex problem with a planted point ``c`` and multipliers ``mu`` such
    that ``(c, mu)`` is Wolfe dual feasible.

    Constraints are ``a_i . (u - c) + g_i`` plus a nonnegative width with zero
    gradient at ``c``; the objective's endpoints both have gradient
    ``-sum mu_i a_i`` at ``c``. With ``active`` every constraint with a
    positive multiplier vanishes at ``c``, which then minimizes both
    objective endpoints over the feasible set.
    """
    us = _u(kind)
    n = len(us)
    cu = rng.uniform(-1.0, 1.0, n).round(3)
    kinds = coord_kinds(kind)
    center = np.array([cu[i] if kinds[i] == "e" else math.exp(cu[i]) for i in range(n)])
    du = [f"({u} - {_num(c)})" for u, c in zip(us, cu)]
    dist2 = " + ".join(f"{d}^2" for d in du)

    mus, cons, acts, normals = [], [], [], []
    grad = np.zeros(n)
    for _ in range(r):
        while True:
            a = rng.uniform(-1.5, 1.5, n).round(3)
            if np.linalg.norm(a) < 0.5:
                continue
            # normals within 120 degrees of the first keep a fat feasible cone at c
            if normals and a @ normals[0] < -0.5 * np.linalg.norm(a) * np.linalg.norm(normals[0]):
                continue
            break
        normals.append(a)
        mu = float(rng.integers(0, 7)) * 0.5
        is_active = active and (mu > 0 or rng.random() < 0.5)
        # active constraints sit 1e-12 below zero so that roundoff in ln(exp(c))
        # cannot make the planted point infeasible
        g0 = ACTIVE_OFFSET if is_active else round(float(rng.uniform(-0.8, 0.0)), 3)
        s = 0.0 if is_active else round(float(rng.uniform(0.0, 0.3)), 3)
        q = round(float(rng.uniform(0.0, 0.3)), 3)
        lin = " + ".join(f"{_num(ai)}*{d}" for ai, d in zip(a, du))
        lower = f"{lin} + {_num(g0, 15)}"
        upper = f"({lower}) + ({_num(q)}*({dist2}) + {_num(s)})"
        cons.append(Rivf.parse(lower, upper, kind))
        mus.append(mu)
        acts.append(is_active)
        grad -= mu * a

    alpha = rng.uniform(0.1, 1.5, n).round(3)
    quad = " + ".join(f"{_num(al)}*{d}^2" for al, d in zip(alpha, du))
    lin = " + ".join(f"{_num(gi, 9)}*{d}" for gi, d in zip(grad, du))
    extra = f"{_num(rng.uniform(0, 0.5))}*{du[0]}^4"
    lower = f"{_num(rng.uniform(-2, 2))} + {lin} + {quad} + {extra}"
    upper = f"({lower}) + ({_num(rng.uniform(0, 1))}*({dist2}) + {_num(rng.uniform(0, 1.5))})"
    obj = Rivf.parse(lower, upper, kind)
    lo, hi = u_box(kind)
    return PlantedProblem(Riop(kind, lo, hi, obj, tuple(cons)), center, tuple(mus), tuple(acts))
