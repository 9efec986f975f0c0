"""Hadamard manifolds with closed-form exponential and logarithm maps.

Supported kinds:

* ``Euclidean(n)``: flat R^n, ``exp_x(v) = x + v``.
* ``PositiveOrthant(n)``: R^n_{++} with metric ``<u, v>_x = sum u_i v_i / x_i**2``,
  ``exp_x(v) = x * exp(v / x)`` and ``log_x(y) = x * ln(y / x)`` coordinatewise.
* ``Product(factors)``: Riemannian product, every operation applied factorwise.

All three have diagonal metrics in chart coordinates, which is what
:meth:`ManifoldKind.metric_diag` exposes. Points and tangent vectors are chart
coordinate vectors.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "ManifoldError",
    "ManifoldKind",
    "Euclidean",
    "PositiveOrthant",
    "Product",
    "Point",
    "Tangent",
    "parse_kind",
    "exp",
    "log",
    "distance",
    "inner",
    "tangent_norm",
    "geodesic",
]

POSITIVE_FLOOR = 1e-12


class ManifoldError(ValueError):
    """Dimension mismatch, point off the manifold, or bad base point."""


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float).reshape(-1)
    arr.flags.writeable = False
    return arr


class ManifoldKind:
    dim: int

    # raw array-level operations; inputs assumed validated
    def exp_raw(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_raw(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def metric_diag(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray) -> bool:
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError

    def point(self, coords: Sequence[float] | np.ndarray) -> "Point":
        arr = _frozen(coords)
        if arr.shape[0] != self.dim:
            raise ManifoldError(f"expected {self.dim} coordinates, got {arr.shape[0]}")
        if not np.all(np.isfinite(arr)) or not self.contains(arr):
            raise ManifoldError(f"point {arr.tolist()} is not on {self.spec()}")
        return Point(arr)

    def tangent(self, at: "Point", vec: Sequence[float] | np.ndarray) -> "Tangent":
        arr = _frozen(vec)
        if arr.shape[0] != self.dim or at.coords.shape[0] != self.dim:
            raise ManifoldError(f"tangent dimension {arr.shape[0]} != {self.dim}")
        return Tangent(at, arr)

    def unit_basis(self, x: np.ndarray) -> list[np.ndarray]:
        """Coordinate directions at ``x`` scaled to unit Riemannian norm."""
        g = self.metric_diag(x)
        out = []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0 / np.sqrt(g[i])
            out.append(e)
        return out

    def __str__(self) -> str:
        return self.spec()


@dataclass(frozen=True)
class Euclidean(ManifoldKind):
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ManifoldError("dimension must be positive")

    def exp_raw(self, x, v):
        return x + v

    def log_raw(self, x, y):
        return y - x

    def metric_diag(self, x):
        return np.ones(self.dim)

    def contains(self, x):
        return True

    def spec(self):
        return f"euclidean({self.dim})"


@dataclass(frozen=True)
class PositiveOrthant(ManifoldKind):
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ManifoldError("dimension must be positive")

    def exp_raw(self, x, v):
        return x * np.exp(v / x)

    def log_raw(self, x, y):
        return x * np.log(y / x)

    def metric_diag(self, x):
        return 1.0 / (x * x)

    def contains(self, x):
        return bool(np.all(x >= POSITIVE_FLOOR))

    def spec(self):
        return f"positive({self.dim})"


@dataclass(frozen=True)
class Product(ManifoldKind):
    factors: tuple[ManifoldKind, ...]
    dim: int = field(init=False)

    def __post_init__(self):
        if not self.factors:
            raise ManifoldError("product needs at least one factor")
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "dim", sum(f.dim for f in self.factors))

    def _slices(self):
        start = 0
        for f in self.factors:
            yield f, slice(start, start + f.dim)
            start += f.dim

    def exp_raw(self, x, v):
        return np.concatenate([f.exp_raw(x[s], v[s]) for f, s in self._slices()])

    def log_raw(self, x, y):
        return np.concatenate([f.log_raw(x[s], y[s]) for f, s in self._slices()])

    def metric_diag(self, x):
        return np.concatenate([f.metric_diag(x[s]) for f, s in self._slices()])

    def contains(self, x):
        return all(f.contains(x[s]) for f, s in self._slices())

    def spec(self):
        return "product(" + ", ".join(f.spec() for f in self.factors) + ")"


class Point:
    """Chart coordinates of a point. Build through :meth:`ManifoldKind.point`."""

    __slots__ = ("coords",)

    def __init__(self, coords: np.ndarray):
        self.coords = coords

    def __eq__(self, other):
        return isinstance(other, Point) and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self):
        return f"Point({self.coords.tolist()})"


class Tangent:
    __slots__ = ("at", "vec")

    def __init__(self, at: Point, vec: np.ndarray):
        self.at = at
        self.vec = vec

    def __repr__(self):
        return f"Tangent(at={self.at.coords.tolist()}, vec={self.vec.tolist()})"


_KIND_RE = re.compile(r"\s*(euclidean|positive)\s*\(\s*(\d+)\s*\)\s*")


def parse_kind(text: str) -> ManifoldKind:
    """Parse ``euclidean(n)``, ``positive(n)`` or ``product(k1, k2, ...)``."""
    kind, rest = _parse_kind(text.strip())
    if rest.strip():
        raise ManifoldError(f"trailing text in manifold spec: {rest!r}")
    return kind


def _parse_kind(text: str) -> tuple[ManifoldKind, str]:
    m = _KIND_RE.match(text)
    if m:
        n = int(m.group(2))
        kind = Euclidean(n) if m.group(1) == "euclidean" else PositiveOrthant(n)
        return kind, text[m.end():]
    if text.startswith("product"):
        rest = text[len("product"):].lstrip()
        if not rest.startswith("("):
            raise ManifoldError(f"malformed product spec: {text!r}")
        rest = rest[1:]
        factors = []
        while True:
            f, rest = _parse_kind(rest)
            factors.append(f)
            rest = rest.lstrip()
            if rest.startswith(","):
                rest = rest[1:]
                continue
            if rest.startswith(")"):
                return Product(tuple(factors)), rest[1:]
            raise ManifoldError(f"malformed product spec near {rest!r}")
    raise ManifoldError(f"unknown manifold spec: {text!r}")


def _check_point(kind: ManifoldKind, x: Point) -> None:
    if x.coords.shape[0] != kind.dim:
        raise ManifoldError(f"point dimension {x.coords.shape[0]} != {kind.dim}")
    if not kind.contains(x.coords):
        raise ManifoldError(f"point {x.coords.tolist()} is not on {kind.spec()}")


def _check_tangent(kind: ManifoldKind, x: Point, v: Tangent) -> None:
    if v.vec.shape[0] != kind.dim:
        raise ManifoldError(f"tangent dimension {v.vec.shape[0]} != {kind.dim}")
    if v.at is not x and not np.array_equal(v.at.coords, x.coords):
        raise ManifoldError("tangent vector is not based at the given point")


def exp(kind: ManifoldKind, x: Point, v: Tangent) -> Point:
    _check_point(kind, x)
    _check_tangent(kind, x, v)
    return kind.point(kind.exp_raw(x.coords, v.vec))


def log(kind: ManifoldKind, x: Point, y: Point) -> Tangent:
    _check_point(kind, x)
    _check_point(kind, y)
    return Tangent(x, _frozen(kind.log_raw(x.coords, y.coords)))


def inner(kind: ManifoldKind, x: Point, u: Tangent, v: Tangent) -> float:
    _check_point(kind, x)
    _check_tangent(kind, x, u)
    _check_tangent(kind, x, v)
    return float(np.sum(u.vec * v.vec * kind.metric_diag(x.coords)))


def tangent_norm(kind: ManifoldKind, v: Tangent) -> float:
    return float(np.sqrt(np.sum(v.vec * v.vec * kind.metric_diag(v.at.coords))))


def distance(kind: ManifoldKind, x: Point, y: Point) -> float:
    return tangent_norm(kind, log(kind, x, y))


def geodesic(kind: ManifoldKind, x: Point, y: Point, t: float) -> Point:
    if not 0.0 <= t <= 1.0:
        raise ManifoldError(f"geodesic parameter t={t} outside [0, 1]")
    if t == 1.0:
        _check_point(kind, y)
        return y
    v = log(kind, x, y)
    return kind.point(kind.exp_raw(x.coords, t * v.vec))
