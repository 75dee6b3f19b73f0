"""Arithmetic on SL(2, R): Iwasawa coordinates, reduction, box sorting.

Group elements are decomposed as g = n(t) a(v) K(theta) with

    n(t) = [[1, t], [0, 1]]
    a(v) = [[e^{v/2}, 0], [0, e^{-v/2}]]
    K(theta) = [[cos, sin], [-sin, cos]]

so that g . i = t + i e^v.  Integral matrices are plain 4-tuples of Python
ints ``(a, b, c, d)``; they never touch floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import NonUnimodular

DET_TOL = 1e-8

IntMatrix = tuple  # (a, b, c, d) of ints

INT_IDENTITY: IntMatrix = (1, 0, 0, 1)


@dataclass(frozen=True)
class GroupElement:
    a: float
    b: float
    c: float
    d: float

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def entries(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def point(self) -> complex:
        """Image of i under the Moebius action."""
        den = complex(self.c * 1j + self.d)
        return (self.a * 1j + self.b) / den

    def close_to(self, other: "GroupElement", tol: float = 1e-10) -> bool:
        return all(abs(x - y) <= tol for x, y in zip(self.entries(), other.entries()))

    @classmethod
    def from_int(cls, m: IntMatrix, scale: float = 1.0) -> "GroupElement":
        a, b, c, d = m
        return cls(a * scale, b * scale, c * scale, d * scale)


IDENTITY = GroupElement(1.0, 0.0, 0.0, 1.0)


def n_mat(t: float) -> GroupElement:
    return GroupElement(1.0, t, 0.0, 1.0)


def a_mat(v: float) -> GroupElement:
    h = math.exp(v / 2)
    return GroupElement(h, 0.0, 0.0, 1.0 / h)


def k_mat(theta: float) -> GroupElement:
    c, s = math.cos(theta), math.sin(theta)
    return GroupElement(c, s, -s, c)


def int_mul(x: IntMatrix, y: IntMatrix) -> IntMatrix:
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def int_inv(x: IntMatrix) -> IntMatrix:
    """Inverse of a determinant-one integral matrix."""
    return (x[3], -x[1], -x[2], x[0])


def int_det(x: IntMatrix) -> int:
    return x[0] * x[3] - x[1] * x[2]


def int_act(m: IntMatrix, g: GroupElement) -> GroupElement:
    """Left multiplication of a float element by an integral matrix."""
    a, b, c, d = m
    return GroupElement(
        a * g.a + b * g.c, a * g.b + b * g.d, c * g.a + d * g.c, c * g.b + d * g.d
    )


def orbit_point(q: int, k: int, t: float) -> GroupElement:
    """n(k/q) a(t), built directly from its entries."""
    h = math.exp(t / 2)
    return GroupElement(h, (k / q) / h, 0.0, 1.0 / h)


def check_unimodular(g: GroupElement) -> None:
    if not abs(g.det - 1.0) <= DET_TOL:
        raise NonUnimodular(f"determinant {g.det!r} is not 1")


@dataclass(frozen=True)
class IwasawaCoords:
    t: float
    v: float
    theta: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.t, self.v, self.theta)


def from_iwasawa(coords: IwasawaCoords) -> GroupElement:
    """n(t) a(v) K(theta)."""
    t, v, th = coords.t, coords.v, coords.theta
    h = math.exp(v / 2)
    c, s = math.cos(th), math.sin(th)
    # n(t) a(v) = [[h, t/h], [0, 1/h]]
    return GroupElement(h * c - (t / h) * s, h * s + (t / h) * c, -s / h, c / h)


def iwasawa_decompose(g: GroupElement) -> IwasawaCoords:
    check_unimodular(g)
    r2 = g.c * g.c + g.d * g.d
    theta = math.atan2(-g.c, g.d)
    if theta <= -math.pi:
        theta = math.pi
    t = (g.a * g.c + g.b * g.d) / r2
    return IwasawaCoords(t, -math.log(r2), theta)


def offset_coords(x: GroupElement, y: GroupElement) -> IwasawaCoords:
    """Iwasawa coordinates of x^{-1} y."""
    check_unimodular(x)
    return iwasawa_decompose(x.inverse() @ y)


def in_neighborhood(x: GroupElement, y: GroupElement, eta: float) -> bool:
    o = offset_coords(x, y)
    return abs(o.t) < eta and abs(o.v) < eta and abs(o.theta) < eta


@dataclass(frozen=True)
class ReducedPoint:
    gamma: IntMatrix
    x: GroupElement
    index: int = 0

    @property
    def coords(self) -> IwasawaCoords:
        return iwasawa_decompose(self.x)


_S: IntMatrix = (0, -1, 1, 0)


def reduce_point(z: complex, max_steps: int = 100_000) -> tuple[IntMatrix, complex]:
    """Gauss reduction of z in the upper half-plane.

    Returns an integral delta with delta . z in the standard fundamental
    domain (|Re| <= 1/2, |z| >= 1) together with that image.
    """
    delta = INT_IDENTITY
    for _ in range(max_steps):
        shift = math.floor(z.real + 0.5)
        if shift:
            z = z - shift
            delta = int_mul((1, -shift, 0, 1), delta)
        if abs(z) ** 2 < 1.0 - 1e-13:
            z = -1.0 / z
            delta = int_mul(_S, delta)
        else:
            return delta, z
    raise RuntimeError("reduction did not terminate")


def reduce(g: GroupElement, index: int = 0) -> ReducedPoint:
    """Write g = gamma . x with gamma integral and x in the approximate domain."""
    check_unimodular(g)
    delta, _ = reduce_point(g.point())
    x = int_act(delta, g)
    return ReducedPoint(int_inv(delta), x, index)


@dataclass
class BoxPartition:
    eta: float
    boxes: dict = field(default_factory=dict)  # key -> list of positions
    representatives: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.boxes)


def box_key(c: IwasawaCoords, eta: float) -> tuple[int, int, int]:
    n_theta = max(1, int(math.floor(2 * math.pi / eta)))
    th = math.fmod(c.theta, 2 * math.pi)
    if th < 0:
        th += 2 * math.pi
    return (
        math.floor(c.t / eta),
        math.floor(c.v / eta),
        math.floor(th / eta) % n_theta,
    )


def box_sort(points: Sequence[ReducedPoint], eta: float) -> BoxPartition:
    """Group reduced points into cubes of side eta in Iwasawa coordinates.

    ``boxes`` maps keys to positions in ``points``; ``representatives``
    holds, per box in first-seen order, the position whose source index is
    lowest.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    part = BoxPartition(eta)
    for pos, p in enumerate(points):
        part.boxes.setdefault(box_key(p.coords, eta), []).append(pos)
    for members in part.boxes.values():
        part.representatives.append(min(members, key=lambda i: points[i].index))
    return part


def random_sl2z(rng, length: int = 6, max_shift: int = 4) -> IntMatrix:
    """Random word T^{n1} S T^{n2} S ... in SL(2, Z); rng is a numpy Generator."""
    m = INT_IDENTITY
    for _ in range(length):
        n = int(rng.integers(-max_shift, max_shift + 1))
        m = int_mul(int_mul(m, (1, n, 0, 1)), _S)
    if rng.integers(2):
        m = tuple(-x for x in m)
    return m
