"""Arithmetic on the universal cover of SU(1,1).

A point is a pair (c, w) with c real and w complex.  It covers the matrix

    [[e^{ic} sqrt(1+|w|^2), w], [conj(w), e^{-ic} sqrt(1+|w|^2)]]

so c is an unbounded angle and w a disc-model coordinate.  The Lie algebra
uses the basis e1, e2, e3 with [e1,e2] = e3, [e1,e3] = -e2, [e2,e3] = -e1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupPoint",
    "QuadCoords",
    "AlgebraElement",
    "IDENTITY",
    "bracket",
    "multiply",
    "inverse",
    "to_quad",
    "su11_matrix",
    "lift_from_quad",
    "algebra_exp",
    "killing",
    "so11_conjugate",
    "group_distance",
    "multiply_arrays",
    "algebra_exp_arrays",
]


class InternalError(ArithmeticError):
    """An identity that holds mathematically was violated numerically."""


@dataclass(frozen=True)
class GroupPoint:
    c: float
    w: complex

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "w", complex(self.w))
        if not (math.isfinite(self.c) and cmath.isfinite(self.w)):
            raise ValueError(f"non-finite group point ({self.c}, {self.w})")

    def to_json(self) -> dict:
        return {"c": self.c, "w": [self.w.real, self.w.imag]}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupPoint":
        re, im = obj["w"]
        return cls(obj["c"], complex(re, im))


IDENTITY = GroupPoint(0.0, 0j)


@dataclass(frozen=True)
class QuadCoords:
    q0: float
    q1: float
    q2: float
    q3: float

    def quadric(self) -> float:
        """q0^2 + q1^2 - q2^2 - q3^2, equal to 1 on the group."""
        return self.q0**2 + self.q1**2 - self.q2**2 - self.q3**2

    def as_array(self) -> np.ndarray:
        return np.array([self.q0, self.q1, self.q2, self.q3])


@dataclass(frozen=True)
class AlgebraElement:
    x1: float
    x2: float
    x3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x1, self.x2, self.x3)

    def scaled(self, s: float) -> "AlgebraElement":
        return AlgebraElement(s * self.x1, s * self.x2, s * self.x3)

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return AlgebraElement(self.x1 + other.x1, self.x2 + other.x2, self.x3 + other.x3)


def bracket(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Lie bracket from the structure constants of the basis e1, e2, e3."""
    a1, a2, a3 = x.as_tuple()
    b1, b2, b3 = y.as_tuple()
    # [x,y] = (a1b2 - a2b1) e3 - (a1b3 - a3b1) e2 - (a2b3 - a3b2) e1
    return AlgebraElement(-(a2 * b3 - a3 * b2), -(a1 * b3 - a3 * b1), a1 * b2 - a2 * b1)


def killing(x) -> float:
    """-x1^2 + x2^2 + x3^2 for an algebra element or a covector."""
    x1, x2, x3 = _components(x)
    return -x1 * x1 + x2 * x2 + x3 * x3


def _components(x) -> tuple[float, float, float]:
    if hasattr(x, "as_tuple"):
        return x.as_tuple()
    x1, x2, x3 = x
    return float(x1), float(x2), float(x3)


def multiply(a: GroupPoint, b: GroupPoint) -> GroupPoint:
    c1, w1 = a.c, a.w
    c2, w2 = b.c, b.w
    if w1 == 0 or w2 == 0:
        # the correction term vanishes
        r1 = math.sqrt(1.0 + abs(w1) ** 2)
        r2 = math.sqrt(1.0 + abs(w2) ** 2)
        return GroupPoint(c1 + c2, w2 * r1 * cmath.exp(1j * c1) + w1 * r2 * cmath.exp(-1j * c2))
    r1 = math.hypot(1.0, abs(w1))
    r2 = math.hypot(1.0, abs(w2))
    x = w1 * w2.conjugate() * cmath.exp(-1j * (c1 + c2))
    den = r1 * r2 + x.real
    # |x| = |w1||w2| < r1 r2, so den > 0 always
    if not den > 0:
        raise InternalError(f"non-positive denominator {den} in group multiplication")
    c = c1 + c2 + math.atan(x.imag / den)
    w = w2 * r1 * cmath.exp(1j * c1) + w1 * r2 * cmath.exp(-1j * c2)
    return GroupPoint(c, w)


def inverse(a: GroupPoint) -> GroupPoint:
    return GroupPoint(-a.c, -a.w)


def to_quad(a: GroupPoint) -> QuadCoords:
    r = math.hypot(1.0, abs(a.w))
    return QuadCoords(math.cos(a.c) * r, math.sin(a.c) * r, a.w.real, a.w.imag)


def su11_matrix(a: GroupPoint) -> np.ndarray:
    r = math.hypot(1.0, abs(a.w))
    z = cmath.exp(1j * a.c) * r
    return np.array([[z, a.w], [a.w.conjugate(), z.conjugate()]], dtype=complex)


def lift_from_quad(q: QuadCoords, c_ref: float) -> GroupPoint:
    """The point over q whose c lies within pi of c_ref."""
    ang = math.atan2(q.q1, q.q0)
    c = c_ref + math.remainder(ang - c_ref, 2 * math.pi)
    return GroupPoint(c, complex(q.q2, q.q3))


def group_distance(a: GroupPoint, b: GroupPoint) -> float:
    """Max of |dc| and |dw|; a chart metric used for tolerances."""
    return max(abs(a.c - b.c), abs(a.w - b.w))


def algebra_exp(x) -> GroupPoint:
    """exp(x1 e1 + x2 e2 + x3 e3) with c lifted continuously from the identity.

    Along s -> exp(s x) the curve q0 + i q1 is an ellipse or hyperbola that
    never meets the origin, so the lift is available in closed form.
    """
    x1, x2, x3 = _components(x)
    kil = -x1 * x1 + x2 * x2 + x3 * x3
    if x2 == 0 and x3 == 0:
        return GroupPoint(x1 / 2.0, 0j)
    if kil == 0:
        return GroupPoint(math.atan(x1 / 2.0), complex(x2, x3) / 2.0)
    n = math.sqrt(abs(kil))
    th = n / 2.0
    xb1 = x1 / n
    if kil < 0:
        k = round(th / math.pi)
        phi = th - k * math.pi
        c = math.copysign(k * math.pi, xb1) + math.atan2(xb1 * math.sin(phi), math.cos(phi))
        return GroupPoint(c, math.sin(th) * complex(x2, x3) / n)
    return GroupPoint(math.atan(xb1 * math.tanh(th)), math.sinh(th) * complex(x2, x3) / n)


def so11_conjugate(a: float, g: GroupPoint) -> GroupPoint:
    """Conjugation by exp(a e3): a hyperbolic rotation of (q1, q2).

    q0 is fixed and |q0 + i q1| >= 1, so along the orbit the point q0 + i q1
    stays in one closed half-plane and the principal angle of the ratio is
    the continuous increment.
    """
    if a == 0:
        return g
    q = to_quad(g)
    ch, sh = math.cosh(a), math.sinh(a)
    q1 = ch * q.q1 + sh * q.q2
    q2 = sh * q.q1 + ch * q.q2
    dc = cmath.phase(complex(q.q0, q1) / complex(q.q0, q.q1))
    return GroupPoint(g.c + dc, complex(q2, q.q3))


# vectorised kernels used by the numerical oracle

def multiply_arrays(c1, w1, c2, w2):
    """Elementwise group product of arrays of points."""
    r1 = np.sqrt(1.0 + np.abs(w1) ** 2)
    r2 = np.sqrt(1.0 + np.abs(w2) ** 2)
    x = w1 * np.conj(w2) * np.exp(-1j * (c1 + c2))
    den = r1 * r2 + x.real
    c = c1 + c2 + np.arctan(x.imag / den)
    w = w2 * r1 * np.exp(1j * c1) + w1 * r2 * np.exp(-1j * c2)
    return c, w


def algebra_exp_arrays(x1, x2, x3):
    """Elementwise exp for small algebra elements (|x| well below pi).

    Uses the branch-free form q0 + i q1 = C + i x1 S, w = (x2 + i x3) S with
    C = cosh(sqrt(K)/2), S = sinh(sqrt(K)/2)/sqrt(K) continued analytically
    in K = Kil(x).
    """
    kil = -x1 * x1 + x2 * x2 + x3 * x3
    a = np.sqrt(np.abs(kil)) / 2.0
    small = np.abs(kil) < 1e-6
    pos = kil > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        cc = np.where(pos, np.cosh(a), np.cos(a))
        ss = np.where(pos, np.sinh(a), np.sin(a)) / (2.0 * a)
    series_c = 1.0 + kil / 8.0 + kil * kil / 384.0
    series_s = 0.5 * (1.0 + kil / 24.0 + kil * kil / 1920.0)
    cc = np.where(small, series_c, cc)
    ss = np.where(small, series_s, ss)
    return np.arctan2(x1 * ss, cc), (x2 + 1j * x3) * ss
