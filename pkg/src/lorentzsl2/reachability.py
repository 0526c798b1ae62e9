"""Attainable sets: membership tests, boundary construction and control synthesis.

Membership answers refer to the principal sheet: the branch of c reached
from the identity by continuous lifting along the boundary geodesics.
"""
from __future__ import annotations

import cmath
import enum
import math
import zlib
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, differential_evolution

from .dynamics import Covector, Regime, StructureParams, in_cone
from .geodesic import exp_map
from .liegroup import (
    AlgebraElement,
    GroupPoint,
    IDENTITY,
    InternalError,
    algebra_exp,
    group_distance,
    inverse,
    multiply,
)

__all__ = [
    "EPS_B",
    "Status",
    "Membership",
    "Arc",
    "ControlProgram",
    "UnreachableTarget",
    "SynthesisError",
    "f",
    "oblate_boundary",
    "oblate_membership",
    "lightlike_reach",
    "sublorentzian_lower_c",
    "sublorentzian_membership",
    "limit_lower_c",
    "abnormal_endpoint",
    "abnormal_endpoint_product",
    "a_tmax_cap",
    "a_tmax_membership",
    "forward_margin",
    "prolate_membership",
    "synthesize_controls",
    "boundary_surface",
]

EPS_B = 1e-7


class Status(enum.Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Membership:
    status: Status
    boundary_c: float | None = None

    def to_json(self) -> dict:
        return {"status": self.status.value, "boundary_c": self.boundary_c}


def _classify_c(c: float, c_b: float) -> Membership:
    if abs(c - c_b) <= EPS_B:
        return Membership(Status.BOUNDARY, c_b)
    return Membership(Status.INTERIOR if c > c_b else Status.OUTSIDE, c_b)


def f(s: float) -> float:
    """s / sqrt(1 + s^2)."""
    return s / math.hypot(1.0, s)


# oblate light-like boundary

def _oblate_consts(mu: float) -> tuple[float, float]:
    r = math.sqrt(-mu)
    return r, (mu + 1.0) / (-mu)


def _im_equation(tau: float, r: float) -> float:
    return -math.cosh(tau) * math.sinh(tau * r) + math.sinh(tau) * math.cosh(tau * r) / r


def _boundary_tau(im_abs: float, mu: float) -> float:
    if im_abs == 0:
        return 0.0
    r, _ = _oblate_consts(mu)
    g = lambda x: _im_equation(x, r) - im_abs
    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
        if hi > 1e3:
            raise ArithmeticError(f"|Im w| = {im_abs} is beyond the representable boundary")
    lo = 0.0
    if not (g(lo) < 0 < g(hi) or g(hi) == 0):
        raise InternalError("boundary equation bracket lost its sign change")
    # near tau = 0 the root scales like |Im w|, so only a relative tolerance makes sense
    return brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def oblate_boundary(w: complex, p: StructureParams) -> tuple[float, float]:
    """(tau, c_b): the light-like boundary of the oblate attainable set over w."""
    mu = p.mu
    if not -1 < mu < 0:
        raise ValueError("oblate regime required")
    r, k = _oblate_consts(mu)
    tau = _boundary_tau(abs(w.imag), mu)
    sh = math.sinh(tau)
    q1 = math.sqrt(k * sh * sh + w.real * w.real)
    q0 = math.cosh(tau) * math.cosh(tau * r) - sh * math.sinh(tau * r) / r
    return tau, math.atan2(q1, q0)


def oblate_membership(g: GroupPoint, p: StructureParams) -> Membership:
    if p.regime() is not Regime.OBLATE:
        raise ValueError("oblate regime required")
    _, c_b = oblate_boundary(g.w, p)
    return _classify_c(g.c, c_b)


def lightlike_reach(w_target: complex, p: StructureParams) -> tuple[Covector, float, float]:
    """Light-like covector, time and lifted boundary c whose geodesic ends over w_target.

    The covector is scaled to |h| = 1 when Kil(h) > 0; targets on Im w = 0
    use the Kil = 0 family h = (-1, +-1, 0).  As Im w -> 0 with Re w fixed
    the covector grows like Re w / |Im w|, so ArithmeticError is raised once
    its components would no longer square to finite floats.
    """
    mu = p.mu
    if not -1 <= mu < 0:
        raise ValueError("oblate or sub-Lorentzian regime required")
    w_target = complex(w_target)
    if w_target.imag != 0 and mu != -1 and _boundary_tau(abs(w_target.imag), mu) == 0:
        raise ArithmeticError(f"|Im w| = {abs(w_target.imag)} is below the resolvable range")
    if w_target.imag == 0:
        s = 1.0 if w_target.real >= 0 else -1.0
        h = Covector(-1.0, s, 0.0)
        t = 2.0 * p.I1 * abs(w_target.real)
        return h, t, exp_map(h, t, p).point.c
    if mu == -1:
        raise ValueError("sub-Lorentzian light-like geodesics with Kil != 0 stay on Im w = 0")
    r, k = _oblate_consts(mu)
    tau = _boundary_tau(abs(w_target.imag), mu)
    b3 = math.copysign(1.0 / r, w_target.imag)
    if abs(w_target.real) > 1e100 * math.sinh(tau):
        raise ArithmeticError(f"|Im w| = {abs(w_target.imag)} is too small relative to Re w")
    b2r = w_target.real / math.sinh(tau)
    b1r = -math.sqrt(k + b2r * b2r)
    a = tau * mu * b3
    ch, sh = math.cosh(a), math.sinh(a)
    h = Covector(ch * b1r - sh * b2r, -sh * b1r + ch * b2r, b3)
    t = 2.0 * p.I1 * tau
    end = exp_map(h, t, p).point
    if abs(end.w - w_target) > 1e-8 * max(1.0, abs(w_target)):
        raise InternalError(f"light-like geodesic missed the target: {end.w} vs {w_target}")
    return h, t, end.c


# sub-Lorentzian set and abnormal geodesics

def sublorentzian_lower_c(w: complex) -> float:
    """Lower boundary of the sub-Lorentzian attainable set over w, in [0, pi]."""
    a = abs(w.imag)
    return math.atan2(math.sqrt(w.real * w.real + 2.0 * a), 1.0 - a)


def limit_lower_c(w: complex) -> float:
    """Lower boundary of the limit of the Lorentzian sets as mu -> -1."""
    return math.atan(abs(w.real) / math.hypot(1.0, w.imag))


def sublorentzian_membership(g: GroupPoint) -> Membership:
    return _classify_c(g.c, sublorentzian_lower_c(g.w))


def abnormal_endpoint_product(w1: float, w2: float) -> GroupPoint:
    """Endpoint of two light-like sub-Lorentzian arcs (arctan|w1|, w1) . (arctan|w2|, w2)."""
    a = GroupPoint(math.atan(abs(w1)), complex(w1))
    b = GroupPoint(math.atan(abs(w2)), complex(w2))
    return multiply(a, b)


def abnormal_endpoint(w1: float, w2: float) -> GroupPoint:
    if w1 * w2 > 0:
        raise ValueError("the two light-like arcs must have opposite signs")
    re = w1 + w2
    im_abs = -2.0 * w1 * w2
    im = math.copysign(im_abs, w2) if w2 != 0 else 0.0
    closed = GroupPoint(sublorentzian_lower_c(complex(re, im_abs)), complex(re, im))
    direct = abnormal_endpoint_product(w1, w2)
    scale = max(1.0, abs(closed.w))
    if group_distance(closed, direct) > 1e-9 * scale:
        raise InternalError(f"closed form {closed} disagrees with the product {direct}")
    return closed


# longest-arc region

def a_tmax_cap(w: complex) -> float:
    return math.pi - math.asin(abs(w.real) / math.hypot(1.0, w.imag))


def a_tmax_membership(g: GroupPoint, p: StructureParams) -> Membership:
    regime = p.regime()
    if regime is Regime.OBLATE:
        base = oblate_membership(g, p)
    elif regime is Regime.SUBLORENTZIAN:
        base = sublorentzian_membership(g)
    else:
        raise ValueError("longest arcs are described only in the oblate and sub-Lorentzian cases")
    if abs(g.c - math.pi) <= EPS_B and abs(g.w.real) <= EPS_B:
        return Membership(Status.BOUNDARY, base.boundary_c)
    cap = a_tmax_cap(g.w)
    if base.status is Status.OUTSIDE or g.c > cap + EPS_B:
        return Membership(Status.OUTSIDE, base.boundary_c)
    if base.status is Status.BOUNDARY or abs(g.c - cap) <= EPS_B:
        return Membership(Status.BOUNDARY, base.boundary_c)
    return Membership(Status.INTERIOR, base.boundary_c)


# prolate regime

def forward_margin(g: GroupPoint) -> float:
    """Half the smaller lifted displacement of the boundary points +-pi/2.

    The admissible cone lies in the wedge u1 >= |u2|, bounded by the two
    subalgebras span(e1 +- e2, e3).  Every admissible velocity therefore moves
    the boundary points +-pi/2 of the disc forward, and every attainable point
    has a non-negative margin.
    """
    r = math.hypot(1.0, abs(g.w))
    v = g.w * cmath.exp(-1j * g.c) / r
    return min(g.c + cmath.phase(1 - 1j * v), g.c + cmath.phase(1 + 1j * v))


def prolate_membership(g: GroupPoint, p: StructureParams | None = None) -> Membership:
    """Certified answers only: Outside by the margin, Interior by construction."""
    if p is not None and p.regime() is not Regime.PROLATE:
        raise ValueError("prolate regime required")
    kappa = forward_margin(g)
    lower = math.atan(abs(g.w))
    if kappa < -EPS_B:
        return Membership(Status.OUTSIDE, None)
    if g.c >= lower - EPS_B and abs(kappa) <= EPS_B:
        return Membership(Status.BOUNDARY, None)
    if g.c > lower + EPS_B:
        return Membership(Status.INTERIOR, None)
    return Membership(Status.UNDETERMINED, None)


@dataclass(frozen=True)
class Arc:
    control: AlgebraElement
    duration: float

    def endpoint(self) -> GroupPoint:
        return algebra_exp(self.control.scaled(self.duration))


@dataclass(frozen=True)
class ControlProgram:
    arcs: tuple[Arc, ...]

    def simulate(self, start: GroupPoint = IDENTITY) -> GroupPoint:
        g = start
        for arc in self.arcs:
            g = multiply(g, arc.endpoint())
        return g

    def waypoints(self) -> list[GroupPoint]:
        pts = [IDENTITY]
        for arc in self.arcs:
            pts.append(multiply(pts[-1], arc.endpoint()))
        return pts

    def admissible(self, p: StructureParams, tol: float = 1e-12) -> bool:
        return all(a.duration > 0 and in_cone(a.control, p, tol) for a in self.arcs)

    def length(self, p: StructureParams) -> float:
        """Lorentzian length: sum of dt sqrt(I1 u1^2 - I1 u2^2 - I3 u3^2)."""
        total = 0.0
        for a in self.arcs:
            u1, u2, u3 = a.control.as_tuple()
            i3 = 0.0 if p.is_sublorentzian else p.I3
            total += a.duration * math.sqrt(max(0.0, p.I1 * (u1 * u1 - u2 * u2) - i3 * u3 * u3))
        return total

    def to_json(self) -> list[dict]:
        return [{"u": list(a.control.as_tuple()), "dt": a.duration} for a in self.arcs]

    @classmethod
    def from_json(cls, rows: list[dict]) -> "ControlProgram":
        return cls(tuple(Arc(AlgebraElement(*map(float, r["u"])), float(r["dt"])) for r in rows))


class UnreachableTarget(ValueError):
    """The target has a negative forward margin, so no admissible curve reaches it."""

    def __init__(self, target: GroupPoint, margin: float):
        super().__init__(f"target {target} is not attainable: forward margin {margin:.6g} < 0")
        self.target = target
        self.margin = margin


class SynthesisError(RuntimeError):
    def __init__(self, message: str, program: ControlProgram, residual: float):
        super().__init__(message)
        self.program = program
        self.residual = residual


VERTICAL = AlgebraElement(1.0, 0.0, 0.0)


def _ascend(target: GroupPoint) -> list[Arc]:
    """Arcs from the identity to a point with c >= arctan|w|.

    A Kil = 0 arc reaches (arctan R, R e^{i psi}); the vertical arc then
    raises c by s and turns w by -s.
    """
    R = abs(target.w)
    lift = math.atan(R)
    s = max(0.0, target.c - lift)
    arcs = []
    if R > 0:
        psi = cmath.phase(target.w) + s
        arcs.append(Arc(AlgebraElement(1.0, math.cos(psi), math.sin(psi)), 2.0 * R))
    if s > 0:
        arcs.append(Arc(VERTICAL, 2.0 * s))
    return arcs


def _descent_control(u2: float, sign: float, mu: float) -> AlgebraElement:
    """Cone-boundary control with Kil = 1."""
    return AlgebraElement(math.sqrt(1.0 / mu + u2 * u2), u2, sign * math.sqrt((mu + 1.0) / mu))


_SIGN_PATTERNS = ((1,), (-1,), (1, -1), (-1, 1), (1, -1, 1), (-1, 1, -1))


def _search_descent(target: GroupPoint, mu: float, seed: int):
    best = (-math.inf, None, None)
    for signs in _SIGN_PATTERNS:
        def margin(x):
            g = target
            for i in reversed(range(len(signs))):
                arc = algebra_exp(_descent_control(x[2 * i + 1], signs[i], mu).scaled(x[2 * i]))
                g = multiply(g, inverse(arc))
            return g.c - math.atan(abs(g.w))

        res = differential_evolution(lambda x: -margin(x), [(1e-3, 6.0), (-30.0, 30.0)] * len(signs),
                                     seed=seed, maxiter=150, tol=1e-12, polish=True)
        if -res.fun > best[0]:
            best = (-res.fun, signs, res.x)
        if best[0] >= 0:
            break
    return best


def synthesize_controls(target: GroupPoint, p: StructureParams, tol: float = 1e-6) -> ControlProgram:
    """Piecewise-constant admissible controls steering the identity to target.

    Targets with c >= arctan|w| are reached exactly by a Kil = 0 arc and a
    vertical arc.  Below that surface a few cone-boundary arcs are appended
    and their parameters chosen so that the remaining prefix point lies on or
    above it.  Targets with a negative forward margin raise UnreachableTarget.
    """
    if p.regime() is not Regime.PROLATE:
        raise ValueError("prolate regime required")
    if not tol > 0:
        raise ValueError("tol must be positive")
    kappa = forward_margin(target)
    if kappa < 0:
        raise UnreachableTarget(target, kappa)
    mu = p.mu
    if target.c >= math.atan(abs(target.w)):
        arcs = _ascend(target)
    else:
        seed = zlib.crc32(repr((target.c, target.w, mu)).encode())
        m, signs, x = _search_descent(target, mu, seed)
        if signs is None:
            raise SynthesisError("descent search failed", ControlProgram(()), math.inf)
        tail = [Arc(_descent_control(x[2 * i + 1], signs[i], mu), float(x[2 * i]))
                for i in range(len(signs))]
        prefix = target
        for arc in reversed(tail):
            prefix = multiply(prefix, inverse(arc.endpoint()))
        arcs = _ascend(prefix) + tail
        if m < 0:
            prog = ControlProgram(tuple(arcs))
            res = group_distance(prog.simulate(), target)
            raise SynthesisError(f"no certified program found (best margin {m:.3g})", prog, res)
    prog = ControlProgram(tuple(arcs))
    if not prog.admissible(p):
        raise InternalError("synthesised control left the admissible cone")
    res = group_distance(prog.simulate(), target)
    if res > tol:
        raise SynthesisError(f"residual {res:.3g} exceeds tolerance {tol:.3g}", prog, res)
    return prog


def boundary_surface(p: StructureParams, re_grid, im_grid) -> list[tuple[float, float, float]]:
    """Rows (Re w, Im w, c_boundary) of the lower boundary of the attainable set."""
    regime = p.regime()
    rows = []
    for re in re_grid:
        for im in im_grid:
            w = complex(re, im)
            if regime is Regime.OBLATE:
                c = oblate_boundary(w, p)[1]
            elif regime is Regime.SUBLORENTZIAN:
                c = sublorentzian_lower_c(w)
            else:
                raise ValueError("boundary surfaces are available for oblate and sub-Lorentzian regimes")
            rows.append((float(re), float(im), c))
    return rows
