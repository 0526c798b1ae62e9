"""Closed-form exponential map and Jacobian determinants."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    CausalClass,
    Covector,
    StructureParams,
    classify,
    hamiltonian,
    hamiltonian_sub,
)
from .liegroup import (
    AlgebraElement,
    GroupPoint,
    QuadCoords,
    algebra_exp,
    multiply,
)

__all__ = [
    "GeodesicSample",
    "quad_closed_form",
    "exp_map",
    "trace",
    "exp_map_product_form",
    "jacobian_det_analytic",
    "jacobian_det_numeric",
    "normalized_time",
]


@dataclass(frozen=True)
class GeodesicSample:
    t: float
    tau: float
    point: GroupPoint
    quad: QuadCoords

    def row(self) -> list[float]:
        q = self.quad
        return [self.t, self.tau, self.point.c, self.point.w.real, self.point.w.imag,
                q.q0, q.q1, q.q2, q.q3]

    def to_json(self) -> dict:
        q = self.quad
        return {"t": self.t, "tau": self.tau, "point": self.point.to_json(),
                "quad": [q.q0, q.q1, q.q2, q.q3]}


def normalized_time(h: Covector, t: float, p: StructureParams) -> float:
    """tau = t |h| / (2 I1); on the Killing light cone this is 0."""
    if classify(h) is CausalClass.KIL_ZERO:
        return 0.0
    return t * h.norm() / (2.0 * p.I1)


def quad_closed_form(h, t, p: StructureParams) -> np.ndarray:
    """(q0, q1, q2, q3) of Exp(h, t), vectorised over an array of t.

    Valid for any h (not only normalised ones), which the finite-difference
    Jacobian relies on.
    """
    h1, h2, h3 = h.as_tuple() if hasattr(h, "as_tuple") else h
    t = np.asarray(t, dtype=float)
    I1, mu = p.I1, p.mu
    cls = classify((h1, h2, h3))
    if cls is CausalClass.KIL_ZERO:
        s = t / (2.0 * I1)
        a = t * mu * h3 / (2.0 * I1)
        ch, sh = np.cosh(a), np.sinh(a)
        q0 = ch + s * h3 * sh
        q1 = -s * (ch * h1 + sh * h2)
        q2 = s * (sh * h1 + ch * h2)
        q3 = sh + s * h3 * ch
        return np.stack([q0, q1, q2, q3])
    k = -h1 * h1 + h2 * h2 + h3 * h3
    n = math.sqrt(abs(k))
    b1, b2, b3 = h1 / n, h2 / n, h3 / n
    tau = t * n / (2.0 * I1)
    a = tau * mu * b3
    if cls is CausalClass.KIL_NEGATIVE:
        cc, ss = np.cos(tau), np.sin(tau)
    else:
        cc, ss = np.cosh(tau), np.sinh(tau)
    ch, sh = np.cosh(a), np.sinh(a)
    q0 = cc * ch + b3 * ss * sh
    q1 = -ss * (ch * b1 + sh * b2)
    q2 = ss * (sh * b1 + ch * b2)
    q3 = cc * sh + b3 * ss * ch
    return np.stack([q0, q1, q2, q3])


def _lifted_angles(h, ts: np.ndarray, p: StructureParams) -> np.ndarray:
    """Continuous arg(q0 + i q1) along a sorted grid ts starting at 0.

    The grid is refined by doubling until every increment is below pi/2 and
    the lifted endpoint is stable under one more refinement.
    """
    t_end = float(ts[-1]) if ts.size else 0.0
    if t_end == 0:
        return np.zeros_like(ts)
    m = 64
    prev = None
    while True:
        fine = np.union1d(np.linspace(0.0, t_end, m + 1), ts)
        q = quad_closed_form(h, fine, p)
        ang = np.arctan2(q[1], q[0])
        d = np.diff(ang)
        d = (d + np.pi) % (2 * np.pi) - np.pi
        if np.all(np.abs(d) < np.pi / 2):
            lifted = np.concatenate([[ang[0]], ang[0] + np.cumsum(d)])
            out = lifted[np.searchsorted(fine, ts)]
            if prev is not None and np.allclose(out, prev, rtol=0, atol=1e-12):
                return out
            prev = out
        if m > 2**24:
            raise ArithmeticError("angle lift did not stabilise")
        m *= 2


def _check_normalized(h: Covector, p: StructureParams) -> None:
    if not h.h1 < 0:
        raise ValueError(f"geodesic covectors need h1 < 0, got {h}")
    ham = hamiltonian_sub(h, p.I1) if p.is_sublorentzian else hamiltonian(h, p)
    scale = max(1.0, h.h1**2 + h.h2**2 + h.h3**2) / p.I1
    if not (abs(ham + 0.5) <= 1e-9 * scale or abs(ham) <= 1e-9 * scale):
        raise ValueError(f"covector is not normalised: H = {ham}")


def trace(h: Covector, ts, p: StructureParams, check: bool = True) -> list[GeodesicSample]:
    """Samples of the geodesic at sorted non-negative times ts."""
    if check:
        _check_normalized(h, p)
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or np.any(ts < 0) or np.any(np.diff(ts) < 0):
        raise ValueError("times must be sorted and non-negative")
    q = quad_closed_form(h, ts, p)
    cs = _lifted_angles(h, ts, p)
    out = []
    for i, t in enumerate(ts):
        pt = GroupPoint(cs[i], complex(q[2, i], q[3, i]))
        out.append(GeodesicSample(float(t), normalized_time(h, float(t), p), pt,
                                  QuadCoords(*(float(v) for v in q[:, i]))))
    return out


def exp_map(h: Covector, t: float, p: StructureParams, check: bool = True) -> GeodesicSample:
    if t < 0:
        raise ValueError("t must be non-negative")
    return trace(h, [t], p, check=check)[0]


def exp_map_product_form(h: Covector, t: float, p: StructureParams) -> GroupPoint:
    """exp((t/I1)(-h1 e1 + h2 e2 + h3 e3)) . exp((t mu h3 / I1) e3)."""
    _check_normalized(h, p)
    s = t / p.I1
    first = algebra_exp(AlgebraElement(-s * h.h1, s * h.h2, s * h.h3))
    second = algebra_exp(AlgebraElement(0.0, 0.0, s * p.mu * h.h3))
    return multiply(first, second)


def jacobian_det_analytic(h: Covector, t: float, p: StructureParams) -> float:
    """det d(q0..q3)/d(tau, h1bar, h2bar, h3bar), up to a positive constant.

    The (q1, q2) block in (h1bar, h2bar) contributes -s^2 and the (q0, q3)
    block in (tau, h3bar) contributes s [tau mu (delta - b3^2) c + (delta + mu b3^2) s],
    with c, s = cos, sin (Kil < 0) or cosh, sinh (Kil > 0) and delta = sign Kil.
    """
    cls = classify(h)
    if cls is CausalClass.KIL_ZERO:
        raise ValueError("the factorisation is only available for Kil(h) != 0")
    b3 = h.bar()[2]
    tau = normalized_time(h, t, p)
    mu = p.mu
    if cls is CausalClass.KIL_NEGATIVE:
        delta, cc, ss = -1.0, math.cos(tau), math.sin(tau)
    else:
        delta, cc, ss = 1.0, math.cosh(tau), math.sinh(tau)
    second = ss * (tau * mu * (delta - b3 * b3) * cc + (delta + mu * b3 * b3) * ss)
    return -ss * ss * second


def _tangent_basis(h: np.ndarray, p: StructureParams):
    inv3 = 0.0 if p.is_sublorentzian else 1.0 / p.I3
    grad = np.array([-h[0] / p.I1, h[1] / p.I1, h[2] * inv3])
    n = grad / np.linalg.norm(grad)
    cand = [e - n * (n @ e) for e in np.eye(3)]
    cand.sort(key=lambda v: -np.linalg.norm(v))
    v1 = cand[0] / np.linalg.norm(cand[0])
    v2 = cand[1] - v1 * (v1 @ cand[1])
    v2 /= np.linalg.norm(v2)
    if np.linalg.det(np.array([n, v1, v2])) < 0:
        v2 = -v2
    return v1, v2


def jacobian_det_numeric(h: Covector, t: float, p: StructureParams, step: float = 1e-5) -> float:
    """Central-difference determinant of (t, h) -> q restricted to a level set of H.

    Columns: d/dt, derivatives along a tangent basis of the level set of H,
    and the normal (q0, q1, -q2, -q3) of the quadric.  The basis orientation
    is flipped when Kil(h) < 0 so that the sign agrees with
    jacobian_det_analytic before the first zero.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    hv = h.as_array()
    v1, v2 = _tangent_basis(hv, p)
    if classify(h) is CausalClass.KIL_NEGATIVE:
        v2 = -v2
    dt = step * max(1.0, abs(t))
    dh = step * max(1.0, float(np.linalg.norm(hv)))
    if not (dt > 1e-300 and dh > 1e-300 and t + dt != t):
        raise ArithmeticError("finite-difference step underflow")
    cols = [(quad_closed_form(hv, t + dt, p) - quad_closed_form(hv, t - dt, p)) / (2 * dt)]
    for v in (v1, v2):
        cols.append((quad_closed_form(hv + dh * v, t, p) - quad_closed_form(hv - dh * v, t, p)) / (2 * dh))
    q = quad_closed_form(hv, t, p)
    cols.append(np.array([q[0], q[1], -q[2], -q[3]]))
    return float(np.linalg.det(np.column_stack(cols)))

