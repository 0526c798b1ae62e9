"""Conjugate, Maxwell and cut times; caustic samples; Maxwell pair checks."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy.optimize import bisect

from .dynamics import (
    CausalClass,
    Covector,
    Regime,
    StructureParams,
    classify,
    covector_flow,
    timelike_covector,
)
from .geodesic import exp_map
from .liegroup import GroupPoint, group_distance

__all__ = [
    "TimeKind",
    "ExtendedTime",
    "MaxwellDetail",
    "conjugate_tau",
    "conjugate_time",
    "maxwell_tau3",
    "maxwell_detail",
    "maxwell_time",
    "cut_time",
    "caustic_sample",
    "maxwell_partner",
    "maxwell_pair_check",
    "ordering_report",
    "OrderingRow",
]

ROOT_XTOL = 1e-13


class TimeKind(enum.Enum):
    FINITE = "finite"
    INFINITE = "inf"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class ExtendedTime:
    kind: TimeKind
    value: float | None = None

    @classmethod
    def finite(cls, v: float) -> "ExtendedTime":
        return cls(TimeKind.FINITE, float(v))

    @classmethod
    def inf(cls) -> "ExtendedTime":
        return cls(TimeKind.INFINITE)

    @classmethod
    def undefined(cls) -> "ExtendedTime":
        return cls(TimeKind.UNDEFINED)

    @property
    def is_finite(self) -> bool:
        return self.kind is TimeKind.FINITE

    def as_float(self) -> float:
        """inf for the infinite marker, nan for the undefined one."""
        if self.kind is TimeKind.FINITE:
            return self.value
        return math.inf if self.kind is TimeKind.INFINITE else math.nan

    def __str__(self) -> str:
        if self.kind is TimeKind.FINITE:
            return repr(self.value)
        return self.kind.value

    def __lt__(self, other: "ExtendedTime") -> bool:
        if TimeKind.UNDEFINED in (self.kind, other.kind):
            raise TypeError("undefined times are not ordered")
        return self.as_float() < other.as_float()


def _require_regime(p: StructureParams) -> Regime:
    r = p.regime()
    if r is Regime.SYMMETRIC:
        raise ValueError("optimality is not analysed for the symmetric case mu = 0")
    return r


def _checked_bisect(f, a: float, b: float) -> float:
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if not fa * fb < 0:
        raise ArithmeticError(f"bracket [{a}, {b}] has no sign change ({fa}, {fb})")
    return bisect(f, a, b, xtol=ROOT_XTOL, rtol=4 * 2.220446049250313e-16, maxiter=200)


def _b3(h: Covector) -> float:
    return h.h3 / h.norm()


def conjugate_tau(h3bar: float, mu: float) -> float:
    """First conjugate tau for a Kil < 0 covector with the given h3bar."""
    if mu < 0:
        return math.pi
    if mu == 0:
        raise ValueError("symmetric case")
    b2 = h3bar * h3bar
    if abs(1.0 - mu * b2) <= 1e-12:
        return math.pi / 2
    if mu * b2 > 1:
        raise ValueError(f"h3bar^2 = {b2} exceeds 1/mu = {1 / mu}")
    k = mu * (1.0 + b2) / (1.0 - mu * b2)
    # tan tau = -k tau, written without poles
    return _checked_bisect(lambda x: math.sin(x) + k * x * math.cos(x), math.pi / 2, math.pi)


def conjugate_time(h: Covector, p: StructureParams) -> ExtendedTime:
    regime = _require_regime(p)
    cls = classify(h)
    if regime is Regime.PROLATE and cls is CausalClass.KIL_POSITIVE:
        raise ValueError("prolate covectors with Kil > 0 do not define geodesics")
    if cls is not CausalClass.KIL_NEGATIVE:
        return ExtendedTime.inf()
    tau = conjugate_tau(_b3(h), p.mu)
    return ExtendedTime.finite(2.0 * tau * p.I1 / h.norm())


def _q3_factor(h3bar: float, mu: float):
    return lambda x: math.cos(x) * math.sinh(x * mu * h3bar) + h3bar * math.sin(x) * math.cosh(x * mu * h3bar)


def maxwell_tau3(h3bar: float, mu: float) -> float:
    """First tau > 0 with q3 = 0 (h3-reflection Maxwell time), Kil < 0 branch.

    Returns inf when h3bar = 0 since then q3 vanishes identically.
    """
    if h3bar == 0:
        return math.inf
    if mu > 0:
        return _checked_bisect(_q3_factor(h3bar, mu), math.pi / 2, math.pi)
    return _checked_bisect(_q3_factor(h3bar, mu), math.pi, 1.5 * math.pi)


@dataclass(frozen=True)
class MaxwellDetail:
    rotation: ExtendedTime
    reflection_h2: ExtendedTime
    reflection_h3: ExtendedTime
    minimum: ExtendedTime


def maxwell_detail(h: Covector, p: StructureParams) -> MaxwellDetail:
    regime = _require_regime(p)
    cls = classify(h)
    if regime is Regime.PROLATE and cls is CausalClass.KIL_POSITIVE:
        raise ValueError("prolate covectors with Kil > 0 do not define geodesics")
    if cls is not CausalClass.KIL_NEGATIVE:
        inf = ExtendedTime.inf()
        return MaxwellDetail(inf, inf, inf, inf)
    scale = 2.0 * p.I1 / h.norm()
    b3 = _b3(h)
    rot = ExtendedTime.finite(math.pi * scale)
    tau3 = maxwell_tau3(b3, p.mu)
    refl3 = ExtendedTime.finite(tau3 * scale) if math.isfinite(tau3) else ExtendedTime.inf()
    # q2 = 0 first happens where sin tau = 0, together with q1
    refl2 = rot
    best = min((rot, refl2, refl3), key=lambda e: e.as_float())
    return MaxwellDetail(rot, refl2, refl3, best)


def maxwell_time(h: Covector, p: StructureParams) -> ExtendedTime:
    """Minimum over the rotation, h2-reflection and h3-reflection families."""
    return maxwell_detail(h, p).minimum


def cut_time(h: Covector, p: StructureParams) -> ExtendedTime:
    regime = _require_regime(p)
    cls = classify(h)
    if regime is Regime.PROLATE:
        if cls is CausalClass.KIL_POSITIVE:
            raise ValueError("prolate covectors with Kil > 0 do not define geodesics")
        return ExtendedTime.undefined()
    if cls is CausalClass.KIL_NEGATIVE:
        return ExtendedTime.finite(2.0 * math.pi * p.I1 / h.norm())
    return ExtendedTime.inf()


def caustic_sample(p: StructureParams, h3bar_grid) -> list[GroupPoint]:
    regime = _require_regime(p)
    if regime is Regime.PROLATE:
        raise ValueError("prolate caustics are sampled via conjugate_time and exp_map")
    mu = p.mu
    return [GroupPoint(math.pi, complex(0.0, -math.sinh(math.pi * mu * b3))) for b3 in h3bar_grid]


def maxwell_partner(h: Covector, p: StructureParams, t: float) -> Covector:
    """The reflected covector whose geodesic meets that of h at time t.

    The reflection acts on the covector flowed to time t:
    (h1, h2, -h3) in the prolate case and (h1, -h2, h3) otherwise.
    """
    ht = covector_flow(h, t, p)
    if p.regime() is Regime.PROLATE:
        return Covector(ht.h1, ht.h2, -ht.h3)
    return Covector(ht.h1, -ht.h2, ht.h3)


def maxwell_pair_check(h: Covector, p: StructureParams) -> float:
    """Distance between Exp(h, t_max) and the endpoint of its reflected partner.

    For prolate covectors t_max is the h3-reflection time.
    """
    regime = _require_regime(p)
    if classify(h) is not CausalClass.KIL_NEGATIVE:
        raise ValueError("Maxwell pairs are checked for Kil(h) < 0")
    detail = maxwell_detail(h, p)
    t = detail.reflection_h3 if regime is Regime.PROLATE else detail.rotation
    if not t.is_finite:
        raise ValueError("the reflection fixes this covector")
    partner = maxwell_partner(h, p, t.value)
    if max(abs(a - b) for a, b in zip(partner.as_tuple(), covector_flow(h, t.value, p).as_tuple())) == 0:
        raise ValueError("the reflection fixes this covector")
    a = exp_map(h, t.value, p).point
    b = exp_map(partner, t.value, p).point
    return group_distance(a, b)


@dataclass(frozen=True)
class OrderingRow:
    h3bar: float
    tau_conj: float
    tau_maxwell: float
    t_conj: ExtendedTime
    t_maxwell: ExtendedTime
    t_cut: ExtendedTime


def ordering_report(p: StructureParams, h3bar_grid, h2bar: float = 0.0) -> list[OrderingRow]:
    """Conjugate, Maxwell and cut times for normalised time-like covectors.

    Rows use h1bar < 0 on the Kil < 0 sheet; in the oblate regime rows with
    h3bar^2 > -1/mu also exist on the Kil > 0 sheet but are not emitted here.
    """
    _require_regime(p)
    rows = []
    for b3 in h3bar_grid:
        h = timelike_covector(b3, p, h2bar=h2bar)
        b = _b3(h)
        tau_m = min(math.pi, maxwell_tau3(b, p.mu))
        rows.append(OrderingRow(float(b3), conjugate_tau(b, p.mu), tau_m,
                                conjugate_time(h, p), maxwell_time(h, p), cut_time(h, p)))
    return rows
