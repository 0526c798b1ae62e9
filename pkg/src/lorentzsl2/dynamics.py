"""Hamiltonian, covector dynamics and the numerical oracle for the full system."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .liegroup import (
    AlgebraElement,
    GroupPoint,
    algebra_exp_arrays,
    killing,
    multiply_arrays,
)

__all__ = [
    "Regime",
    "CausalClass",
    "Normality",
    "StructureParams",
    "Covector",
    "GeodesicDescriptor",
    "eps_kil",
    "hamiltonian",
    "hamiltonian_sub",
    "control_from_covector",
    "in_cone",
    "covector_flow",
    "integrate_full_system",
    "integrate_batch",
    "normalize",
    "lightlike_h3bar",
    "classify",
    "timelike_covector",
    "DEFAULT_STEPS_PER_UNIT",
]

DEFAULT_STEPS_PER_UNIT = 10_000


class Regime(enum.Enum):
    OBLATE = "oblate"
    SYMMETRIC = "symmetric"
    PROLATE = "prolate"
    SUBLORENTZIAN = "sub-Lorentzian"


class CausalClass(enum.Enum):
    KIL_NEGATIVE = "KilNegative"
    KIL_ZERO = "KilZero"
    KIL_POSITIVE = "KilPositive"


class Normality(enum.Enum):
    NORMAL = "normal"
    ABNORMAL = "abnormal"


@dataclass(frozen=True)
class StructureParams:
    """Principal moments I1 = I2 and I3; I3 = inf is the sub-Lorentzian limit."""

    I1: float
    I3: float

    def __post_init__(self):
        if not self.I1 > 0 or not math.isfinite(self.I1):
            raise ValueError(f"I1 must be positive and finite, got {self.I1}")
        if not self.I3 > 0:
            raise ValueError(f"I3 must be positive or inf, got {self.I3}")

    @classmethod
    def from_mu(cls, mu: float, I1: float = 1.0) -> "StructureParams":
        if mu == -1:
            return cls(I1, math.inf)
        if not mu > -1:
            raise ValueError(f"mu must be >= -1, got {mu}")
        return cls(I1, I1 / (mu + 1.0))

    @property
    def mu(self) -> float:
        if math.isinf(self.I3):
            return -1.0
        return self.I1 / self.I3 - 1.0

    @property
    def is_sublorentzian(self) -> bool:
        return math.isinf(self.I3)

    def regime(self) -> Regime:
        if self.is_sublorentzian:
            return Regime.SUBLORENTZIAN
        mu = self.mu
        if mu < 0:
            return Regime.OBLATE
        if mu == 0:
            return Regime.SYMMETRIC
        return Regime.PROLATE

    def to_json(self) -> dict:
        return {"I1": self.I1, "I3": "inf" if self.is_sublorentzian else self.I3}

    @classmethod
    def from_json(cls, obj: dict) -> "StructureParams":
        i3 = obj["I3"]
        return cls(float(obj["I1"]), math.inf if i3 == "inf" else float(i3))


@dataclass(frozen=True)
class Covector:
    h1: float
    h2: float
    h3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.h1, self.h2, self.h3)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    def killing(self) -> float:
        return killing(self)

    def norm(self) -> float:
        """|h| = sqrt(|Kil(h)|)."""
        return math.sqrt(abs(self.killing()))

    def bar(self) -> tuple[float, float, float]:
        """h / |h|; undefined on the light cone of the Killing form."""
        n = self.norm()
        if n == 0 or classify(self) is CausalClass.KIL_ZERO:
            raise ValueError("normalised components are undefined for Kil(h) = 0")
        return (self.h1 / n, self.h2 / n, self.h3 / n)

    def scaled(self, s: float) -> "Covector":
        return Covector(s * self.h1, s * self.h2, s * self.h3)

    def to_json(self) -> dict:
        return {"h1": self.h1, "h2": self.h2, "h3": self.h3}

    @classmethod
    def from_json(cls, obj: dict) -> "Covector":
        return cls(float(obj["h1"]), float(obj["h2"]), float(obj["h3"]))


@dataclass(frozen=True)
class GeodesicDescriptor:
    h: Covector
    normality: Normality
    causal_class: CausalClass

    @classmethod
    def of(cls, h: Covector, p: StructureParams) -> "GeodesicDescriptor":
        ham = _ham(h, p)
        normality = Normality.ABNORMAL if abs(ham) <= 1e-9 * max(1.0, _sq(h)) else Normality.NORMAL
        return cls(h, normality, classify(h, p))


def _sq(h: Covector) -> float:
    return h.h1**2 + h.h2**2 + h.h3**2


def eps_kil(h) -> float:
    """Zero tolerance for the Killing form, relative to the size of h."""
    h1, h2, h3 = h.as_tuple() if hasattr(h, "as_tuple") else h
    return 1e-12 * max(1.0, h1 * h1 + h2 * h2 + h3 * h3)


def hamiltonian(h: Covector, p: StructureParams) -> float:
    if p.is_sublorentzian:
        raise ValueError("use hamiltonian_sub in the sub-Lorentzian limit")
    return 0.5 * (-h.h1**2 / p.I1 + h.h2**2 / p.I1 + h.h3**2 / p.I3)


def hamiltonian_sub(h: Covector, I1: float) -> float:
    return 0.5 * (-h.h1**2 / I1 + h.h2**2 / I1)


def _ham(h: Covector, p: StructureParams) -> float:
    return hamiltonian_sub(h, p.I1) if p.is_sublorentzian else hamiltonian(h, p)


def in_cone(u: AlgebraElement, p: StructureParams, tol: float = 1e-12) -> bool:
    """I1 u1^2 - I1 u2^2 - I3 u3^2 >= 0 and u1 > 0, with relative tolerance."""
    u1, u2, u3 = u.as_tuple()
    if not u1 > 0:
        return False
    if p.is_sublorentzian:
        return u3 == 0 and u1 * u1 - u2 * u2 >= -tol * max(1.0, u1 * u1)
    form = p.I1 * u1 * u1 - p.I1 * u2 * u2 - p.I3 * u3 * u3
    return form >= -tol * max(1.0, p.I1 * u1 * u1)


def control_from_covector(h: Covector, p: StructureParams) -> AlgebraElement:
    u3 = 0.0 if p.is_sublorentzian else h.h3 / p.I3
    u = AlgebraElement(-h.h1 / p.I1, h.h2 / p.I1, u3)
    if not in_cone(u, p, tol=1e-9):
        raise ValueError(f"control {u} from covector {h} is outside the admissible cone")
    return u


def _rot(a: float, x: float, y: float) -> tuple[float, float]:
    ch, sh = math.cosh(a), math.sinh(a)
    return ch * x + sh * y, sh * x + ch * y


def covector_flow(h0: Covector, t: float, p: StructureParams) -> Covector:
    """(h1, h2) rotated hyperbolically by t mu h3 / I1; h3 is conserved."""
    a = t * p.mu * h0.h3 / p.I1
    if a == 0:
        return h0
    h1, h2 = _rot(a, h0.h1, h0.h2)
    return Covector(h1, h2, h0.h3)


def _field(h, I1, mu):
    h1, h2, h3 = h[..., 0], h[..., 1], h[..., 2]
    k = mu / I1
    return np.stack([k * h2 * h3, k * h1 * h3, np.zeros_like(h3)], axis=-1)


def _velocity(h, I1, I3):
    inv3 = 0.0 if math.isinf(I3) else 1.0 / I3
    return np.stack([-h[..., 0] / I1, h[..., 1] / I1, h[..., 2] * inv3], axis=-1)


def _br(a, b):
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([-(a2 * b3 - a3 * b2), -(a1 * b3 - a3 * b1), a1 * b2 - a2 * b1], axis=-1)


def _dexpinv(theta, v):
    # inverse right-trivialised differential for g = g0 exp(theta), to 4th order
    tv = _br(theta, v)
    return v + 0.5 * tv + _br(theta, tv) / 12.0


def integrate_batch(h0, t_grid, p: StructureParams, steps_per_unit: int = DEFAULT_STEPS_PER_UNIT):
    """RK4 on the covector with Munthe-Kaas stages on the group, batched over rows.

    h0 has shape (n, 3); t_grid is an increasing array starting at any t >= 0.
    Returns covectors of shape (len(t_grid), n, 3) and c, w of shape (len(t_grid), n).
    """
    h = np.array(h0, dtype=float).reshape(-1, 3)
    ts = np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or np.any(np.diff(ts) < 0) or (ts.size and ts[0] < 0):
        raise ValueError("t_grid must be a non-decreasing array of non-negative times")
    I1, I3, mu = p.I1, p.I3, p.mu
    n = h.shape[0]
    c = np.zeros(n)
    w = np.zeros(n, dtype=complex)
    out_h = np.empty((ts.size, n, 3))
    out_c = np.empty((ts.size, n))
    out_w = np.empty((ts.size, n), dtype=complex)
    t_now = 0.0
    for k, t_target in enumerate(ts):
        span = t_target - t_now
        m = max(1, math.ceil(span * steps_per_unit)) if span > 0 else 0
        if m:
            dt = span / m
            for _ in range(m):
                f1 = _field(h, I1, mu)
                h2 = h + 0.5 * dt * f1
                f2 = _field(h2, I1, mu)
                h3 = h + 0.5 * dt * f2
                f3 = _field(h3, I1, mu)
                h4 = h + dt * f3
                f4 = _field(h4, I1, mu)
                k1 = dt * _velocity(h, I1, I3)
                k2 = dt * _dexpinv(0.5 * k1, _velocity(h2, I1, I3))
                k3 = dt * _dexpinv(0.5 * k2, _velocity(h3, I1, I3))
                k4 = dt * _dexpinv(k3, _velocity(h4, I1, I3))
                theta = (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
                ec, ew = algebra_exp_arrays(theta[:, 0], theta[:, 1], theta[:, 2])
                c, w = multiply_arrays(c, w, ec, ew)
                h = h + dt * (f1 + 2 * f2 + 2 * f3 + f4) / 6.0
            t_now = t_target
        out_h[k] = h
        out_c[k] = c
        out_w[k] = w
    return out_h, out_c, out_w


def integrate_full_system(h0: Covector, t: float, p: StructureParams, steps: int | None = None):
    """Numerical oracle: returns (h(t), g(t)) using `steps` fixed steps."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if steps is None:
        steps = max(1, math.ceil(t * DEFAULT_STEPS_PER_UNIT))
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t == 0:
        return h0, GroupPoint(0.0, 0j)
    hs, cs, ws = integrate_batch([h0.as_tuple()], [t], p, steps_per_unit=steps / t)
    return Covector(*hs[0, 0]), GroupPoint(cs[0, 0], ws[0, 0])


def normalize(h: Covector, p: StructureParams, target: str = "timelike") -> Covector:
    if h.h1 == 0:
        raise ValueError("h1 = 0 cannot be oriented")
    ham = _ham(h, p)
    if target == "timelike":
        if not ham < 0:
            raise ValueError(f"timelike normalisation needs H(h) < 0, got {ham}")
        s = math.sqrt(-0.5 / ham)
        out = h.scaled(s)
    elif target == "lightlike":
        if abs(ham) > 1e-12 * max(1.0, _sq(h)) / p.I1:
            raise ValueError(f"lightlike covector needs H(h) = 0, got {ham}")
        out = h
    else:
        raise ValueError(f"unknown target {target!r}")
    return out if out.h1 < 0 else out.scaled(-1.0)


def lightlike_h3bar(p: StructureParams) -> dict:
    """Admissible h3bar values of light-like covectors with Kil != 0.

    The 'kil_zero_family' entry flags the extra family h3 = 0, h1^2 = h2^2.
    """
    mu = p.mu
    if mu == 0:
        raise ValueError("the symmetric case has no distinguished light-like h3bar")
    v = 1.0 / math.sqrt(abs(mu))
    return {"values": (v, -v), "kil_zero_family": True}


def classify(h, p: StructureParams | None = None) -> CausalClass:
    """Sign of Kil(h) with a scale-relative zero band.

    With params, also checks the h3bar ranges that normalised geodesic
    covectors must satisfy in the oblate and prolate regimes.
    """
    if not isinstance(h, Covector):
        h = Covector(*h)
    k = killing(h)
    eps = eps_kil(h)
    if abs(k) <= eps:
        cls = CausalClass.KIL_ZERO
    elif k < 0:
        cls = CausalClass.KIL_NEGATIVE
    else:
        cls = CausalClass.KIL_POSITIVE
    if p is not None and cls is not CausalClass.KIL_ZERO:
        mu = p.mu
        b3sq = h.h3 * h.h3 / abs(k)
        slack = 1e-9 * max(1.0, b3sq)
        if mu < 0 and cls is CausalClass.KIL_POSITIVE and b3sq < -1.0 / mu - slack:
            raise ValueError(f"oblate Kil>0 covector needs h3bar^2 >= {-1.0 / mu}, got {b3sq}")
        if mu > 0 and cls is CausalClass.KIL_POSITIVE:
            raise ValueError("prolate covectors with Kil > 0 are not geodesic covectors")
        if mu > 0 and b3sq > 1.0 / mu + slack:
            raise ValueError(f"prolate Kil<0 covector needs h3bar^2 <= {1.0 / mu}, got {b3sq}")
    return cls


def timelike_covector(h3bar: float, p: StructureParams, h2bar: float = 0.0,
                      kil_sign: int = -1) -> Covector:
    """Normalised time-like covector (H = -1/2, h1 < 0) with given h2bar, h3bar."""
    mu = p.mu
    if kil_sign < 0:
        b1 = -math.sqrt(1.0 + h2bar * h2bar + h3bar * h3bar)
        denom = 1.0 - mu * h3bar * h3bar
    else:
        rad = h3bar * h3bar + h2bar * h2bar - 1.0
        if rad <= 0:
            raise ValueError("Kil > 0 needs h2bar^2 + h3bar^2 > 1")
        b1 = -math.sqrt(rad)
        denom = -1.0 - mu * h3bar * h3bar
    if not denom > 0:
        raise ValueError(f"no time-like covector with h3bar={h3bar} for mu={mu}")
    n = math.sqrt(p.I1 / denom)
    return Covector(n * b1, n * h2bar, n * h3bar)
