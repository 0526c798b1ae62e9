"""Lorentzian and sub-Lorentzian geometry on the universal cover of SL(2, R)."""
from .dynamics import Covector, Regime, StructureParams, integrate_full_system
from .geodesic import exp_map, trace
from .liegroup import GroupPoint, algebra_exp, inverse, multiply
from .optimality import conjugate_time, cut_time, maxwell_time
from .reachability import Membership, Status, synthesize_controls

__all__ = [
    "Covector", "Regime", "StructureParams", "integrate_full_system",
    "exp_map", "trace", "GroupPoint", "algebra_exp", "inverse", "multiply",
    "conjugate_time", "cut_time", "maxwell_time", "Membership", "Status",
    "synthesize_controls",
]
__version__ = "0.1.0"
