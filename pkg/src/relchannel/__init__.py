"""Relativistic detector channel: field pairings, capacity and the second-law bound."""

__version__ = "0.1.0"

from .channel import binary_entropy, capacity
from .field import FieldPairing, Route, compute_pairing, propagate_E, wightman_norm
from .geometry import CausalClass, Event, SupportRegion, classify_supports
from .profiles import DetectorSpec, ProfileKind, TestFunction, build_test_function, fourier_transform
from .quadrature import QuadratureBudgetError, QuadratureResult, integrate_1d, integrate_nd
from .thermo import EngineReport, ReservoirSpec, coupling_bound, second_law_audit

__all__ = [
    "CausalClass", "DetectorSpec", "EngineReport", "Event", "FieldPairing", "ProfileKind",
    "QuadratureBudgetError", "QuadratureResult", "ReservoirSpec", "Route", "SupportRegion",
    "TestFunction", "binary_entropy", "build_test_function", "capacity", "classify_supports",
    "compute_pairing", "coupling_bound", "fourier_transform", "integrate_1d", "integrate_nd",
    "propagate_E", "second_law_audit", "wightman_norm",
]
