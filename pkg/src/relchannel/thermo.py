"""Landauer heat, finite-reservoir Carnot engine and the second-law audit.

Units: c = hbar = k_B = 1, so heats, works and temperatures share one scale.
Information is measured in bits, hence the ``ln 2`` factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)
AUDIT_SLACK = 1e-12


@dataclass(frozen=True)
class ReservoirSpec:
    T_c: float
    c_T: float

    def __post_init__(self):
        if not (math.isfinite(self.T_c) and self.T_c > 0):
            raise ValueError(f"T_c must be a positive finite temperature, got {self.T_c}")
        if not (math.isfinite(self.c_T) and self.c_T > 0):
            raise ValueError(f"c_T must be positive and finite, got {self.c_T}")


@dataclass(frozen=True)
class EnergyLedger:
    """Energy change of the whole system; E_phi and E_AB vanish here."""

    E_A: float
    E_B: float
    E_phi: float = 0.0
    E_AB: float = 0.0

    @property
    def total(self) -> float:
        return self.E_phi + self.E_A + self.E_B + self.E_AB

    def lines(self) -> dict[str, float]:
        return {"E_phi": self.E_phi, "E_A": self.E_A, "E_B": self.E_B,
                "E_AB": self.E_AB, "total": self.total}


@dataclass(frozen=True)
class EngineReport:
    Q: float
    T_h: float
    eta: float
    W_work: float
    E_B: float
    bound_rhs: float
    satisfied: bool
    margin: float


def landauer_heat(capacity_bits: float, T_c: float) -> float:
    """Heat dissipated by erasing ``capacity_bits`` at temperature ``T_c`` (at equality)."""
    if capacity_bits < 0:
        raise ValueError(f"capacity must be non-negative, got {capacity_bits}")
    if T_c <= 0:
        raise ValueError(f"T_c must be positive, got {T_c}")
    return T_c * capacity_bits * LN2


def heat_reservoir(r: ReservoirSpec, Q: float) -> float:
    if Q < 0:
        raise ValueError(f"heat must be non-negative, got {Q}")
    return r.T_c + Q / r.c_T


def carnot_efficiency(T_c: float, T_h: float) -> float:
    if T_c <= 0:
        raise ValueError(f"T_c must be positive, got {T_c}")
    if T_h < T_c:
        raise ValueError(f"T_h={T_h} below T_c={T_c}: no usable gradient")
    # (T_h - T_c) is exact for T_h <= 2 T_c, unlike 1 - T_c/T_h.
    return (T_h - T_c) / T_h


def engine_efficiency(r: ReservoirSpec, Q: float) -> float:
    """Carnot efficiency after heating the reservoir by ``Q``.

    Same value as ``carnot_efficiency(T_c, heat_reservoir(r, Q))`` but formed
    from the temperature rise ``Q/c_T`` directly, so tiny heats keep their
    relative precision instead of cancelling in ``T_h - T_c``.
    """
    rise = Q / r.c_T
    return rise / (r.T_c + rise)


def extracted_work(eta: float, Q: float) -> float:
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"efficiency must lie in [0, 1), got {eta}")
    if Q < 0:
        raise ValueError(f"heat must be non-negative, got {Q}")
    return eta * Q


def switching_energy(lambda_X: float, tau_X: float) -> float:
    """Energy to switch a coupling ``lambda_X`` on and off over ``tau_X``."""
    if tau_X <= 0:
        raise ValueError(f"switching timescale must be positive, got {tau_X}")
    return lambda_X ** 2 / tau_X


def energy_ledger(E_A: float, E_B: float) -> EnergyLedger:
    if E_A < 0 or E_B < 0:
        raise ValueError("switching energies must be non-negative")
    return EnergyLedger(E_A=E_A, E_B=E_B)


def coupling_bound(capacity_bits: float, T_c: float, c_T: float, tau: float) -> float:
    """Smallest ``lambda_B**2`` compatible with the second law.

    ``tau C T_c [1 - 1/(1 + C ln2 / c_T)] ln 2``, written with
    ``1 - 1/(1+x) = x/(1+x)`` to avoid cancellation when ``x`` is small.
    """
    if capacity_bits < 0 or T_c <= 0 or c_T <= 0 or tau <= 0:
        raise ValueError("coupling_bound needs capacity >= 0 and positive T_c, c_T, tau")
    x = capacity_bits * LN2 / c_T
    return tau * capacity_bits * T_c * (x / (1.0 + x)) * LN2


def second_law_audit(
    lambda_B: float,
    tau: float,
    capacity_bits: float,
    r: ReservoirSpec,
    information_fraction: float = 1.0,
) -> EngineReport:
    """Run the engine on the erased information and check ``W <= E_B``.

    ``information_fraction`` scales how much of the capacity Bob actually
    holds and erases; 1 is the ideal, best-case protocol.
    """
    if not 0.0 <= information_fraction <= 1.0:
        raise ValueError("information_fraction must lie in [0, 1]")
    info = information_fraction * capacity_bits
    Q = landauer_heat(info, r.T_c)
    T_h = heat_reservoir(r, Q)
    eta = engine_efficiency(r, Q)
    W = extracted_work(eta, Q)
    E_B = switching_energy(lambda_B, tau)
    bound = coupling_bound(info, r.T_c, r.c_T, tau)
    lam2 = lambda_B ** 2
    return EngineReport(
        Q=Q, T_h=T_h, eta=eta, W_work=W, E_B=E_B, bound_rhs=bound,
        satisfied=audit_predicate(lam2, bound), margin=lam2 - bound,
    )


def audit_predicate(lambda_B_squared: float, bound_rhs: float) -> bool:
    return lambda_B_squared >= bound_rhs * (1.0 - AUDIT_SLACK)
