"""Quick invariant checks on built-in configurations (``relchannel selftest``)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import capacity
from .field import compute_pairing, pairing_momentum, pairing_position
from .geometry import CausalClass, classify_supports
from .profiles import DetectorSpec, ProfileKind, build_test_function
from .thermo import (
    ReservoirSpec,
    carnot_efficiency,
    coupling_bound,
    extracted_work,
    heat_reservoir,
    landauer_heat,
    second_law_audit,
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def gaussian_pair():
    a = DetectorSpec("A", (0, 0, 0), 0.0, 0.5, 1.0, 0.5)
    b = DetectorSpec("B", (1, 0, 0), 5.0, 0.5, 1.0, 0.5)
    return build_test_function(a), build_test_function(b)


def gaussian_delta(fa, fb) -> float:
    """Closed-form pairing for two untruncated Gaussian detectors at rest."""
    d = float(np.linalg.norm(fb.position - fa.position))
    T = fb.t0 - fa.t0
    a = 0.5 * (fa.tau ** 2 + fb.tau ** 2 + fa.sigma ** 2 + fb.sigma ** 2)
    K = (fa.coupling * fb.coupling * fa.tau * fb.tau * fa.sigma ** 3 * fb.sigma ** 3
         * (2 * math.pi) ** 4)
    bracket = math.exp(-(T - d) ** 2 / (4 * a)) - math.exp(-(T + d) ** 2 / (4 * a))
    return -K / (4 * math.pi ** 2 * d) * 0.5 * math.sqrt(math.pi / a) * bracket


def _dual_route() -> Check:
    fa, fb = gaussian_pair()
    mom = pairing_momentum(fa, fb).value
    pos = pairing_position(fa, fb).value
    exact = gaussian_delta(fa, fb)
    worst = max(abs(mom - exact), abs(pos - exact)) / abs(exact)
    return Check("dual-route pairing vs closed form", worst <= 1e-5,
                 f"momentum={mom:.10e} position={pos:.10e} exact={exact:.10e}")


def _antisymmetry() -> Check:
    fa, fb = gaussian_pair()
    ab = pairing_momentum(fa, fb)
    ba = pairing_momentum(fb, fa)
    gap = abs(ab.value + ba.value)
    return Check("antisymmetry", gap <= ab.error_estimate + ba.error_estimate + 1e-15,
                 f"|D(a,b) + D(b,a)| = {gap:.3e}")


def _microcausality() -> Check:
    a = DetectorSpec("A", (0, 0, 0), 0.0, 0.5, 10.0, 0.5, ProfileKind.SMOOTH_BUMP)
    b = DetectorSpec("B", (3, 0, 0), 0.5, 0.5, 1.0, 0.5, ProfileKind.SMOOTH_BUMP)
    fa, fb = build_test_function(a), build_test_function(b)
    verdict = classify_supports(fa.support, fb.support)
    p = compute_pairing(fa, fb, "both")
    cap = capacity(p.delta_AB, p.nu_B)
    ok = verdict is CausalClass.STRICTLY_SPACELIKE and abs(p.delta_AB) <= 1e-6 and cap <= 1e-8
    return Check("spacelike capacity vanishes", ok,
                 f"verdict={verdict.value} delta={p.delta_AB:.3e} capacity={cap:.3e}")


def _capacity_extremes() -> Check:
    top = capacity(math.pi / 4, 1.0)
    zeros = [capacity(0.0, nu) for nu in np.linspace(0.05, 1.0, 20)]
    ok = abs(top - 1.0) <= 1e-9 and all(z == 0.0 for z in zeros)
    return Check("capacity extremes", ok, f"capacity(pi/4, 1) = {top!r}")


def _thermo_identity(seed: int) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        C, T_c, c_T, tau = rng.uniform(0.05, 1), rng.uniform(0.1, 10), rng.uniform(0.01, 10), rng.uniform(0.1, 10)
        Q = landauer_heat(C, T_c)
        W = extracted_work(carnot_efficiency(T_c, heat_reservoir(ReservoirSpec(T_c, c_T), Q)), Q)
        b = coupling_bound(C, T_c, c_T, tau)
        worst = max(worst, abs(b - tau * W) / b)
    return Check("coupling bound equals tau * W", worst <= 1e-12, f"worst relative gap {worst:.2e}")


def _audit() -> Check:
    r = ReservoirSpec(1.5, 2.0)
    bound = coupling_bound(0.7, r.T_c, r.c_T, 0.8)
    at = second_law_audit(math.sqrt(bound), 0.8, 0.7, r)
    below = second_law_audit(math.sqrt(0.99 * bound), 0.8, 0.7, r)
    ok = at.satisfied and abs(at.margin) <= 1e-12 * bound and not below.satisfied
    return Check("second-law audit", ok, f"bound={bound:.6e} margin_at_bound={at.margin:.1e}")


def run_selftest(seed: int = 0, report: Callable[[Check], None] | None = None) -> list[Check]:
    checks = []
    for fn in (_capacity_extremes, lambda: _thermo_identity(seed), _audit,
               _antisymmetry, _dual_route, _microcausality):
        c = fn()
        checks.append(c)
        if report is not None:
            report(c)
    return checks
