"""Scenario files, the end-to-end pipeline, sweeps and report emission.

A scenario is a YAML document; every key is checked against a fixed schema
and unknown keys are rejected with a suggestion.  See ``README.md`` for the
field-by-field description.
"""

from __future__ import annotations

import copy
import csv
import difflib
import hashlib
import io
import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Iterator

import numpy as np
import scipy
import yaml

from . import __version__
from .channel import capacity
from .field import FieldPairing, Route, compute_pairing
from .geometry import DEFAULT_CAUSAL_TOLERANCE, CausalClass, causal_margin, classify_supports
from .profiles import DetectorSpec, ProfileKind, build_test_function
from .quadrature import DEFAULT_ABS_TOL, DEFAULT_MAX_EVALUATIONS, DEFAULT_REL_TOL
from .thermo import (
    EnergyLedger,
    EngineReport,
    ReservoirSpec,
    audit_predicate,
    energy_ledger,
    second_law_audit,
    switching_energy,
)


class ScenarioError(ValueError):
    """Base class for problems with a scenario file or its use."""


class ScenarioParseError(ScenarioError):
    pass


class ScenarioValidationError(ScenarioError):
    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path


DETECTOR_DEFAULTS: dict[str, Any] = {
    "position": [0.0, 0.0, 0.0],
    "switch_center": 0.0,
    "switch_timescale": 0.5,
    "coupling": 1.0,
    "spatial_width": 0.5,
}

DEFAULTS: dict[str, Any] = {
    "name": "scenario",
    "profile": ProfileKind.TRUNCATED_GAUSSIAN.value,
    "route": Route.MOMENTUM.value,
    "detectors": {"A": dict(DETECTOR_DEFAULTS), "B": dict(DETECTOR_DEFAULTS)},
    "reservoir": {"T_c": 1.0, "c_T": 10.0},
    "quadrature": {
        "rel_tol": DEFAULT_REL_TOL,
        "abs_tol": DEFAULT_ABS_TOL,
        "max_evaluations": DEFAULT_MAX_EVALUATIONS,
    },
    "causal_tolerance": DEFAULT_CAUSAL_TOLERANCE,
    "information_fraction": 1.0,
    "seed": 0,
}

@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS


@dataclass(frozen=True)
class Scenario:
    detector_a: DetectorSpec
    detector_b: DetectorSpec
    reservoir: ReservoirSpec
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    route: Route = Route.MOMENTUM
    profile: ProfileKind = ProfileKind.TRUNCATED_GAUSSIAN
    causal_tolerance: float = DEFAULT_CAUSAL_TOLERANCE
    information_fraction: float = 1.0
    seed: int = 0
    name: str = "scenario"

    def to_dict(self) -> dict[str, Any]:
        def det(d: DetectorSpec):
            return {
                "position": list(d.position),
                "switch_center": d.switch_center,
                "switch_timescale": d.switch_timescale,
                "coupling": d.coupling,
                "spatial_width": d.spatial_width,
            }

        return {
            "name": self.name,
            "profile": self.profile.value,
            "route": self.route.value,
            "detectors": {"A": det(self.detector_a), "B": det(self.detector_b)},
            "reservoir": {"T_c": self.reservoir.T_c, "c_T": self.reservoir.c_T},
            "quadrature": {
                "rel_tol": self.quadrature.rel_tol,
                "abs_tol": self.quadrature.abs_tol,
                "max_evaluations": self.quadrature.max_evaluations,
            },
            "causal_tolerance": self.causal_tolerance,
            "information_fraction": self.information_fraction,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# -- validation ------------------------------------------------------------

def _reject_unknown(data: dict, allowed: Iterable[str], where: str):
    allowed = list(allowed)
    for key in data:
        if key not in allowed:
            path = f"{where}.{key}" if where else str(key)
            hint = difflib.get_close_matches(str(key), allowed, n=1)
            msg = f"unknown key {key!r}"
            if hint:
                msg += f" (did you mean {hint[0]!r}?)"
            else:
                msg += f"; allowed keys: {', '.join(allowed)}"
            raise ScenarioValidationError(path, msg)


def _number(value, path: str) -> float:
    if isinstance(value, bool):
        raise ScenarioValidationError(path, f"expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ScenarioValidationError(path, f"expected a number, got {value!r}") from None
    if not isinstance(value, (int, float)):
        raise ScenarioValidationError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ScenarioValidationError(path, "must be finite")
    return value


def _positive(value, path: str) -> float:
    value = _number(value, path)
    if value <= 0:
        raise ScenarioValidationError(path, f"must be > 0, got {value}")
    return value


def _choice(value, enum, path: str):
    try:
        return enum(value)
    except ValueError:
        options = ", ".join(e.value for e in enum)
        raise ScenarioValidationError(path, f"must be one of {options}, got {value!r}") from None


def _mapping(value, path: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ScenarioValidationError(path, "expected a mapping")
    return value


def _detector(label: str, raw, profile: ProfileKind) -> DetectorSpec:
    where = f"detectors.{label}"
    raw = _mapping(raw, where)
    _reject_unknown(raw, DETECTOR_DEFAULTS, where)
    merged = {**DETECTOR_DEFAULTS, **raw}

    pos = merged["position"]
    if not isinstance(pos, (list, tuple)) or len(pos) != 3:
        raise ScenarioValidationError(f"{where}.position", "expected a list of 3 numbers")
    position = tuple(_number(c, f"{where}.position[{i}]") for i, c in enumerate(pos))
    coupling = _number(merged["coupling"], f"{where}.coupling")
    if coupling < 0:
        raise ScenarioValidationError(f"{where}.coupling", f"must be >= 0, got {coupling}")
    return DetectorSpec(
        label=label,
        position=position,
        switch_center=_number(merged["switch_center"], f"{where}.switch_center"),
        switch_timescale=_positive(merged["switch_timescale"], f"{where}.switch_timescale"),
        coupling=coupling,
        spatial_width=_positive(merged["spatial_width"], f"{where}.spatial_width"),
        profile_kind=profile,
    )


def scenario_from_dict(data) -> Scenario:
    """Validate a parsed config tree and fill in defaults."""
    data = _mapping(data, "<root>")
    _reject_unknown(data, DEFAULTS, "")

    profile = _choice(data.get("profile", DEFAULTS["profile"]), ProfileKind, "profile")
    route = _choice(data.get("route", DEFAULTS["route"]), Route, "route")

    detectors = _mapping(data.get("detectors"), "detectors")
    _reject_unknown(detectors, ("A", "B"), "detectors")
    det_a = _detector("A", detectors.get("A"), profile)
    det_b = _detector("B", detectors.get("B"), profile)

    res = _mapping(data.get("reservoir"), "reservoir")
    _reject_unknown(res, DEFAULTS["reservoir"], "reservoir")
    res = {**DEFAULTS["reservoir"], **res}
    reservoir = ReservoirSpec(T_c=_positive(res["T_c"], "reservoir.T_c"),
                              c_T=_positive(res["c_T"], "reservoir.c_T"))

    quad = _mapping(data.get("quadrature"), "quadrature")
    _reject_unknown(quad, DEFAULTS["quadrature"], "quadrature")
    quad = {**DEFAULTS["quadrature"], **quad}
    max_eval = _positive(quad["max_evaluations"], "quadrature.max_evaluations")
    if max_eval != int(max_eval):
        raise ScenarioValidationError("quadrature.max_evaluations", "must be an integer")
    quadrature = QuadratureSettings(
        rel_tol=_positive(quad["rel_tol"], "quadrature.rel_tol"),
        abs_tol=_positive(quad["abs_tol"], "quadrature.abs_tol"),
        max_evaluations=int(max_eval),
    )

    fraction = _number(data.get("information_fraction", 1.0), "information_fraction")
    if not 0.0 <= fraction <= 1.0:
        raise ScenarioValidationError("information_fraction", f"must lie in [0, 1], got {fraction}")
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ScenarioValidationError("seed", f"must be a non-negative integer, got {seed!r}")
    name = data.get("name", DEFAULTS["name"])
    if not isinstance(name, str):
        raise ScenarioValidationError("name", "must be a string")

    return Scenario(
        detector_a=det_a,
        detector_b=det_b,
        reservoir=reservoir,
        quadrature=quadrature,
        route=route,
        profile=profile,
        causal_tolerance=_positive(data.get("causal_tolerance", DEFAULT_CAUSAL_TOLERANCE),
                                   "causal_tolerance"),
        information_fraction=fraction,
        seed=seed,
        name=name,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"{path}: malformed YAML: {exc}") from exc
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc.strerror}") from exc
    return scenario_from_dict(data)


def with_overrides(s: Scenario, route=None, rel_tol=None, abs_tol=None, seed=None) -> Scenario:
    q = s.quadrature
    return replace(
        s,
        route=Route(route) if route is not None else s.route,
        quadrature=QuadratureSettings(
            rel_tol if rel_tol is not None else q.rel_tol,
            abs_tol if abs_tol is not None else q.abs_tol,
            q.max_evaluations,
        ),
        seed=seed if seed is not None else s.seed,
    )


# -- pipeline --------------------------------------------------------------

@dataclass(frozen=True)
class RunReport:
    scenario: Scenario
    causal_class: CausalClass
    causal_margin: float
    pairing: FieldPairing
    capacity_bits: float
    information_bits: float
    engine: EngineReport
    ledger: EnergyLedger
    provenance: dict[str, Any]

    def audit_consistent(self) -> bool:
        lam2 = self.scenario.detector_b.coupling ** 2
        return audit_predicate(lam2, self.engine.bound_rhs) == self.engine.satisfied

    def to_dict(self) -> dict[str, Any]:
        p = self.pairing
        e = self.engine
        field_part = {
            "route": p.route.value,
            "delta_AB": p.delta_AB,
            "delta_error": p.delta_error,
            "wightman_BB": p.wightman_BB,
            "wightman_error": p.wightman_error,
            "nu_B": p.nu_B,
            "nu_error": p.nu_error,
        }
        if p.route is Route.BOTH:
            field_part.update({
                "delta_momentum": p.delta_momentum,
                "delta_momentum_error": p.delta_momentum_error,
                "delta_position": p.delta_position,
                "delta_position_error": p.delta_position_error,
                "route_discrepancy": p.route_discrepancy,
            })
        return {
            "scenario": self.scenario.to_dict(),
            "geometry": {"causal_class": self.causal_class.value,
                         "causal_margin": self.causal_margin},
            "field": field_part,
            "channel": {"capacity_bits": self.capacity_bits,
                        "information_bits": self.information_bits},
            "engine": {
                "Q": e.Q, "T_h": e.T_h, "eta": e.eta, "W": e.W_work, "E_B": e.E_B,
                "bound_rhs": e.bound_rhs, "lambda_B_squared": self.scenario.detector_b.coupling ** 2,
                "margin": e.margin, "satisfied": e.satisfied,
            },
            "energy_ledger": self.ledger.lines(),
            "provenance": dict(self.provenance),
        }

    def csv_row(self, axis_value: float) -> list:
        e = self.engine
        return [axis_value, self.pairing.delta_AB, self.pairing.delta_error, self.pairing.nu_B,
                self.capacity_bits, e.Q, e.T_h, e.eta, e.W_work, e.E_B, e.bound_rhs, e.margin,
                "satisfied" if e.satisfied else "violated"]


CSV_COLUMNS = ["axis_value", "delta_AB", "delta_err", "nu_B", "capacity_bits", "Q", "T_h",
               "eta", "W", "E_B", "bound_rhs", "margin", "verdict"]


def provenance(s: Scenario) -> dict[str, Any]:
    return {
        "config_hash": s.config_hash(),
        "seed": s.seed,
        "relchannel": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def run_scenario(s: Scenario) -> RunReport:
    """geometry -> pairings -> nu_B -> capacity -> engine -> audit."""
    fa = build_test_function(s.detector_a)
    fb = build_test_function(s.detector_b)
    verdict = classify_supports(fa.support, fb.support, s.causal_tolerance)
    margin = causal_margin(fa.support, fb.support)

    q = s.quadrature
    # budget errors propagate with the failing stage already attached
    pairing = compute_pairing(fa, fb, s.route, q.rel_tol, q.abs_tol, q.max_evaluations)

    cap = capacity(pairing.delta_AB, pairing.nu_B)
    info = s.information_fraction * cap
    tau_b = s.detector_b.switch_timescale
    engine = second_law_audit(s.detector_b.coupling, tau_b, cap, s.reservoir,
                              s.information_fraction)
    ledger = energy_ledger(
        switching_energy(s.detector_a.coupling, s.detector_a.switch_timescale),
        engine.E_B,
    )
    return RunReport(
        scenario=s,
        causal_class=verdict,
        causal_margin=margin,
        pairing=pairing,
        capacity_bits=cap,
        information_bits=info,
        engine=engine,
        ledger=ledger,
        provenance=provenance(s),
    )


# -- sweeps ----------------------------------------------------------------

def _detector_axes():
    axes = {}
    for label in ("A", "B"):
        for key in ("switch_center", "switch_timescale", "coupling", "spatial_width"):
            axes[f"{label}.{key}"] = ("detectors", label, key)
        for i, c in enumerate("xyz"):
            axes[f"{label}.{c}"] = ("detectors", label, "position", i)
    return axes


SWEEP_AXES: dict[str, tuple] = {
    **_detector_axes(),
    "separation": ("separation",),
    "reservoir.T_c": ("reservoir", "T_c"),
    "reservoir.c_T": ("reservoir", "c_T"),
    "information_fraction": ("information_fraction",),
}


def set_parameter(s: Scenario, axis: str, value: float) -> Scenario:
    """Scenario with one sweepable parameter replaced.

    ``separation`` places B at distance ``value`` from A along +x.
    """
    if axis not in SWEEP_AXES:
        hint = difflib.get_close_matches(axis, SWEEP_AXES, n=1)
        extra = f" (did you mean {hint[0]!r}?)" if hint else ""
        raise ScenarioValidationError("axis", f"unknown sweep axis {axis!r}{extra}")
    data = copy.deepcopy(s.to_dict())
    path = SWEEP_AXES[axis]
    if path == ("separation",):
        a = data["detectors"]["A"]["position"]
        data["detectors"]["B"]["position"] = [a[0] + float(value), a[1], a[2]]
    else:
        target = data
        for key in path[:-1]:
            target = target[key]
        target[path[-1]] = float(value)
    return scenario_from_dict(data)


def parse_values(spec: str) -> list[float]:
    """Sweep values from ``"a,b,c"``, ``"linspace:start:stop:n"`` or ``"logspace:e0:e1:n"``."""
    spec = spec.strip()
    if not spec:
        return []
    if spec.startswith(("linspace:", "logspace:")):
        kind, *parts = spec.split(":")
        if len(parts) != 3:
            raise ScenarioValidationError("values", f"expected {kind}:start:stop:count")
        start, stop = (_number(p, "values") for p in parts[:2])
        count = _number(parts[2], "values")
        if count < 0 or count != int(count):
            raise ScenarioValidationError("values", "count must be a non-negative integer")
        fn = np.linspace if kind == "linspace" else np.logspace
        return [float(v) for v in fn(start, stop, int(count))]
    return [_number(v, "values") for v in spec.split(",")]


def sweep(s: Scenario, axis: str, values: Iterable[float], jobs: int = 1) -> Iterator[tuple[float, RunReport]]:
    """Run one scenario per value, yielding results in input order."""
    values = [float(v) for v in values]
    scenarios = [set_parameter(s, axis, v) for v in values]
    if jobs > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            yield from zip(values, pool.map(run_scenario, scenarios))
    else:
        for v, sc in zip(values, scenarios):
            yield v, run_scenario(sc)


# -- emission --------------------------------------------------------------

def report_yaml(report: RunReport) -> str:
    return yaml.safe_dump(report.to_dict(), sort_keys=False, default_flow_style=False)


def report_table(report: RunReport) -> str:
    d = report.to_dict()
    rows = [("causal class", d["geometry"]["causal_class"]),
            ("causal margin", d["geometry"]["causal_margin"])]
    for section in ("field", "channel", "engine", "energy_ledger"):
        rows += [(f"{section}.{k}", v) for k, v in d[section].items()]
    width = max(len(k) for k, _ in rows)
    lines = [f"scenario {report.scenario.name!r}  [{d['provenance']['config_hash'][:12]}]"]
    for k, v in rows:
        text = f"{v:.9g}" if isinstance(v, float) else str(v)
        lines.append(f"  {k:<{width}}  {text:>18}")
    return "\n".join(lines) + "\n"


def csv_header() -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(CSV_COLUMNS)
    return buf.getvalue()


def csv_line(value: float, report: RunReport) -> str:
    buf = io.StringIO()
    row = [repr(float(x)) if isinstance(x, float) else x for x in report.csv_row(value)]
    csv.writer(buf, lineterminator="\n").writerow(row)
    return buf.getvalue()
