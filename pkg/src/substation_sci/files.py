"""YAML documents for substation specs and scenarios (angles in degrees)."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from .phasor import MeasurementChannel, Phasor
from .stream import BreakerEvent, NoiseModel, OperatingPoint, Scenario, default_operating_point
from .topology import Branch, Breaker, ComponentArrangement, SubstationSpec, default_energized_sources


class FileFormatError(ValueError):
    pass


def _num(v) -> float:
    # PyYAML reads "1e-4" (no dot) as a string
    return float(v)


def spec_to_dict(spec: SubstationSpec) -> Dict[str, Any]:
    return {
        "substation_id": spec.substation_id,
        "kind": spec.kind.value,
        "nodes": list(spec.nodes),
        "branches": [{"id": b.branch_id, "node": b.node, "role": b.role.value, "hardwired": b.hardwired}
                     for b in spec.branches],
        "breakers": [{"id": br.breaker_id, "a": br.a, "b": br.b} for br in spec.breakers],
        "channels": [{"id": c.channel_id, "kind": c.kind.value, "target": c.target} for c in spec.channels],
    }


def spec_from_dict(d: Dict[str, Any]) -> SubstationSpec:
    try:
        return SubstationSpec(
            substation_id=str(d["substation_id"]),
            kind=d["kind"],
            nodes=tuple(str(n) for n in d["nodes"]),
            branches=tuple(Branch(str(b["id"]), str(b["node"]), b.get("role", "load"), bool(b.get("hardwired", False)))
                           for b in d.get("branches", [])),
            breakers=tuple(Breaker(str(br["id"]), str(br["a"]), str(br["b"])) for br in d["breakers"]),
            channels=tuple(MeasurementChannel(str(c["id"]), c["kind"], str(c["target"]))
                           for c in d.get("channels", [])),
        )
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"incomplete substation spec: missing {exc}") from None


def load_spec(path) -> SubstationSpec:
    return spec_from_dict(yaml.safe_load(Path(path).read_text()))


def save_spec(spec: SubstationSpec, path) -> None:
    Path(path).write_text(yaml.safe_dump(spec_to_dict(spec), sort_keys=False))


def scenario_to_dict(sc: Scenario) -> Dict[str, Any]:
    op = sc.operating_point
    return {
        "substation_id": sc.substation_id,
        "initial_ca": str(sc.initial_ca),
        "events": [{"time": ev.time, "breaker": ev.breaker_id, "action": ev.action} for ev in sc.events],
        "operating_point": {
            "voltages": {b: {"magnitude": v.magnitude, "angle_deg": v.angle_deg} for b, v in op.voltages.items()},
            "currents": dict(op.currents),
            "current_lag_deg": math.degrees(op.current_lag),
        },
        "energized_sources": list(sc.energized_sources),
        "noise": {"v_sigma": sc.noise.v_sigma, "i_sigma": sc.noise.i_sigma,
                  "angle_sigma_deg": math.degrees(sc.noise.angle_sigma)},
        "duration": sc.duration,
        "rate": sc.rate,
        "start_time_us": sc.start_time_us,
    }


def scenario_from_dict(d: Dict[str, Any], spec: Optional[SubstationSpec] = None) -> Scenario:
    """Build a scenario; fields the document omits default from ``spec``."""
    try:
        sub = str(d.get("substation_id", spec.substation_id if spec else None))
        bits = d.get("initial_ca")
        if bits is None:
            if spec is None:
                raise FileFormatError("scenario needs initial_ca")
            ca = ComponentArrangement.all_closed(spec.n)
        else:
            ca = ComponentArrangement.from_string(str(bits))
        if "energized_sources" in d:
            sources = tuple(str(s) for s in d["energized_sources"])
        elif spec is not None:
            sources = default_energized_sources(spec)
        else:
            raise FileFormatError("scenario needs energized_sources")
        op_d = d.get("operating_point")
        if op_d is None:
            if spec is None:
                raise FileFormatError("scenario needs operating_point")
            op = default_operating_point(spec, sources)
        else:
            op = OperatingPoint(
                voltages={str(b): Phasor.from_degrees(_num(v["magnitude"]), _num(v.get("angle_deg", 0.0)))
                          for b, v in (op_d.get("voltages") or {}).items()},
                currents={str(b): _num(i) for b, i in (op_d.get("currents") or {}).items()},
                current_lag=math.radians(_num(op_d.get("current_lag_deg", math.degrees(0.3)))),
            )
        nz = d.get("noise")
        noise = NoiseModel.none() if nz is None else NoiseModel(
            _num(nz.get("v_sigma", 0.0)), _num(nz.get("i_sigma", 0.0)), math.radians(_num(nz.get("angle_sigma_deg", 0.0))))
        events = tuple(BreakerEvent(_num(e["time"]), str(e["breaker"]), str(e["action"]))
                       for e in d.get("events") or [])
        return Scenario(sub, ca, op, sources, events, noise, _num(d.get("duration", 1.0)),
                        _num(d.get("rate", 30.0)), int(d.get("start_time_us", 0)))
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"incomplete scenario: {exc}") from None


def load_scenario(path, spec: Optional[SubstationSpec] = None) -> Scenario:
    return scenario_from_dict(yaml.safe_load(Path(path).read_text()) or {}, spec)


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(sc), sort_keys=False))
