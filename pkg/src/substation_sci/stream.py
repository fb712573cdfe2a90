"""Synthetic PMU streams with exact ground-truth labels.

Phasors are generated topologically: every live group carries the voltage of
its lowest-index energized source, dead channels sit at a noise floor, and
connected branches in live groups carry their operating-point current.
Values are quantized to the stream-file precision on creation, so a stream
written to disk reads back equal.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .phasor import ChannelKind, Phasor, PmuFrame
from .topology import (ComponentArrangement, FunctionalArrangement, SubstationSpec, ca_to_fa, connectivity,
                       default_energized_sources, enumerate_cas, observable)

DEFAULT_RATE = 30.0
MAG_DECIMALS = 6
ANGLE_DECIMALS = 4
STREAM_COLUMNS = ("timestamp_us", "substation_id", "channel_id", "kind", "magnitude_pu", "angle_deg",
                  "ca_bits", "fa_id")


class StreamError(ValueError):
    pass


def quantize(p: Phasor) -> Phasor:
    deg = round(math.degrees(p.angle), ANGLE_DECIMALS)
    if deg <= -180.0:
        deg += 360.0
    return Phasor(round(p.magnitude, MAG_DECIMALS), math.radians(deg))


@dataclass(frozen=True)
class NoiseModel:
    v_sigma: float = 1e-4
    i_sigma: float = 1e-4
    angle_sigma: float = 1e-3

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0)

    @property
    def is_zero(self) -> bool:
        return self.v_sigma == 0 and self.i_sigma == 0 and self.angle_sigma == 0


@dataclass(frozen=True)
class OperatingPoint:
    """Source voltages and branch current magnitudes (pu).

    Currents lag their group voltage by ``current_lag`` radians.
    """

    voltages: Mapping[str, Phasor] = field(default_factory=dict)
    currents: Mapping[str, float] = field(default_factory=dict)
    current_lag: float = 0.3

    def scaled(self, s: float) -> "OperatingPoint":
        return replace(self, voltages={b: v.scaled(s) for b, v in self.voltages.items()},
                       currents={b: i * s for b, i in self.currents.items()})

    def rotated(self, theta: float) -> "OperatingPoint":
        return replace(self, voltages={b: v.rotated(theta) for b, v in self.voltages.items()})


def default_operating_point(spec: SubstationSpec, sources: Optional[Iterable[str]] = None) -> OperatingPoint:
    # distinct sources differ by 0.01 pu and 0.1 rad, far outside the equality tolerances
    sources = default_energized_sources(spec) if sources is None else tuple(sources)
    voltages = {b: Phasor(1.0 - 0.01 * k, 0.1 - 0.1 * k) for k, b in enumerate(sources)}
    currents = {b: 0.5 + 0.05 * k for k, b in enumerate(spec.branch_ids)}
    return OperatingPoint(voltages, currents)


@dataclass(frozen=True)
class BreakerEvent:
    time: float  # seconds after stream start
    breaker_id: str
    action: str  # "open" | "close"

    def __post_init__(self):
        if self.action not in ("open", "close"):
            raise ValueError(f"breaker action must be open or close, got {self.action!r}")


@dataclass(frozen=True)
class Scenario:
    substation_id: str
    initial_ca: ComponentArrangement
    operating_point: OperatingPoint
    energized_sources: Tuple[str, ...]
    events: Tuple[BreakerEvent, ...] = ()
    noise: NoiseModel = NoiseModel()
    duration: float = 1.0
    rate: float = DEFAULT_RATE
    start_time_us: int = 0

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        object.__setattr__(self, "energized_sources", tuple(self.energized_sources))
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if not self.duration >= 0:
            raise ValueError("duration must be non-negative")
        last = 0.0
        for ev in self.events:
            if not (last <= ev.time <= self.duration):
                raise ValueError(f"event at t={ev.time}s is out of order or outside [0, {self.duration}]")
            last = ev.time

    @property
    def frame_count(self) -> int:
        return int(round(self.duration * self.rate))

    def validate_for(self, spec: SubstationSpec):
        if self.substation_id != spec.substation_id:
            raise ValueError(f"scenario is for substation {self.substation_id}, not {spec.substation_id}")
        if len(self.initial_ca) != spec.n:
            raise ValueError(f"initial CA has {len(self.initial_ca)} bits, substation has {spec.n} breakers")
        for ev in self.events:
            if ev.breaker_id not in spec.breaker_ids:
                raise ValueError(f"event references unknown breaker {ev.breaker_id}")
        unknown = set(self.energized_sources) - set(spec.branch_ids)
        if unknown:
            raise ValueError(f"unknown energized sources {sorted(unknown)}")
        missing = set(self.energized_sources) - set(self.operating_point.voltages)
        if missing:
            raise ValueError(f"no operating-point voltage for sources {sorted(missing)}")


@dataclass(frozen=True)
class LabeledFrame:
    frame: PmuFrame
    truth: FunctionalArrangement
    ca: ComponentArrangement


@dataclass(frozen=True)
class StreamRecord:
    """What a stream file holds per frame.

    ``fa_id`` identifies the observable truth, i.e. what an identifier can
    be expected to return for this frame.
    """

    frame: PmuFrame
    ca_bits: str
    fa_id: str
    kinds: Mapping[str, ChannelKind] = field(default_factory=dict)


def frame_timestamp(scenario: Scenario, k: int) -> int:
    return scenario.start_time_us + int(round(k * 1_000_000 / scenario.rate))


def _live_voltages(spec: SubstationSpec, ca: ComponentArrangement, scenario: Scenario):
    """Source phasor seen by each node and each connected branch (None when dead)."""
    uf = connectivity(spec, ca)
    root_source: Dict[str, Phasor] = {}
    live = set(scenario.energized_sources)
    # ties between sources in one group go to the lowest branch index
    for b in spec.branch_ids:
        if b in live:
            root_source.setdefault(uf.find(b), scenario.operating_point.voltages[b])
    node_v = {n: root_source.get(uf.find(n)) for n in spec.nodes}
    node_roots = {uf.find(n) for n in spec.nodes}
    branch_v = {b: root_source.get(uf.find(b)) if uf.find(b) in node_roots else None for b in spec.branch_ids}
    return node_v, branch_v


def synthesize(spec: SubstationSpec, scenario: Scenario, seed: int = 0) -> Iterator[LabeledFrame]:
    scenario.validate_for(spec)
    rng = np.random.default_rng(seed)
    noise = scenario.noise
    op = scenario.operating_point
    bit_index = {b: i for i, b in enumerate(spec.breaker_ids)}
    events = sorted(((scenario.start_time_us + int(round(ev.time * 1e6)), i, ev)
                     for i, ev in enumerate(scenario.events)), key=lambda t: (t[0], t[1]))
    ca = scenario.initial_ca
    cache: Dict[ComponentArrangement, tuple] = {}

    def floor_phasor(sigma: float) -> Phasor:
        if sigma == 0:
            return Phasor(0.0, 0.0)
        return Phasor(abs(rng.normal(0.0, sigma)), rng.uniform(-math.pi, math.pi))

    def noisy(p: Phasor, sigma: float) -> Phasor:
        return Phasor(abs(p.magnitude + rng.normal(0.0, sigma)) if sigma else p.magnitude,
                      p.angle + rng.normal(0.0, noise.angle_sigma) if noise.angle_sigma else p.angle)

    pending = 0
    for k in range(scenario.frame_count):
        ts = frame_timestamp(scenario, k)
        while pending < len(events) and events[pending][0] <= ts:
            ev = events[pending][2]
            ca = ca.with_status(bit_index[ev.breaker_id], ev.action == "close")
            pending += 1
        if ca not in cache:
            cache[ca] = (ca_to_fa(spec, ca, scenario.energized_sources), *_live_voltages(spec, ca, scenario))
        truth, node_v, branch_v = cache[ca]
        values = {}
        for ch in spec.channels:
            if ch.kind is ChannelKind.BUS_VOLTAGE:
                src = node_v[ch.target]
                p = noisy(src, noise.v_sigma) if src is not None else floor_phasor(noise.v_sigma)
            else:
                src = branch_v[ch.target]
                if src is not None:
                    base = Phasor(op.currents.get(ch.target, 0.0), src.angle - op.current_lag)
                    p = noisy(base, noise.i_sigma)
                else:
                    p = floor_phasor(noise.i_sigma)
            values[ch.channel_id] = quantize(p)
        yield LabeledFrame(PmuFrame(ts, spec.substation_id, values), truth, ca)


def enumerate_scenarios(spec: SubstationSpec, operating_point: Optional[OperatingPoint] = None,
                        energized_sources: Optional[Sequence[str]] = None, noise: NoiseModel = NoiseModel.none(),
                        duration: float = 1.0, rate: float = DEFAULT_RATE) -> List[Scenario]:
    """One steady-state scenario per component arrangement."""
    sources = default_energized_sources(spec) if energized_sources is None else tuple(energized_sources)
    op = default_operating_point(spec, sources) if operating_point is None else operating_point
    return [Scenario(spec.substation_id, ca, op, sources, (), noise, duration, rate)
            for ca in enumerate_cas(spec)]


def to_record(spec: SubstationSpec, lf: LabeledFrame) -> StreamRecord:
    kinds = {c.channel_id: c.kind for c in spec.channels if c.channel_id in lf.frame.values}
    return StreamRecord(lf.frame, str(lf.ca), observable(spec, lf.truth).fa_id, kinds)


def write_stream(records: Iterable[StreamRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STREAM_COLUMNS)
        for rec in records:
            f = rec.frame
            for cid, p in f.values.items():
                try:
                    kind = ChannelKind(rec.kinds[cid]).value
                except KeyError:
                    raise StreamError(f"frame {f.timestamp}: no channel kind recorded for {cid}") from None
                w.writerow((f.timestamp, f.substation_id, cid, kind,
                            f"{p.magnitude:.{MAG_DECIMALS}f}", f"{p.angle_deg:.{ANGLE_DECIMALS}f}",
                            rec.ca_bits, rec.fa_id))


def read_stream(path: Union[str, Path]) -> List[StreamRecord]:
    records: List[StreamRecord] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != STREAM_COLUMNS:
            raise StreamError(f"{path}:1: bad header {header}")
        cur = None
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(STREAM_COLUMNS):
                raise StreamError(f"{path}:{lineno}: expected {len(STREAM_COLUMNS)} fields, got {len(row)}")
            ts_s, sub, cid, kind, mag_s, ang_s, bits, fa_id = row
            try:
                ts = int(ts_s)
                p = Phasor.from_degrees(float(mag_s), float(ang_s))
                kind = ChannelKind(kind)
            except ValueError as exc:
                raise StreamError(f"{path}:{lineno}: malformed record: {exc}") from None
            if cur is not None and ts == cur[0]:
                if (sub, bits, fa_id) != cur[1:4]:
                    raise StreamError(f"{path}:{lineno}: frame {ts} changes substation or labels mid-frame")
                if cid in cur[4]:
                    raise StreamError(f"{path}:{lineno}: duplicate channel {cid} in frame {ts}")
                cur[4][cid] = p
                cur[5][cid] = kind
                continue
            if cur is not None and ts < cur[0]:
                raise StreamError(f"{path}:{lineno}: timestamp {ts} is not after previous frame {cur[0]}")
            if cur is not None:
                records.append(StreamRecord(PmuFrame(cur[0], cur[1], cur[4]), cur[2], cur[3], cur[5]))
            cur = (ts, sub, bits, fa_id, {cid: p}, {cid: kind})
        if cur is not None:
            records.append(StreamRecord(PmuFrame(cur[0], cur[1], cur[4]), cur[2], cur[3], cur[5]))
    return records
