"""Rule-based (logical decision making) identifiers.

Each identifier reduces a frame to small binary input vectors, decides each
vector independently and assembles the decisions into an FA.  The decision
step is pluggable so the neural identifiers reuse exactly the same pipeline.

Bit orders follow the training tables: RBA pair (C, A, B), SBA branch (B, A),
MTBA (C, A).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

from .phasor import DEFAULT_THRESHOLDS, Phasor, PmuFrame, Thresholds, current_present, is_energized, phasor_equal
from .topology import ArrangementKind, FunctionalArrangement, SubstationSpec, UnionFind

Bits = Tuple[int, ...]
Decide = Callable[[Sequence[Bits]], Sequence[int]]


class IdentificationError(ValueError):
    pass


@dataclass(frozen=True)
class RbaPairInputs:
    A: int  # node X energized
    B: int  # node Y energized
    C: int  # V_X equals V_Y

    @property
    def infeasible(self) -> bool:
        return self.C == 1 and self.A != self.B

    def bits(self) -> Bits:
        return (self.C, self.A, self.B)


@dataclass(frozen=True)
class SbaBranchInputs:
    A: int  # bus energized
    B: int  # branch current present

    @property
    def infeasible(self) -> bool:
        return self.B == 1 and self.A == 0

    def bits(self) -> Bits:
        return (self.B, self.A)


@dataclass(frozen=True)
class MtbaInputs:
    C: int  # V_main equals V_transfer
    A: int  # main bus energized
    T: int  # transfer bus energized (service indicator, not a decision input)

    @property
    def infeasible(self) -> bool:
        return self.A == 1 and self.T == 0

    def bits(self) -> Bits:
        return (self.C, self.A)


def preprocess_rba_pair(vx: Phasor, vy: Phasor, th: Thresholds = DEFAULT_THRESHOLDS) -> RbaPairInputs:
    return RbaPairInputs(int(is_energized(vx, th)), int(is_energized(vy, th)), int(phasor_equal(vx, vy, th)))


def preprocess_sba_branch(v_bus: Phasor, i_branch: Phasor, th: Thresholds = DEFAULT_THRESHOLDS) -> SbaBranchInputs:
    return SbaBranchInputs(int(is_energized(v_bus, th)), int(current_present(i_branch, th)))


def preprocess_mtba(v_main: Phasor, v_transfer: Phasor, th: Thresholds = DEFAULT_THRESHOLDS) -> MtbaInputs:
    return MtbaInputs(int(phasor_equal(v_main, v_transfer, th)), int(is_energized(v_main, th)),
                      int(is_energized(v_transfer, th)))


# Contradictory evidence never asserts a connection, so every decision is an AND.
def ldm_rba_pair(inp: RbaPairInputs) -> int:
    return int(inp.C and inp.A and inp.B)


def ldm_sba_branch(inp: SbaBranchInputs) -> int:
    return int(inp.B and inp.A)


def ldm_mtba(inp: MtbaInputs) -> int:
    return int(inp.C and inp.A)


def ldm_decide(bits: Sequence[Bits]) -> List[int]:
    return [int(all(b)) for b in bits]


def _voltage(spec: SubstationSpec, frame: PmuFrame, node: str) -> Phasor:
    ch = spec.voltage_channel(node)
    if ch is None:
        raise IdentificationError(f"substation {spec.substation_id} has no voltage channel for node {node}")
    try:
        return frame.values[ch]
    except KeyError:
        raise IdentificationError(f"frame {frame.timestamp} is missing channel {ch}") from None


def _current(spec: SubstationSpec, frame: PmuFrame, branch: str) -> Phasor:
    ch = spec.current_channel(branch)
    if ch is None:
        raise IdentificationError(f"substation {spec.substation_id} has no current channel for branch {branch}")
    try:
        return frame.values[ch]
    except KeyError:
        raise IdentificationError(f"frame {frame.timestamp} is missing channel {ch}") from None


def _expect(spec: SubstationSpec, kind: ArrangementKind):
    if spec.kind is not kind:
        raise IdentificationError(f"substation {spec.substation_id} is {spec.kind.value}, not {kind.value}")


def identify_rba(spec: SubstationSpec, frame: PmuFrame, th: Thresholds, decide: Decide,
                 flags: Optional[list] = None) -> FunctionalArrangement:
    _expect(spec, ArrangementKind.RBA)
    volts = {n: _voltage(spec, frame, n) for n in spec.nodes}
    # every ring breaker separates two consecutive bus sections
    pairs = [(br.a, br.b) for br in spec.breakers]
    inputs = [preprocess_rba_pair(volts[x], volts[y], th) for x, y in pairs]
    decisions = decide([inp.bits() for inp in inputs])
    uf = UnionFind(spec.nodes)
    for (x, y), inp, d in zip(pairs, inputs, decisions):
        if flags is not None and inp.infeasible:
            flags.append(f"infeasible RBA pair {x}-{y}: {inp}")
        if d:
            uf.union(x, y)
    energized = [n for n in spec.nodes if is_energized(volts[n], th)]
    connected = {b.branch_id: b.hardwired or b.node in energized for b in spec.branches}
    return FunctionalArrangement.build(spec, uf.groups(), connected, energized)


def identify_mtba(spec: SubstationSpec, frame: PmuFrame, th: Thresholds, decide: Decide,
                  flags: Optional[list] = None) -> FunctionalArrangement:
    _expect(spec, ArrangementKind.MTBA)
    main, transfer = spec.nodes
    inp = preprocess_mtba(_voltage(spec, frame, main), _voltage(spec, frame, transfer), th)
    if flags is not None and inp.infeasible:
        flags.append(f"infeasible MTBA inputs: {inp}")
    (tied,) = decide([inp.bits()])
    groups = [(main, transfer)] if tied else [(main,), (transfer,)]
    energized = [n for n, e in ((main, inp.A), (transfer, inp.T)) if e]
    connected = {b.branch_id: b.hardwired or b.node in energized for b in spec.branches}
    return FunctionalArrangement.build(spec, groups, connected, energized)


def identify_sba(spec: SubstationSpec, frame: PmuFrame, th: Thresholds, decide: Decide,
                 flags: Optional[list] = None) -> FunctionalArrangement:
    _expect(spec, ArrangementKind.SBA)
    (bus,) = spec.nodes
    v_bus = _voltage(spec, frame, bus)
    inputs = [preprocess_sba_branch(v_bus, _current(spec, frame, b), th) for b in spec.branch_ids]
    decisions = decide([inp.bits() for inp in inputs])
    if flags is not None:
        flags.extend(f"infeasible SBA branch {b}: {inp}" for b, inp in zip(spec.branch_ids, inputs) if inp.infeasible)
    energized = [bus] if is_energized(v_bus, th) else []
    connected = dict(zip(spec.branch_ids, decisions))
    return FunctionalArrangement.build(spec, [spec.nodes], connected, energized)


PIPELINES = {
    ArrangementKind.MTBA: identify_mtba,
    ArrangementKind.RBA: identify_rba,
    ArrangementKind.SBA: identify_sba,
}


def ldm_identify_rba(spec, frame, th=DEFAULT_THRESHOLDS, flags=None) -> FunctionalArrangement:
    return identify_rba(spec, frame, th, ldm_decide, flags)


def ldm_identify_mtba(spec, frame, th=DEFAULT_THRESHOLDS, flags=None) -> FunctionalArrangement:
    return identify_mtba(spec, frame, th, ldm_decide, flags)


def ldm_identify_sba(spec, frame, th=DEFAULT_THRESHOLDS, flags=None) -> FunctionalArrangement:
    return identify_sba(spec, frame, th, ldm_decide, flags)


def ldm_identify(spec: SubstationSpec, frame: PmuFrame, th: Thresholds = DEFAULT_THRESHOLDS,
                 flags: Optional[list] = None) -> FunctionalArrangement:
    return PIPELINES[spec.kind](spec, frame, th, ldm_decide, flags)
