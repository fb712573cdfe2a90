"""The three test substations: MTBA 5L (3 breakers), RBA 5 (4 nodes), SBA 6 (6 branches)."""

from __future__ import annotations

from .phasor import ChannelKind, MeasurementChannel
from .topology import ArrangementKind, Branch, BranchRole, Breaker, SubstationSpec

V, I = ChannelKind.BUS_VOLTAGE, ChannelKind.BRANCH_CURRENT


def mtba_5l() -> SubstationSpec:
    # Branches sit on the transfer bus through their bypass isolators and reach
    # the main bus through their own breakers; CBT is the bus tie.
    return SubstationSpec(
        substation_id="5L",
        kind=ArrangementKind.MTBA,
        nodes=("main", "transfer"),
        branches=(
            Branch("L1", "transfer", BranchRole.SOURCE, hardwired=True),
            Branch("L2", "transfer", BranchRole.LOAD, hardwired=True),
        ),
        breakers=(
            Breaker("CB1", "L1", "main"),
            Breaker("CB2", "L2", "main"),
            Breaker("CBT", "main", "transfer"),
        ),
        channels=(
            MeasurementChannel("V_main", V, "main"),
            MeasurementChannel("V_transfer", V, "transfer"),
        ),
    )


def rba_5() -> SubstationSpec:
    # breaker a joins nodes 1-2, b 2-3, c 3-4, d 4-1
    nodes = ("1", "2", "3", "4")
    roles = (BranchRole.SOURCE, BranchRole.LOAD, BranchRole.SOURCE, BranchRole.LOAD)
    return SubstationSpec(
        substation_id="5",
        kind=ArrangementKind.RBA,
        nodes=nodes,
        branches=tuple(Branch(f"B{n}", n, r, hardwired=True) for n, r in zip(nodes, roles)),
        breakers=tuple(Breaker(name, nodes[i], nodes[(i + 1) % 4]) for i, name in enumerate("abcd")),
        channels=tuple(MeasurementChannel(f"V{n}", V, n) for n in nodes),
    )


def sba_6() -> SubstationSpec:
    # every line is fed from its remote end, so any closed breaker livens the bus
    branches = tuple(Branch(f"L{k}", "bus", BranchRole.SOURCE) for k in range(1, 7))
    return SubstationSpec(
        substation_id="6",
        kind=ArrangementKind.SBA,
        nodes=("bus",),
        branches=branches,
        breakers=tuple(Breaker(f"CB{k}", f"L{k}", "bus") for k in range(1, 7)),
        channels=(MeasurementChannel("V_bus", V, "bus"),)
        + tuple(MeasurementChannel(f"I_L{k}", I, f"L{k}") for k in range(1, 7)),
    )


TEST_CASES = {
    ArrangementKind.MTBA: mtba_5l,
    ArrangementKind.RBA: rba_5,
    ArrangementKind.SBA: sba_6,
}

# Published reference counts and timings; the RBA FA count is reported both ways.
REFERENCE_COUNTS = {
    ArrangementKind.MTBA: {"cas": 8, "fas": 2},
    ArrangementKind.RBA: {"cas": 16, "fas_formula": 11, "fas_categories": 12},
    ArrangementKind.SBA: {"cas": 64, "fas": 64},
}
REFERENCE_TIME_RATIO = {
    ArrangementKind.MTBA: 1.04,
    ArrangementKind.RBA: 1.50,
    ArrangementKind.SBA: 1.54,
}
REFERENCE_LATENCY_US = {
    ArrangementKind.MTBA: (27.98, 26.73),
    ArrangementKind.RBA: (77.35, 51.56),
    ArrangementKind.SBA: (130.45, 84.67),
}
