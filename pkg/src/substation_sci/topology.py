"""Substation topology, component arrangements and the CA -> FA oracle.

A component arrangement (CA) is the breaker-status vector, i.e. the
node-breaker view of the substation.  A functional arrangement (FA) is the
electrical connectivity it produces: which bus sections are merged, which
branches reach a bus section, and which merged groups are live.  Distinct CAs
frequently collapse onto one FA, which is what makes the FA the thing worth
identifying from measurements.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Tuple

from .phasor import ChannelKind, MeasurementChannel

MAX_BREAKERS = 20


class ArrangementKind(str, Enum):
    MTBA = "MTBA"
    RBA = "RBA"
    SBA = "SBA"


class BranchRole(str, Enum):
    SOURCE = "source"
    LOAD = "load"
    TIE = "tie"


class SpecError(ValueError):
    pass


class UnionFind:
    """Disjoint sets over hashable keys, with path compression and union by rank."""

    def __init__(self, elements: Iterable[Hashable] = ()):
        self.parent: Dict[Hashable, Hashable] = {}
        self.rank: Dict[Hashable, int] = {}
        for e in elements:
            self.add(e)

    def add(self, e):
        if e not in self.parent:
            self.parent[e] = e
            self.rank[e] = 0

    def find(self, e):
        root = e
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[e] != root:
            self.parent[e], e = root, self.parent[e]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True

    def connected(self, a, b) -> bool:
        return self.find(a) == self.find(b)

    def groups(self) -> List[List[Hashable]]:
        out: Dict[Hashable, List[Hashable]] = {}
        for e in self.parent:
            out.setdefault(self.find(e), []).append(e)
        return list(out.values())


@dataclass(frozen=True)
class Branch:
    """A line, transformer or feeder terminating in the substation.

    ``node`` is the bus section the branch is associated with.  When
    ``hardwired`` is true the terminal is permanently tied to that node
    (direct connection or an isolator path); otherwise it only reaches a
    node through breakers.
    """

    branch_id: str
    node: str
    role: BranchRole = BranchRole.LOAD
    hardwired: bool = False

    def __post_init__(self):
        object.__setattr__(self, "role", BranchRole(self.role))


@dataclass(frozen=True)
class Breaker:
    breaker_id: str
    a: str
    b: str


@dataclass(frozen=True)
class SubstationSpec:
    substation_id: str
    kind: ArrangementKind
    nodes: Tuple[str, ...]
    branches: Tuple[Branch, ...]
    breakers: Tuple[Breaker, ...]
    channels: Tuple[MeasurementChannel, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", ArrangementKind(self.kind))
        for name in ("nodes", "branches", "breakers", "channels"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    @property
    def n(self) -> int:
        return len(self.breakers)

    def node_index(self, node: str) -> int:
        return self.nodes.index(node)

    def branch(self, branch_id: str) -> Branch:
        for b in self.branches:
            if b.branch_id == branch_id:
                return b
        raise KeyError(branch_id)

    @property
    def branch_ids(self) -> Tuple[str, ...]:
        return tuple(b.branch_id for b in self.branches)

    @property
    def breaker_ids(self) -> Tuple[str, ...]:
        return tuple(b.breaker_id for b in self.breakers)

    def channel(self, channel_id: str) -> MeasurementChannel:
        for c in self.channels:
            if c.channel_id == channel_id:
                return c
        raise KeyError(channel_id)

    def voltage_channel(self, node: str) -> Optional[str]:
        for c in self.channels:
            if c.kind is ChannelKind.BUS_VOLTAGE and c.target == node:
                return c.channel_id
        return None

    def current_channel(self, branch_id: str) -> Optional[str]:
        for c in self.channels:
            if c.kind is ChannelKind.BRANCH_CURRENT and c.target == branch_id:
                return c.channel_id
        return None

    def validate(self):
        nodes, branch_ids = set(self.nodes), set(self.branch_ids)
        if len(nodes) != len(self.nodes):
            raise SpecError("duplicate node ids")
        if len(branch_ids) != len(self.branches):
            raise SpecError("duplicate branch ids")
        if nodes & branch_ids:
            raise SpecError(f"node and branch ids overlap: {sorted(nodes & branch_ids)}")
        if len(set(self.breaker_ids)) != self.n:
            raise SpecError("duplicate breaker ids")
        if self.n < 1:
            raise SpecError("a substation needs at least one breaker")
        for b in self.branches:
            if b.node not in nodes:
                raise SpecError(f"branch {b.branch_id} attached to unknown node {b.node}")
        terminals = nodes | branch_ids
        for br in self.breakers:
            for end in (br.a, br.b):
                if end not in terminals:
                    raise SpecError(f"breaker {br.breaker_id} endpoint {end} does not exist")
            if br.a == br.b:
                raise SpecError(f"breaker {br.breaker_id} connects {br.a} to itself")
        seen = set()
        for c in self.channels:
            if c.channel_id in seen:
                raise SpecError(f"duplicate channel id {c.channel_id}")
            seen.add(c.channel_id)
            pool = nodes if c.kind is ChannelKind.BUS_VOLTAGE else branch_ids
            if c.target not in pool:
                raise SpecError(f"channel {c.channel_id} targets unknown {c.kind.value} {c.target}")
        getattr(self, f"_validate_{self.kind.value.lower()}")()

    def _validate_mtba(self):
        if len(self.nodes) != 2:
            raise SpecError("MTBA needs exactly two nodes (main, transfer)")
        main, transfer = self.nodes
        if not any({br.a, br.b} == {main, transfer} for br in self.breakers):
            raise SpecError("MTBA needs a bus-tie breaker between main and transfer")
        for b in self.branches:
            if not b.hardwired:
                raise SpecError(f"MTBA branch {b.branch_id} must sit on a bus through its isolator path")
            reach = {b.node}
            reach |= {br.b if br.a == b.branch_id else br.a
                      for br in self.breakers if b.branch_id in (br.a, br.b)}
            if reach != {main, transfer}:
                raise SpecError(f"MTBA branch {b.branch_id} must reach both buses")

    def _validate_rba(self):
        k = len(self.nodes)
        if k < 3 or self.n != k:
            raise SpecError("RBA needs n >= 3 nodes and exactly n breakers")
        if not all(b.hardwired for b in self.branches):
            raise SpecError("RBA branches connect directly to their bus sections")
        uf = UnionFind(self.nodes)
        degree = dict.fromkeys(self.nodes, 0)
        for br in self.breakers:
            if br.a not in degree or br.b not in degree:
                raise SpecError("RBA breakers must join two bus sections")
            degree[br.a] += 1
            degree[br.b] += 1
            uf.union(br.a, br.b)
        if any(d != 2 for d in degree.values()) or len(uf.groups()) != 1:
            raise SpecError("RBA breakers must form a single cycle")

    def _validate_sba(self):
        if len(self.nodes) != 1:
            raise SpecError("SBA has exactly one bus")
        (bus,) = self.nodes
        if self.n != len(self.branches):
            raise SpecError("SBA needs one breaker per branch")
        ends = set()
        for br in self.breakers:
            pair = {br.a, br.b}
            if bus not in pair:
                raise SpecError(f"SBA breaker {br.breaker_id} must touch the bus")
            ends |= pair - {bus}
        if ends != set(self.branch_ids) or any(b.hardwired for b in self.branches):
            raise SpecError("every SBA branch reaches the bus through its own breaker only")


@dataclass(frozen=True)
class ComponentArrangement:
    """Breaker statuses in spec order, 1 = closed."""

    bits: Tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"breaker status bits must be 0/1: {self.bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "ComponentArrangement":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def all_closed(cls, n: int) -> "ComponentArrangement":
        return cls((1,) * n)

    def __str__(self):
        return "".join(map(str, self.bits))

    def __len__(self):
        return len(self.bits)

    def with_status(self, index: int, closed: bool) -> "ComponentArrangement":
        bits = list(self.bits)
        bits[index] = int(closed)
        return ComponentArrangement(tuple(bits))


@dataclass(frozen=True)
class FunctionalArrangement:
    """Canonical connectivity result.

    Groups list node ids in spec order and are themselves ordered by their
    first member, so two FAs are equal exactly when they describe the same
    connectivity.  ``group_energized`` is aligned with ``node_partition``.
    """

    node_partition: Tuple[Tuple[str, ...], ...]
    branch_connected: Tuple[Tuple[str, bool], ...]
    group_energized: Tuple[bool, ...]

    @classmethod
    def build(cls, spec: SubstationSpec, groups: Iterable[Iterable[str]],
              connected: Mapping[str, bool], energized_nodes: Iterable[str]) -> "FunctionalArrangement":
        idx = {node: i for i, node in enumerate(spec.nodes)}
        parts = sorted((tuple(sorted(g, key=idx.__getitem__)) for g in groups), key=lambda g: idx[g[0]])
        covered = [n for g in parts for n in g]
        if sorted(covered, key=idx.__getitem__) != list(spec.nodes):
            raise ValueError("node groups must be disjoint and cover every node")
        live = set(energized_nodes)
        return cls(
            node_partition=tuple(parts),
            branch_connected=tuple((b, bool(connected[b])) for b in spec.branch_ids),
            group_energized=tuple(any(n in live for n in g) for g in parts),
        )

    @property
    def connected(self) -> Dict[str, bool]:
        return dict(self.branch_connected)

    @property
    def energized_nodes(self) -> Tuple[str, ...]:
        return tuple(n for g, e in zip(self.node_partition, self.group_energized) if e for n in g)

    @property
    def in_service(self) -> bool:
        return any(self.group_energized)

    def group_of(self, node: str) -> int:
        for i, g in enumerate(self.node_partition):
            if node in g:
                return i
        raise KeyError(node)

    def key(self) -> str:
        parts = "|".join(",".join(g) for g in self.node_partition)
        conn = ",".join(f"{b}:{int(c)}" for b, c in self.branch_connected)
        live = "".join(str(int(e)) for e in self.group_energized)
        return f"P={parts};C={conn};E={live}"

    @property
    def fa_id(self) -> str:
        return hashlib.sha1(self.key().encode()).hexdigest()[:12]


def _check_ca(spec: SubstationSpec, ca: ComponentArrangement):
    if len(ca) != spec.n:
        raise ValueError(f"CA has {len(ca)} bits but substation {spec.substation_id} has {spec.n} breakers")


def connectivity(spec: SubstationSpec, ca: ComponentArrangement,
                 order: Optional[Sequence[int]] = None) -> UnionFind:
    """Union-find over node ids and branch terminals for one CA.

    ``order`` permutes the breaker processing order; the resulting partition
    does not depend on it.
    """
    _check_ca(spec, ca)
    uf = UnionFind(spec.nodes)
    for b in spec.branches:
        uf.add(b.branch_id)
        if b.hardwired:
            uf.union(b.branch_id, b.node)
    for i in (range(spec.n) if order is None else order):
        if ca.bits[i]:
            br = spec.breakers[i]
            uf.union(br.a, br.b)
    return uf


def ca_to_fa(spec: SubstationSpec, ca: ComponentArrangement, energized_sources: Iterable[str] = (),
             order: Optional[Sequence[int]] = None) -> FunctionalArrangement:
    uf = connectivity(spec, ca, order)
    node_set = set(spec.nodes)
    groups: Dict[str, List[str]] = {}
    for node in spec.nodes:
        groups.setdefault(uf.find(node), []).append(node)
    connected = {b: uf.find(b) in groups for b in spec.branch_ids}
    unknown = set(energized_sources) - set(spec.branch_ids)
    if unknown:
        raise ValueError(f"unknown energized sources: {sorted(unknown)}")
    live_roots = {uf.find(b) for b in energized_sources if connected[b]}
    energized = [n for n in node_set if uf.find(n) in live_roots]
    return FunctionalArrangement.build(spec, groups.values(), connected, energized)


def observable(spec: SubstationSpec, fa: FunctionalArrangement) -> FunctionalArrangement:
    """Project an FA onto what bus voltages and branch currents can resolve.

    Inside a dead group nothing distinguishes a closed breaker from an open
    one, so dead groups split into singletons and breaker-connected branches
    on a dead node read as disconnected.  Hard-wired branches keep their
    status since no breaker decides it.
    """
    live = set(fa.energized_nodes)
    groups = [g for g, e in zip(fa.node_partition, fa.group_energized) if e]
    groups += [(n,) for n in spec.nodes if n not in live]
    connected = {b.branch_id: fa.connected[b.branch_id] and (b.hardwired or b.node in live)
                 for b in spec.branches}
    return FunctionalArrangement.build(spec, groups, connected, live)


def enumerate_cas(spec: SubstationSpec) -> List[ComponentArrangement]:
    n = spec.n
    if n > MAX_BREAKERS:
        raise ValueError(f"refusing to enumerate 2^{n} arrangements (limit n <= {MAX_BREAKERS})")
    return [ComponentArrangement(tuple((k >> (n - 1 - i)) & 1 for i in range(n))) for k in range(2 ** n)]


def enumerate_fas(spec: SubstationSpec, energized_sources: Iterable[str] = ()
                  ) -> List[Tuple[FunctionalArrangement, List[ComponentArrangement]]]:
    energized_sources = tuple(energized_sources)
    found: Dict[FunctionalArrangement, List[ComponentArrangement]] = {}
    for ca in enumerate_cas(spec):
        found.setdefault(ca_to_fa(spec, ca, energized_sources), []).append(ca)
    return list(found.items())


def fa_category(spec: SubstationSpec, fa: FunctionalArrangement) -> str:
    if tuple(b for b, _ in fa.branch_connected) != spec.branch_ids:
        raise ValueError("FA branches do not match the substation")
    if sorted(n for g in fa.node_partition for n in g) != sorted(spec.nodes):
        raise ValueError("FA nodes do not match the substation")
    k = len(fa.node_partition)
    if spec.kind is ArrangementKind.MTBA:
        if not fa.in_service:
            return "out-of-service"
        return "buses-tied" if k == 1 else "main-isolated"
    if spec.kind is ArrangementKind.SBA:
        out = sum(not c for _, c in fa.branch_connected)
        return f"{out}-branches-out"
    if k == 1:
        return "all-connected"
    if k == len(spec.nodes):
        return "isolated"
    singles = sum(len(g) == 1 for g in fa.node_partition)
    if singles == k - 1:
        return {1: "one-branch-out", 2: "two-adjacent-out"}.get(singles, f"{singles}-adjacent-out")
    return "system-separation"


def default_energized_sources(spec: SubstationSpec) -> Tuple[str, ...]:
    return tuple(b.branch_id for b in spec.branches if b.role is BranchRole.SOURCE)
