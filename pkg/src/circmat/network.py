"""Compartmental digraphs for material networks.

A network is a set of compartments: node-compartments store, transform or
use a target material; arc-compartments move it between nodes. Each
compartment carries an id ``k`` and a (source, sink) pair ``(i, j)``; nodes
satisfy ``i == j == k`` and arcs connect two distinct nodes in the direction
of material flow.
"""

from __future__ import annotations

from dataclasses import dataclass

NODE = "node"
ARC = "arc"

# Roles with engine semantics; any other non-empty string is a free label.
RESERVOIR = "reservoir"
DISASSEMBLER = "disassembler"
INCINERATOR = "incinerator"
TRANSPORT = "transport"
USE = "use"


class NetworkError(ValueError):
    """Base class for network construction failures."""


class DuplicateId(NetworkError):
    pass


class NodeIndexMismatch(NetworkError):
    pass


class ArcSelfLoop(NetworkError):
    pass


class DanglingArc(NetworkError):
    pass


class CountMismatch(NetworkError):
    pass


@dataclass(frozen=True, order=True)
class Compartment:
    """One compartment: a node (i == j == k) or an arc (i != j)."""

    id: int
    source: int
    sink: int
    kind: str
    role: str = "other"

    @property
    def is_node(self) -> bool:
        return self.kind == NODE

    @property
    def is_arc(self) -> bool:
        return self.kind == ARC


@dataclass(frozen=True)
class MaterialNetwork:
    """Validated compartment set; equal networks have equal compartment sets."""

    compartments: tuple[Compartment, ...]

    @property
    def nodes(self) -> tuple[Compartment, ...]:
        return tuple(c for c in self.compartments if c.is_node)

    @property
    def arcs(self) -> tuple[Compartment, ...]:
        return tuple(c for c in self.compartments if c.is_arc)

    @property
    def n_v(self) -> int:
        return len(self.nodes)

    @property
    def n_a(self) -> int:
        return len(self.arcs)

    @property
    def n_c(self) -> int:
        return len(self.compartments)


def collect_network_issues(compartments) -> list[tuple[type, str]]:
    """Validate a compartment collection, returning every violation found.

    Each issue is an (exception class, message) pair; an empty list means the
    collection forms a valid network.
    """
    comps = list(compartments)
    issues: list[tuple[type, str]] = []
    if not comps:
        issues.append((CountMismatch, "network must contain at least one compartment"))
        return issues

    seen: set[int] = set()
    for c in comps:
        if c.id in seen:
            issues.append((DuplicateId, f"compartment id {c.id} appears more than once"))
        seen.add(c.id)

    for c in comps:
        if c.kind not in (NODE, ARC):
            issues.append((CountMismatch, f"compartment {c.id} has unknown kind {c.kind!r}"))
        elif c.is_node and not (c.source == c.sink == c.id):
            issues.append(
                (
                    NodeIndexMismatch,
                    f"node {c.id} must have source and sink equal to its id, got ({c.source}, {c.sink})",
                )
            )
        elif c.is_arc and c.source == c.sink:
            issues.append((ArcSelfLoop, f"arc {c.id} loops on node {c.source}"))

    node_ids = {c.id for c in comps if c.is_node}
    for c in comps:
        if c.is_arc and c.source != c.sink:
            for endpoint in (c.source, c.sink):
                if endpoint not in node_ids:
                    issues.append(
                        (DanglingArc, f"arc {c.id} references missing node {endpoint}")
                    )

    # Ids must be exactly 1..n_c so silent omissions in scenario files fail loudly.
    expected = set(range(1, len(comps) + 1))
    if seen != expected:
        issues.append(
            (
                CountMismatch,
                f"ids must form 1..{len(comps)}, got {sorted(seen)}",
            )
        )
    return issues


def build_network(compartments) -> MaterialNetwork:
    """Build a validated network from a compartment collection.

    Raises the typed error of the first violation; input ordering does not
    affect the result (compartments are stored sorted by id).
    """
    issues = collect_network_issues(compartments)
    if issues:
        exc, message = issues[0]
        raise exc(message)
    ordered = tuple(sorted(compartments, key=lambda c: c.id))
    return MaterialNetwork(compartments=ordered)


def compartmental_digraph(net: MaterialNetwork) -> dict[int, list[tuple[int, int]]]:
    """Adjacency listing: node id -> [(arc id, sink node id), ...].

    Every node appears as a key (sinks map to an empty list) and every arc
    appears exactly once, oriented with the material flow.
    """
    adjacency: dict[int, list[tuple[int, int]]] = {c.id: [] for c in net.nodes}
    for arc in net.arcs:
        adjacency[arc.source].append((arc.id, arc.sink))
    for outgoing in adjacency.values():
        outgoing.sort()
    return adjacency


def validate_solids_topology(net: MaterialNetwork) -> tuple[bool, list[str]]:
    """Check role-level isomorphism with the solid-material reference chain.

    The reference layout is reservoir -> disassembler via one arc, then
    disassembler -> incinerator via exactly two parallel arcs (the
    not-disassembled and the reused batch routes). Matching is by node roles,
    not ids, so scenarios may renumber freely.
    """
    reasons: list[str] = []
    by_role: dict[str, list[Compartment]] = {}
    for node in net.nodes:
        by_role.setdefault(node.role, []).append(node)

    for role in (RESERVOIR, DISASSEMBLER, INCINERATOR):
        if len(by_role.get(role, [])) != 1:
            reasons.append(f"expected exactly 1 {role} node, found {len(by_role.get(role, []))}")
    if len(net.nodes) != 3:
        reasons.append(f"expected 3 nodes, found {len(net.nodes)}")
    if reasons:
        return False, reasons

    reservoir = by_role[RESERVOIR][0]
    disassembler = by_role[DISASSEMBLER][0]
    incinerator = by_role[INCINERATOR][0]

    supply = [a for a in net.arcs if a.source == reservoir.id and a.sink == disassembler.id]
    outputs = [a for a in net.arcs if a.source == disassembler.id and a.sink == incinerator.id]
    if len(supply) != 1:
        reasons.append(f"expected 1 reservoir->disassembler arc, found {len(supply)}")
    if len(outputs) != 2:
        reasons.append(f"expected 2 parallel disassembler->incinerator arcs, found {len(outputs)}")
    stray = [a for a in net.arcs if a not in supply and a not in outputs]
    if stray:
        reasons.append(f"unexpected arcs {sorted(a.id for a in stray)}")
    return not reasons, reasons
