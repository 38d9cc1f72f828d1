"""Typed entity graph for a service-oriented breeding environment.

Holds the five node kinds (service, process, partner, VO, VBE) plus the
social-network overlay of weighted, typed relations. Snapshots are
immutable: every mutation returns a new graph with the revision bumped,
so indicator evaluation is deterministic and snapshots are safe to share
across threads.

Composition queries follow the subject/component pairs of the domain:

    process -> services          partner -> services | processes
    vo      -> processes | partners          vbe -> vos

Single services have no composition level of their own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional, Union

from .errors import (
    DanglingReferenceError,
    DuplicateIdError,
    InvalidCompositionPairError,
    UnknownEntityError,
)


class EntityKind(str, Enum):
    SERVICE = "service"
    PROCESS = "process"
    PARTNER = "partner"
    VO = "vo"
    VBE = "vbe"


class RelationType(str, Enum):
    TRUST = "trust"
    PAST_COLLABORATION = "past-collaboration"
    ACKNOWLEDGMENT = "acknowledgment"
    PROVIDES = "provides"
    PARTICIPATES_IN = "participates-in"


class VOStatus(str, Enum):
    CANDIDATE = "candidate"
    OPERATING = "operating"
    DISSOLVED = "dissolved"


class ComponentLevel(str, Enum):
    SERVICES = "services"
    PROCESSES = "processes"
    PARTNERS = "partners"
    VOS = "vos"


@dataclass(frozen=True)
class EntityId:
    """(kind, local-id) pair, unique across the graph."""

    kind: EntityKind
    local_id: str

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.local_id}"

    @staticmethod
    def parse(text: str) -> "EntityId":
        kind, sep, local = text.partition(":")
        if not sep or not local:
            raise ValueError(f"entity id must look like 'kind:local-id', got {text!r}")
        return EntityId(EntityKind(kind), local)


def service_id(local_id: str) -> EntityId:
    return EntityId(EntityKind.SERVICE, local_id)


def process_id(local_id: str) -> EntityId:
    return EntityId(EntityKind.PROCESS, local_id)


def partner_id(local_id: str) -> EntityId:
    return EntityId(EntityKind.PARTNER, local_id)


def vo_id(local_id: str) -> EntityId:
    return EntityId(EntityKind.VO, local_id)


def vbe_id(local_id: str) -> EntityId:
    return EntityId(EntityKind.VBE, local_id)


def _check_fraction(name: str, value: Optional[float]) -> None:
    if value is not None and not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {value}")


def _check_finite(name: str, value: Optional[float]) -> None:
    if value is not None and not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class ServiceNode:
    """A service offered by one provider partner.

    Information systems are modeled as services carrying an
    ``information-system`` attribute flag, not as a separate node kind.
    """

    id: EntityId
    provider: EntityId
    declared_response_time: Optional[int] = None  # milliseconds
    declared_failure_rate: Optional[float] = None
    unit_cost: Optional[float] = None
    competences_required: frozenset[str] = frozenset()
    attributes: Mapping[str, object] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        _check_fraction("declared-failure-rate", self.declared_failure_rate)
        _check_finite("unit-cost", self.unit_cost)
        if self.declared_response_time is not None and self.declared_response_time < 0:
            raise ValueError("declared-response-time must be non-negative")


@dataclass(frozen=True)
class ProcessNode:
    """An ordered composition of services; the smallest KPI subject."""

    id: EntityId
    services: tuple[EntityId, ...]
    owning_vo: Optional[EntityId] = None

    def __post_init__(self):
        if not self.services:
            raise ValueError("a process needs at least one service")


@dataclass(frozen=True)
class PartnerNode:
    id: EntityId
    competences: frozenset[str] = frozenset()
    contracted_capacity: Optional[float] = None
    maximum_capacity: Optional[float] = None

    def __post_init__(self):
        _check_finite("contracted-capacity", self.contracted_capacity)
        _check_finite("maximum-capacity", self.maximum_capacity)
        for name in ("contracted_capacity", "maximum_capacity"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class VONode:
    id: EntityId
    partners: frozenset[EntityId]
    processes: frozenset[EntityId] = frozenset()
    status: VOStatus = VOStatus.OPERATING

    def __post_init__(self):
        if not self.partners:
            raise ValueError("a VO needs at least one partner")


@dataclass(frozen=True)
class VBENode:
    id: EntityId
    vos: frozenset[EntityId] = frozenset()
    partners: frozenset[EntityId] = frozenset()


Node = Union[ServiceNode, ProcessNode, PartnerNode, VONode, VBENode]

_NODE_KINDS: dict[type, EntityKind] = {
    ServiceNode: EntityKind.SERVICE,
    ProcessNode: EntityKind.PROCESS,
    PartnerNode: EntityKind.PARTNER,
    VONode: EntityKind.VO,
    VBENode: EntityKind.VBE,
}


@dataclass(frozen=True)
class Relation:
    """A directed, typed, weighted edge of the social-network overlay.

    The graph is a multigraph: several relations of the same type may link
    the same pair (e.g. one past-collaboration edge per shared VO);
    aggregation is the indicator engine's job.
    """

    from_: EntityId
    to: EntityId
    relation_type: RelationType
    weight: float = 1.0
    attributes: Mapping[str, object] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        _check_finite("weight", self.weight)
        if self.relation_type is RelationType.TRUST and not (0.0 <= self.weight <= 1.0):
            raise ValueError(f"trust weight must be in [0, 1], got {self.weight}")


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by the validator; data, not an error."""

    entity: str
    invariant: str
    detail: str


def _references(node: Node) -> Iterator[EntityId]:
    """Entity ids a node points at; all must exist before the node is added."""
    if isinstance(node, ServiceNode):
        yield node.provider
    elif isinstance(node, ProcessNode):
        yield from node.services
        if node.owning_vo is not None:
            yield node.owning_vo
    elif isinstance(node, VONode):
        yield from node.partners
        yield from node.processes
    elif isinstance(node, VBENode):
        yield from node.vos
        yield from node.partners


@dataclass(frozen=True)
class SovobeGraph:
    """Immutable graph snapshot identified by ``revision``.

    Mutators (:meth:`add_entity`, :meth:`add_relation`, :meth:`replace_entity`)
    return a fresh snapshot; readers never observe a partial update.
    """

    entities: Mapping[EntityId, Node] = field(default_factory=dict)
    relations: tuple[Relation, ...] = ()
    revision: int = 0

    @staticmethod
    def empty() -> "SovobeGraph":
        return SovobeGraph()

    # -- lookups ---------------------------------------------------------

    def has(self, eid: EntityId) -> bool:
        return eid in self.entities

    def entity(self, eid: EntityId) -> Node:
        try:
            return self.entities[eid]
        except KeyError:
            raise UnknownEntityError(f"no entity {eid}") from None

    def of_kind(self, kind: EntityKind) -> Iterator[Node]:
        for eid, node in self.entities.items():
            if eid.kind is kind:
                yield node

    def services(self) -> Iterator[ServiceNode]:
        return self.of_kind(EntityKind.SERVICE)  # type: ignore[return-value]

    def processes(self) -> Iterator[ProcessNode]:
        return self.of_kind(EntityKind.PROCESS)  # type: ignore[return-value]

    def partners(self) -> Iterator[PartnerNode]:
        return self.of_kind(EntityKind.PARTNER)  # type: ignore[return-value]

    def vos(self) -> Iterator[VONode]:
        return self.of_kind(EntityKind.VO)  # type: ignore[return-value]

    def vbe(self) -> Optional[VBENode]:
        """The VBE node, if exactly one exists (the valid state)."""
        found = list(self.of_kind(EntityKind.VBE))
        return found[0] if len(found) == 1 else None  # type: ignore[return-value]

    # -- mutation (copy-on-write) ----------------------------------------

    def add_entity(self, node: Node) -> "SovobeGraph":
        expected = _NODE_KINDS[type(node)]
        if node.id.kind is not expected:
            raise ValueError(f"{type(node).__name__} id must have kind {expected.value}")
        if node.id in self.entities:
            raise DuplicateIdError(f"entity {node.id} already present")
        for ref in _references(node):
            if ref not in self.entities:
                raise DanglingReferenceError(f"{node.id} references missing entity {ref}")
        entities = dict(self.entities)
        entities[node.id] = node
        return replace(self, entities=entities, revision=self.revision + 1)

    def replace_entity(self, node: Node) -> "SovobeGraph":
        """Swap a node in place (same id, new fields). References must exist."""
        if node.id not in self.entities:
            raise UnknownEntityError(f"no entity {node.id}")
        for ref in _references(node):
            if ref not in self.entities and ref != node.id:
                raise DanglingReferenceError(f"{node.id} references missing entity {ref}")
        entities = dict(self.entities)
        entities[node.id] = node
        return replace(self, entities=entities, revision=self.revision + 1)

    def add_relation(self, rel: Relation) -> "SovobeGraph":
        for end in (rel.from_, rel.to):
            if end not in self.entities:
                raise DanglingReferenceError(f"relation endpoint {end} not in graph")
        return replace(self, relations=self.relations + (rel,), revision=self.revision + 1)

    # -- composition queries ---------------------------------------------

    def components_of(self, subject: EntityId, level: ComponentLevel) -> frozenset[EntityId]:
        """Components of ``subject`` at ``level``.

        Valid pairs: process->services; partner->services or processes
        (a partner "takes part in" a process when it provides at least one
        of its services); vo->processes or partners; vbe->vos. Anything
        else, including any pair with a service subject, is rejected.
        """
        node = self.entity(subject)
        kind = subject.kind
        if kind is EntityKind.PROCESS and level is ComponentLevel.SERVICES:
            assert isinstance(node, ProcessNode)
            return frozenset(node.services)
        if kind is EntityKind.PARTNER and level is ComponentLevel.SERVICES:
            return frozenset(s.id for s in self.services() if s.provider == subject)
        if kind is EntityKind.PARTNER and level is ComponentLevel.PROCESSES:
            provided = {s.id for s in self.services() if s.provider == subject}
            return frozenset(
                p.id for p in self.processes() if provided.intersection(p.services)
            )
        if kind is EntityKind.VO and level is ComponentLevel.PROCESSES:
            assert isinstance(node, VONode)
            return frozenset(node.processes)
        if kind is EntityKind.VO and level is ComponentLevel.PARTNERS:
            assert isinstance(node, VONode)
            return frozenset(node.partners)
        if kind is EntityKind.VBE and level is ComponentLevel.VOS:
            assert isinstance(node, VBENode)
            return frozenset(node.vos)
        raise InvalidCompositionPairError(
            f"{kind.value} has no components at level {level.value}"
        )

    def relation_weights(
        self, to: EntityId, relation_type: RelationType
    ) -> list[float]:
        """Weights of all inbound relations of one type, order unspecified."""
        if to not in self.entities:
            raise UnknownEntityError(f"no entity {to}")
        return [r.weight for r in self.relations if r.to == to and r.relation_type is relation_type]

    def inbound_relations(
        self, to: EntityId, relation_type: Optional[RelationType] = None
    ) -> list[Relation]:
        if to not in self.entities:
            raise UnknownEntityError(f"no entity {to}")
        return [
            r
            for r in self.relations
            if r.to == to and (relation_type is None or r.relation_type is relation_type)
        ]

    # -- validation --------------------------------------------------------

    def validate(self) -> list[Violation]:
        """Check every type invariant; an empty list means a consistent graph."""
        out: list[Violation] = []

        def missing(owner: EntityId, ref: EntityId, what: str) -> None:
            out.append(Violation(str(owner), "referential-integrity", f"{what} {ref} not in graph"))

        for eid, node in self.entities.items():
            for ref in _references(node):
                if ref not in self.entities:
                    missing(eid, ref, "referenced entity")

        for rel in self.relations:
            for end in (rel.from_, rel.to):
                if end not in self.entities:
                    out.append(
                        Violation(
                            f"{rel.from_}->{rel.to}",
                            "referential-integrity",
                            f"relation endpoint {end} not in graph",
                        )
                    )

        for partner in self.partners():
            if (
                partner.contracted_capacity is not None
                and partner.maximum_capacity is not None
                and partner.maximum_capacity < partner.contracted_capacity
            ):
                out.append(
                    Violation(
                        str(partner.id),
                        "capacity-order",
                        "maximum-capacity below contracted-capacity",
                    )
                )

        # A VO must be able to staff its processes from its own partner set.
        for vo in self.vos():
            for pid in vo.processes:
                if pid not in self.entities:
                    continue
                proc = self.entities[pid]
                assert isinstance(proc, ProcessNode)
                for sid in proc.services:
                    if sid not in self.entities:
                        continue
                    svc = self.entities[sid]
                    assert isinstance(svc, ServiceNode)
                    if svc.provider not in vo.partners:
                        out.append(
                            Violation(
                                str(vo.id),
                                "vo-provider-membership",
                                f"{pid.local_id} service {sid.local_id} provided by "
                                f"non-member {svc.provider.local_id}",
                            )
                        )

        vbes = list(self.of_kind(EntityKind.VBE))
        if len(vbes) != 1:
            out.append(
                Violation("graph", "single-vbe", f"exactly one VBE required, found {len(vbes)}")
            )
        for vbe in vbes:
            assert isinstance(vbe, VBENode)
            for vid in vbe.vos:
                if vid not in self.entities:
                    continue
                vo = self.entities[vid]
                assert isinstance(vo, VONode)
                extra = vo.partners - vbe.partners
                if extra:
                    out.append(
                        Violation(
                            str(vbe.id),
                            "vbe-partner-closure",
                            f"VO {vid.local_id} partners outside VBE: "
                            + ", ".join(sorted(p.local_id for p in extra)),
                        )
                    )
        return out


def build_graph(
    nodes: Iterable[Node], relations: Iterable[Relation] = ()
) -> SovobeGraph:
    """Assemble a snapshot from nodes (in dependency order) and relations."""
    g = SovobeGraph.empty()
    for node in nodes:
        g = g.add_entity(node)
    for rel in relations:
        g = g.add_relation(rel)
    return g
