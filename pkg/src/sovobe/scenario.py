"""Synthetic workspace generator for desk-scale exercising of the engine.

Generation is driven entirely by ``random.Random(seed)`` and fixed base
timestamps, so the same spec yields a byte-identical workspace: the same
graph, catalog, stores, and event log every run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import InvalidSpecError
from .graph import (
    PartnerNode,
    ProcessNode,
    Relation,
    RelationType,
    ServiceNode,
    SovobeGraph,
    VBENode,
    VONode,
    partner_id,
    process_id,
    service_id,
    vbe_id,
    vo_id,
)
from .indicators import builtin_kpi_definitions
from .sources import CollaborationEvent, HistoryRecord, Outcome, SlaRecord
from .workspace import Workspace

BASE_TIME = 1_735_689_600_000  # 2025-01-01T00:00:00Z
COMPETENCE_POOL = ["c-build", "c-design", "c-logistics", "c-audit", "c-it", "c-legal"]


@dataclass(frozen=True)
class ScenarioSpec:
    partner_count: int = 5
    services_per_partner: tuple[int, int] = (1, 3)
    vo_count: int = 2
    process_length: tuple[int, int] = (2, 4)
    event_count: int = 100
    failure_probability: tuple[float, float] = (0.0, 0.15)
    response_time_ms: tuple[int, int] = (50, 500)
    event_spacing_ms: int = 60_000
    random_seed: int = 0
    with_builtin_kpis: bool = True

    def __post_init__(self):
        if self.partner_count < 1 or self.vo_count < 1:
            raise InvalidSpecError("need at least one partner and one VO")
        if self.services_per_partner[0] < 1:
            raise InvalidSpecError("every partner needs at least one service")
        for lo, hi in (self.services_per_partner, self.process_length,
                       self.failure_probability, self.response_time_ms):
            if lo > hi:
                raise InvalidSpecError("range lower bound above upper bound")
        if self.event_count < 0:
            raise InvalidSpecError("event-count must be non-negative")


@dataclass
class GeneratedScenario:
    workspace: Workspace
    provider_failure_probability: dict[str, float] = field(default_factory=dict)


def generate_scenario(spec: ScenarioSpec) -> GeneratedScenario:
    """Build a consistent workspace: the graph always validates cleanly."""
    rng = random.Random(spec.random_seed)
    graph = SovobeGraph.empty()

    partners = []
    fail_prob: dict[str, float] = {}
    for i in range(spec.partner_count):
        pid = partner_id(f"p{i + 1:03d}")
        competences = frozenset(
            rng.sample(COMPETENCE_POOL, k=rng.randint(1, 3))
        )
        contracted = float(rng.randint(50, 200))
        node = PartnerNode(
            id=pid,
            competences=competences,
            contracted_capacity=contracted,
            maximum_capacity=contracted * (1.0 + rng.random()),
        )
        graph = graph.add_entity(node)
        partners.append(node)
        fail_prob[str(pid)] = rng.uniform(*spec.failure_probability)

    services_by_partner: dict[str, list[ServiceNode]] = {}
    serial = 0
    for node in partners:
        count = rng.randint(*spec.services_per_partner)
        owned = []
        for _ in range(count):
            serial += 1
            svc = ServiceNode(
                id=service_id(f"s{serial:04d}"),
                provider=node.id,
                declared_response_time=rng.randint(*spec.response_time_ms),
                declared_failure_rate=round(fail_prob[str(node.id)], 4),
                unit_cost=float(rng.randint(10, 500)),
                competences_required=frozenset(rng.sample(sorted(node.competences), k=1)),
            )
            graph = graph.add_entity(svc)
            owned.append(svc)
        services_by_partner[str(node.id)] = owned

    vos = []
    process_serial = 0
    for v in range(spec.vo_count):
        vo_partners = rng.sample(partners, k=rng.randint(1, max(1, len(partners) // 2)))
        pool = [s for p in vo_partners for s in services_by_partner[str(p.id)]]
        process_count = rng.randint(1, 2)
        vo_processes = []
        for _ in range(process_count):
            process_serial += 1
            length = min(rng.randint(*spec.process_length), len(pool))
            chosen = rng.sample(pool, k=max(1, length))
            proc = ProcessNode(
                id=process_id(f"proc{process_serial:03d}"),
                services=tuple(s.id for s in chosen),
            )
            graph = graph.add_entity(proc)
            vo_processes.append(proc)
        vo = VONode(
            id=vo_id(f"vo{v + 1:03d}"),
            partners=frozenset(p.id for p in vo_partners),
            processes=frozenset(p.id for p in vo_processes),
        )
        graph = graph.add_entity(vo)
        vos.append(vo)

    graph = graph.add_entity(
        VBENode(
            id=vbe_id("main"),
            vos=frozenset(v.id for v in vos),
            partners=frozenset(p.id for p in partners),
        )
    )

    # Social overlay: some trust edges between distinct partners.
    for node in partners:
        for _ in range(rng.randint(0, 2)):
            other = rng.choice(partners)
            if other.id != node.id:
                graph = graph.add_relation(
                    Relation(
                        from_=node.id,
                        to=other.id,
                        relation_type=RelationType.TRUST,
                        weight=round(rng.uniform(0.2, 1.0), 3),
                    )
                )

    ws = Workspace(graph=graph)
    if spec.with_builtin_kpis:
        for definition in builtin_kpi_definitions():
            ws.registry.register(definition)

    # Past collaborations: each partner with 0..3 dissolved VOs behind it.
    history = []
    for node in partners:
        for k in range(rng.randint(0, 3)):
            history.append(
                HistoryRecord(
                    partner=node.id,
                    vo_id=f"past-{node.id.local_id}-{k}",
                    failure_rate=round(rng.uniform(0.0, 0.3), 3),
                    avg_response_time=float(rng.randint(*spec.response_time_ms)),
                )
            )
    if history:
        ws.history.import_records(history)

    for node in partners:
        for svc in services_by_partner[str(node.id)]:
            if rng.random() < 0.5:
                ws.sla.register(
                    SlaRecord(
                        service=svc.id,
                        provider=node.id,
                        declared_response_time=svc.declared_response_time,
                        declared_failure_rate=svc.declared_failure_rate,
                        agreed_cost=svc.unit_cost,
                    )
                )

    # Event log: uniformly spaced invocations over the service pool, with
    # per-provider failure probabilities and uniform response times.
    process_of_service: dict[str, list[ProcessNode]] = {}
    for vo in vos:
        for pid in vo.processes:
            proc = graph.entity(pid)
            for sid in proc.services:
                process_of_service.setdefault(str(sid), []).append(proc)
    all_services = [s for owned in services_by_partner.values() for s in owned]
    for i in range(spec.event_count):
        svc = rng.choice(all_services)
        requested = BASE_TIME + i * spec.event_spacing_ms
        failed = rng.random() < fail_prob[str(svc.provider)]
        response = rng.randint(*spec.response_time_ms)
        procs = process_of_service.get(str(svc.id), [])
        ws.events.ingest(
            CollaborationEvent(
                event_id=f"evt{i + 1:06d}",
                service=svc.id,
                provider=svc.provider,
                process=procs[0].id if procs else None,
                requested_at=requested,
                completed_at=None if failed else requested + response,
                outcome=Outcome.FAILURE if failed else Outcome.SUCCESS,
                cost=svc.unit_cost,
            )
        )

    return GeneratedScenario(workspace=ws, provider_failure_probability=fail_prob)


def scenario_spec_from_dict(doc: dict) -> ScenarioSpec:
    def pair(key: str, default):
        value = doc.get(key, default)
        return (value[0], value[1]) if isinstance(value, (list, tuple)) else (value, value)

    return ScenarioSpec(
        partner_count=int(doc.get("partner-count", 5)),
        services_per_partner=pair("services-per-partner", (1, 3)),
        vo_count=int(doc.get("vo-count", 2)),
        process_length=pair("process-length", (2, 4)),
        event_count=int(doc.get("event-count", 100)),
        failure_probability=pair("failure-probability", (0.0, 0.15)),
        response_time_ms=pair("response-time-ms", (50, 500)),
        event_spacing_ms=int(doc.get("event-spacing-ms", 60_000)),
        random_seed=int(doc.get("random-seed", 0)),
        with_builtin_kpis=bool(doc.get("with-builtin-kpis", True)),
    )
