"""Shared test fixtures.

``g1()`` is the canonical small graph used across the suite: three partners
(A, B, C), four services, two processes, two operating VOs, one VBE, and
two inbound trust edges on B. ``e1(...)`` is its event log: 15 events for
provider B (10 on s2, two of them failures; 5 on s3, all successful).

Documented extensions (used by the indicators that need more data):

* capacities — A contracted 100 / maximum 150, B contracted 80 / maximum 80
* declared response times — s1: 200 ms, s2: 120 ms, s3: 150 ms
* event timings — every s2 event completes in 100 ms, every s3 event in
  200 ms, requested at one-minute intervals from T0
* event costs — 5.0 per s2 event, 3.0 per s3 event

All numbers are constructed test inputs.
"""

from __future__ import annotations

from sovobe.graph import (
    PartnerNode,
    ProcessNode,
    Relation,
    RelationType,
    ServiceNode,
    SovobeGraph,
    VBENode,
    VONode,
    build_graph,
    partner_id,
    process_id,
    service_id,
    vbe_id,
    vo_id,
)
from sovobe.sources import (
    CollaborationEvent,
    EventStore,
    HistoryRecord,
    HistoryStore,
    Outcome,
    SlaStore,
    Window,
)

T0 = 1_735_689_600_000  # 2025-01-01T00:00:00Z in ms
HOUR = 3_600_000

A = partner_id("A")
B = partner_id("B")
C = partner_id("C")
S1 = service_id("s1")
S2 = service_id("s2")
S3 = service_id("s3")
S4 = service_id("s4")
P1 = process_id("P1")
P2 = process_id("P2")
VO1 = vo_id("VO1")
VO2 = vo_id("VO2")
VBE = vbe_id("main")


def g1() -> SovobeGraph:
    return build_graph(
        nodes=[
            PartnerNode(id=A, competences=frozenset({"c1"}),
                        contracted_capacity=100.0, maximum_capacity=150.0),
            PartnerNode(id=B, competences=frozenset({"c1", "c2"}),
                        contracted_capacity=80.0, maximum_capacity=80.0),
            PartnerNode(id=C, competences=frozenset({"c2"})),
            ServiceNode(id=S1, provider=A, unit_cost=100.0, declared_response_time=200),
            ServiceNode(id=S2, provider=B, unit_cost=50.0, declared_response_time=120),
            ServiceNode(id=S3, provider=B, unit_cost=30.0, declared_response_time=150),
            ServiceNode(id=S4, provider=C, unit_cost=40.0),
            ProcessNode(id=P1, services=(S1, S2, S3), owning_vo=None),
            ProcessNode(id=P2, services=(S3, S4), owning_vo=None),
            VONode(id=VO1, partners=frozenset({A, B}), processes=frozenset({P1})),
            VONode(id=VO2, partners=frozenset({B, C}), processes=frozenset({P2})),
            VBENode(id=VBE, vos=frozenset({VO1, VO2}),
                    partners=frozenset({A, B, C})),
        ],
        relations=[
            Relation(from_=A, to=B, relation_type=RelationType.TRUST, weight=0.8),
            Relation(from_=C, to=B, relation_type=RelationType.TRUST, weight=0.6),
        ],
    )


def e1_events() -> list[CollaborationEvent]:
    """15 events for provider B: s2 x10 (failures at i=3 and i=7), s3 x5."""
    events = []
    for i in range(10):
        requested = T0 + i * 60_000
        outcome = Outcome.FAILURE if i in (3, 7) else Outcome.SUCCESS
        events.append(
            CollaborationEvent(
                event_id=f"e-s2-{i}",
                service=S2,
                provider=B,
                process=P1,
                vo=VO1,
                requested_at=requested,
                completed_at=requested + 100,
                outcome=outcome,
                cost=5.0,
            )
        )
    for i in range(5):
        requested = T0 + i * 60_000 + 30_000
        events.append(
            CollaborationEvent(
                event_id=f"e-s3-{i}",
                service=S3,
                provider=B,
                process=P2,
                vo=VO2,
                requested_at=requested,
                completed_at=requested + 200,
                outcome=Outcome.SUCCESS,
                cost=3.0,
            )
        )
    return events


def e1(graph: SovobeGraph | None = None) -> EventStore:
    graph = graph or g1()
    store = EventStore(graph_provider=lambda: graph)
    store.ingest_all(e1_events())
    return store


def g1_history() -> HistoryStore:
    """A in 2 past VOs, B in 3, C in 0 (five records in total)."""
    store = HistoryStore()
    store.import_records(
        [
            HistoryRecord(partner=A, vo_id="old-1"),
            HistoryRecord(partner=A, vo_id="old-2"),
            HistoryRecord(partner=B, vo_id="old-1"),
            HistoryRecord(partner=B, vo_id="old-2"),
            HistoryRecord(partner=B, vo_id="old-3"),
        ]
    )
    return store


FULL_WINDOW = Window(T0, T0 + HOUR)


def demo_workspace():
    """G1 + E1 + history + the builtin KPI catalog + one failure monitor."""
    from sovobe.indicators import builtin_kpi_definitions
    from sovobe.monitoring import MonitorSpec, Remediation
    from sovobe.registry import Bound
    from sovobe.workspace import Workspace

    ws = Workspace(graph=g1())
    for definition in builtin_kpi_definitions():
        ws.registry.register(definition)
    ws.events.ingest_all(e1_events())
    ws.history.import_records(g1_history().all_records())
    ws.attach_monitor(
        MonitorSpec(
            monitor_id="m-fr-b",
            kpi_id="failure_rate",
            subject=B,
            window_length=HOUR,
            evaluation_period=600_000,
            bound=Bound("at-most", value=0.25),
            remediation_hint=Remediation.REPLACE_PARTNER,
        )
    )
    return ws
