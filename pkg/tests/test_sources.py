"""Data-source adapters: event store, keyed stores, connectors, coverage."""

from __future__ import annotations

import pytest

from sovobe.errors import (
    DuplicateEventIdError,
    DuplicateIdError,
    InvalidSpecError,
    MalformedTimestampsError,
    UnknownEntityError,
)
from sovobe.graph import partner_id, service_id
from sovobe.registry import GLOBAL_SCOPE, KpiDefinition, Direction
from sovobe.sources import (
    CODE_CLAIMS,
    AdapterKind,
    AdapterSet,
    CollaborationEvent,
    ConnectorRegistry,
    EventFilter,
    EventStore,
    HistoryRecord,
    HistoryStore,
    OpinionRecord,
    OpinionStore,
    Outcome,
    SlaRecord,
    SlaStore,
    Window,
    source_coverage,
    stub_connector,
)
from sovobe.taxonomy import DATA_SOURCE_CODES, SubjectCode, ancestors
from fixtures import A, B, C, S2, S3, T0, e1_events, g1, g1_history


def event(i=0, **kw):
    fields = dict(
        event_id=f"ev-{i}",
        service=S2,
        provider=B,
        requested_at=T0 + i * 1000,
        outcome=Outcome.SUCCESS,
    )
    fields.update(kw)
    if "completed_at" not in kw and fields["outcome"] is Outcome.SUCCESS:
        fields["completed_at"] = fields["requested_at"] + 50
    return CollaborationEvent(**fields)


class TestEventStore:
    def test_ingest_returns_sequence(self):
        store = EventStore()
        assert store.ingest(event(0)) == 1
        assert len(store) == 1

    def test_duplicate_event_id(self):
        store = EventStore()
        store.ingest(event(0))
        with pytest.raises(DuplicateEventIdError):
            store.ingest(event(0))
        assert len(store) == 1

    def test_malformed_timestamps(self):
        store = EventStore()
        with pytest.raises(MalformedTimestampsError):
            store.ingest(event(0, completed_at=T0 - 10))
        with pytest.raises(MalformedTimestampsError):
            store.ingest(event(1, outcome=Outcome.SUCCESS, completed_at=None))

    def test_unknown_entity_with_graph(self):
        graph = g1()
        store = EventStore(graph_provider=lambda: graph)
        with pytest.raises(UnknownEntityError):
            store.ingest(event(0, service=service_id("ghost")))

    def test_query_provider_filter(self):
        store = EventStore()
        store.ingest_all(e1_events())
        window = Window(T0, T0 + 3_600_000)
        assert len(store.query(EventFilter(provider=B), window)) == 15

    def test_query_outcome_filter(self):
        store = EventStore()
        store.ingest_all(e1_events())
        window = Window(T0, T0 + 3_600_000)
        failures = store.query(EventFilter(provider=B, outcome=Outcome.FAILURE), window)
        assert len(failures) == 2

    def test_empty_window(self):
        store = EventStore()
        store.ingest_all(e1_events())
        assert store.query(EventFilter(), Window(T0, T0)) == []

    def test_window_is_half_open(self):
        store = EventStore()
        store.ingest(event(0, requested_at=T0))
        store.ingest(event(1, requested_at=T0 + 100))
        got = store.query(EventFilter(), Window(T0, T0 + 100))
        assert [e.event_id for e in got] == ["ev-0"]

    def test_query_ordered_by_sequence(self):
        store = EventStore()
        store.ingest(event(0, requested_at=T0 + 500))
        store.ingest(event(1, requested_at=T0 + 100))
        got = store.query(EventFilter(), Window(T0, T0 + 1000))
        assert [e.event_id for e in got] == ["ev-0", "ev-1"]

    def test_repeatable_with_sequence_bound(self):
        store = EventStore()
        store.ingest_all(e1_events())
        first = store.query(EventFilter(provider=B), up_to_sequence=10)
        store.ingest(event(99))
        second = store.query(EventFilter(provider=B), up_to_sequence=10)
        assert first == second

    def test_filter_weakening_grows_results(self):
        store = EventStore()
        store.ingest_all(e1_events())
        strict = store.query(EventFilter(provider=B, outcome=Outcome.FAILURE))
        weaker = store.query(EventFilter(provider=B))
        assert set(e.event_id for e in strict) <= set(e.event_id for e in weaker)


class TestKeyedStores:
    def test_import_history_counts_rows(self):
        assert len(g1_history()) == 5

    def test_history_natural_key(self):
        store = HistoryStore()
        store.import_records([HistoryRecord(partner=A, vo_id="v1")])
        with pytest.raises(DuplicateIdError):
            store.import_records([HistoryRecord(partner=A, vo_id="v1")])

    def test_sla_rejects_bad_rate(self):
        with pytest.raises(InvalidSpecError):
            SlaRecord(service=S2, provider=B, declared_response_time=100,
                      declared_failure_rate=1.3)

    def test_sla_validity_interval(self):
        with pytest.raises(MalformedTimestampsError):
            SlaRecord(service=S2, provider=B, declared_response_time=100,
                      declared_failure_rate=0.1, valid_from=10, valid_to=5)

    def test_sla_register_and_lookup(self):
        store = SlaStore()
        store.register(SlaRecord(service=S2, provider=B, declared_response_time=100,
                                 declared_failure_rate=0.1))
        assert len(store.for_service(S2)) == 1
        with pytest.raises(DuplicateIdError):
            store.register(SlaRecord(service=S2, provider=B, declared_response_time=90,
                                     declared_failure_rate=0.2))

    def test_opinion_classification(self):
        consumer = OpinionRecord(about=S2, rater_role="consumer", score=0.9, at=T0)
        provider = OpinionRecord(about=B, rater_role="provider", score=0.8, at=T0)
        assert consumer.data_source_code == "1.1.1"
        assert provider.data_source_code == "1.1.2"

    def test_opinion_score_range(self):
        with pytest.raises(InvalidSpecError):
            OpinionRecord(about=S2, rater_role="consumer", score=1.2, at=T0)

    def test_opinion_store(self):
        store = OpinionStore()
        store.record(OpinionRecord(about=S2, rater_role="consumer", score=0.9, at=T0))
        assert len(store.about(S2)) == 1


class TestConnectors:
    def test_stub_connector_fetch(self):
        connector = stub_connector(measurements={"backlog": 5})
        assert connector.fetch({"measure": "backlog"}, T0) == {"backlog": 5}
        assert connector.fetch({"measure": "missing"}, T0) is None

    def test_connector_must_cover_control_code(self):
        with pytest.raises(InvalidSpecError):
            stub_connector().__class__(connector_id="x", fetch=lambda q, t: None,
                                       covers=frozenset({"1.2.1"}))

    def test_registry_rejects_duplicates(self):
        reg = ConnectorRegistry()
        reg.register(stub_connector("c1"))
        with pytest.raises(DuplicateIdError):
            reg.register(stub_connector("c1"))


def coverage_kpi(codes: set[str]) -> KpiDefinition:
    return KpiDefinition(
        kpi_id="cov",
        name="coverage probe",
        data_sources=frozenset(codes),
        subjects=frozenset({SubjectCode.PARTNER}),
        scope=GLOBAL_SCOPE,
        performance=frozenset({"2.1"}),
        expression="builtin:failure_rate",
        unit="ratio",
        direction=Direction.MINIMIZE,
    )


class TestCoverage:
    def test_every_code_claimed_exactly_once(self):
        assert set(CODE_CLAIMS) == set(DATA_SOURCE_CODES)
        graph_claimed = {c for c, k in CODE_CLAIMS.items() if k is AdapterKind.GRAPH}
        assert graph_claimed == {"1.2.2.2", "1.2.2.3", "1.2.3"}

    def test_failure_rate_computable_with_events_and_history(self):
        adapters = AdapterSet(events=EventStore(), history=g1_history())
        report = source_coverage(coverage_kpi({"1.2.1", "1.2.2.1"}), adapters)
        assert report.computable_now
        assert {e.code: e.served_by for e in report.entries} == {
            "1.2.1": "events",
            "1.2.2.1": "history",
        }

    def test_control_code_needs_connector(self):
        report = source_coverage(coverage_kpi({"2.1"}), AdapterSet())
        assert not report.computable_now
        connectors = ConnectorRegistry()
        connectors.register(stub_connector())
        report = source_coverage(coverage_kpi({"2.1"}), AdapterSet(connectors=connectors))
        assert report.computable_now

    def test_descriptions_live_in_the_graph(self):
        report = source_coverage(coverage_kpi({"1.2.2.2"}), AdapterSet(graph=g1()))
        assert report.computable_now
        assert report.entries[0].served_by == "graph"

    def test_category_codes_resolve_via_descendants(self):
        adapters = AdapterSet(events=EventStore())
        report = source_coverage(coverage_kpi({"1", "1.2"}), adapters)
        assert report.computable_now  # events cover 1.2.1, a descendant of both

    def test_category_unavailable_without_any_descendant(self):
        report = source_coverage(coverage_kpi({"1.2.2"}), AdapterSet(events=EventStore()))
        assert not report.computable_now

    def test_monotone_under_adapter_registration(self):
        kpi = coverage_kpi(set(DATA_SOURCE_CODES))
        connectors = ConnectorRegistry()
        empty = source_coverage(kpi, AdapterSet(connectors=connectors))
        adapters = AdapterSet(events=EventStore(), history=HistoryStore(), sla=SlaStore(),
                              opinions=OpinionStore(), graph=g1(), connectors=connectors)
        connectors.register(stub_connector())
        full = source_coverage(kpi, adapters)
        for before, after in zip(empty.entries, full.entries):
            assert after.available or not before.available
        assert full.computable_now
