"""Data-source adapters behind the indicator engine.

One adapter kind per branch of the data-source taxonomy:

    events   1.2.1      append-only collaboration event store
    history  1.2.2.1    past VO participation per partner
    graph    1.2.2.2/3, 1.2.3   service/competence descriptions + social net
    sla      1.2.2.4    agreed conditions per service
    opinions 1.1.x      subjective consumer/provider scores
    control  2, 2.1     pull connectors into partners' internal data

The grouping codes (1, 1.2, 1.2.2) have no store of their own; they count
as available when any claimed descendant is. Timestamps are UTC
milliseconds; windows are half-open [start, end).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Optional

from .errors import (
    DuplicateEventIdError,
    DuplicateIdError,
    InvalidSpecError,
    MalformedTimestampsError,
    UnknownEntityError,
)
from .graph import EntityId, EntityKind, SovobeGraph
from .taxonomy import DATA_SOURCE_CODES, ancestors


class Outcome(str, Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class Window:
    """Half-open time interval [start, end) in UTC milliseconds."""

    start: int
    end: int

    def __post_init__(self):
        if self.end < self.start:
            raise InvalidSpecError("window end before start")

    def contains(self, ts: int) -> bool:
        return self.start <= ts < self.end


@dataclass(frozen=True)
class CollaborationEvent:
    """One service invocation record; the monitoring data source."""

    event_id: str
    service: EntityId
    provider: EntityId
    requested_at: int
    outcome: Outcome
    completed_at: Optional[int] = None
    consumer: Optional[EntityId] = None
    process: Optional[EntityId] = None
    vo: Optional[EntityId] = None
    cost: Optional[float] = None


@dataclass(frozen=True)
class EventFilter:
    service: Optional[EntityId] = None
    provider: Optional[EntityId] = None
    process: Optional[EntityId] = None
    vo: Optional[EntityId] = None
    outcome: Optional[Outcome] = None

    def matches(self, e: CollaborationEvent) -> bool:
        return (
            (self.service is None or e.service == self.service)
            and (self.provider is None or e.provider == self.provider)
            and (self.process is None or e.process == self.process)
            and (self.vo is None or e.vo == self.vo)
            and (self.outcome is None or e.outcome is self.outcome)
        )


class EventStore:
    """Append-only store with strictly increasing sequence numbers.

    Single-writer: ingestion is assumed externally serialized; readers see
    a consistent prefix identified by the sequence number.
    """

    def __init__(self, graph_provider: Optional[Callable[[], SovobeGraph]] = None):
        self._graph_provider = graph_provider
        self._events: list[CollaborationEvent] = []  # index = sequence - 1
        self._by_id: set[str] = set()
        self._time_index: list[tuple[int, int]] = []  # (requested_at, sequence), sorted

    def __len__(self) -> int:
        return len(self._events)

    @property
    def last_sequence(self) -> int:
        return len(self._events)

    def ingest(self, event: CollaborationEvent) -> int:
        """Validate and append; returns the event's sequence number."""
        if event.event_id in self._by_id:
            raise DuplicateEventIdError(f"event {event.event_id!r} already ingested")
        if event.completed_at is not None and event.completed_at < event.requested_at:
            raise MalformedTimestampsError(
                f"event {event.event_id!r} completed before requested"
            )
        if event.outcome is Outcome.SUCCESS and event.completed_at is None:
            raise MalformedTimestampsError(
                f"successful event {event.event_id!r} lacks completed-at"
            )
        if self._graph_provider is not None:
            graph = self._graph_provider()
            for ref in (event.service, event.provider, event.consumer, event.process, event.vo):
                if ref is not None and not graph.has(ref):
                    raise UnknownEntityError(f"event references missing entity {ref}")
        sequence = len(self._events) + 1
        self._events.append(event)
        self._by_id.add(event.event_id)
        bisect.insort(self._time_index, (event.requested_at, sequence))
        return sequence

    def ingest_all(self, events: Iterable[CollaborationEvent]) -> int:
        last = self.last_sequence
        for event in events:
            last = self.ingest(event)
        return last

    def query(
        self,
        flt: EventFilter = EventFilter(),
        window: Optional[Window] = None,
        up_to_sequence: Optional[int] = None,
    ) -> list[CollaborationEvent]:
        """Events matching every filter field, requested inside the window,
        ordered by sequence. Repeating a query with the same upper sequence
        bound returns identical results."""
        limit = self.last_sequence if up_to_sequence is None else up_to_sequence
        if window is not None:
            lo = bisect.bisect_left(self._time_index, (window.start, 0))
            hi = bisect.bisect_left(self._time_index, (window.end, 0))
            seqs = sorted(s for _, s in self._time_index[lo:hi] if s <= limit)
            candidates = [self._events[s - 1] for s in seqs]
        else:
            candidates = self._events[:limit]
        return [e for e in candidates if flt.matches(e)]

    def all_events(self) -> list[CollaborationEvent]:
        return list(self._events)


@dataclass(frozen=True)
class HistoryRecord:
    """One partner's participation in one (possibly dissolved) VO."""

    partner: EntityId
    vo_id: str
    role: str = ""
    failure_rate: Optional[float] = None
    avg_response_time: Optional[float] = None
    total_cost: Optional[float] = None


class HistoryStore:
    def __init__(self):
        self._records: dict[tuple[EntityId, str], HistoryRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def import_records(self, records: Iterable[HistoryRecord]) -> int:
        """Append records; (partner, vo-id) is the natural key."""
        count = 0
        for record in records:
            key = (record.partner, record.vo_id)
            if key in self._records:
                raise DuplicateIdError(
                    f"history for {record.partner} in {record.vo_id!r} already imported"
                )
            self._records[key] = record
            count += 1
        return count

    def for_partner(self, partner: EntityId) -> list[HistoryRecord]:
        return [r for r in self._records.values() if r.partner == partner]

    def all_records(self) -> list[HistoryRecord]:
        return list(self._records.values())


@dataclass(frozen=True)
class SlaRecord:
    """Agreed service level for one service from one provider."""

    service: EntityId
    provider: EntityId
    declared_response_time: int
    declared_failure_rate: float
    agreed_cost: Optional[float] = None
    valid_from: Optional[int] = None
    valid_to: Optional[int] = None

    def __post_init__(self):
        if not (0.0 <= self.declared_failure_rate <= 1.0):
            raise InvalidSpecError("declared-failure-rate must be in [0, 1]")
        if (
            self.valid_from is not None
            and self.valid_to is not None
            and self.valid_from > self.valid_to
        ):
            raise MalformedTimestampsError("SLA valid-from after valid-to")


class SlaStore:
    def __init__(self):
        self._records: dict[tuple[EntityId, EntityId, Optional[int]], SlaRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def register(self, sla: SlaRecord) -> None:
        key = (sla.service, sla.provider, sla.valid_from)
        if key in self._records:
            raise DuplicateIdError(f"SLA for {sla.service} already registered")
        self._records[key] = sla

    def for_service(self, service: EntityId) -> list[SlaRecord]:
        return [r for r in self._records.values() if r.service == service]

    def all_records(self) -> list[SlaRecord]:
        return list(self._records.values())


@dataclass(frozen=True)
class OpinionRecord:
    """Subjective score about a partner or service, normalized to [0, 1].

    Consumer opinions classify under 1.1.1, provider self-reports under 1.1.2.
    """

    about: EntityId
    rater_role: str  # "consumer" | "provider"
    score: float
    at: int
    comment: str = ""

    def __post_init__(self):
        if self.rater_role not in ("consumer", "provider"):
            raise InvalidSpecError(f"unknown rater role {self.rater_role!r}")
        if not (0.0 <= self.score <= 1.0):
            raise InvalidSpecError("opinion score must be in [0, 1]")

    @property
    def data_source_code(self) -> str:
        return "1.1.1" if self.rater_role == "consumer" else "1.1.2"


class OpinionStore:
    def __init__(self):
        self._records: dict[tuple[EntityId, str, int], OpinionRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def record(self, opinion: OpinionRecord) -> None:
        key = (opinion.about, opinion.rater_role, opinion.at)
        if key in self._records:
            raise DuplicateIdError("opinion with this (about, role, at) already recorded")
        self._records[key] = opinion

    def about(self, entity: EntityId) -> list[OpinionRecord]:
        return [r for r in self._records.values() if r.about == entity]

    def all_records(self) -> list[OpinionRecord]:
        return list(self._records.values())


# -- control-process connectors ---------------------------------------------

FetchFn = Callable[[dict, int], Optional[dict]]


@dataclass(frozen=True)
class ControlConnector:
    """Pull contract into a partner's internal data, negotiated out-of-band.

    ``fetch(query, as_of)`` returns key-value measurements, or None when the
    source is unavailable; unavailability is data, never a crash.
    """

    connector_id: str
    fetch: FetchFn
    covers: frozenset[str] = frozenset({"2.1"})

    def __post_init__(self):
        unknown = self.covers - set(DATA_SOURCE_CODES)
        if unknown:
            raise InvalidSpecError(f"connector covers unknown codes {sorted(unknown)}")
        if "2.1" not in self.covers:
            raise InvalidSpecError("a control connector must cover code 2.1")


def stub_connector(
    connector_id: str = "stub", measurements: Optional[dict] = None
) -> ControlConnector:
    """In-process connector used by tests and demos."""
    canned = dict(measurements or {})

    def fetch(query: dict, as_of: int) -> Optional[dict]:
        key = query.get("measure")
        if key is None:
            return dict(canned)
        return {key: canned[key]} if key in canned else None

    return ControlConnector(connector_id=connector_id, fetch=fetch)


class ConnectorRegistry:
    def __init__(self):
        self._connectors: dict[str, ControlConnector] = {}

    def __len__(self) -> int:
        return len(self._connectors)

    def register(self, connector: ControlConnector) -> None:
        if connector.connector_id in self._connectors:
            raise DuplicateIdError(f"connector {connector.connector_id!r} already registered")
        self._connectors[connector.connector_id] = connector

    def covering(self, code: str) -> list[ControlConnector]:
        return [c for c in self._connectors.values() if code in c.covers]


# -- coverage ------------------------------------------------------------------


class AdapterKind(str, Enum):
    EVENTS = "events"
    HISTORY = "history"
    GRAPH = "graph"
    SLA = "sla"
    OPINIONS = "opinions"
    CONTROL = "control"
    CATEGORY = "category"  # grouping codes, available via descendants


# Every taxonomy code is claimed by exactly one adapter kind.
CODE_CLAIMS: dict[str, AdapterKind] = {
    "1": AdapterKind.CATEGORY,
    "1.1": AdapterKind.OPINIONS,
    "1.1.1": AdapterKind.OPINIONS,
    "1.1.2": AdapterKind.OPINIONS,
    "1.2": AdapterKind.CATEGORY,
    "1.2.1": AdapterKind.EVENTS,
    "1.2.2": AdapterKind.CATEGORY,
    "1.2.2.1": AdapterKind.HISTORY,
    "1.2.2.2": AdapterKind.GRAPH,
    "1.2.2.3": AdapterKind.GRAPH,
    "1.2.2.4": AdapterKind.SLA,
    "1.2.3": AdapterKind.GRAPH,
    "2": AdapterKind.CONTROL,
    "2.1": AdapterKind.CONTROL,
}


@dataclass
class AdapterSet:
    """Which adapters a deployment has wired up."""

    events: Optional[EventStore] = None
    history: Optional[HistoryStore] = None
    sla: Optional[SlaStore] = None
    opinions: Optional[OpinionStore] = None
    graph: Optional[SovobeGraph] = None
    connectors: ConnectorRegistry = field(default_factory=ConnectorRegistry)

    def has_kind(self, kind: AdapterKind) -> bool:
        if kind is AdapterKind.EVENTS:
            return self.events is not None
        if kind is AdapterKind.HISTORY:
            return self.history is not None
        if kind is AdapterKind.SLA:
            return self.sla is not None
        if kind is AdapterKind.OPINIONS:
            return self.opinions is not None
        if kind is AdapterKind.GRAPH:
            return self.graph is not None
        if kind is AdapterKind.CONTROL:
            return len(self.connectors.covering("2.1")) > 0
        return False


@dataclass(frozen=True)
class CoverageEntry:
    code: str
    available: bool
    served_by: Optional[str]  # adapter kind, or None when unavailable


@dataclass(frozen=True)
class CoverageReport:
    kpi_id: str
    entries: tuple[CoverageEntry, ...]
    computable_now: bool


def code_available(code: str, adapters: AdapterSet) -> tuple[bool, Optional[str]]:
    kind = CODE_CLAIMS[code]
    if kind is AdapterKind.CATEGORY:
        # A grouping code is served when any descendant's adapter is wired.
        for child, child_kind in CODE_CLAIMS.items():
            if child != code and code in ancestors(child) and child_kind is not AdapterKind.CATEGORY:
                if adapters.has_kind(child_kind):
                    return True, child_kind.value
        return False, None
    if adapters.has_kind(kind):
        return True, kind.value
    return False, None


def source_coverage(kpi, adapters: AdapterSet) -> CoverageReport:
    """Per-code availability for a KPI's declared data sources.

    A KPI is computable-now only when every declared code is served; the
    declared set is conjunctive because a KPI's calculation may require
    several sources at once.
    """
    entries = []
    for code in sorted(kpi.data_sources):
        available, served_by = code_available(code, adapters)
        entries.append(CoverageEntry(code=code, available=available, served_by=served_by))
    return CoverageReport(
        kpi_id=kpi.kpi_id,
        entries=tuple(entries),
        computable_now=all(e.available for e in entries),
    )
