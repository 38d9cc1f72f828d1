"""Indicator engine: evaluation context, built-in catalog, KPI evaluation.

Every indicator is computed over an immutable graph snapshot plus the data
source adapters, in one of two modes:

* monitoring — operational indicators read live collaboration events in
  the context window;
* anticipation — live events are off limits; operational indicators fall
  back to declarations (SLA records, then declared service attributes),
  then to history outcome summaries, and finally report not-computable.

Structural indicators read only the graph and behave identically in both
modes. Evaluation is pure: equal (expression, subject, snapshot, window,
mode, store contents) give equal values, so evaluations parallelize freely.

The built-in catalog names the indicator examples from the source
taxonomies; the formulas themselves are the simplest defensible reading of
each name and are isolated here so alternates can be swapped per entry.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Union

from . import expressions
from .errors import (
    NotComputable,
    SubjectKindMismatchError,
    UnknownBuiltinError,
    UnknownEntityError,
)
from .expressions import Expr
from .graph import (
    EntityId,
    EntityKind,
    PartnerNode,
    ProcessNode,
    RelationType,
    ServiceNode,
    SovobeGraph,
    VBENode,
    VONode,
    VOStatus,
)
from .registry import Direction, KpiDefinition, ScopeCode, GLOBAL_SCOPE
from .sources import (
    CollaborationEvent,
    ConnectorRegistry,
    EventFilter,
    EventStore,
    HistoryStore,
    OpinionStore,
    Outcome,
    SlaStore,
    Window,
)
from .taxonomy import SubjectCode


class EvalMode(str, Enum):
    ANTICIPATION = "anticipation"
    MONITORING = "monitoring"


@dataclass
class EvaluationContext:
    """Everything an indicator may read, plus mode and time window."""

    graph: SovobeGraph
    events: Optional[EventStore] = None
    history: Optional[HistoryStore] = None
    sla: Optional[SlaStore] = None
    opinions: Optional[OpinionStore] = None
    connectors: ConnectorRegistry = field(default_factory=ConnectorRegistry)
    mode: EvalMode = EvalMode.MONITORING
    window: Optional[Window] = None
    as_of: int = 0

    def events_for(
        self, entity: EntityId, outcome: Optional[str] = None
    ) -> list[CollaborationEvent]:
        """Events attributed to an entity, window-filtered.

        Attribution goes via the provider side: a partner owns the events
        whose provider field names it; a process owns events for its
        component services; a VO owns events tagged with it.
        """
        if self.mode is EvalMode.ANTICIPATION:
            raise NotComputable("live events are not read during anticipation")
        if self.events is None:
            raise NotComputable("no event store wired")
        wanted = Outcome(outcome) if outcome is not None else None
        kind = entity.kind
        if kind is EntityKind.PARTNER:
            return self.events.query(EventFilter(provider=entity, outcome=wanted), self.window)
        if kind is EntityKind.SERVICE:
            return self.events.query(EventFilter(service=entity, outcome=wanted), self.window)
        if kind is EntityKind.VO:
            return self.events.query(EventFilter(vo=entity, outcome=wanted), self.window)
        if kind is EntityKind.PROCESS:
            proc = self.graph.entity(entity)
            assert isinstance(proc, ProcessNode)
            members = set(proc.services)
            return [
                e
                for e in self.events.query(EventFilter(outcome=wanted), self.window)
                if e.service in members
            ]
        raise NotComputable(f"no event attribution for {kind.value} subjects")

    def digest(self) -> str:
        window = f"{self.window.start}-{self.window.end}" if self.window else "all"
        raw = f"{self.graph.revision}|{window}|{self.mode.value}"
        return hashlib.sha256(raw.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class IndicatorValue:
    """One computed indicator; value is always finite."""

    value: float
    unit: str
    kpi_id: str
    subject: EntityId
    computed_at: int
    inputs_digest: str


def _value(ctx: EvaluationContext, kpi_id: str, subject: EntityId, unit: str, value: float) -> IndicatorValue:
    return IndicatorValue(
        value=float(value),
        unit=unit,
        kpi_id=kpi_id,
        subject=subject,
        computed_at=ctx.as_of,
        inputs_digest=ctx.digest(),
    )


# -- built-in catalog -----------------------------------------------------------

BuiltinFn = Callable[[EntityId, EvaluationContext, dict], float]


@dataclass(frozen=True)
class BuiltinEntry:
    name: str
    subjects: frozenset[SubjectCode]
    performance: frozenset[str]
    data_sources: frozenset[str]
    unit: str
    direction: Direction
    fn: BuiltinFn
    description: str = ""


def _mean(values: Sequence[float], what: str) -> float:
    if not values:
        raise NotComputable(f"no values for {what}")
    return sum(values) / len(values)


def _param_entity(params: dict, key: str, graph: SovobeGraph) -> EntityId:
    if key not in params:
        raise NotComputable(f"missing required parameter {key!r}")
    value = params[key]
    eid = value if isinstance(value, EntityId) else EntityId.parse(str(value))
    graph.entity(eid)
    return eid


def _partner_process_pair(
    subject: EntityId, ctx: EvaluationContext, params: dict
) -> tuple[EntityId, EntityId]:
    if subject.kind is EntityKind.PARTNER:
        return subject, _param_entity(params, "process", ctx.graph)
    return _param_entity(params, "partner", ctx.graph), subject


def _process_services(graph: SovobeGraph, process: EntityId) -> tuple[ProcessNode, set[EntityId]]:
    node = graph.entity(process)
    assert isinstance(node, ProcessNode)
    return node, set(node.services)


def _partner_service_share(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    partner, process = _partner_process_pair(subject, ctx, params)
    _, distinct = _process_services(ctx.graph, process)
    provided = sum(1 for sid in distinct if ctx.graph.entity(sid).provider == partner)
    return provided / len(distinct)


def _vo_partners(graph: SovobeGraph, vo: EntityId) -> frozenset[EntityId]:
    node = graph.entity(vo)
    if not isinstance(node, VONode):
        raise SubjectKindMismatchError(f"{vo} is not a VO")
    return node.partners


def _vo_overlap_degree(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    other = _param_entity(params, "other", ctx.graph)
    mine = _vo_partners(ctx.graph, subject)
    theirs = _vo_partners(ctx.graph, other)
    shared = len(mine & theirs)
    if params.get("normalized"):
        union = len(mine | theirs)
        if union == 0:
            raise NotComputable("both VOs are empty")
        return shared / union
    return float(shared)


def _partner_experience(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    if ctx.history is None:
        raise NotComputable("no history store wired")
    return float(len({r.vo_id for r in ctx.history.for_partner(subject)}))


def _trust_level(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    weights = ctx.graph.relation_weights(subject, RelationType.TRUST)
    return _mean(weights, "inbound trust relations")


def _current_vos(graph: SovobeGraph, vbe: VBENode) -> list[VONode]:
    out = []
    for vid in vbe.vos:
        vo = graph.entity(vid)
        assert isinstance(vo, VONode)
        if vo.status is not VOStatus.DISSOLVED:
            out.append(vo)
    return out


def _the_vbe(ctx: EvaluationContext, subject: EntityId) -> VBENode:
    node = ctx.graph.entity(subject)
    if not isinstance(node, VBENode):
        raise SubjectKindMismatchError(f"{subject} is not a VBE")
    return node


def _multi_vo_partner_count(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    vbe = _the_vbe(ctx, subject)
    membership: dict[EntityId, int] = {}
    for vo in _current_vos(ctx.graph, vbe):
        for partner in vo.partners:
            membership[partner] = membership.get(partner, 0) + 1
    return float(sum(1 for n in membership.values() if n >= 2))


def _avg_partners_per_vo(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    vbe = _the_vbe(ctx, subject)
    sizes = [len(vo.partners) for vo in _current_vos(ctx.graph, vbe)]
    return _mean([float(s) for s in sizes], "VOs in the VBE")


def _relevant_services(ctx: EvaluationContext, subject: EntityId) -> list[ServiceNode]:
    """The services an operational indicator aggregates over for a subject."""
    graph = ctx.graph
    if subject.kind is EntityKind.PARTNER:
        return [s for s in graph.services() if s.provider == subject]
    if subject.kind is EntityKind.PROCESS:
        node = graph.entity(subject)
        assert isinstance(node, ProcessNode)
        return [graph.entity(sid) for sid in dict.fromkeys(node.services)]  # type: ignore[misc]
    raise SubjectKindMismatchError(f"{subject.kind.value} has no component services here")


def _anticipated(
    ctx: EvaluationContext,
    subject: EntityId,
    sla_attr: str,
    svc_attr: str,
    history_attr: str,
    what: str,
) -> float:
    """Declaration-first substitute for a live-event aggregate.

    Chain: SLA records for the subject's services, then declared service
    attributes, then history outcome summaries; otherwise not-computable.
    """
    services = _relevant_services(ctx, subject)
    if ctx.sla is not None:
        declared = [
            float(getattr(rec, sla_attr))
            for svc in services
            for rec in ctx.sla.for_service(svc.id)
        ]
        if declared:
            return sum(declared) / len(declared)
    from_graph = [
        float(getattr(svc, svc_attr)) for svc in services if getattr(svc, svc_attr) is not None
    ]
    if from_graph:
        return sum(from_graph) / len(from_graph)
    if ctx.history is not None:
        if subject.kind is EntityKind.PARTNER:
            providers = [subject]
        else:
            providers = sorted({s.provider for s in services}, key=str)
        summarized = [
            float(v)
            for p in providers
            for v in (
                getattr(r, history_attr) for r in ctx.history.for_partner(p)
            )
            if v is not None
        ]
        if summarized:
            return sum(summarized) / len(summarized)
    raise NotComputable(f"no declared or historical {what} for {subject}")


def _failure_rate(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    if ctx.mode is EvalMode.ANTICIPATION:
        return _anticipated(
            ctx, subject, "declared_failure_rate", "declared_failure_rate", "failure_rate",
            "failure rate",
        )
    events = ctx.events_for(subject)
    if not events:
        raise NotComputable(f"no events for {subject} in window")
    failed = sum(1 for e in events if e.outcome is not Outcome.SUCCESS)
    return failed / len(events)


def _avg_response_time(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    if ctx.mode is EvalMode.ANTICIPATION:
        return _anticipated(
            ctx, subject, "declared_response_time", "declared_response_time",
            "avg_response_time", "response time",
        )
    events = ctx.events_for(subject)
    durations = [
        float(e.completed_at - e.requested_at) for e in events if e.completed_at is not None
    ]
    return _mean(durations, "completed events in window")


def _process_total_cost(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    """Sum of unit costs over the service list (occurrences count).

    ``observed=true`` switches to summing event costs in the context window
    instead; that variant is monitoring-only.
    """
    if params.get("observed"):
        if ctx.mode is EvalMode.ANTICIPATION:
            raise NotComputable("observed costs are not read during anticipation")
        events = ctx.events_for(subject)
        return float(sum(e.cost for e in events if e.cost is not None))
    node = ctx.graph.entity(subject)
    if not isinstance(node, ProcessNode):
        raise SubjectKindMismatchError(f"{subject} is not a process")
    total = 0.0
    for sid in node.services:
        svc = ctx.graph.entity(sid)
        assert isinstance(svc, ServiceNode)
        if svc.unit_cost is None:
            raise NotComputable(f"service {sid} has no unit cost")
        total += svc.unit_cost
    return total


def _substitutability(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    """Partners able to stand in: competence superset counts as "same"."""
    me = ctx.graph.entity(subject)
    assert isinstance(me, PartnerNode)
    vbe = ctx.graph.vbe()
    if vbe is not None:
        pool = [ctx.graph.entity(pid) for pid in vbe.partners]
    else:
        pool = list(ctx.graph.partners())
    return float(
        sum(
            1
            for other in pool
            if isinstance(other, PartnerNode)
            and other.id != subject
            and other.competences >= me.competences
        )
    )


def _efficiency_partner_count(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    node = ctx.graph.entity(subject)
    if not isinstance(node, ProcessNode):
        raise SubjectKindMismatchError(f"{subject} is not a process")
    providers = {ctx.graph.entity(sid).provider for sid in node.services}
    return float(len(providers))


def _productivity_services_offered(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    return float(sum(1 for s in ctx.graph.services() if s.provider == subject))


def _flexibility_spare_capacity(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    node = ctx.graph.entity(subject)
    assert isinstance(node, PartnerNode)
    if node.contracted_capacity is None or node.maximum_capacity is None:
        raise NotComputable(f"{subject} has no declared capacities")
    if node.contracted_capacity == 0:
        raise NotComputable(f"{subject} has zero contracted capacity")
    return 100.0 * (node.maximum_capacity - node.contracted_capacity) / node.contracted_capacity


def _declared_vs_observed_response(subject: EntityId, ctx: EvaluationContext, params: dict) -> float:
    declared = [
        float(s.declared_response_time)
        for s in _relevant_services(ctx, subject)
        if s.declared_response_time is not None
    ]
    if not declared:
        raise NotComputable(f"no declared response times for {subject}")
    declared_mean = sum(declared) / len(declared)
    if declared_mean == 0:
        raise NotComputable("declared response time averages to zero")
    observed = _avg_response_time(subject, ctx, params)
    return observed / declared_mean


def _subjects(*codes: SubjectCode) -> frozenset[SubjectCode]:
    return frozenset(codes)


BUILTINS: dict[str, BuiltinEntry] = {
    entry.name: entry
    for entry in [
        BuiltinEntry(
            name="partner_service_share",
            subjects=_subjects(SubjectCode.PARTNER, SubjectCode.PROCESS),
            performance=frozenset({"1.1"}),
            data_sources=frozenset({"1.2.2.2"}),
            unit="ratio",
            direction=Direction.MAXIMIZE,
            fn=_partner_service_share,
            description="Share of a process's services provided by one partner.",
        ),
        BuiltinEntry(
            name="vo_overlap_degree",
            subjects=_subjects(SubjectCode.VO),
            performance=frozenset({"1.1"}),
            data_sources=frozenset({"1.2.3"}),
            unit="partners",
            direction=Direction.MINIMIZE,
            fn=_vo_overlap_degree,
            description="Partners shared with another VO; normalized=true gives Jaccard.",
        ),
        BuiltinEntry(
            name="partner_experience",
            subjects=_subjects(SubjectCode.PARTNER),
            performance=frozenset({"1.2"}),
            data_sources=frozenset({"1.2.2.1"}),
            unit="vos",
            direction=Direction.MAXIMIZE,
            fn=_partner_experience,
            description="Distinct past VOs the partner participated in.",
        ),
        BuiltinEntry(
            name="trust_level",
            subjects=_subjects(SubjectCode.PARTNER),
            performance=frozenset({"1.2"}),
            data_sources=frozenset({"1.2.3"}),
            unit="score",
            direction=Direction.MAXIMIZE,
            fn=_trust_level,
            description="Mean weight of inbound trust relations.",
        ),
        BuiltinEntry(
            name="multi_vo_partner_count",
            subjects=_subjects(SubjectCode.VBE),
            performance=frozenset({"1.2"}),
            data_sources=frozenset({"1.2.3"}),
            unit="partners",
            direction=Direction.MAXIMIZE,
            fn=_multi_vo_partner_count,
            description="Partners involved in two or more current VOs.",
        ),
        BuiltinEntry(
            name="avg_partners_per_vo",
            subjects=_subjects(SubjectCode.VBE),
            performance=frozenset({"1.1"}),
            data_sources=frozenset({"1.2.3"}),
            unit="partners",
            direction=Direction.MAXIMIZE,
            fn=_avg_partners_per_vo,
            description="Mean VO partner-set size across the VBE.",
        ),
        BuiltinEntry(
            name="failure_rate",
            subjects=_subjects(SubjectCode.PARTNER, SubjectCode.PROCESS),
            performance=frozenset({"2.1"}),
            data_sources=frozenset({"1.2.1", "1.2.2.1"}),
            unit="ratio",
            direction=Direction.MINIMIZE,
            fn=_failure_rate,
            description="Non-success share of attributed events in the window.",
        ),
        BuiltinEntry(
            name="avg_response_time",
            subjects=_subjects(SubjectCode.PARTNER, SubjectCode.PROCESS),
            performance=frozenset({"2.5"}),
            data_sources=frozenset({"1.2.1"}),
            unit="ms",
            direction=Direction.MINIMIZE,
            fn=_avg_response_time,
            description="Mean completed-minus-requested time over the window.",
        ),
        BuiltinEntry(
            name="process_total_cost",
            subjects=_subjects(SubjectCode.PROCESS),
            performance=frozenset({"2.6"}),
            data_sources=frozenset({"1.2.2.2"}),
            unit="money",
            direction=Direction.MINIMIZE,
            fn=_process_total_cost,
            description="Unit costs summed over the service list.",
        ),
        BuiltinEntry(
            name="substitutability",
            subjects=_subjects(SubjectCode.PARTNER),
            performance=frozenset({"2.3"}),
            data_sources=frozenset({"1.2.2.3"}),
            unit="partners",
            direction=Direction.MAXIMIZE,
            fn=_substitutability,
            description="Other VBE partners whose competences cover the subject's.",
        ),
        BuiltinEntry(
            name="efficiency_partner_count",
            subjects=_subjects(SubjectCode.PROCESS),
            performance=frozenset({"2.4"}),
            data_sources=frozenset({"1.2.2.2"}),
            unit="partners",
            direction=Direction.MINIMIZE,
            fn=_efficiency_partner_count,
            description="Distinct providers involved in a process.",
        ),
        BuiltinEntry(
            name="productivity_services_offered",
            subjects=_subjects(SubjectCode.PARTNER),
            performance=frozenset({"2.7"}),
            data_sources=frozenset({"1.2.2.3"}),
            unit="services",
            direction=Direction.MAXIMIZE,
            fn=_productivity_services_offered,
            description="Services the partner offers to the network.",
        ),
        BuiltinEntry(
            name="flexibility_spare_capacity",
            subjects=_subjects(SubjectCode.PARTNER),
            performance=frozenset({"2.2"}),
            data_sources=frozenset({"1.1.2"}),
            unit="%",
            direction=Direction.MAXIMIZE,
            fn=_flexibility_spare_capacity,
            description="Spare capacity over contracted, as a percentage.",
        ),
        BuiltinEntry(
            name="declared_vs_observed_response",
            subjects=_subjects(SubjectCode.PARTNER),
            performance=frozenset({"2.5", "2.1"}),
            data_sources=frozenset({"1.2.2.2", "1.2.1"}),
            unit="ratio",
            direction=Direction.MINIMIZE,
            fn=_declared_vs_observed_response,
            description="Observed mean response over declared mean response.",
        ),
    ]
}


def builtin(
    name: str,
    subject: EntityId,
    ctx: EvaluationContext,
    params: Optional[dict] = None,
) -> IndicatorValue:
    """Evaluate a catalog indicator for a subject."""
    entry = BUILTINS.get(name)
    if entry is None:
        raise UnknownBuiltinError(f"no built-in indicator {name!r}")
    if not ctx.graph.has(subject):
        raise UnknownEntityError(f"no entity {subject}")
    if subject.kind is EntityKind.SERVICE or SubjectCode(subject.kind.value) not in entry.subjects:
        raise SubjectKindMismatchError(
            f"{name} applies to {sorted(s.value for s in entry.subjects)}, "
            f"not {subject.kind.value}"
        )
    value = entry.fn(subject, ctx, params or {})
    return _value(ctx, name, subject, entry.unit, value)


# -- compiled KPI expressions ---------------------------------------------------


@dataclass(frozen=True)
class CompiledBuiltin:
    entry: BuiltinEntry


@dataclass(frozen=True)
class CompiledExpr:
    ast: Expr


Compiled = Union[CompiledBuiltin, CompiledExpr]

BUILTIN_PREFIX = "builtin:"


def compile_expression(text: str) -> Compiled:
    """Compile KPI expression text: either 'builtin:<name>' or language text."""
    if text.startswith(BUILTIN_PREFIX):
        name = text[len(BUILTIN_PREFIX):]
        entry = BUILTINS.get(name)
        if entry is None:
            raise UnknownBuiltinError(f"no built-in indicator {name!r}")
        return CompiledBuiltin(entry)
    return CompiledExpr(expressions.parse(text))


def evaluate_kpi(
    definition: KpiDefinition,
    subject: EntityId,
    ctx: EvaluationContext,
    params: Optional[dict] = None,
) -> IndicatorValue:
    """Evaluate a registered KPI definition for a subject."""
    if not ctx.graph.has(subject):
        raise UnknownEntityError(f"no entity {subject}")
    if (
        subject.kind is EntityKind.SERVICE
        or SubjectCode(subject.kind.value) not in definition.subjects
    ):
        raise SubjectKindMismatchError(
            f"KPI {definition.kpi_id!r} does not measure {subject.kind.value} subjects"
        )
    compiled = compile_expression(definition.expression)
    if isinstance(compiled, CompiledBuiltin):
        value = compiled.entry.fn(subject, ctx, params or {})
        unit = definition.unit or compiled.entry.unit
    else:
        value = expressions.evaluate(compiled.ast, subject, ctx, params)
        unit = definition.unit
    return _value(ctx, definition.kpi_id, subject, unit, value)


def builtin_kpi_definitions(scope: ScopeCode = GLOBAL_SCOPE) -> list[KpiDefinition]:
    """One ready-to-register KPI definition per catalog entry."""
    return [
        KpiDefinition(
            kpi_id=entry.name,
            name=entry.description or entry.name.replace("_", " "),
            data_sources=entry.data_sources,
            subjects=entry.subjects,
            scope=scope,
            performance=entry.performance,
            expression=BUILTIN_PREFIX + entry.name,
            unit=entry.unit,
            direction=entry.direction,
        )
        for entry in BUILTINS.values()
    ]
