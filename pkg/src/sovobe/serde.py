"""JSON wire formats for every persisted and transported object.

Field names are kebab-case, entity ids are "kind:local-id" strings, money
is a plain number, timestamps and durations are UTC milliseconds. The same
shapes serve workspace files, the HTTP API, and the CLI, so the three
surfaces cannot drift. Optional fields are omitted when absent, arrays are
sorted on natural keys (except event logs, which keep ingestion order),
and ``canonical_json`` pins key order, so save -> load -> save is
byte-stable.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .anticipation import (
    AnticipationReport,
    ProcessPlan,
    Ranking,
    ReportRow,
    ServiceAssignment,
    VOCandidate,
)
from .errors import InvalidDocumentError
from .graph import (
    EntityId,
    PartnerNode,
    ProcessNode,
    Relation,
    RelationType,
    ServiceNode,
    SovobeGraph,
    VBENode,
    VONode,
    VOStatus,
    build_graph,
)
from .indicators import IndicatorValue
from .monitoring import (
    DeviationAlert,
    EvaluationRecord,
    MonitorSpec,
    Remediation,
    Severity,
    SeverityPolicy,
)
from .registry import (
    Bound,
    Direction,
    KpiDefinition,
    PerformanceRequirement,
    ScopeCode,
    parse_subject_code,
)
from .sources import (
    CollaborationEvent,
    HistoryRecord,
    OpinionRecord,
    Outcome,
    SlaRecord,
)
from .taxonomy import ScopeKind


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _eid(value: Optional[EntityId]) -> Optional[str]:
    return None if value is None else str(value)


def _parse_eid(value: str, what: str) -> EntityId:
    try:
        return EntityId.parse(value)
    except ValueError as exc:
        raise InvalidDocumentError(f"{what}: {exc}") from None


def _require(doc: dict, key: str, what: str) -> Any:
    if key not in doc:
        raise InvalidDocumentError(f"{what} is missing required field {key!r}")
    return doc[key]


def _put(doc: dict, key: str, value: Any) -> None:
    if value is not None:
        doc[key] = value


# -- graph snapshot --------------------------------------------------------


def graph_to_dict(graph: SovobeGraph) -> dict:
    partners, services, processes, vos, vbes = [], [], [], [], []
    for node in sorted(graph.entities.values(), key=lambda n: str(n.id)):
        if isinstance(node, PartnerNode):
            d = {"id": str(node.id), "competences": sorted(node.competences)}
            _put(d, "contracted-capacity", node.contracted_capacity)
            _put(d, "maximum-capacity", node.maximum_capacity)
            partners.append(d)
        elif isinstance(node, ServiceNode):
            d = {
                "id": str(node.id),
                "provider": str(node.provider),
                "competences-required": sorted(node.competences_required),
            }
            _put(d, "declared-response-time", node.declared_response_time)
            _put(d, "declared-failure-rate", node.declared_failure_rate)
            _put(d, "unit-cost", node.unit_cost)
            if node.attributes:
                d["attributes"] = dict(node.attributes)
            services.append(d)
        elif isinstance(node, ProcessNode):
            d = {"id": str(node.id), "services": [str(s) for s in node.services]}
            _put(d, "owning-vo", _eid(node.owning_vo))
            processes.append(d)
        elif isinstance(node, VONode):
            vos.append(
                {
                    "id": str(node.id),
                    "partners": sorted(str(p) for p in node.partners),
                    "processes": sorted(str(p) for p in node.processes),
                    "status": node.status.value,
                }
            )
        elif isinstance(node, VBENode):
            vbes.append(
                {
                    "id": str(node.id),
                    "vos": sorted(str(v) for v in node.vos),
                    "partners": sorted(str(p) for p in node.partners),
                }
            )
    return {
        "revision": graph.revision,
        "vbe": vbes[0] if len(vbes) == 1 else (vbes or None),
        "partners": partners,
        "services": services,
        "processes": processes,
        "vos": vos,
        "relations": [relation_to_dict(r) for r in graph.relations],
    }


def relation_to_dict(r: Relation) -> dict:
    d = {
        "from": str(r.from_),
        "to": str(r.to),
        "relation-type": r.relation_type.value,
        "weight": r.weight,
    }
    if r.attributes:
        d["attributes"] = dict(r.attributes)
    return d


def graph_from_dict(doc: dict) -> SovobeGraph:
    import dataclasses

    what = "graph snapshot"
    nodes: list = []
    for p in doc.get("partners", []):
        nodes.append(
            PartnerNode(
                id=_parse_eid(_require(p, "id", what), what),
                competences=frozenset(p.get("competences", [])),
                contracted_capacity=p.get("contracted-capacity"),
                maximum_capacity=p.get("maximum-capacity"),
            )
        )
    for s in doc.get("services", []):
        nodes.append(
            ServiceNode(
                id=_parse_eid(_require(s, "id", what), what),
                provider=_parse_eid(_require(s, "provider", what), what),
                declared_response_time=s.get("declared-response-time"),
                declared_failure_rate=s.get("declared-failure-rate"),
                unit_cost=s.get("unit-cost"),
                competences_required=frozenset(s.get("competences-required", [])),
                attributes=s.get("attributes", {}),
            )
        )
    for p in doc.get("processes", []):
        nodes.append(
            ProcessNode(
                id=_parse_eid(_require(p, "id", what), what),
                services=tuple(_parse_eid(x, what) for x in _require(p, "services", what)),
                owning_vo=None
                if p.get("owning-vo") is None
                else _parse_eid(p["owning-vo"], what),
            )
        )
    for v in doc.get("vos", []):
        nodes.append(
            VONode(
                id=_parse_eid(_require(v, "id", what), what),
                partners=frozenset(_parse_eid(x, what) for x in _require(v, "partners", what)),
                processes=frozenset(_parse_eid(x, what) for x in v.get("processes", [])),
                status=VOStatus(v.get("status", "operating")),
            )
        )
    vbe_doc = doc.get("vbe")
    vbe_docs = vbe_doc if isinstance(vbe_doc, list) else ([vbe_doc] if vbe_doc else [])
    for v in vbe_docs:
        nodes.append(
            VBENode(
                id=_parse_eid(_require(v, "id", what), what),
                vos=frozenset(_parse_eid(x, what) for x in v.get("vos", [])),
                partners=frozenset(_parse_eid(x, what) for x in v.get("partners", [])),
            )
        )
    relations = [
        Relation(
            from_=_parse_eid(_require(r, "from", what), what),
            to=_parse_eid(_require(r, "to", what), what),
            relation_type=RelationType(_require(r, "relation-type", what)),
            weight=r.get("weight", 1.0),
            attributes=r.get("attributes", {}),
        )
        for r in doc.get("relations", [])
    ]
    graph = build_graph(nodes, relations)
    return dataclasses.replace(graph, revision=doc.get("revision", graph.revision))


# -- KPI catalog -----------------------------------------------------------


def scope_to_dict(scope: ScopeCode) -> dict:
    if scope.kind is ScopeKind.STANDARD:
        return {"kind": "standard", "vbe": str(scope.ref)}
    if scope.kind is ScopeKind.CUSTOM:
        return {"kind": "custom", "vo": str(scope.ref)}
    return {"kind": "global"}


def scope_from_dict(doc: dict) -> ScopeCode:
    kind = _require(doc, "kind", "scope")
    try:
        kind = ScopeKind(kind)
    except ValueError:
        raise InvalidDocumentError(f"unknown scope kind {kind!r}") from None
    if kind is ScopeKind.STANDARD:
        return ScopeCode(kind, _parse_eid(_require(doc, "vbe", "standard scope"), "scope"))
    if kind is ScopeKind.CUSTOM:
        return ScopeCode(kind, _parse_eid(_require(doc, "vo", "custom scope"), "scope"))
    return ScopeCode(kind)


def kpi_to_dict(d: KpiDefinition) -> dict:
    doc = {
        "kpi-id": d.kpi_id,
        "name": d.name,
        "data-sources": sorted(d.data_sources),
        "subjects": sorted(s.value for s in d.subjects),
        "scope": scope_to_dict(d.scope),
        "performance": sorted(d.performance),
        "expression": d.expression,
        "unit": d.unit,
        "direction": d.direction.value,
        "tolerance": d.tolerance,
    }
    _put(doc, "target", d.target)
    return doc


def kpi_from_dict(doc: dict) -> KpiDefinition:
    what = f"KPI {doc.get('kpi-id', '?')!r}"
    return KpiDefinition(
        kpi_id=str(_require(doc, "kpi-id", what)),
        name=str(doc.get("name", doc.get("kpi-id", ""))),
        data_sources=frozenset(str(c) for c in _require(doc, "data-sources", what)),
        subjects=frozenset(
            parse_subject_code(str(s)) for s in _require(doc, "subjects", what)
        ),
        scope=scope_from_dict(doc.get("scope", {"kind": "global"})),
        performance=frozenset(str(c) for c in _require(doc, "performance", what)),
        expression=str(_require(doc, "expression", what)),
        unit=str(doc.get("unit", "")),
        direction=Direction(doc.get("direction", "maximize")),
        target=doc.get("target"),
        tolerance=float(doc.get("tolerance", 0.0)),
    )


# -- bounds and requirements ----------------------------------------------


def bound_to_dict(b: Bound) -> dict:
    if b.kind == "between":
        return {"kind": "between", "lo": b.lo, "hi": b.hi}
    return {"kind": b.kind, "value": b.value}


def bound_from_dict(doc: dict) -> Bound:
    kind = str(_require(doc, "kind", "bound"))
    if kind == "between":
        return Bound(kind, lo=doc.get("lo"), hi=doc.get("hi"))
    return Bound(kind, value=doc.get("value"))


def requirement_to_dict(r: PerformanceRequirement) -> dict:
    doc = {
        "kpi-id": r.kpi_id,
        "subject": str(r.subject),
        "bound": bound_to_dict(r.bound),
    }
    if r.params:
        doc["params"] = dict(r.params)
    return doc


def requirement_from_dict(doc: dict) -> PerformanceRequirement:
    return PerformanceRequirement(
        kpi_id=str(_require(doc, "kpi-id", "requirement")),
        subject=_parse_eid(_require(doc, "subject", "requirement"), "requirement"),
        bound=bound_from_dict(_require(doc, "bound", "requirement")),
        params=doc.get("params", {}),
    )


# -- events and stores --------------------------------------------------------


def event_to_dict(e: CollaborationEvent) -> dict:
    doc = {
        "event-id": e.event_id,
        "service": str(e.service),
        "provider": str(e.provider),
        "requested-at": e.requested_at,
        "outcome": e.outcome.value,
    }
    _put(doc, "completed-at", e.completed_at)
    _put(doc, "consumer", _eid(e.consumer))
    _put(doc, "process", _eid(e.process))
    _put(doc, "vo", _eid(e.vo))
    _put(doc, "cost", e.cost)
    return doc


def event_from_dict(doc: dict) -> CollaborationEvent:
    what = f"event {doc.get('event-id', '?')!r}"

    def opt_eid(key: str) -> Optional[EntityId]:
        return None if doc.get(key) is None else _parse_eid(doc[key], what)

    try:
        outcome = Outcome(_require(doc, "outcome", what))
    except ValueError:
        raise InvalidDocumentError(f"{what}: unknown outcome {doc['outcome']!r}") from None
    return CollaborationEvent(
        event_id=str(_require(doc, "event-id", what)),
        service=_parse_eid(_require(doc, "service", what), what),
        provider=_parse_eid(_require(doc, "provider", what), what),
        requested_at=int(_require(doc, "requested-at", what)),
        completed_at=doc.get("completed-at"),
        outcome=outcome,
        consumer=opt_eid("consumer"),
        process=opt_eid("process"),
        vo=opt_eid("vo"),
        cost=doc.get("cost"),
    )


def history_to_dict(r: HistoryRecord) -> dict:
    doc = {"partner": str(r.partner), "vo-id": r.vo_id, "role": r.role}
    summary: dict = {}
    _put(summary, "failure-rate", r.failure_rate)
    _put(summary, "avg-response-time", r.avg_response_time)
    _put(summary, "total-cost", r.total_cost)
    if summary:
        doc["outcome-summary"] = summary
    return doc


def history_from_dict(doc: dict) -> HistoryRecord:
    summary = doc.get("outcome-summary", {})
    return HistoryRecord(
        partner=_parse_eid(_require(doc, "partner", "history record"), "history record"),
        vo_id=str(_require(doc, "vo-id", "history record")),
        role=str(doc.get("role", "")),
        failure_rate=summary.get("failure-rate"),
        avg_response_time=summary.get("avg-response-time"),
        total_cost=summary.get("total-cost"),
    )


def sla_to_dict(r: SlaRecord) -> dict:
    doc = {
        "service": str(r.service),
        "provider": str(r.provider),
        "declared-response-time": r.declared_response_time,
        "declared-failure-rate": r.declared_failure_rate,
    }
    _put(doc, "agreed-cost", r.agreed_cost)
    _put(doc, "valid-from", r.valid_from)
    _put(doc, "valid-to", r.valid_to)
    return doc


def sla_from_dict(doc: dict) -> SlaRecord:
    what = "SLA record"
    return SlaRecord(
        service=_parse_eid(_require(doc, "service", what), what),
        provider=_parse_eid(_require(doc, "provider", what), what),
        declared_response_time=int(_require(doc, "declared-response-time", what)),
        declared_failure_rate=float(_require(doc, "declared-failure-rate", what)),
        agreed_cost=doc.get("agreed-cost"),
        valid_from=doc.get("valid-from"),
        valid_to=doc.get("valid-to"),
    )


def opinion_to_dict(r: OpinionRecord) -> dict:
    doc = {
        "about": str(r.about),
        "rater-role": r.rater_role,
        "score": r.score,
        "at": r.at,
    }
    if r.comment:
        doc["comment"] = r.comment
    return doc


def opinion_from_dict(doc: dict) -> OpinionRecord:
    what = "opinion record"
    return OpinionRecord(
        about=_parse_eid(_require(doc, "about", what), what),
        rater_role=str(_require(doc, "rater-role", what)),
        score=float(_require(doc, "score", what)),
        at=int(_require(doc, "at", what)),
        comment=str(doc.get("comment", "")),
    )


# -- monitors and alerts ---------------------------------------------------


def monitor_to_dict(m: MonitorSpec) -> dict:
    doc = {
        "monitor-id": m.monitor_id,
        "kpi-id": m.kpi_id,
        "subject": str(m.subject),
        "window-length": m.window_length,
        "evaluation-period": m.evaluation_period,
        "bound": bound_to_dict(m.bound),
        "remediation-hint": m.remediation_hint.value,
        "severity-policy": {"critical-at": m.severity_policy.critical_at},
        "alert-on-unknown": m.alert_on_unknown,
        "re-alert-periods": m.re_alert_periods,
    }
    if m.params:
        doc["params"] = dict(m.params)
    return doc


def monitor_from_dict(doc: dict) -> MonitorSpec:
    what = f"monitor {doc.get('monitor-id', '?')!r}"
    policy = doc.get("severity-policy", {})
    try:
        remediation = Remediation(doc.get("remediation-hint", "replace-service"))
    except ValueError:
        raise InvalidDocumentError(
            f"{what}: unknown remediation {doc['remediation-hint']!r}"
        ) from None
    return MonitorSpec(
        monitor_id=str(_require(doc, "monitor-id", what)),
        kpi_id=str(_require(doc, "kpi-id", what)),
        subject=_parse_eid(_require(doc, "subject", what), what),
        window_length=int(_require(doc, "window-length", what)),
        evaluation_period=int(_require(doc, "evaluation-period", what)),
        bound=bound_from_dict(_require(doc, "bound", what)),
        remediation_hint=remediation,
        severity_policy=SeverityPolicy(critical_at=float(policy.get("critical-at", 0.2))),
        alert_on_unknown=bool(doc.get("alert-on-unknown", False)),
        re_alert_periods=int(doc.get("re-alert-periods", 6)),
        params=doc.get("params", {}),
    )


def indicator_value_to_dict(v: IndicatorValue) -> dict:
    return {
        "value": v.value,
        "unit": v.unit,
        "kpi-id": v.kpi_id,
        "subject": str(v.subject),
        "computed-at": v.computed_at,
        "inputs-digest": v.inputs_digest,
    }


def alert_to_dict(a: DeviationAlert) -> dict:
    doc = {
        "alert-id": a.alert_id,
        "sequence": a.sequence,
        "monitor-id": a.monitor_id,
        "at": a.at,
        "observed": None if a.observed is None else indicator_value_to_dict(a.observed),
        "bound": bound_to_dict(a.bound),
        "breach-ratio": a.breach_ratio,
        "severity": a.severity.value,
        "remediation-hint": a.remediation_hint.value,
    }
    _put(doc, "reason", a.reason)
    return doc


def result_to_dict(r: EvaluationRecord) -> dict:
    doc = {
        "monitor-id": r.monitor_id,
        "at": r.at,
        "value": r.value,
        "bound": bound_to_dict(r.bound),
        "violated": r.violated,
    }
    _put(doc, "reason", r.reason)
    return doc


# -- candidates and reports ---------------------------------------------------


def candidate_to_dict(c: VOCandidate) -> dict:
    return {
        "candidate-id": c.candidate_id,
        "partners": sorted(str(p) for p in c.partners),
        "process-plan": [
            {
                "process-id": str(plan.process_id),
                "assignments": [
                    _assignment_to_dict(a) for a in plan.assignments
                ],
            }
            for plan in c.process_plan
        ],
        "requirements": [requirement_to_dict(r) for r in c.requirements],
    }


def _assignment_to_dict(a: ServiceAssignment) -> dict:
    doc = {"service": str(a.service), "provider": str(a.provider)}
    if a.declared:
        doc["declared"] = dict(a.declared)
    return doc


def candidate_from_dict(doc: dict) -> VOCandidate:
    what = f"candidate {doc.get('candidate-id', '?')!r}"
    plans = []
    for plan in doc.get("process-plan", []):
        assignments = tuple(
            ServiceAssignment(
                service=_parse_eid(_require(a, "service", what), what),
                provider=_parse_eid(_require(a, "provider", what), what),
                declared=a.get("declared", {}),
            )
            for a in _require(plan, "assignments", what)
        )
        plans.append(
            ProcessPlan(
                process_id=_parse_eid(_require(plan, "process-id", what), what),
                assignments=assignments,
            )
        )
    return VOCandidate(
        candidate_id=str(_require(doc, "candidate-id", what)),
        partners=frozenset(_parse_eid(p, what) for p in _require(doc, "partners", what)),
        process_plan=tuple(plans),
        requirements=tuple(
            requirement_from_dict(r) for r in doc.get("requirements", [])
        ),
    )


def report_row_to_dict(row: ReportRow) -> dict:
    return {
        "kpi-id": row.kpi_id,
        "subject": str(row.subject),
        "bound": bound_to_dict(row.bound),
        "value": None if row.value is None else row.value.value,
        "unit": None if row.value is None else row.value.unit,
        "reason": row.reason,
        "gap": row.gap,
        "normalized-gap": row.norm_gap,
        "pass": row.passed,
    }


def report_to_dict(report: AnticipationReport) -> dict:
    return {
        "candidate-id": report.candidate_id,
        "rows": [report_row_to_dict(r) for r in report.rows],
        "overall": report.overall.value,
    }


def ranking_to_dict(ranking: Ranking) -> dict:
    return {
        "ranking": list(ranking.ordered),
        "reports": {
            cid: report_to_dict(rep) for cid, rep in sorted(ranking.reports.items())
        },
    }
