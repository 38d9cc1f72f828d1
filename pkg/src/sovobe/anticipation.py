"""Candidate VO evaluation before creation.

A candidate (partner set + planned service assignments + performance
requirements) is laid over the committed graph as a hypothetical snapshot:
reassigned services get their new provider, planned services are created
from declared templates, the candidate VO appears with status=candidate and
joins the VBE. Every requirement's KPI is then evaluated in anticipation
mode, where operational indicators resolve against declarations and
history, never live events, so results cannot depend on the monitoring
stream. The committed graph is never touched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Sequence

from .errors import (
    HeterogeneousRequirementsError,
    EmptyInputError,
    InapplicableKpiError,
    InvalidCandidateError,
    NotComputable,
    SovobeError,
    UnknownKpiError,
)
from .graph import (
    EntityId,
    EntityKind,
    ProcessNode,
    ServiceNode,
    SovobeGraph,
    VBENode,
    VONode,
    VOStatus,
    vo_id,
)
from .indicators import EvalMode, EvaluationContext, IndicatorValue, evaluate_kpi
from .registry import (
    Bound,
    KpiRegistry,
    PerformanceRequirement,
    normalized_gap,
)
from .sources import AdapterSet


@dataclass(frozen=True)
class ServiceAssignment:
    """One planned (service, provider) pair; ``declared`` carries template
    attributes for services that do not exist in the graph yet."""

    service: EntityId
    provider: EntityId
    declared: dict = field(default_factory=dict, hash=False, compare=False)


@dataclass(frozen=True)
class ProcessPlan:
    process_id: EntityId
    assignments: tuple[ServiceAssignment, ...]

    def __post_init__(self):
        if not self.assignments:
            raise InvalidCandidateError(f"process plan {self.process_id} has no services")


@dataclass(frozen=True)
class VOCandidate:
    candidate_id: str
    partners: frozenset[EntityId]
    process_plan: tuple[ProcessPlan, ...]
    requirements: tuple[PerformanceRequirement, ...]

    @property
    def vo_id(self) -> EntityId:
        return vo_id(self.candidate_id)


@dataclass(frozen=True)
class ReportRow:
    kpi_id: str
    subject: EntityId
    bound: Bound
    value: Optional[IndicatorValue]  # None when not computable
    reason: Optional[str]  # why the value is missing
    gap: Optional[float]  # signed distance; positive means violated
    norm_gap: Optional[float]
    passed: Optional[bool]  # None when unknown

    @property
    def failed(self) -> bool:
        return self.passed is False


class Overall(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INCOMPLETE = "incomplete"


@dataclass(frozen=True)
class AnticipationReport:
    candidate_id: str
    rows: tuple[ReportRow, ...]
    overall: Overall

    @property
    def passing_count(self) -> int:
        return sum(1 for r in self.rows if r.passed)

    @property
    def failing_gap_total(self) -> float:
        return sum(r.norm_gap for r in self.rows if r.failed and r.norm_gap is not None)


def _overall(rows: Sequence[ReportRow]) -> Overall:
    if any(r.failed for r in rows):
        return Overall.FAIL
    if any(r.passed is None for r in rows):
        return Overall.INCOMPLETE
    return Overall.PASS


def build_overlay(candidate: VOCandidate, graph: SovobeGraph) -> SovobeGraph:
    """The hypothetical snapshot: committed graph + candidate composition."""
    overlay = graph
    for partner in candidate.partners:
        if not graph.has(partner):
            raise InvalidCandidateError(f"candidate partner {partner} not in graph")
    for plan in candidate.process_plan:
        for assignment in plan.assignments:
            if assignment.provider not in candidate.partners:
                raise InvalidCandidateError(
                    f"provider {assignment.provider} of {assignment.service} "
                    "is outside the candidate's partner set"
                )
            overlay = _apply_assignment(overlay, assignment)
        overlay = _apply_process(overlay, plan, candidate.vo_id)

    process_ids = frozenset(plan.process_id for plan in candidate.process_plan)
    vo = VONode(
        id=candidate.vo_id,
        partners=candidate.partners,
        processes=process_ids,
        status=VOStatus.CANDIDATE,
    )
    if overlay.has(candidate.vo_id):
        overlay = overlay.replace_entity(vo)
    else:
        overlay = overlay.add_entity(vo)

    vbe = overlay.vbe()
    if vbe is not None and candidate.vo_id not in vbe.vos:
        overlay = overlay.replace_entity(
            VBENode(
                id=vbe.id,
                vos=vbe.vos | {candidate.vo_id},
                partners=vbe.partners | candidate.partners,
            )
        )
    return overlay


def _apply_assignment(graph: SovobeGraph, assignment: ServiceAssignment) -> SovobeGraph:
    declared = assignment.declared
    if graph.has(assignment.service):
        node = graph.entity(assignment.service)
        if not isinstance(node, ServiceNode):
            raise InvalidCandidateError(f"{assignment.service} is not a service")
        updated = replace(
            node,
            provider=assignment.provider,
            declared_response_time=declared.get(
                "declared-response-time", node.declared_response_time
            ),
            declared_failure_rate=declared.get(
                "declared-failure-rate", node.declared_failure_rate
            ),
            unit_cost=declared.get("unit-cost", node.unit_cost),
        )
        return graph.replace_entity(updated) if updated != node else graph
    if assignment.service.kind is not EntityKind.SERVICE:
        raise InvalidCandidateError(f"{assignment.service} is not a service id")
    template = ServiceNode(
        id=assignment.service,
        provider=assignment.provider,
        declared_response_time=declared.get("declared-response-time"),
        declared_failure_rate=declared.get("declared-failure-rate"),
        unit_cost=declared.get("unit-cost"),
        competences_required=frozenset(declared.get("competences-required", ())),
    )
    return graph.add_entity(template)


def _apply_process(graph: SovobeGraph, plan: ProcessPlan, owner: EntityId) -> SovobeGraph:
    services = tuple(a.service for a in plan.assignments)
    node = ProcessNode(id=plan.process_id, services=services, owning_vo=None)
    if graph.has(plan.process_id):
        existing = graph.entity(plan.process_id)
        assert isinstance(existing, ProcessNode)
        node = ProcessNode(id=plan.process_id, services=services, owning_vo=existing.owning_vo)
        return graph.replace_entity(node) if node != existing else graph
    return graph.add_entity(node)


def evaluate_candidate(
    candidate: VOCandidate,
    graph: SovobeGraph,
    sources: AdapterSet,
    registry: KpiRegistry,
    as_of: int = 0,
) -> AnticipationReport:
    """Expected-vs-computed comparison for every requirement of a candidate."""
    overlay = build_overlay(candidate, graph)
    ctx = EvaluationContext(
        graph=overlay,
        events=sources.events,
        history=sources.history,
        sla=sources.sla,
        opinions=sources.opinions,
        connectors=sources.connectors,
        mode=EvalMode.ANTICIPATION,
        window=None,
        as_of=as_of,
    )
    rows = []
    for req in candidate.requirements:
        if req.kpi_id not in registry:
            raise UnknownKpiError(f"requirement references unknown KPI {req.kpi_id!r}")
        subject = req.subject if overlay.has(req.subject) else None
        if subject is None:
            raise InvalidCandidateError(f"requirement subject {req.subject} not in overlay")
        if req.kpi_id not in registry.applicable_kpis(req.subject, overlay):
            raise InapplicableKpiError(
                f"KPI {req.kpi_id!r} is not applicable to {req.subject} (scope or subject axis)"
            )
        rows.append(_evaluate_row(req, registry, ctx))
    return AnticipationReport(
        candidate_id=candidate.candidate_id,
        rows=tuple(rows),
        overall=_overall(rows),
    )


def _evaluate_row(
    req: PerformanceRequirement, registry: KpiRegistry, ctx: EvaluationContext
) -> ReportRow:
    definition = registry.get(req.kpi_id)
    try:
        value = evaluate_kpi(definition, req.subject, ctx, params=req.params)
    except NotComputable as exc:
        return ReportRow(
            kpi_id=req.kpi_id,
            subject=req.subject,
            bound=req.bound,
            value=None,
            reason=exc.reason,
            gap=None,
            norm_gap=None,
            passed=None,
        )
    gap = req.bound.signed_gap(value.value)
    reference = req.bound.nearest_edge(value.value)
    return ReportRow(
        kpi_id=req.kpi_id,
        subject=req.subject,
        bound=req.bound,
        value=value,
        reason=None,
        gap=gap,
        norm_gap=normalized_gap(gap, reference),
        passed=gap <= 0,
    )


def identify_weaknesses(report: AnticipationReport) -> list[ReportRow]:
    """Failing rows, worst normalized gap first."""
    failing = [r for r in report.rows if r.failed]
    return sorted(failing, key=lambda r: (-(r.norm_gap or 0.0), r.kpi_id, str(r.subject)))


@dataclass(frozen=True)
class Ranking:
    ordered: tuple[str, ...]  # candidate ids, best first
    reports: dict[str, AnticipationReport] = field(hash=False, compare=False, default_factory=dict)


def compare_candidates(
    candidates: Sequence[VOCandidate],
    graph: SovobeGraph,
    sources: AdapterSet,
    registry: KpiRegistry,
    as_of: int = 0,
) -> Ranking:
    """Rank candidates: most passing rows, then smallest total normalized
    failing gap, then candidate id. Total and deterministic."""
    if not candidates:
        raise EmptyInputError("no candidates to compare")
    ids = [c.candidate_id for c in candidates]
    if len(set(ids)) != len(ids):
        raise InvalidCandidateError("candidate ids must be distinct")
    reference = sorted(r.kpi_id for r in candidates[0].requirements)
    for c in candidates[1:]:
        if sorted(r.kpi_id for r in c.requirements) != reference:
            raise HeterogeneousRequirementsError(
                "candidates must share the same requirement KPI ids"
            )
    reports = {
        c.candidate_id: evaluate_candidate(c, graph, sources, registry, as_of=as_of)
        for c in candidates
    }
    ordered = sorted(
        reports.values(),
        key=lambda r: (-r.passing_count, r.failing_gap_total, r.candidate_id),
    )
    return Ranking(ordered=tuple(r.candidate_id for r in ordered), reports=reports)
