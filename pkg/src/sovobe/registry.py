"""KPI definition registry.

Stores indicator definitions classified on all four taxonomy axes, rejects
anything that targets a single service (services get SLAs, compositions get
KPIs), and resolves which KPIs apply to a subject under the global /
standard / custom scope rules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Optional

from . import taxonomy
from .errors import (
    DuplicateIdError,
    ExpressionCompileError,
    InvalidSpecError,
    InvalidSubjectServiceError,
    SovobeError,
    UnknownEntityError,
    UnknownKpiError,
    UnknownTaxonomyCodeError,
)
from .graph import EntityId, EntityKind, ProcessNode, SovobeGraph, VBENode, VONode
from .taxonomy import ScopeKind, SubjectCode


class Direction(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


def parse_subject_code(text: str) -> SubjectCode:
    """Subject axis parser; the single place the service exclusion bites."""
    if text == "service":
        raise InvalidSubjectServiceError(
            "KPIs measure compositions; a single service is SLA territory"
        )
    try:
        return SubjectCode(text)
    except ValueError:
        raise UnknownTaxonomyCodeError(f"unknown subject code {text!r}") from None


@dataclass(frozen=True)
class ScopeCode:
    """global, standard (bound to one VBE), or custom (bound to one VO)."""

    kind: ScopeKind
    ref: Optional[EntityId] = None  # VBE id for standard, VO id for custom

    def __post_init__(self):
        if self.kind is ScopeKind.GLOBAL and self.ref is not None:
            raise ValueError("global scope carries no reference")
        if self.kind is ScopeKind.STANDARD and (
            self.ref is None or self.ref.kind is not EntityKind.VBE
        ):
            raise ValueError("standard scope must reference a VBE")
        if self.kind is ScopeKind.CUSTOM and (
            self.ref is None or self.ref.kind is not EntityKind.VO
        ):
            raise ValueError("custom scope must reference a VO")


GLOBAL_SCOPE = ScopeCode(ScopeKind.GLOBAL)


@dataclass(frozen=True)
class Bound:
    """Accepted range for an indicator value: at-least / at-most / between."""

    kind: str  # "at-least" | "at-most" | "between"
    value: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if self.kind in ("at-least", "at-most"):
            if self.value is None:
                raise InvalidSpecError(f"bound {self.kind} needs a value")
        elif self.kind == "between":
            if self.lo is None or self.hi is None:
                raise InvalidSpecError("between bound needs lo and hi")
            if self.lo > self.hi:
                raise InvalidSpecError("between bound needs lo <= hi")
        else:
            raise InvalidSpecError(f"unknown bound kind {self.kind!r}")

    def satisfied(self, value: float) -> bool:
        if self.kind == "at-least":
            return value >= self.value
        if self.kind == "at-most":
            return value <= self.value
        return self.lo <= value <= self.hi

    def signed_gap(self, value: float) -> float:
        """Distance to the nearest satisfying value; positive means violated."""
        if self.kind == "at-least":
            return self.value - value
        if self.kind == "at-most":
            return value - self.value
        if value < self.lo:
            return self.lo - value
        if value > self.hi:
            return value - self.hi
        return -min(value - self.lo, self.hi - value)

    def nearest_edge(self, value: float) -> float:
        """The bound value closest to ``value``; normalization reference."""
        if self.kind == "at-least":
            return self.value
        if self.kind == "at-most":
            return self.value
        if value < self.lo:
            return self.lo
        if value > self.hi:
            return self.hi
        return self.lo if (value - self.lo) <= (self.hi - value) else self.hi


def normalized_gap(gap: float, reference: float) -> float:
    """Make gaps on different units comparable: gap / max(|reference|, 1)."""
    return gap / max(abs(reference), 1.0)


@dataclass(frozen=True)
class KpiDefinition:
    """A registered indicator: expression plus four-axis classification."""

    kpi_id: str
    name: str
    data_sources: frozenset[str]
    subjects: frozenset[SubjectCode]
    scope: ScopeCode
    performance: frozenset[str]
    expression: str  # expression text, or "builtin:<catalog name>"
    unit: str = ""
    direction: Direction = Direction.MAXIMIZE
    target: Optional[float] = None
    tolerance: float = 0.0


@dataclass(frozen=True)
class PerformanceRequirement:
    """One expected-value constraint: KPI + subject + accepted bound."""

    kpi_id: str
    subject: EntityId
    bound: Bound
    params: dict = field(default_factory=dict, hash=False, compare=False)


@dataclass(frozen=True)
class Classification:
    """Four-axis view of one KPI, closed under the code hierarchy."""

    kpi_id: str
    data_sources: frozenset[str]
    subjects: frozenset[SubjectCode]
    scope: ScopeCode
    performance: frozenset[str]
    structural: bool
    operational: bool


@dataclass(frozen=True)
class KpiFilter:
    """Partial classification; every provided axis must match."""

    data_sources: Optional[frozenset[str]] = None
    subjects: Optional[frozenset[SubjectCode]] = None
    scope_kind: Optional[ScopeKind] = None
    scope_ref: Optional[EntityId] = None
    performance: Optional[frozenset[str]] = None


class KpiRegistry:
    """Registration is the single write path, so the no-service-subject
    invariant holds system-wide. Reads are safe from any thread."""

    def __init__(
        self,
        graph_provider: Optional[Callable[[], SovobeGraph]] = None,
        expression_compiler: Optional[Callable[[str], object]] = None,
    ):
        # Compiler is injected to keep this module independent of the
        # indicator engine; the package wires indicators.compile_expression.
        self._defs: dict[str, KpiDefinition] = {}
        self._graph_provider = graph_provider
        if expression_compiler is None:
            from .indicators import compile_expression

            expression_compiler = compile_expression
        self._compile = expression_compiler

    # -- write path --------------------------------------------------------

    def register(self, definition: KpiDefinition) -> str:
        if definition.kpi_id in self._defs:
            raise DuplicateIdError(f"KPI {definition.kpi_id!r} already registered")
        if not definition.subjects:
            raise InvalidSpecError("a KPI needs at least one subject")
        for subject in definition.subjects:
            if not isinstance(subject, SubjectCode):
                parse_subject_code(str(subject))
        if not definition.data_sources:
            raise InvalidSpecError("a KPI needs at least one data source")
        for code in definition.data_sources:
            taxonomy.check_data_source(code)
        if not definition.performance:
            raise InvalidSpecError("a KPI needs at least one performance code")
        for code in definition.performance:
            taxonomy.check_performance(code)
        if definition.tolerance < 0:
            raise InvalidSpecError("tolerance must be non-negative")
        self._check_scope_refs(definition.scope)
        try:
            self._compile(definition.expression)
        except SovobeError as exc:
            raise ExpressionCompileError(
                f"KPI {definition.kpi_id!r}: {exc.message}"
            ) from exc
        self._defs[definition.kpi_id] = definition
        return definition.kpi_id

    def _check_scope_refs(self, scope: ScopeCode) -> None:
        if scope.kind is ScopeKind.GLOBAL or self._graph_provider is None:
            return
        graph = self._graph_provider()
        if scope.ref is not None and not graph.has(scope.ref):
            raise UnknownEntityError(f"scope references missing entity {scope.ref}")

    # -- reads ---------------------------------------------------------------

    def get(self, kpi_id: str) -> KpiDefinition:
        try:
            return self._defs[kpi_id]
        except KeyError:
            raise UnknownKpiError(f"no KPI {kpi_id!r}") from None

    def __contains__(self, kpi_id: str) -> bool:
        return kpi_id in self._defs

    def ids(self) -> list[str]:
        return sorted(self._defs)

    def definitions(self) -> Iterator[KpiDefinition]:
        for kpi_id in sorted(self._defs):
            yield self._defs[kpi_id]

    def classify(self, kpi_id: str) -> Classification:
        d = self.get(kpi_id)
        performance = taxonomy.expand(d.performance)
        return Classification(
            kpi_id=d.kpi_id,
            data_sources=taxonomy.expand(d.data_sources),
            subjects=d.subjects,
            scope=d.scope,
            performance=performance,
            structural=taxonomy.is_structural(performance),
            operational=taxonomy.is_operational(performance),
        )

    def applicable_kpis(self, subject: EntityId, graph: SovobeGraph) -> set[str]:
        """KPIs whose subject axis covers ``subject`` and whose scope
        contains it: global always; standard when the subject sits inside
        the referenced VBE; custom when it is or sits inside the VO."""
        if not graph.has(subject):
            raise UnknownEntityError(f"no entity {subject}")
        if subject.kind is EntityKind.SERVICE:
            return set()
        subject_code = SubjectCode(subject.kind.value)
        return {
            d.kpi_id
            for d in self._defs.values()
            if subject_code in d.subjects and _scope_contains(d.scope, subject, graph)
        }

    def list_kpis(self, flt: KpiFilter = KpiFilter()) -> set[str]:
        """KPIs matching every provided axis constraint; hierarchical codes
        match their descendants (filter "1.2" matches a KPI tagged "1.2.2.4")."""
        if flt.data_sources:
            for code in flt.data_sources:
                taxonomy.check_data_source(code)
        if flt.performance:
            for code in flt.performance:
                taxonomy.check_performance(code)
        return {d.kpi_id for d in self._defs.values() if _matches(d, flt)}


def _matches(d: KpiDefinition, flt: KpiFilter) -> bool:
    if flt.data_sources is not None:
        for wanted in flt.data_sources:
            if not any(taxonomy.is_descendant_or_equal(t, wanted) for t in d.data_sources):
                return False
    if flt.performance is not None:
        for wanted in flt.performance:
            if not any(taxonomy.is_descendant_or_equal(t, wanted) for t in d.performance):
                return False
    if flt.subjects is not None and not flt.subjects.issubset(d.subjects):
        return False
    if flt.scope_kind is not None and d.scope.kind is not flt.scope_kind:
        return False
    if flt.scope_ref is not None and d.scope.ref != flt.scope_ref:
        return False
    return True


def _scope_contains(scope: ScopeCode, subject: EntityId, graph: SovobeGraph) -> bool:
    if scope.kind is ScopeKind.GLOBAL:
        return True
    if scope.ref is None or not graph.has(scope.ref):
        return False
    if scope.kind is ScopeKind.STANDARD:
        vbe = graph.entity(scope.ref)
        assert isinstance(vbe, VBENode)
        if subject == vbe.id:
            return True
        if subject.kind is EntityKind.VO:
            return subject in vbe.vos
        if subject.kind is EntityKind.PARTNER:
            return subject in vbe.partners
        if subject.kind is EntityKind.PROCESS:
            proc = graph.entity(subject)
            assert isinstance(proc, ProcessNode)
            if proc.owning_vo is not None and proc.owning_vo in vbe.vos:
                return True
            for vid in vbe.vos:
                if graph.has(vid):
                    vo = graph.entity(vid)
                    assert isinstance(vo, VONode)
                    if subject in vo.processes:
                        return True
        return False
    # custom: the VO itself or anything it is composed of
    vo = graph.entity(scope.ref)
    assert isinstance(vo, VONode)
    if subject == vo.id:
        return True
    if subject.kind is EntityKind.PARTNER:
        return subject in vo.partners
    if subject.kind is EntityKind.PROCESS:
        return subject in vo.processes
    return False
