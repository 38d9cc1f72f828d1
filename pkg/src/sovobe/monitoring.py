"""Windowed KPI monitoring with deviation alerts.

Ticking is pull-based: the caller (or the CLI's simulated-clock runner)
advances time explicitly, so every evaluation is deterministic and
testable. Each tick evaluates the monitors whose period has elapsed over
the window [now - window-length, now), logs every result, and emits a
DeviationAlert when the accepted bound is violated.

Alert flooding is kept down by severity-band deduplication: a monitor in
continuous violation re-emits only when the breach crosses a severity
band or after a configurable number of periods.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import (
    DuplicateIdError,
    InapplicableKpiError,
    InvalidSpecError,
    NotComputable,
    UnknownEntityError,
)
from .graph import EntityId, SovobeGraph
from .indicators import EvalMode, EvaluationContext, IndicatorValue, evaluate_kpi
from .registry import Bound, KpiRegistry
from .sources import AdapterSet, Window


class Severity(str, Enum):
    WARNING = "warning"
    CRITICAL = "critical"


class Remediation(str, Enum):
    """What a deviation suggests replacing (or reconsidering)."""

    REPLACE_SERVICE = "replace-service"
    REPLACE_PARTNER = "replace-partner"
    REPLACE_PROCESS = "replace-process"
    REPLACE_INFORMATION_SYSTEM = "replace-information-system"
    CHANGE_BUSINESS_GOAL = "change-business-goal"


@dataclass(frozen=True)
class SeverityPolicy:
    """Breach-ratio threshold separating warning from critical."""

    critical_at: float = 0.2

    def classify(self, breach_ratio: float) -> Severity:
        return Severity.CRITICAL if breach_ratio >= self.critical_at else Severity.WARNING


@dataclass(frozen=True)
class MonitorSpec:
    monitor_id: str
    kpi_id: str
    subject: EntityId
    window_length: int  # ms
    evaluation_period: int  # ms
    bound: Bound
    remediation_hint: Remediation = Remediation.REPLACE_SERVICE
    severity_policy: SeverityPolicy = SeverityPolicy()
    alert_on_unknown: bool = False
    re_alert_periods: int = 6  # re-emit after this many periods in violation
    params: dict = field(default_factory=dict, hash=False, compare=False)

    def __post_init__(self):
        if self.window_length <= 0 or self.evaluation_period <= 0:
            raise InvalidSpecError("window-length and evaluation-period must be positive")
        if self.re_alert_periods <= 0:
            raise InvalidSpecError("re-alert interval must be positive")


@dataclass(frozen=True)
class DeviationAlert:
    alert_id: str
    sequence: int
    monitor_id: str
    at: int
    observed: Optional[IndicatorValue]  # None only for alert-on-unknown
    bound: Bound
    breach_ratio: Optional[float]
    severity: Severity
    remediation_hint: Remediation
    reason: Optional[str] = None  # set for unknown-value alerts


@dataclass(frozen=True)
class EvaluationRecord:
    """One monitor evaluation, violation or not; the monitoring audit log."""

    monitor_id: str
    at: int
    value: Optional[float]
    reason: Optional[str]
    bound: Bound
    violated: bool


@dataclass
class _MonitorState:
    spec: MonitorSpec
    next_due: Optional[int] = None  # None: evaluate at the first tick
    last_emitted_severity: Optional[Severity] = None
    last_emitted_at: Optional[int] = None
    in_violation: bool = False


class MonitorEngine:
    """Holds monitor specs and drives their scheduled evaluation.

    tick() is externally serialized; alert reads are safe concurrently
    because alerts are append-only and sequence-numbered.
    """

    def __init__(self, registry: KpiRegistry, sources: AdapterSet, graph_provider):
        self._registry = registry
        self._sources = sources
        self._graph_provider = graph_provider
        self._monitors: dict[str, _MonitorState] = {}
        self._alerts: list[DeviationAlert] = []
        self._results: list[EvaluationRecord] = []
        self._alert_seq = itertools.count(1)
        self._last_now: Optional[int] = None

    # -- monitor management ------------------------------------------------

    def attach(self, spec: MonitorSpec) -> str:
        if spec.monitor_id in self._monitors:
            raise DuplicateIdError(f"monitor {spec.monitor_id!r} already attached")
        graph: SovobeGraph = self._graph_provider()
        if not graph.has(spec.subject):
            raise UnknownEntityError(f"monitor subject {spec.subject} not in graph")
        self._registry.get(spec.kpi_id)
        if spec.kpi_id not in self._registry.applicable_kpis(spec.subject, graph):
            raise InapplicableKpiError(
                f"KPI {spec.kpi_id!r} is not applicable to {spec.subject}"
            )
        self._monitors[spec.monitor_id] = _MonitorState(spec=spec)
        return spec.monitor_id

    def detach(self, monitor_id: str) -> None:
        self._monitors.pop(monitor_id, None)

    def replace_all(self, specs: list[MonitorSpec]) -> list[str]:
        """Hot reload: swap the whole monitor set, preserving nothing."""
        self._monitors.clear()
        return [self.attach(spec) for spec in specs]

    def monitors(self) -> list[MonitorSpec]:
        return [state.spec for state in self._monitors.values()]

    # -- ticking -------------------------------------------------------------

    def tick(self, now: int) -> list[DeviationAlert]:
        """Evaluate every due monitor at simulated time ``now``.

        ``now`` must not go backwards. Re-ticking the same instant is a
        no-op: a monitor is never evaluated twice for one due time.
        """
        if self._last_now is not None and now < self._last_now:
            raise InvalidSpecError(f"tick time went backwards: {now} < {self._last_now}")
        self._last_now = now
        emitted: list[DeviationAlert] = []
        graph: SovobeGraph = self._graph_provider()
        for monitor_id in sorted(self._monitors):
            state = self._monitors[monitor_id]
            if state.next_due is not None and now < state.next_due:
                continue
            alert = self._evaluate_monitor(state, graph, now)
            state.next_due = now + state.spec.evaluation_period
            if alert is not None:
                emitted.append(alert)
        return emitted

    def _evaluate_monitor(
        self, state: _MonitorState, graph: SovobeGraph, now: int
    ) -> Optional[DeviationAlert]:
        spec = state.spec
        ctx = EvaluationContext(
            graph=graph,
            events=self._sources.events,
            history=self._sources.history,
            sla=self._sources.sla,
            opinions=self._sources.opinions,
            connectors=self._sources.connectors,
            mode=EvalMode.MONITORING,
            window=Window(now - spec.window_length, now),
            as_of=now,
        )
        definition = self._registry.get(spec.kpi_id)
        try:
            observed = evaluate_kpi(definition, spec.subject, ctx, params=spec.params)
        except NotComputable as exc:
            self._results.append(
                EvaluationRecord(
                    monitor_id=spec.monitor_id, at=now, value=None,
                    reason=exc.reason, bound=spec.bound, violated=False,
                )
            )
            state.in_violation = False
            if spec.alert_on_unknown:
                return self._emit(state, now, None, None, Severity.WARNING, exc.reason)
            return None

        violated = not spec.bound.satisfied(observed.value)
        self._results.append(
            EvaluationRecord(
                monitor_id=spec.monitor_id, at=now, value=observed.value,
                reason=None, bound=spec.bound, violated=violated,
            )
        )
        if not violated:
            state.in_violation = False
            state.last_emitted_severity = None
            state.last_emitted_at = None
            return None

        edge = spec.bound.nearest_edge(observed.value)
        breach_ratio = abs(observed.value - edge) / max(abs(edge), 1.0)
        severity = spec.severity_policy.classify(breach_ratio)
        if state.in_violation and state.last_emitted_at is not None:
            band_change = severity is not state.last_emitted_severity
            overdue = now - state.last_emitted_at >= spec.re_alert_periods * spec.evaluation_period
            if not band_change and not overdue:
                return None  # still in the same violation episode
        state.in_violation = True
        return self._emit(state, now, observed, breach_ratio, severity, None)

    def _emit(
        self,
        state: _MonitorState,
        now: int,
        observed: Optional[IndicatorValue],
        breach_ratio: Optional[float],
        severity: Severity,
        reason: Optional[str],
    ) -> DeviationAlert:
        sequence = next(self._alert_seq)
        alert = DeviationAlert(
            alert_id=f"alert-{sequence:06d}",
            sequence=sequence,
            monitor_id=state.spec.monitor_id,
            at=now,
            observed=observed,
            bound=state.spec.bound,
            breach_ratio=breach_ratio,
            severity=severity,
            remediation_hint=state.spec.remediation_hint,
            reason=reason,
        )
        self._alerts.append(alert)
        state.last_emitted_severity = severity
        state.last_emitted_at = now
        return alert

    # -- alert consumption -----------------------------------------------------

    def alert_stream(self, from_sequence: int = 0) -> list[DeviationAlert]:
        """Alerts with sequence greater than ``from_sequence``, in order.

        Each subscriber keeps its own cursor, so delivery is at-least-once
        per subscriber and resumable.
        """
        return [a for a in self._alerts if a.sequence > from_sequence]

    def results(self) -> list[EvaluationRecord]:
        return list(self._results)
