"""Performance management engine for service-oriented VO breeding environments.

Subsystems:

* :mod:`sovobe.graph` — typed entity graph plus social-network overlay
* :mod:`sovobe.taxonomy` / :mod:`sovobe.registry` — KPI classification and registry
* :mod:`sovobe.expressions` / :mod:`sovobe.indicators` — evaluation engine
* :mod:`sovobe.sources` — data-source adapters (events, history, SLA, opinions,
  control connectors)
* :mod:`sovobe.anticipation` — candidate VO evaluation and ranking
* :mod:`sovobe.monitoring` — windowed deviation detection and alerting
* :mod:`sovobe.workspace` / :mod:`sovobe.scenario` — persistence and synthetic data
* :mod:`sovobe.server` / :mod:`sovobe.cli` — HTTP and command-line surfaces
"""

__version__ = "0.1.0"

from .graph import (  # noqa: F401
    ComponentLevel,
    EntityId,
    EntityKind,
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
from .indicators import (  # noqa: F401
    BUILTINS,
    EvalMode,
    EvaluationContext,
    IndicatorValue,
    builtin,
    builtin_kpi_definitions,
    evaluate_kpi,
)
from .registry import (  # noqa: F401
    Bound,
    Direction,
    KpiDefinition,
    KpiFilter,
    KpiRegistry,
    PerformanceRequirement,
    ScopeCode,
)
from .sources import (  # noqa: F401
    CollaborationEvent,
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
)
from .taxonomy import ScopeKind, SubjectCode  # noqa: F401
