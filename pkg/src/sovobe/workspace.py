"""Workspace: one VBE's full state, on disk and in memory.

On disk a workspace is a directory with a manifest naming the data files:

    manifest.json   {"format": "sovobe-workspace", "version": 1, "files": {...}}
    graph.json      entity graph snapshot (validated against the JSON Schema)
    kpis.json       KPI catalog (array of definitions)
    events.jsonl    collaboration event log, replayable in sequence order
    history.json / slas.json / opinions.json
    monitors.json   monitor specs

In memory it wires the graph, registry, stores, and monitor engine
together and serializes all writes through one lock, so readers always
see complete snapshots.
"""

from __future__ import annotations

import json
import threading
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema

from . import serde
from .anticipation import (
    Ranking,
    VOCandidate,
    compare_candidates,
    evaluate_candidate,
)
from .errors import InvalidDocumentError, SovobeError
from .graph import EntityId, SovobeGraph
from .indicators import (
    EvalMode,
    EvaluationContext,
    IndicatorValue,
    evaluate_kpi,
)
from .monitoring import DeviationAlert, MonitorEngine, MonitorSpec
from .registry import KpiDefinition, KpiRegistry
from .sources import (
    AdapterSet,
    ConnectorRegistry,
    EventStore,
    HistoryStore,
    OpinionStore,
    SlaStore,
    Window,
    source_coverage,
)

MANIFEST_FORMAT = "sovobe-workspace"
MANIFEST_VERSION = 1

DEFAULT_FILES = {
    "graph": "graph.json",
    "kpis": "kpis.json",
    "events": "events.jsonl",
    "history": "history.json",
    "slas": "slas.json",
    "opinions": "opinions.json",
    "monitors": "monitors.json",
}


def _graph_schema() -> dict:
    text = resources.files("sovobe").joinpath("schemas/graph.schema.json").read_text()
    return json.loads(text)


class Workspace:
    """Single-VBE engine state with a single-writer concurrency contract."""

    def __init__(self, graph: Optional[SovobeGraph] = None):
        self._lock = threading.Lock()
        self.graph: SovobeGraph = graph or SovobeGraph.empty()
        self.registry = KpiRegistry(graph_provider=lambda: self.graph)
        self.events = EventStore(graph_provider=lambda: self.graph)
        self.history = HistoryStore()
        self.sla = SlaStore()
        self.opinions = OpinionStore()
        self.connectors = ConnectorRegistry()
        self.monitor_engine = MonitorEngine(
            self.registry, self.adapters(), lambda: self.graph
        )

    # -- wiring ------------------------------------------------------------

    def adapters(self) -> AdapterSet:
        return AdapterSet(
            events=self.events,
            history=self.history,
            sla=self.sla,
            opinions=self.opinions,
            graph=self.graph,
            connectors=self.connectors,
        )

    def context(
        self,
        mode: EvalMode = EvalMode.MONITORING,
        window: Optional[Window] = None,
        as_of: int = 0,
    ) -> EvaluationContext:
        return EvaluationContext(
            graph=self.graph,
            events=self.events,
            history=self.history,
            sla=self.sla,
            opinions=self.opinions,
            connectors=self.connectors,
            mode=mode,
            window=window,
            as_of=as_of,
        )

    # -- writes (serialized) -----------------------------------------------

    def set_graph(self, graph: SovobeGraph) -> None:
        with self._lock:
            self.graph = graph

    def register_kpi(self, definition: KpiDefinition) -> str:
        with self._lock:
            return self.registry.register(definition)

    def ingest_event(self, event) -> int:
        with self._lock:
            return self.events.ingest(event)

    def attach_monitor(self, spec: MonitorSpec) -> str:
        with self._lock:
            return self.monitor_engine.attach(spec)

    def replace_monitors(self, specs: list[MonitorSpec]) -> list[str]:
        with self._lock:
            return self.monitor_engine.replace_all(specs)

    def tick(self, now: int) -> list[DeviationAlert]:
        with self._lock:
            return self.monitor_engine.tick(now)

    # -- reads ---------------------------------------------------------------

    def evaluate(
        self,
        kpi_id: str,
        subject: EntityId,
        window: Optional[Window] = None,
        params: Optional[dict] = None,
        mode: EvalMode = EvalMode.MONITORING,
        as_of: int = 0,
    ) -> IndicatorValue:
        definition = self.registry.get(kpi_id)
        ctx = self.context(mode=mode, window=window, as_of=as_of)
        return evaluate_kpi(definition, subject, ctx, params=params)

    def anticipate(self, candidate: VOCandidate, as_of: int = 0):
        return evaluate_candidate(
            candidate, self.graph, self.adapters(), self.registry, as_of=as_of
        )

    def compare(self, candidates: list[VOCandidate], as_of: int = 0) -> Ranking:
        return compare_candidates(
            candidates, self.graph, self.adapters(), self.registry, as_of=as_of
        )

    def coverage(self, kpi_id: str):
        return source_coverage(self.registry.get(kpi_id), self.adapters())

    # -- persistence ---------------------------------------------------------

    def save(self, directory: str | Path) -> Path:
        """Write the whole workspace; output is deterministic per state."""
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        files = dict(DEFAULT_FILES)
        manifest = {
            "format": MANIFEST_FORMAT,
            "version": MANIFEST_VERSION,
            "files": files,
        }
        (root / "manifest.json").write_text(serde.canonical_json(manifest))
        (root / files["graph"]).write_text(
            serde.canonical_json(serde.graph_to_dict(self.graph))
        )
        (root / files["kpis"]).write_text(
            serde.canonical_json([serde.kpi_to_dict(d) for d in self.registry.definitions()])
        )
        lines = [
            json.dumps(serde.event_to_dict(e), sort_keys=True)
            for e in self.events.all_events()
        ]
        (root / files["events"]).write_text("".join(line + "\n" for line in lines))
        (root / files["history"]).write_text(
            serde.canonical_json(
                sorted(
                    (serde.history_to_dict(r) for r in self.history.all_records()),
                    key=lambda d: (d["partner"], d["vo-id"]),
                )
            )
        )
        (root / files["slas"]).write_text(
            serde.canonical_json(
                sorted(
                    (serde.sla_to_dict(r) for r in self.sla.all_records()),
                    key=lambda d: (d["service"], d.get("valid-from") or 0),
                )
            )
        )
        (root / files["opinions"]).write_text(
            serde.canonical_json(
                sorted(
                    (serde.opinion_to_dict(r) for r in self.opinions.all_records()),
                    key=lambda d: (d["about"], d["at"], d["rater-role"]),
                )
            )
        )
        (root / files["monitors"]).write_text(
            serde.canonical_json(
                [serde.monitor_to_dict(m) for m in self.monitor_engine.monitors()]
            )
        )
        return root

    @staticmethod
    def load(directory: str | Path) -> "Workspace":
        root = Path(directory)
        manifest_path = root / "manifest.json"
        if not manifest_path.exists():
            raise InvalidDocumentError(f"no manifest.json in {root}")
        manifest = _read_json(manifest_path)
        if manifest.get("format") != MANIFEST_FORMAT:
            raise InvalidDocumentError(f"unknown workspace format {manifest.get('format')!r}")
        if manifest.get("version") != MANIFEST_VERSION:
            raise InvalidDocumentError(
                f"workspace version {manifest.get('version')} does not match "
                f"loader version {MANIFEST_VERSION}"
            )
        files = {**DEFAULT_FILES, **manifest.get("files", {})}

        graph_doc = _read_json(root / files["graph"])
        try:
            jsonschema.validate(graph_doc, _graph_schema())
        except jsonschema.ValidationError as exc:
            raise InvalidDocumentError(f"graph snapshot invalid: {exc.message}") from None
        ws = Workspace(graph=serde.graph_from_dict(graph_doc))

        for doc in _read_json_optional(root / files["kpis"], []):
            ws.registry.register(serde.kpi_from_dict(doc))
        events_path = root / files["events"]
        if events_path.exists():
            for line in events_path.read_text().splitlines():
                if line.strip():
                    ws.events.ingest(serde.event_from_dict(json.loads(line)))
        history_docs = _read_json_optional(root / files["history"], [])
        if history_docs:
            ws.history.import_records([serde.history_from_dict(d) for d in history_docs])
        for doc in _read_json_optional(root / files["slas"], []):
            ws.sla.register(serde.sla_from_dict(doc))
        for doc in _read_json_optional(root / files["opinions"], []):
            ws.opinions.record(serde.opinion_from_dict(doc))
        for doc in _read_json_optional(root / files["monitors"], []):
            ws.monitor_engine.attach(serde.monitor_from_dict(doc))
        return ws


def _read_json(path: Path):
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise InvalidDocumentError(f"missing workspace file {path.name}") from None
    except json.JSONDecodeError as exc:
        raise InvalidDocumentError(f"{path.name} is not valid JSON: {exc}") from None


def _read_json_optional(path: Path, default):
    if not path.exists():
        return default
    return _read_json(path)
