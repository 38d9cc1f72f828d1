"""HTTP surface over one workspace.

Bodies mirror the workspace file formats one-to-one; every engine error
maps to a machine-readable code plus the HTTP status from ERROR_STATUS
(documented in docs/api.md). Writes go through the workspace's
single-writer lock; reads evaluate against immutable snapshots.

Ticking is simulated-time only (POST /tick carries the timestamp), which
keeps monitoring deterministic; wall-clock schedulers can wrap the same
endpoint.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from . import serde
from .errors import ERROR_STATUS, InvalidDocumentError, SovobeError
from .graph import EntityId
from .indicators import EvalMode
from .sources import Window
from .taxonomy import ScopeKind
from .workspace import Workspace


def _error_response(code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=ERROR_STATUS.get(code, 500),
        content={"error": {"code": code, "message": message}},
    )


def _parse_eid(text: str) -> EntityId:
    try:
        return EntityId.parse(text)
    except ValueError as exc:
        raise InvalidDocumentError(str(exc)) from None


def _parse_window(doc: Optional[dict]) -> Optional[Window]:
    if doc is None:
        return None
    return Window(int(doc["start"]), int(doc["end"]))


def create_app(workspace: Workspace) -> FastAPI:
    app = FastAPI(title="sovobe", docs_url=None, redoc_url=None)
    app.state.workspace = workspace

    @app.exception_handler(SovobeError)
    async def handle_engine_error(request: Request, exc: SovobeError):
        return _error_response(exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(request: Request, exc: RequestValidationError):
        return _error_response("invalid-document", str(exc.errors()[:1]))

    ws = workspace

    @app.get("/")
    def root() -> dict:
        from . import __version__

        return {
            "name": "sovobe",
            "version": __version__,
            "graph-revision": ws.graph.revision,
            "kpis": len(ws.registry.ids()),
            "events": len(ws.events),
        }

    # -- graph ---------------------------------------------------------------

    @app.get("/graph")
    def get_graph() -> dict:
        return serde.graph_to_dict(ws.graph)

    @app.put("/graph")
    def put_graph(doc: dict = Body(...)) -> dict:
        graph = serde.graph_from_dict(doc)
        ws.set_graph(graph)
        return {"revision": ws.graph.revision}

    @app.get("/graph/validate")
    def validate_graph() -> dict:
        violations = ws.graph.validate()
        return {
            "violations": [
                {"entity": v.entity, "invariant": v.invariant, "detail": v.detail}
                for v in violations
            ]
        }

    # -- KPI registry -----------------------------------------------------------

    @app.get("/kpis")
    def list_kpis() -> list:
        return [serde.kpi_to_dict(d) for d in ws.registry.definitions()]

    @app.post("/kpis", status_code=201)
    def register_kpi(doc: dict = Body(...)) -> dict:
        definition = serde.kpi_from_dict(doc)
        return {"kpi-id": ws.register_kpi(definition)}

    @app.get("/kpis/{kpi_id}/classification")
    def classification(kpi_id: str) -> dict:
        cls = ws.registry.classify(kpi_id)
        return {
            "kpi-id": cls.kpi_id,
            "data-sources": sorted(cls.data_sources),
            "subjects": sorted(s.value for s in cls.subjects),
            "scope": serde.scope_to_dict(cls.scope),
            "performance": sorted(cls.performance),
            "structural": cls.structural,
            "operational": cls.operational,
        }

    @app.get("/kpis/applicable/{subject}")
    def applicable(subject: str) -> dict:
        eid = _parse_eid(subject)
        return {"kpi-ids": sorted(ws.registry.applicable_kpis(eid, ws.graph))}

    # -- evaluation ---------------------------------------------------------------

    @app.post("/evaluate")
    def evaluate(doc: dict = Body(...)) -> dict:
        kpi_id = doc.get("kpi") or doc.get("kpi-id")
        if not kpi_id:
            raise InvalidDocumentError("evaluate needs a 'kpi' field")
        subject = _parse_eid(str(doc.get("subject", "")))
        value = ws.evaluate(
            kpi_id,
            subject,
            window=_parse_window(doc.get("window")),
            params=doc.get("params"),
            mode=EvalMode(doc.get("mode", "monitoring")),
            as_of=int(doc.get("as-of", 0)),
        )
        return serde.indicator_value_to_dict(value)

    # -- events --------------------------------------------------------------------

    @app.post("/events", status_code=201)
    def post_events(doc: Any = Body(...)) -> dict:
        batch = doc if isinstance(doc, list) else [doc]
        sequences = [ws.ingest_event(serde.event_from_dict(d)) for d in batch]
        return {"sequences": sequences, "last-sequence": ws.events.last_sequence}

    # -- anticipation ---------------------------------------------------------------

    @app.post("/anticipate")
    def anticipate(doc: dict = Body(...)) -> dict:
        candidate = serde.candidate_from_dict(doc)
        return serde.report_to_dict(ws.anticipate(candidate))

    @app.post("/anticipate/compare")
    def compare(doc: dict = Body(...)) -> dict:
        candidates = [serde.candidate_from_dict(c) for c in doc.get("candidates", [])]
        return serde.ranking_to_dict(ws.compare(candidates))

    # -- monitoring -------------------------------------------------------------------

    @app.get("/monitors")
    def get_monitors() -> list:
        return [serde.monitor_to_dict(m) for m in ws.monitor_engine.monitors()]

    @app.post("/monitors", status_code=201)
    def post_monitors(doc: Any = Body(...)) -> dict:
        batch = doc if isinstance(doc, list) else [doc]
        ids = [ws.attach_monitor(serde.monitor_from_dict(d)) for d in batch]
        return {"monitor-ids": ids}

    @app.put("/monitors")
    def put_monitors(doc: list = Body(...)) -> dict:
        ids = ws.replace_monitors([serde.monitor_from_dict(d) for d in doc])
        return {"monitor-ids": ids}

    @app.post("/tick")
    def tick(doc: dict = Body(...)) -> dict:
        if "now" not in doc:
            raise InvalidDocumentError("tick needs a 'now' timestamp")
        alerts = ws.tick(int(doc["now"]))
        return {"alerts": [serde.alert_to_dict(a) for a in alerts]}

    @app.get("/alerts")
    def alerts(from_: int = Query(0, alias="from")) -> dict:
        out = ws.monitor_engine.alert_stream(from_)
        return {
            "alerts": [serde.alert_to_dict(a) for a in out],
            "last-sequence": out[-1].sequence if out else from_,
        }

    @app.get("/results")
    def results() -> dict:
        return {"results": [serde.result_to_dict(r) for r in ws.monitor_engine.results()]}

    # -- coverage ----------------------------------------------------------------------

    @app.get("/coverage/{kpi_id}")
    def coverage(kpi_id: str) -> dict:
        report = ws.coverage(kpi_id)
        return {
            "kpi-id": report.kpi_id,
            "computable-now": report.computable_now,
            "entries": [
                {"code": e.code, "available": e.available, "served-by": e.served_by}
                for e in report.entries
            ],
        }

    return app


def serve(workspace: Workspace, listen_addr: str = "127.0.0.1:8000") -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    host, _, port = listen_addr.rpartition(":")
    uvicorn.run(create_app(workspace), host=host or "127.0.0.1", port=int(port))
