#!/usr/bin/env python3
"""Record real API payloads into frontend/test/fixtures/.

The dashboard's contract tests replay these exact payloads through a stub
fetch, so every number the UI renders is pinned to genuine server output.
Re-run after any wire-format change:  python3 tests/record_frontend_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from fastapi.testclient import TestClient

from fixtures import B, HOUR, P1, T0, demo_workspace
from sovobe.registry import Bound, PerformanceRequirement
from sovobe.serde import candidate_to_dict
from sovobe.server import create_app
from test_anticipation import vo1_candidate

OUT_DIR = Path(__file__).parent.parent / "frontend" / "test" / "fixtures"


def write(name: str, payload) -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"  wrote {name}")


def main() -> None:
    client = TestClient(create_app(demo_workspace()))

    write("graph.json", client.get("/graph").json())
    write("kpis.json", client.get("/kpis").json())
    write("applicable_partner_B.json",
          client.get("/kpis/applicable/partner:B").json())
    write("evaluate_trust_level_B.json", client.post("/evaluate", json={
        "kpi": "trust_level", "subject": "partner:B"}).json())
    write("evaluate_failure_rate_B.json", client.post("/evaluate", json={
        "kpi": "failure_rate", "subject": "partner:B",
        "window": {"start": T0, "end": T0 + HOUR}}).json())
    response = client.post("/evaluate", json={
        "kpi": "trust_level", "subject": "partner:A"})
    write("evaluate_not_computable.json",
          {"status": response.status_code, "body": response.json()})

    failing = vo1_candidate([
        PerformanceRequirement("trust_level", B, Bound("at-least", value=0.75)),
        PerformanceRequirement("process_total_cost", P1, Bound("at-most", value=200.0)),
    ])
    write("anticipate_fail.json",
          client.post("/anticipate", json=candidate_to_dict(failing)).json())

    passing = vo1_candidate([
        PerformanceRequirement("trust_level", B, Bound("at-least", value=0.5)),
        PerformanceRequirement("process_total_cost", P1, Bound("at-most", value=200.0)),
    ])
    write("anticipate_pass.json",
          client.post("/anticipate", json=candidate_to_dict(passing)).json())

    # failure_rate has no SLA, no declared rates, and no history summaries in
    # the demo workspace: the anticipation chain ends unknown -> incomplete.
    incomplete = vo1_candidate([
        PerformanceRequirement("failure_rate", B, Bound("at-most", value=0.2)),
        PerformanceRequirement("process_total_cost", P1, Bound("at-most", value=200.0)),
    ])
    write("anticipate_incomplete.json",
          client.post("/anticipate", json=candidate_to_dict(incomplete)).json())

    other = candidate_to_dict(failing)
    other["candidate-id"] = "cand-alt"
    write("compare.json", client.post("/anticipate/compare", json={
        "candidates": [other, candidate_to_dict(failing)]}).json())

    # Breach replay: warning first, then escalation to critical.
    client.post("/events", json=[
        {"event-id": f"ui-fail-{i}", "service": "service:s2",
         "provider": "partner:B", "requested-at": T0 + 600_000 + i,
         "outcome": "failure"}
        for i in range(4)
    ])
    write("tick_warning.json",
          client.post("/tick", json={"now": T0 + HOUR}).json())
    write("alerts_batch1.json", client.get("/alerts", params={"from": 0}).json())

    client.post("/events", json=[
        {"event-id": f"ui-crit-{i}", "service": "service:s2",
         "provider": "partner:B", "requested-at": T0 + HOUR + 300_000 + i,
         "outcome": "failure"}
        for i in range(30)
    ])
    client.post("/tick", json={"now": T0 + HOUR + 600_000})
    write("alerts_batch2.json", client.get("/alerts", params={"from": 1}).json())
    write("monitors.json", client.get("/monitors").json())
    write("coverage_failure_rate.json", client.get("/coverage/failure_rate").json())


if __name__ == "__main__":
    main()
