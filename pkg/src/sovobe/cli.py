"""Command-line interface.

Workspace resolution precedence: --workspace flag, then SOVOBE_WORKSPACE,
then the config file (sovobe.config.json by default, key "workspace").
Exit codes: 0 success, 1 validation/evaluation failure, 2 usage error.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import serde
from .errors import SovobeError
from .graph import EntityId
from .indicators import EvalMode
from .monitoring import MonitorEngine
from .scenario import ScenarioSpec, generate_scenario, scenario_spec_from_dict
from .sources import Window
from .workspace import Workspace

ENV_WORKSPACE = "SOVOBE_WORKSPACE"
ENV_LISTEN = "SOVOBE_LISTEN_ADDR"
DEFAULT_CONFIG = "sovobe.config.json"


def _config(config_path: str | None) -> dict:
    path = Path(config_path or DEFAULT_CONFIG)
    if path.exists():
        return json.loads(path.read_text())
    return {}


def _resolve_workspace(ctx: click.Context) -> Path:
    flag = ctx.obj.get("workspace")
    env = os.environ.get(ENV_WORKSPACE)
    conf = ctx.obj["config"].get("workspace")
    chosen = flag or env or conf
    if not chosen:
        raise click.UsageError(
            "no workspace given (use --workspace, SOVOBE_WORKSPACE, or the config file)"
        )
    return Path(chosen)


def _load(ctx: click.Context) -> Workspace:
    return Workspace.load(_resolve_workspace(ctx))


def _emit(ctx: click.Context, doc, table: str) -> None:
    if ctx.obj["format"] == "json":
        click.echo(json.dumps(doc, indent=2, sort_keys=True))
    else:
        click.echo(table)


def _fail(message: str) -> "click.exceptions.Exit":
    click.echo(f"error: {message}", err=True)
    return click.exceptions.Exit(1)


@click.group()
@click.option("--workspace", "-w", type=click.Path(), default=None,
              help="Workspace directory.")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help=f"Config file (default {DEFAULT_CONFIG}).")
@click.option("--format", "output_format", type=click.Choice(["json", "table"]),
              default="table", help="Output format.")
@click.pass_context
def main(ctx: click.Context, workspace, config_path, output_format):
    """Performance management over service-composed VO breeding environments."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _config(config_path)
    ctx.obj["workspace"] = workspace
    ctx.obj["format"] = output_format


@main.command()
@click.argument("directory", type=click.Path(exists=True), required=False)
@click.pass_context
def load(ctx, directory):
    """Load a workspace and print a summary."""
    if directory:
        ctx.obj["workspace"] = directory
    try:
        ws = _load(ctx)
    except SovobeError as exc:
        raise _fail(exc.message)
    summary = {
        "graph-revision": ws.graph.revision,
        "partners": len(list(ws.graph.partners())),
        "services": len(list(ws.graph.services())),
        "processes": len(list(ws.graph.processes())),
        "vos": len(list(ws.graph.vos())),
        "kpis": len(ws.registry.ids()),
        "events": len(ws.events),
        "monitors": len(ws.monitor_engine.monitors()),
    }
    table = "\n".join(f"{k:16} {v}" for k, v in summary.items())
    _emit(ctx, summary, table)


@main.command()
@click.argument("directory", type=click.Path(exists=True), required=False)
@click.pass_context
def validate(ctx, directory):
    """Validate a workspace's graph; exit 1 when violations exist."""
    if directory:
        ctx.obj["workspace"] = directory
    try:
        ws = _load(ctx)
    except SovobeError as exc:
        raise _fail(exc.message)
    violations = ws.graph.validate()
    doc = {
        "violations": [
            {"entity": v.entity, "invariant": v.invariant, "detail": v.detail}
            for v in violations
        ]
    }
    lines = [f"{len(violations)} violations"]
    lines += [f"  {v.entity}: {v.invariant}: {v.detail}" for v in violations]
    _emit(ctx, doc, "\n".join(lines))
    if violations:
        raise click.exceptions.Exit(1)


@main.command("register-kpi")
@click.option("--file", "kpi_file", type=click.Path(exists=True), required=True,
              help="KPI definition (JSON object or array).")
@click.pass_context
def register_kpi(ctx, kpi_file):
    """Register KPI definitions into the workspace and save it back."""
    try:
        ws = _load(ctx)
        doc = json.loads(Path(kpi_file).read_text())
        batch = doc if isinstance(doc, list) else [doc]
        ids = [ws.register_kpi(serde.kpi_from_dict(d)) for d in batch]
        ws.save(_resolve_workspace(ctx))
    except SovobeError as exc:
        raise _fail(f"{exc.code}: {exc.message}")
    _emit(ctx, {"kpi-ids": ids}, "registered: " + ", ".join(ids))


@main.command()
@click.option("--kpi", required=True, help="KPI id from the catalog.")
@click.option("--subject", required=True, help="Subject entity, e.g. partner:B.")
@click.option("--window", nargs=2, type=int, default=None,
              help="Half-open window [START, END) in ms.")
@click.option("--param", "params", multiple=True,
              help="Extra parameter as key=value (repeatable).")
@click.option("--mode", type=click.Choice(["monitoring", "anticipation"]),
              default="monitoring")
@click.pass_context
def evaluate(ctx, kpi, subject, window, params, mode):
    """Evaluate one KPI for one subject."""
    try:
        ws = _load(ctx)
        parsed_params = dict(p.split("=", 1) for p in params)
        value = ws.evaluate(
            kpi,
            EntityId.parse(subject),
            window=Window(*window) if window else None,
            params=parsed_params or None,
            mode=EvalMode(mode),
        )
    except (SovobeError, ValueError) as exc:
        message = exc.message if isinstance(exc, SovobeError) else str(exc)
        raise _fail(message)
    doc = serde.indicator_value_to_dict(value)
    _emit(ctx, doc, f"{value.value:g} {value.unit}".rstrip())


def _report_table(doc: dict) -> str:
    lines = [f"candidate {doc['candidate-id']}: {doc['overall'].upper()}"]
    for row in doc["rows"]:
        status = {True: "pass", False: "FAIL", None: "unknown"}[row["pass"]]
        value = "n/a" if row["value"] is None else f"{row['value']:g}"
        bound = row["bound"]
        if bound["kind"] == "between":
            bound_text = f"between {bound['lo']:g} and {bound['hi']:g}"
        else:
            bound_text = f"{bound['kind']} {bound['value']:g}"
        gap = "" if row["gap"] is None else f"  gap={row['gap']:+g}"
        lines.append(
            f"  {status:8} {row['kpi-id']:32} {row['subject']:16} "
            f"{value:>10}  ({bound_text}){gap}"
        )
    return "\n".join(lines)


@main.command()
@click.option("--candidate", "candidate_file", type=click.Path(exists=True),
              required=True, help="Candidate VO document (JSON).")
@click.pass_context
def anticipate(ctx, candidate_file):
    """Evaluate a candidate VO; exit 1 unless every requirement passes."""
    try:
        ws = _load(ctx)
        candidate = serde.candidate_from_dict(json.loads(Path(candidate_file).read_text()))
        report = ws.anticipate(candidate)
    except SovobeError as exc:
        raise _fail(f"{exc.code}: {exc.message}")
    doc = serde.report_to_dict(report)
    _emit(ctx, doc, _report_table(doc))
    if doc["overall"] != "pass":
        raise click.exceptions.Exit(1)


@main.command()
@click.option("--candidate", "candidate_files", type=click.Path(exists=True),
              multiple=True, required=True, help="Candidate file (repeat per candidate).")
@click.pass_context
def compare(ctx, candidate_files):
    """Rank candidate VOs against their shared requirements."""
    try:
        ws = _load(ctx)
        candidates = [
            serde.candidate_from_dict(json.loads(Path(f).read_text()))
            for f in candidate_files
        ]
        ranking = ws.compare(candidates)
    except SovobeError as exc:
        raise _fail(f"{exc.code}: {exc.message}")
    doc = serde.ranking_to_dict(ranking)
    lines = []
    for i, cid in enumerate(doc["ranking"], start=1):
        report = doc["reports"][cid]
        passing = sum(1 for r in report["rows"] if r["pass"])
        lines.append(f"{i}. {cid}  ({passing}/{len(report['rows'])} passing,"
                     f" overall {report['overall']})")
    _emit(ctx, doc, "\n".join(lines))


@main.group()
def monitor():
    """Monitoring operations."""


@monitor.command("run")
@click.option("--from", "start", type=int, required=True,
              help="First tick timestamp (ms).")
@click.option("--until", type=int, required=True, help="Last tick timestamp (ms).")
@click.option("--step", type=int, required=True, help="Tick step (ms).")
@click.option("--alerts-file", type=click.Path(), default=None,
              help="Write alerts as JSON Lines.")
@click.option("--results-file", type=click.Path(), default=None,
              help="Write every evaluation as JSON Lines.")
@click.pass_context
def monitor_run(ctx, start, until, step, alerts_file, results_file):
    """Drive the simulated clock from START to UNTIL in STEP increments."""
    if step <= 0 or until < start:
        raise click.UsageError("need step > 0 and until >= from")
    try:
        ws = _load(ctx)
    except SovobeError as exc:
        raise _fail(exc.message)
    all_alerts = []
    now = start
    while now <= until:
        all_alerts.extend(ws.tick(now))
        now += step
    alert_docs = [serde.alert_to_dict(a) for a in all_alerts]
    if alerts_file:
        Path(alerts_file).write_text(
            "".join(json.dumps(d, sort_keys=True) + "\n" for d in alert_docs)
        )
    if results_file:
        Path(results_file).write_text(
            "".join(
                json.dumps(serde.result_to_dict(r), sort_keys=True) + "\n"
                for r in ws.monitor_engine.results()
            )
        )
    table = [f"{len(alert_docs)} alerts over {len(ws.monitor_engine.results())} evaluations"]
    for d in alert_docs:
        observed = d["observed"]["value"] if d["observed"] else "n/a"
        table.append(
            f"  [{d['severity']}] {d['alert-id']} {d['monitor-id']} at {d['at']}: "
            f"observed {observed}, hint {d['remediation-hint']}"
        )
    _emit(ctx, {"alerts": alert_docs}, "\n".join(table))


@main.command()
@click.option("--spec", "spec_file", type=click.Path(exists=True), default=None,
              help="Scenario spec JSON; defaults apply when omitted.")
@click.option("--seed", type=int, default=None, help="Override the spec's seed.")
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="Directory to write the workspace into.")
@click.pass_context
def generate(ctx, spec_file, seed, out_dir):
    """Generate a synthetic workspace."""
    try:
        doc = json.loads(Path(spec_file).read_text()) if spec_file else {}
        spec = scenario_spec_from_dict(doc)
        if seed is not None:
            import dataclasses

            spec = dataclasses.replace(spec, random_seed=seed)
        scenario = generate_scenario(spec)
        scenario.workspace.save(out_dir)
    except SovobeError as exc:
        raise _fail(f"{exc.code}: {exc.message}")
    summary = {
        "workspace": str(out_dir),
        "partners": len(list(scenario.workspace.graph.partners())),
        "events": len(scenario.workspace.events),
        "seed": spec.random_seed,
    }
    _emit(ctx, summary, f"wrote {out_dir} (seed {spec.random_seed}, "
          f"{summary['partners']} partners, {summary['events']} events)")


@main.command()
@click.option("--kpi", required=True, help="KPI id to check coverage for.")
@click.pass_context
def coverage(ctx, kpi):
    """Report data-source availability for a KPI."""
    try:
        ws = _load(ctx)
        report = ws.coverage(kpi)
    except SovobeError as exc:
        raise _fail(f"{exc.code}: {exc.message}")
    doc = {
        "kpi-id": report.kpi_id,
        "computable-now": report.computable_now,
        "entries": [
            {"code": e.code, "available": e.available, "served-by": e.served_by}
            for e in report.entries
        ],
    }
    lines = [f"computable now: {'yes' if report.computable_now else 'no'}"]
    for e in report.entries:
        state = f"available via {e.served_by}" if e.available else "unavailable"
        lines.append(f"  {e.code:10} {state}")
    _emit(ctx, doc, "\n".join(lines))


@main.command()
@click.option("--listen", default=None, help="host:port (default 127.0.0.1:8000).")
@click.pass_context
def serve(ctx, listen):
    """Serve the workspace over HTTP."""
    from .server import serve as run_server

    listen_addr = (
        listen
        or os.environ.get(ENV_LISTEN)
        or ctx.obj["config"].get("listen-addr")
        or "127.0.0.1:8000"
    )
    try:
        ws = _load(ctx)
    except SovobeError as exc:
        raise _fail(exc.message)
    run_server(ws, listen_addr)


if __name__ == "__main__":
    main()
