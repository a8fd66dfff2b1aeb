"""Run persistence: the on-disk layout of one pipeline execution.

    <out>/<run_id>/
      manifest.json            artifact list with content digests
      reports/<Kind>.md        raw report text (also written when invalid)
      reports/<Kind>.json      parsed sections + validation status
      alert_map.png
      blackboard.json
      tool_log.json
      timings.json
      transcript.json          replayable script of every gateway call

Run directories are immutable: persisting onto an existing one is an error.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from disasteller.core.blackboard import BlackboardEntry
from disasteller.core.records import RunRecord
from disasteller.reporting.templates import Issue, ReportKind
from disasteller.reporting.validation import Report


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _write(path: Path, data: bytes, digests: dict[str, str], root: Path) -> None:
    path.write_bytes(data)
    digests[str(path.relative_to(root))] = _digest(data)


def _json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


def persist_run(record: RunRecord, out_dir: str | Path) -> Path:
    """Write the full run directory; returns the manifest path.

    Raises FileExistsError if the run directory already exists, and OSError
    for any other I/O failure.
    """
    out = Path(out_dir)
    run_dir = out / record.run_id
    if run_dir.exists():
        raise FileExistsError(f"run directory already exists: {run_dir}")
    (run_dir / "reports").mkdir(parents=True)

    digests: dict[str, str] = {}

    report_meta = {}
    for kind, report in record.reports.items():
        md_path = run_dir / "reports" / f"{kind}.md"
        _write(md_path, report.raw_text.encode("utf-8"), digests, run_dir)
        json_path = run_dir / "reports" / f"{kind}.json"
        _write(json_path, _json_bytes(report.sidecar()), digests, run_dir)
        report_meta[kind] = {
            "valid": report.valid,
            "markdown": str(md_path.relative_to(run_dir)),
            "sidecar": str(json_path.relative_to(run_dir)),
        }

    for name, data in record.artifacts.items():
        _write(run_dir / name, data, digests, run_dir)

    _write(run_dir / "blackboard.json",
           _json_bytes([e.as_dict() for e in record.blackboard]), digests, run_dir)
    _write(run_dir / "tool_log.json",
           _json_bytes([t.as_dict() for t in record.tool_calls]), digests, run_dir)
    timings = {
        "stages": {
            stage: {"start": t.start, "end": t.end, "duration_s": t.duration_s}
            for stage, t in record.stage_timings.items()
        },
        "total_wall_time_s": record.total_wall_time_s,
        "setup_duration_s": record.setup_duration_s,
    }
    _write(run_dir / "timings.json", _json_bytes(timings), digests, run_dir)
    _write(run_dir / "transcript.json", _json_bytes(record.transcript), digests, run_dir)

    manifest = {
        "run_id": record.run_id,
        "scenario_id": record.scenario_id,
        "scenario_path": record.scenario_path,
        "config": record.config_snapshot,
        "reports": report_meta,
        "alert_map": record.alert_map_name,
        "gateway_calls": record.gateway_calls,
        "warnings": record.warnings,
        "artifacts": digests,
    }
    manifest_path = run_dir / "manifest.json"
    manifest_path.write_bytes(_json_bytes(manifest))
    return manifest_path


def load_manifest(run_dir: str | Path) -> dict:
    path = Path(run_dir) / "manifest.json"
    if not path.is_file():
        raise FileNotFoundError(f"not a run directory (no manifest.json): {run_dir}")
    return json.loads(path.read_text(encoding="utf-8"))


def load_run_record(run_dir: str | Path) -> RunRecord:
    """Rehydrate a persisted run far enough for evaluation and replay checks.

    Reports carry their persisted raw text, sections, and validation status;
    stage timings are not reloaded (they are provenance, not inputs).
    """
    run_dir = Path(run_dir)
    manifest = load_manifest(run_dir)

    reports: dict[str, Report] = {}
    for kind_name, meta in manifest.get("reports", {}).items():
        kind = ReportKind(kind_name)
        raw = (run_dir / meta["markdown"]).read_text(encoding="utf-8")
        sidecar = json.loads((run_dir / meta["sidecar"]).read_text(encoding="utf-8"))
        reports[kind_name] = Report(
            kind=kind,
            raw_text=raw,
            sections=dict(sidecar.get("sections", {})),
            issues=tuple(Issue(**i) for i in sidecar.get("issues", [])),
        )

    blackboard = [
        BlackboardEntry(**entry)
        for entry in json.loads((run_dir / "blackboard.json").read_text(encoding="utf-8"))
    ]
    artifacts: dict[str, bytes] = {}
    alert_map = manifest.get("alert_map")
    if alert_map and (run_dir / alert_map).is_file():
        artifacts[alert_map] = (run_dir / alert_map).read_bytes()
    transcript = json.loads((run_dir / "transcript.json").read_text(encoding="utf-8"))

    return RunRecord(
        run_id=manifest["run_id"],
        scenario_id=manifest.get("scenario_id", ""),
        scenario_path=manifest.get("scenario_path", ""),
        reports=reports,
        blackboard=blackboard,
        artifacts=artifacts,
        alert_map_name=alert_map,
        transcript=transcript,
        gateway_calls=manifest.get("gateway_calls", 0),
        config_snapshot=manifest.get("config", {}),
        warnings=list(manifest.get("warnings", [])),
    )
