"""Operator entry point.

Subcommands: run, index, evaluate, replay, validate-config. stdout carries one
JSON summary object per command; diagnostics go to stderr. Exit codes:
0 success, 2 config/manifest invalid, 3 stage or replay failure, 4 I/O,
5 gateway/auth.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from disasteller.config import ConfigError, EngineConfig, config_from_dict, load_config
from disasteller.core.scenario import ScenarioInvalid, load_scenario
from disasteller.evaluation.harness import evaluate_run
from disasteller.evaluation.rubric import Rubric
from disasteller.evaluation.scores import (
    EvaluationError,
    aggregate,
    compare,
    ingest_human_scores,
    write_aggregates,
    write_plot_data,
    write_scores,
)
from disasteller.gateway.backends import (
    API_KEY_ENV,
    HttpBackend,
    MissingCredential,
    ScriptedBackend,
    load_script,
)
from disasteller.gateway.types import GatewayError
from disasteller.orchestrator.pipeline import StageFailed, run_pipeline
from disasteller.reporting.persist import load_manifest, load_run_record
from disasteller.toolkit.retrieval import EmptyDocument, ingest_guideline

logger = logging.getLogger("disasteller")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_STAGE = 3
EXIT_IO = 4
EXIT_GATEWAY = 5


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


def _make_backend(args, config: EngineConfig):
    if args.backend == "scripted":
        if not args.script:
            raise ConfigError("--backend scripted requires --script")
        return ScriptedBackend(load_script(args.script))
    if not os.environ.get(API_KEY_ENV):
        raise MissingCredential(f"live backend needs {API_KEY_ENV} set")
    return HttpBackend(
        endpoint=config.gateway.endpoint,
        deadline_s=config.gateway.deadline_s,
        max_in_flight=config.gateway.max_in_flight,
    )


def cmd_run(args) -> int:
    config = load_config(args.config)
    backend = _make_backend(args, config)
    record = run_pipeline(args.scenario, config, backend, args.out, run_id=args.run_id)
    _emit({
        "command": "run",
        "run_id": record.run_id,
        "run_dir": str(Path(args.out) / record.run_id),
        "scenario_id": record.scenario_id,
        "total_wall_time_s": record.total_wall_time_s,
        "setup_duration_s": record.setup_duration_s,
        "stage_timings": {s: t.duration_s for s, t in record.stage_timings.items()},
        "reports": {kind: r.valid for kind, r in sorted(record.reports.items())},
        "alert_map": record.alert_map_name,
        "gateway_calls": record.gateway_calls,
        "tool_calls": len(record.tool_calls),
        "warnings": record.warnings,
    })
    return EXIT_OK


def cmd_index(args) -> int:
    index = ingest_guideline(args.guideline, chunk_size=args.chunk_size,
                             overlap=args.overlap)
    chunks_path = index.save(args.out)
    _emit({
        "command": "index",
        "guideline": str(args.guideline),
        "chunks": len(index.chunks),
        "avg_chunk_len": index.avg_chunk_len,
        "vocabulary": len(index.doc_freq),
        "out": str(chunks_path.parent),
    })
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = load_config(args.config)
    record = load_run_record(args.run_dir)
    out_dir = Path(args.out) if args.out else Path(str(args.run_dir).rstrip("/") + "-evaluation")

    machine_scores = []
    outcomes_meta = []
    if args.backend != "none":
        if not record.scenario_path:
            raise ScenarioInvalid("run manifest lacks scenario_path; cannot attach images")
        scenario = load_scenario(record.scenario_path)
        site_images = [s.read_bytes() for s in scenario.sites]
        backend = _make_backend(args, config)
        outcomes = evaluate_run(
            record, backend, Rubric(), site_images,
            model_id=config.gateway.evaluator_model_id, round_number=args.round)
        for outcome in outcomes:
            outcomes_meta.append({"target": outcome.target, "ok": outcome.ok,
                                  "error": outcome.error})
            if outcome.score is not None:
                machine_scores.append(outcome.score)

    human_scores = []
    if args.human_scores:
        human_scores = ingest_human_scores(args.human_scores)

    all_scores = machine_scores + human_scores
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {}
    if all_scores:
        stats = aggregate(all_scores)
        files["scores"] = str(write_scores(all_scores, out_dir / "scores.json"))
        files["aggregates"] = str(write_aggregates(stats, out_dir / "aggregates.json"))
        files["plot_data"] = str(write_plot_data(all_scores, stats,
                                                 out_dir / "plot_data.csv"))
    comparison_rows = []
    if machine_scores and human_scores:
        comparison_rows = compare(machine_scores, human_scores)
        comparison_path = out_dir / "comparison.json"
        comparison_path.write_text(json.dumps(comparison_rows, indent=2) + "\n",
                                   encoding="utf-8")
        files["comparison"] = str(comparison_path)

    _emit({
        "command": "evaluate",
        "run_id": record.run_id,
        "machine_scores": len(machine_scores),
        "human_scores": len(human_scores),
        "targets": outcomes_meta,
        "comparison_rows": len(comparison_rows),
        "out": str(out_dir),
        "files": files,
    })
    return EXIT_OK


def cmd_replay(args) -> int:
    run_dir = Path(args.run_dir)
    manifest = load_manifest(run_dir)
    transcript_path = run_dir / "transcript.json"
    if not transcript_path.is_file():
        raise FileNotFoundError(f"no transcript.json in {run_dir}")
    config = config_from_dict(manifest.get("config", {}))
    scenario_path = manifest.get("scenario_path")
    if not scenario_path:
        raise ScenarioInvalid("run manifest lacks scenario_path; cannot replay")

    backend = ScriptedBackend(load_script(transcript_path))
    record = run_pipeline(scenario_path, config, backend, args.out,
                          run_id=manifest["run_id"])
    new_dir = Path(args.out) / record.run_id

    compared = []
    mismatches = []
    for kind, meta in manifest.get("reports", {}).items():
        rel = meta["markdown"]
        compared.append(rel)
        if (run_dir / rel).read_bytes() != (new_dir / rel).read_bytes():
            mismatches.append(rel)
    alert_map = manifest.get("alert_map")
    if alert_map:
        compared.append(alert_map)
        if (run_dir / alert_map).read_bytes() != (new_dir / alert_map).read_bytes():
            mismatches.append(alert_map)

    verdict = "identical" if not mismatches else "mismatch"
    _emit({
        "command": "replay",
        "run_id": manifest["run_id"],
        "replay_dir": str(new_dir),
        "compared": compared,
        "mismatches": mismatches,
        "verdict": verdict,
    })
    return EXIT_OK if verdict == "identical" else EXIT_STAGE


def cmd_validate_config(args) -> int:
    config = load_config(args.config)
    _emit({"command": "validate-config", "valid": True, "config": config.normalized()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disasteller",
        description="Multi-agent post-disaster assessment and reporting engine.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute the four-stage pipeline on a scenario")
    run.add_argument("--scenario", required=True, help="scenario manifest JSON")
    run.add_argument("--config", required=True, help="engine config JSON")
    run.add_argument("--out", required=True, help="output directory for run dirs")
    run.add_argument("--backend", choices=["live", "scripted"], default="live")
    run.add_argument("--script", help="script file (scripted backend)")
    run.add_argument("--run-id", help="fixed run id (default: random)")
    run.set_defaults(func=cmd_run)

    index = sub.add_parser("index", help="build and persist a guideline index")
    index.add_argument("--guideline", required=True)
    index.add_argument("--out", required=True)
    index.add_argument("--chunk-size", type=int, default=300)
    index.add_argument("--overlap", type=int, default=50)
    index.set_defaults(func=cmd_index)

    ev = sub.add_parser("evaluate", help="score a persisted run")
    ev.add_argument("--run-dir", required=True)
    ev.add_argument("--config", required=True)
    ev.add_argument("--backend", choices=["live", "scripted", "none"], default="live",
                    help="'none' skips machine scoring")
    ev.add_argument("--script", help="evaluator script file (scripted backend)")
    ev.add_argument("--human-scores", help="CSV of human ratings")
    ev.add_argument("--round", type=int, default=1, help="round tag for machine scores")
    ev.add_argument("--out", help="output directory (default: <run-dir>-evaluation)")
    ev.set_defaults(func=cmd_evaluate)

    rp = sub.add_parser("replay", help="re-execute a run from its transcript and "
                                       "verify byte-identical reports")
    rp.add_argument("--run-dir", required=True)
    rp.add_argument("--out", required=True)
    rp.set_defaults(func=cmd_replay)

    vc = sub.add_parser("validate-config", help="check a config and print it normalized")
    vc.add_argument("--config", required=True)
    vc.set_defaults(func=cmd_validate_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScenarioInvalid, EmptyDocument, EvaluationError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID
    except StageFailed as exc:
        logger.error("%s", exc)
        return EXIT_STAGE
    except (MissingCredential, GatewayError) as exc:
        logger.error("%s", exc)
        return EXIT_GATEWAY
    except OSError as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except Exception:  # pragma: no cover - last resort
        logger.exception("unexpected failure")
        return EXIT_FAILURE


def entrypoint() -> None:  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
