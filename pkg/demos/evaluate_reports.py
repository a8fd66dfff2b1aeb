"""Score a finished run with the rubric evaluator and compare against humans.

Runs the offline pipeline, then replays a scripted evaluator (one
"SCORE: n/10 / WEAKNESSES: ..." reply per target), ingests a five-round
human ratings CSV, and prints mean +/- std per target with the
machine-minus-human differences.

    python3 demos/evaluate_reports.py
"""

import tempfile
from pathlib import Path

from disasteller import demo
from disasteller.config import config_from_dict
from disasteller.core.scenario import load_scenario
from disasteller.evaluation.harness import evaluate_run
from disasteller.evaluation.rubric import Rubric
from disasteller.evaluation.scores import aggregate, compare, ingest_human_scores
from disasteller.gateway.backends import ScriptedBackend, load_script
from disasteller.orchestrator.pipeline import run_pipeline

workdir = Path(tempfile.mkdtemp(prefix="disasteller-eval-"))
manifest = demo.make_demo_scenario(workdir / "scenario")
config = config_from_dict(demo.demo_config_dict(workdir / "scenario"))

record = run_pipeline(
    manifest, config,
    ScriptedBackend(load_script(demo.write_demo_script(workdir / "script.json"))),
    workdir / "runs", run_id="to-evaluate")
print(f"pipeline run complete: {len(record.reports)} reports")

# Machine scores: the evaluator sees each report plus the site images
# (or the alert map, for the map-annotation target).
scenario = load_scenario(manifest)
evaluator = ScriptedBackend(load_script(
    demo.write_demo_evaluator_script(workdir / "evaluator.json")))
outcomes = evaluate_run(record, evaluator, Rubric(),
                        [s.read_bytes() for s in scenario.sites])
machine = [o.score for o in outcomes if o.ok]
print(f"machine scores: {len(machine)} targets")

# Human scores: five independent review rounds from a CSV.
human = ingest_human_scores(demo.write_demo_human_scores(workdir / "human.csv"))
print(f"human scores: {len(human)} ratings across 5 rounds")

print(f"\n{'target':<20} {'evaluator':<9} {'n':>3} {'mean':>6} {'std':>6}")
for stats in aggregate(machine + human):
    std = f"{stats.std:.2f}" if stats.std is not None else "  -"
    print(f"{stats.target:<20} {stats.evaluator:<9} {stats.n:>3} "
          f"{stats.mean:>6.2f} {std:>6}")

print(f"\n{'target':<20} {'machine':>8} {'human':>8} {'diff':>6}")
for row in compare(machine, human):
    print(f"{row['target']:<20} {row['machine_mean']:>8.2f} "
          f"{row['human_mean']:>8.2f} {row['difference']:>+6.2f}")
