"""Run the full four-stage pipeline offline, end to end.

The demo module fabricates a Wajima-style earthquake scenario (six site
photos, a region map, a gazetteer, a grading guideline) plus a script of
canned model responses, so no API key or network is needed. The pipeline
runs expert -> {alerts || emergency} -> assignment and persists a complete
run directory.

    python3 demos/run_offline_pipeline.py [workdir]
"""

import sys
import tempfile
from pathlib import Path

from disasteller import demo
from disasteller.config import config_from_dict
from disasteller.gateway.backends import ScriptedBackend, load_script
from disasteller.orchestrator.pipeline import run_pipeline

workdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="disasteller-"))
print(f"working in {workdir}")

# 1. Fabricate the scenario and the scripted model responses.
manifest = demo.make_demo_scenario(workdir / "scenario")
script = demo.write_demo_script(workdir / "script.json")
config = config_from_dict(demo.demo_config_dict(workdir / "scenario"))

# 2. Run the pipeline against the scripted backend.
backend = ScriptedBackend(load_script(script))
record = run_pipeline(manifest, config, backend, workdir / "runs", run_id="demo")

# 3. Walk the results.
print(f"\nrun {record.run_id}: {record.gateway_calls} model calls, "
      f"{len(record.tool_calls)} tool calls, "
      f"{record.total_wall_time_s * 1000:.0f} ms across the stage graph")
for stage, timing in record.stage_timings.items():
    print(f"  {stage:<12} {timing.duration_s * 1000:7.1f} ms")

print("\nreports:")
for kind, report in sorted(record.reports.items()):
    status = "valid" if report.valid else "INVALID"
    first_line = report.raw_text.splitlines()[2] if len(report.raw_text.splitlines()) > 2 else ""
    print(f"  {kind:<20} {status:<8} {first_line[:60]}")

print("\nblackboard keys, in write order:")
for entry in record.blackboard:
    print(f"  #{entry.sequence} {entry.key} ({entry.kind}) from {entry.producer}")

run_dir = workdir / "runs" / "demo"
print(f"\nalert map: {run_dir / 'alert_map.png'}")
print(f"full run directory: {run_dir}")
print("replay it with:")
print(f"  disasteller replay --run-dir {run_dir} --out {workdir / 'replays'}")
