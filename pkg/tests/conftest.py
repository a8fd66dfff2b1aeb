from __future__ import annotations

import pytest

from disasteller import demo
from disasteller.config import config_from_dict
from disasteller.gateway.backends import ScriptedBackend, load_script

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance_results[name] = "PASS" if report.passed else "FAIL"
    elif report.when == "setup" and report.skipped:
        _acceptance_results[name] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results.items():
        terminalreporter.write_line(f"{outcome}  {name}")


@pytest.fixture(scope="session")
def demo_tree(tmp_path_factory):
    """Scenario + scripts + config, built once; treated as read-only."""
    root = tmp_path_factory.mktemp("demo")
    manifest = demo.make_demo_scenario(root / "scenario")
    script = demo.write_demo_script(root / "script.json")
    evaluator_script = demo.write_demo_evaluator_script(root / "evaluator_script.json")
    human_csv = demo.write_demo_human_scores(root / "human_scores.csv")
    config_path = demo.write_demo_config(root / "scenario", root / "config.json")
    return {
        "root": root,
        "manifest": manifest,
        "script": script,
        "evaluator_script": evaluator_script,
        "human_csv": human_csv,
        "config_path": config_path,
        "config": config_from_dict(demo.demo_config_dict(root / "scenario")),
    }


@pytest.fixture
def demo_backend(demo_tree):
    return ScriptedBackend(load_script(demo_tree["script"]))
