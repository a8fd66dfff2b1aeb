"""Scoring a full run: six reports plus the two intermediate tasks.

Per-target failures never sink the batch; each target yields either a score or
an error marker, and callers decide what a partial result is worth.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Sequence

from disasteller.core.records import RunRecord
from disasteller.evaluation.rubric import Rubric, build_evaluator_request, parse_score
from disasteller.evaluation.scores import EvaluationScore, TARGETS

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvaluationOutcome:
    target: str
    score: EvaluationScore | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.score is not None


def _assessments_text(record: RunRecord) -> str:
    for entry in record.blackboard:
        if entry.key == "expert.assessments":
            return json.dumps(entry.content, indent=2)
    return "(no structured assessments recorded)"


def _material_for(record: RunRecord, target: str) -> tuple[str, str]:
    """(material text, image role) for a target; role picks the attachments."""
    if target == "LocalGrading":
        return _assessments_text(record), "sites"
    if target == "MapAnnotation":
        return _assessments_text(record), "map"
    report = record.reports.get(target)
    if report is None:
        raise KeyError(f"run record has no {target} report")
    return report.raw_text, "sites"


def evaluate_run(
    record: RunRecord,
    evaluator_gateway: Any,
    rubric: Rubric,
    site_images: Sequence[bytes],
    model_id: str = "gpt-4o",
    round_number: int = 1,
) -> list[EvaluationOutcome]:
    """One machine score per report kind plus LocalGrading and MapAnnotation.

    Returns eight outcomes in canonical target order; targets whose request,
    completion, or parse failed carry an error marker instead of a score.
    """
    outcomes: list[EvaluationOutcome] = []
    for target in TARGETS:
        try:
            material, image_role = _material_for(record, target)
            if image_role == "map":
                if record.alert_map_name and record.alert_map_name in record.artifacts:
                    images = [record.artifacts[record.alert_map_name]]
                else:
                    raise KeyError("run record has no alert map artifact")
            else:
                images = list(site_images)
            request = build_evaluator_request(
                target, material, images, rubric, model_id=model_id)
            response = evaluator_gateway.complete(request)
            value, explanation = parse_score(response.text)
            outcomes.append(EvaluationOutcome(
                target=target,
                score=EvaluationScore(
                    target=target, score=float(value), explanation=explanation,
                    evaluator="machine", round=round_number, model_id=model_id),
            ))
        except Exception as exc:
            logger.warning("evaluation of %s failed: %s", target, exc)
            outcomes.append(EvaluationOutcome(
                target=target, score=None, error=f"{type(exc).__name__}: {exc}"))
    return outcomes
