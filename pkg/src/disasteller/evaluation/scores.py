"""Score records, human-score ingestion, and multi-round aggregation."""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from disasteller.errors import DisasTellerError
from disasteller.reporting.templates import ReportKind

INTERMEDIATE_TARGETS = ("LocalGrading", "MapAnnotation")
TARGETS: tuple[str, ...] = tuple(k.value for k in ReportKind) + INTERMEDIATE_TARGETS
EVALUATORS = ("machine", "human")


class EvaluationError(DisasTellerError):
    pass


class EmptyInput(EvaluationError):
    pass


class CsvFormat(EvaluationError):
    def __init__(self, message: str, row: int, field: str):
        super().__init__(f"row {row}, field {field!r}: {message}")
        self.row = row
        self.field = field


class ScoreOutOfRange(EvaluationError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


@dataclass(frozen=True)
class EvaluationScore:
    target: str
    score: float
    explanation: str
    evaluator: str          # "machine" | "human"
    round: int = 1
    model_id: str | None = None

    def __post_init__(self) -> None:
        if self.target not in TARGETS:
            raise ValueError(f"unknown evaluation target {self.target!r}")
        if self.evaluator not in EVALUATORS:
            raise ValueError(f"unknown evaluator {self.evaluator!r}")
        if not 1.0 <= self.score <= 10.0:
            raise ValueError(f"score {self.score} outside [1, 10]")
        if self.round < 1:
            raise ValueError("round must be >= 1")
        if self.evaluator == "machine" and not self.explanation:
            raise ValueError("machine scores need a non-empty explanation")

    def as_dict(self) -> dict:
        return {
            "target": self.target,
            "score": self.score,
            "explanation": self.explanation,
            "evaluator": self.evaluator,
            "round": self.round,
            "model_id": self.model_id,
        }


@dataclass(frozen=True)
class AggregateStats:
    target: str
    evaluator: str
    n: int
    mean: float
    std: float | None       # sample (n-1) deviation; absent for n=1, never 0-by-convention

    def as_dict(self) -> dict:
        return {"target": self.target, "evaluator": self.evaluator,
                "n": self.n, "mean": self.mean, "std": self.std}


def aggregate(scores: Iterable[EvaluationScore]) -> list[AggregateStats]:
    """Mean and sample standard deviation per (target, evaluator).

    Order follows the canonical target list, machine before human.
    """
    scores = list(scores)
    if not scores:
        raise EmptyInput("no scores to aggregate")
    groups: dict[tuple[str, str], list[float]] = {}
    for s in scores:
        groups.setdefault((s.target, s.evaluator), []).append(s.score)
    out = []
    for target in TARGETS:
        for evaluator in EVALUATORS:
            values = groups.get((target, evaluator))
            if not values:
                continue
            out.append(AggregateStats(
                target=target,
                evaluator=evaluator,
                n=len(values),
                mean=statistics.mean(values),
                std=statistics.stdev(values) if len(values) >= 2 else None,
            ))
    return out


def compare(
    machine: Iterable[EvaluationScore], human: Iterable[EvaluationScore]
) -> list[dict]:
    """Per-target mean(machine) - mean(human) table."""
    m_groups: dict[str, list[float]] = {}
    h_groups: dict[str, list[float]] = {}
    for s in machine:
        m_groups.setdefault(s.target, []).append(s.score)
    for s in human:
        h_groups.setdefault(s.target, []).append(s.score)
    rows = []
    for target in TARGETS:
        if target not in m_groups and target not in h_groups:
            continue
        m_mean = statistics.mean(m_groups[target]) if target in m_groups else None
        h_mean = statistics.mean(h_groups[target]) if target in h_groups else None
        diff = m_mean - h_mean if m_mean is not None and h_mean is not None else None
        rows.append({"target": target, "machine_mean": m_mean,
                     "human_mean": h_mean, "difference": diff})
    return rows


HUMAN_CSV_HEADER = ("round", "target", "score", "explanation")


def ingest_human_scores(csv_path: str | Path) -> list[EvaluationScore]:
    """Load human ratings from CSV with header round,target,score,explanation.

    Empty explanations are fine for humans. Raises CsvFormat (with row and
    field) on structural problems and ScoreOutOfRange on scores outside 1..10.
    """
    path = Path(csv_path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormat("file is empty", 0, "header") from None
        if tuple(h.strip() for h in header) != HUMAN_CSV_HEADER:
            raise CsvFormat(
                f"expected header {','.join(HUMAN_CSV_HEADER)}", 0, "header")
        scores = []
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(HUMAN_CSV_HEADER):
                raise CsvFormat(f"expected {len(HUMAN_CSV_HEADER)} fields, got {len(row)}",
                                row_no, "row")
            raw_round, target, raw_score, explanation = row
            try:
                round_no = int(raw_round)
            except ValueError:
                raise CsvFormat(f"round {raw_round!r} is not an integer",
                                row_no, "round") from None
            if round_no < 1:
                raise CsvFormat("round must be >= 1", row_no, "round")
            if target not in TARGETS:
                raise CsvFormat(f"unknown target {target!r}", row_no, "target")
            try:
                value = float(raw_score)
            except ValueError:
                raise CsvFormat(f"score {raw_score!r} is not a number",
                                row_no, "score") from None
            if not 1.0 <= value <= 10.0:
                raise ScoreOutOfRange(
                    f"row {row_no}: score {value} outside [1, 10]", row=row_no)
            scores.append(EvaluationScore(
                target=target, score=value, explanation=explanation,
                evaluator="human", round=round_no))
    return scores


def write_scores(scores: Sequence[EvaluationScore], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps([s.as_dict() for s in scores], indent=2) + "\n",
                    encoding="utf-8")
    return path


def load_scores(path: str | Path) -> list[EvaluationScore]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return [EvaluationScore(**item) for item in data]


def write_aggregates(stats: Sequence[AggregateStats], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps([s.as_dict() for s in stats], indent=2) + "\n",
                    encoding="utf-8")
    return path


def write_plot_data(
    scores: Sequence[EvaluationScore], stats: Sequence[AggregateStats], path: str | Path
) -> Path:
    """One CSV feeding both figure styles: per-round rows ("round") for bar
    charts and per-group rows ("summary") for mean +/- std plots."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record_type", "target", "evaluator", "round",
                         "score", "n", "mean", "std"])
        for s in sorted(scores, key=lambda s: (TARGETS.index(s.target), s.evaluator, s.round)):
            writer.writerow(["round", s.target, s.evaluator, s.round, s.score, "", "", ""])
        for st in stats:
            writer.writerow(["summary", st.target, st.evaluator, "", "",
                             st.n, st.mean, "" if st.std is None else st.std])
    return path
