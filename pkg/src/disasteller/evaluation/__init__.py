from disasteller.evaluation.harness import EvaluationOutcome, evaluate_run
from disasteller.evaluation.rubric import (
    Rubric,
    UnparsableScore,
    build_evaluator_request,
    parse_score,
    render_evaluator_reply,
)
from disasteller.evaluation.scores import (
    AggregateStats,
    CsvFormat,
    EmptyInput,
    EvaluationScore,
    INTERMEDIATE_TARGETS,
    ScoreOutOfRange,
    TARGETS,
    aggregate,
    compare,
    ingest_human_scores,
    load_scores,
    write_aggregates,
    write_plot_data,
    write_scores,
)

__all__ = [
    "AggregateStats",
    "CsvFormat",
    "EmptyInput",
    "EvaluationOutcome",
    "EvaluationScore",
    "INTERMEDIATE_TARGETS",
    "Rubric",
    "ScoreOutOfRange",
    "TARGETS",
    "UnparsableScore",
    "aggregate",
    "build_evaluator_request",
    "compare",
    "evaluate_run",
    "ingest_human_scores",
    "load_scores",
    "parse_score",
    "render_evaluator_reply",
    "write_aggregates",
    "write_plot_data",
    "write_scores",
]
