from disasteller.core.blackboard import (
    Blackboard,
    BlackboardEntry,
    DuplicateKey,
    MissingKey,
)
from disasteller.core.grades import (
    AmbiguousGrade,
    DamageGrade,
    NoGradeToken,
    find_grade_tokens,
    grade_color,
    parse_grade,
)
from disasteller.core.records import RunRecord, StageTiming, ToolCallRecord
from disasteller.core.scenario import (
    DisasterScenario,
    ScenarioInvalid,
    SiteAssessment,
    SiteImage,
    load_scenario,
)

__all__ = [
    "AmbiguousGrade",
    "Blackboard",
    "BlackboardEntry",
    "DamageGrade",
    "DisasterScenario",
    "DuplicateKey",
    "MissingKey",
    "NoGradeToken",
    "RunRecord",
    "ScenarioInvalid",
    "SiteAssessment",
    "SiteImage",
    "StageTiming",
    "ToolCallRecord",
    "find_grade_tokens",
    "grade_color",
    "load_scenario",
    "parse_grade",
]
