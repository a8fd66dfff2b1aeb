"""The six output report templates and their section constraints.

Templates are syntactic contracts: required headers in a fixed order, plus
per-section checks (grade tokens, quantified personnel lines, a budget
amount). Semantic quality is the evaluation module's job, not this one's.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from disasteller.core.grades import GradeParseError, parse_grade


class ReportKind(str, Enum):
    EXPERT_SUMMARY = "ExpertSummary"
    ALERT_NEWS = "AlertNews"
    EMERGENCY_SERVICES = "EmergencyServices"
    HUMAN_ALLOCATION = "HumanAllocation"
    PUBLIC_NOTICE = "PublicNotice"
    RECONSTRUCTION_PLAN = "ReconstructionPlan"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class Issue:
    code: str          # MissingSection | DuplicateSection | HeaderOrder | ConstraintViolation
    section: str
    message: str

    def as_dict(self) -> dict[str, str]:
        return {"code": self.code, "section": self.section, "message": self.message}


def _nonempty_lines(body: str) -> list[str]:
    return [line for line in body.splitlines() if line.strip()]


@dataclass(frozen=True)
class GradeLines:
    """Every non-empty line must carry exactly one unambiguous grade token;
    optionally the number of lines must equal the scenario's site count."""

    section: str
    expected_count: int | None = None

    def check(self, body: str) -> list[Issue]:
        issues = []
        lines = _nonempty_lines(body)
        if not lines:
            issues.append(Issue("ConstraintViolation", self.section,
                                "no graded lines in section"))
            return issues
        for line in lines:
            try:
                parse_grade(line)
            except GradeParseError as exc:
                issues.append(Issue("ConstraintViolation", self.section,
                                    f"unparsable grade token: {exc}"))
        if self.expected_count is not None and len(lines) != self.expected_count:
            issues.append(Issue(
                "ConstraintViolation", self.section,
                f"expected {self.expected_count} graded lines, found {len(lines)}",
            ))
        return issues


@dataclass(frozen=True)
class QuantifiedLines:
    """Every non-empty line needs an integer quantity (personnel counts)."""

    section: str

    def check(self, body: str) -> list[Issue]:
        lines = _nonempty_lines(body)
        if not lines:
            return [Issue("ConstraintViolation", self.section, "no allocation lines in section")]
        issues = []
        for line in lines:
            if not re.search(r"\d+", line):
                issues.append(Issue("ConstraintViolation", self.section,
                                    f"unquantified allocation line: {line.strip()!r}"))
        return issues


_BUDGET_RE = re.compile(r"\$\s*\d|(?i:\b\d[\d,.]*\s*(?:billion|million|thousand)\b)")


@dataclass(frozen=True)
class BudgetLine:
    """Section must state a monetary estimate ("$1 billion", "250 million")."""

    section: str

    def check(self, body: str) -> list[Issue]:
        if _BUDGET_RE.search(body):
            return []
        return [Issue("ConstraintViolation", self.section, "missing budget amount")]


Constraint = GradeLines | QuantifiedLines | BudgetLine


@dataclass(frozen=True)
class ReportTemplate:
    kind: ReportKind
    headers: tuple[str, ...]
    constraints: tuple[Constraint, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(set(h.casefold() for h in self.headers)) != len(self.headers):
            raise ValueError("template headers must be unique")


_HEADERS: dict[ReportKind, tuple[str, ...]] = {
    ReportKind.EXPERT_SUMMARY: ("Overview", "Site Assessments", "Damage Grades"),
    ReportKind.ALERT_NEWS: ("Headline", "Dangerous Areas", "Safety Instructions"),
    ReportKind.EMERGENCY_SERVICES: ("Priority Areas", "Required Services", "Historical Reference"),
    ReportKind.HUMAN_ALLOCATION: ("Allocation by Location", "Totals"),
    ReportKind.PUBLIC_NOTICE: ("Situation", "Guidance", "Coordination Statement"),
    ReportKind.RECONSTRUCTION_PLAN: ("Damage Summary", "Phases", "Budget Estimate"),
}

# Header vocabulary across all six templates; used as section boundaries when
# several reports share one text (the assignment stage emits three at once).
ALL_KNOWN_HEADERS: tuple[str, ...] = tuple(h for hs in _HEADERS.values() for h in hs)


def template_for(kind: ReportKind, site_count: int | None = None) -> ReportTemplate:
    """The built-in template for ``kind``.

    ``site_count`` binds the ExpertSummary assessment-line count to a concrete
    scenario; without it the grade-token checks still run, just not the count.
    """
    headers = _HEADERS[kind]
    constraints: tuple[Constraint, ...] = ()
    if kind is ReportKind.EXPERT_SUMMARY:
        constraints = (
            GradeLines("Site Assessments", expected_count=site_count),
            GradeLines("Damage Grades"),
        )
    elif kind is ReportKind.HUMAN_ALLOCATION:
        constraints = (QuantifiedLines("Allocation by Location"),)
    elif kind is ReportKind.RECONSTRUCTION_PLAN:
        constraints = (BudgetLine("Budget Estimate"),)
    return ReportTemplate(kind=kind, headers=headers, constraints=constraints)
