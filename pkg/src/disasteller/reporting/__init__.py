from disasteller.reporting.persist import load_manifest, load_run_record, persist_run
from disasteller.reporting.templates import (
    ALL_KNOWN_HEADERS,
    BudgetLine,
    GradeLines,
    Issue,
    QuantifiedLines,
    ReportKind,
    ReportTemplate,
    template_for,
)
from disasteller.reporting.validation import (
    Report,
    extract_report_text,
    make_report,
    parse_report,
    render_report,
    validate_report,
)

__all__ = [
    "ALL_KNOWN_HEADERS",
    "BudgetLine",
    "GradeLines",
    "Issue",
    "QuantifiedLines",
    "Report",
    "ReportKind",
    "ReportTemplate",
    "extract_report_text",
    "load_manifest",
    "load_run_record",
    "make_report",
    "parse_report",
    "persist_run",
    "render_report",
    "template_for",
    "validate_report",
]
