"""Report parsing, rendering, and format validation.

A header matches a line that equals it after trimming, case-folding, and
dropping any leading '#' marks, so "## Overview", "# overview" and "Overview"
all open the Overview section. Validation is pure: issues are data, never
exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass

from disasteller.reporting.templates import (
    ALL_KNOWN_HEADERS,
    Issue,
    ReportKind,
    ReportTemplate,
)


def _normalize_header_line(line: str) -> str:
    return line.strip().lstrip("#").strip().casefold()


def _is_header_line(line: str, header: str) -> bool:
    return _normalize_header_line(line) == header.casefold()


def _matches_any(line: str, headers: tuple[str, ...]) -> bool:
    norm = _normalize_header_line(line)
    return any(norm == h.casefold() for h in headers)


def _is_boundary(line: str, headers: tuple[str, ...]) -> bool:
    """Section bodies end at the next known header in any spelling, or at any
    markdown heading line (so an unrecognized heading never leaks into a body)."""
    return line.lstrip().startswith("#") or _matches_any(line, headers)


@dataclass(frozen=True)
class Report:
    """One templated output document. ``valid`` iff the issue list is empty."""

    kind: ReportKind
    raw_text: str
    sections: dict[str, str]
    issues: tuple[Issue, ...]

    @property
    def valid(self) -> bool:
        return not self.issues

    def sidecar(self) -> dict:
        return {
            "kind": self.kind.value,
            "sections": dict(self.sections),
            "valid": self.valid,
            "issues": [i.as_dict() for i in self.issues],
        }


def parse_report(
    text: str,
    template: ReportTemplate,
    boundary_headers: tuple[str, ...] | None = None,
) -> dict[str, str]:
    """(header -> body) for the template's headers found in ``text``.

    A body runs until the next line matching any boundary header (the full
    built-in vocabulary by default, so co-rendered reports split cleanly).
    Bodies are stripped of leading/trailing blank lines. Duplicate headers
    keep their first occurrence.
    """
    boundaries = boundary_headers if boundary_headers is not None else (
        template.headers + tuple(h for h in ALL_KNOWN_HEADERS if h not in template.headers)
    )
    lines = text.splitlines()
    sections: dict[str, str] = {}
    for header in template.headers:
        start = None
        for i, line in enumerate(lines):
            if _is_header_line(line, header):
                start = i
                break
        if start is None:
            continue
        body_lines: list[str] = []
        for line in lines[start + 1:]:
            if _is_boundary(line, boundaries):
                break
            body_lines.append(line)
        sections[header] = "\n".join(body_lines).strip("\n")
    return sections


def validate_report(text: str, template: ReportTemplate) -> list[Issue]:
    """Header presence/uniqueness/order first, then section constraints.

    Each issue carries {code, section, message}; an empty list means valid.
    """
    lines = text.splitlines()
    issues: list[Issue] = []
    first_pos: dict[str, int] = {}
    for header in template.headers:
        positions = [i for i, line in enumerate(lines) if _is_header_line(line, header)]
        if not positions:
            issues.append(Issue("MissingSection", header,
                                f"required section {header!r} not found"))
            continue
        if len(positions) > 1:
            issues.append(Issue("DuplicateSection", header,
                                f"section {header!r} appears {len(positions)} times"))
        first_pos[header] = positions[0]

    present = [h for h in template.headers if h in first_pos]
    for prev, nxt in zip(present, present[1:]):
        if first_pos[nxt] < first_pos[prev]:
            issues.append(Issue("HeaderOrder", nxt,
                                f"section {nxt!r} appears before {prev!r}"))
            break

    sections = parse_report(text, template)
    for constraint in template.constraints:
        if constraint.section in sections:
            issues.extend(constraint.check(sections[constraint.section]))
    return issues


def make_report(text: str, template: ReportTemplate) -> Report:
    return Report(
        kind=template.kind,
        raw_text=text,
        sections=parse_report(text, template),
        issues=tuple(validate_report(text, template)),
    )


def render_report(kind: ReportKind, sections: dict[str, str]) -> str:
    """Markdown rendering: '## Header' lines with bodies between them."""
    blocks = []
    for header, body in sections.items():
        blocks.append(f"## {header}\n\n{body.strip()}\n")
    rendered = "\n".join(blocks)
    return rendered


def extract_report_text(
    full_text: str, template: ReportTemplate, sibling_headers: tuple[str, ...]
) -> str:
    """Pull one report's text out of a stage's combined final completion.

    Rebuilds the report section by section (original header line plus its body
    up to the next known header), so interleaved sibling reports cannot bleed
    into each other.
    """
    lines = full_text.splitlines()
    boundaries = tuple(dict.fromkeys(template.headers + sibling_headers + ALL_KNOWN_HEADERS))
    out: list[str] = []
    for header in template.headers:
        start = None
        for i, line in enumerate(lines):
            if _is_header_line(line, header):
                start = i
                break
        if start is None:
            continue
        block = [lines[start]]
        for line in lines[start + 1:]:
            if _is_boundary(line, boundaries):
                break
            block.append(line)
        while block and not block[-1].strip():
            block.pop()
        out.extend(block)
        out.append("")
    return "\n".join(out).strip("\n") + "\n"
