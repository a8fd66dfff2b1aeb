"""EMS-98 damage grade vocabulary: the five-level scale, parsing, and marker colors.

Grades run G1 (slight damage) through G5 (very heavy damage / destruction).
Free text coming back from models is parsed with a deliberately narrow token
grammar so that prose like "3 buildings" can never be mistaken for a grade.
"""

from __future__ import annotations

import re
from enum import IntEnum

from disasteller.errors import DisasTellerError


class GradeParseError(DisasTellerError):
    pass


class NoGradeToken(GradeParseError):
    """Text contains no recognizable damage-grade token."""


class AmbiguousGrade(GradeParseError):
    """Text names two or more distinct damage grades."""


class DamageGrade(IntEnum):
    """Ordered EMS-98 damage scale. Comparison follows severity: G1 < G5."""

    G1 = 1
    G2 = 2
    G3 = 3
    G4 = 4
    G5 = 5

    @property
    def level(self) -> int:
        return int(self.value)

    @property
    def token(self) -> str:
        return self.name

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.name


# Fixed marker palette, injective over grades. Chosen so map tests can assert
# exact pixels; part of the scenario-format contract, not a tunable.
_PALETTE: dict[DamageGrade, tuple[int, int, int]] = {
    DamageGrade.G1: (46, 204, 64),    # green
    DamageGrade.G2: (255, 220, 0),    # yellow
    DamageGrade.G3: (255, 133, 27),   # orange
    DamageGrade.G4: (255, 65, 54),    # red
    DamageGrade.G5: (128, 0, 32),     # dark red
}

GRADE_LABELS: dict[DamageGrade, str] = {
    DamageGrade.G1: "slight",
    DamageGrade.G2: "moderate",
    DamageGrade.G3: "substantial",
    DamageGrade.G4: "very heavy",
    DamageGrade.G5: "destruction",
}

# Accepts "G3", "g-3", "G 3", "Grade 3", "grade-3". Rejects bare digits and
# out-of-scale levels like G9. The lookarounds stop matches inside words or
# longer numbers ("EG3x", "G34").
_TOKEN_RE = re.compile(r"(?i)(?<![a-z0-9])(?:grade|g)[ -]?([1-5])(?![0-9])")


def find_grade_tokens(text: str) -> list[DamageGrade]:
    """All grade tokens in order of appearance (duplicates kept)."""
    return [DamageGrade(int(m)) for m in _TOKEN_RE.findall(text)]


def parse_grade(text: str) -> DamageGrade:
    """Parse the single damage grade named by ``text``.

    Repeated mentions of the same grade are fine; two distinct grades are not.

    Raises:
        NoGradeToken: no recognizable token.
        AmbiguousGrade: two or more distinct grades named.
    """
    if not text:
        raise NoGradeToken("empty text")
    found = set(find_grade_tokens(text))
    if not found:
        raise NoGradeToken(f"no damage-grade token in {text!r}")
    if len(found) > 1:
        names = ", ".join(sorted(g.name for g in found))
        raise AmbiguousGrade(f"multiple distinct grades in {text!r}: {names}")
    return found.pop()


def grade_color(grade: DamageGrade) -> tuple[int, int, int]:
    """Fixed RGB marker color for ``grade``; injective over the five grades."""
    return _PALETTE[DamageGrade(grade)]
