"""Rubric-prompted evaluator: request construction and reply parsing.

The evaluator is cast as a post-disaster management expert, sees the report
text and the on-site images, and must answer in a fixed grammar: a
"SCORE: <n>/10" line followed by "WEAKNESSES:" prose covering all criteria.
"""

from __future__ import annotations

import base64
import io
import re
from dataclasses import dataclass

from PIL import Image, UnidentifiedImageError

from disasteller.errors import DisasTellerError
from disasteller.gateway.types import ImagePart, Message, ModelRequest, TextPart
from disasteller.toolkit.vision import UndecodableImage


class UnparsableScore(DisasTellerError):
    """No score token, score out of range, or missing explanation."""


@dataclass(frozen=True)
class Rubric:
    criteria: tuple[str, ...] = ("coherence", "consistency", "accuracy")
    scale_min: int = 1
    scale_max: int = 10
    requires_explanation: bool = True

    def text(self) -> str:
        crits = "\n".join(f"- {c}" for c in self.criteria)
        return (
            f"Grade the material from {self.scale_min} (unusable) to "
            f"{self.scale_max} (flawless) considering:\n{crits}\n"
            "A detailed explanation of the material's weaknesses is mandatory."
        )


EVALUATOR_SYSTEM_PROMPT = (
    "You are a post-disaster management expert reviewing the output of an "
    "automated disaster-response system."
)

_REPLY_FORMAT = (
    'Answer with a line "SCORE: <n>/10" (n an integer 1..10), then a line '
    'starting "WEAKNESSES:" followed by your explanation covering every '
    "criterion."
)


def _image_part(data: bytes) -> ImagePart:
    try:
        with Image.open(io.BytesIO(data)) as im:
            fmt = (im.format or "").upper()
            im.verify()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise UndecodableImage(f"evaluator image undecodable: {exc}") from exc
    media = "image/jpeg" if fmt == "JPEG" else "image/png"
    return ImagePart(media_type=media, base64_data=base64.b64encode(data).decode("ascii"))


def build_evaluator_request(
    target: str,
    material: str,
    images: list[bytes],
    rubric: Rubric,
    model_id: str = "gpt-4o",
    temperature: float = 0.7,
    max_output_tokens: int = 1024,
) -> ModelRequest:
    """Judgment request for one target (a report or an intermediate task).

    ``material`` is the text under judgment; ``images`` the supporting rasters
    (site photos, or the alert map). Raises UndecodableImage before building
    anything the gateway would see.
    """
    parts: list = [
        TextPart(
            f"Target under evaluation: {target}\n\n{rubric.text()}\n\n"
            f"{_REPLY_FORMAT}\n\n--- MATERIAL ---\n{material}"
        )
    ]
    parts.extend(_image_part(data) for data in images)
    return ModelRequest(
        model_id=model_id,
        messages=(
            Message.text("system", EVALUATOR_SYSTEM_PROMPT),
            Message(role="user", parts=tuple(parts)),
        ),
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        stage=f"evaluate.{target}",
    )


_SCORE_RE = re.compile(r"SCORE:\s*(\d+)\s*/\s*10")
_WEAKNESS_MARK = "WEAKNESSES:"


def render_evaluator_reply(score: int, explanation: str) -> str:
    """The exact grammar parse_score expects; inverse of parse_score."""
    return f"SCORE: {score}/10\n{_WEAKNESS_MARK} {explanation}"


def parse_score(text: str) -> tuple[int, str]:
    """(score, explanation) from an evaluator reply.

    Raises UnparsableScore when there is no token, the first token is out of
    range, or no non-empty explanation follows the WEAKNESSES marker.
    """
    match = _SCORE_RE.search(text)
    if match is None:
        raise UnparsableScore(f"no SCORE token in {text!r}")
    score = int(match.group(1))
    if not 1 <= score <= 10:
        raise UnparsableScore(f"score {score} outside 1..10")
    marker = text.find(_WEAKNESS_MARK, match.end())
    if marker < 0:
        raise UnparsableScore("no WEAKNESSES explanation")
    explanation = text[marker + len(_WEAKNESS_MARK):].strip()
    if not explanation:
        raise UnparsableScore("empty WEAKNESSES explanation")
    return score, explanation
