"""Image interpretation: one vision completion per image, validation first."""

from __future__ import annotations

import base64
import io
from typing import Any

from PIL import Image, UnidentifiedImageError

from disasteller.errors import DisasTellerError
from disasteller.gateway.types import ImagePart, Message, ModelRequest, TextPart


class UndecodableImage(DisasTellerError):
    pass


VISION_SYSTEM_PROMPT = (
    "You describe structural and environmental damage visible in a single "
    "post-disaster photograph, factually and concisely."
)


def _sniff_media_type(data: bytes) -> str:
    try:
        with Image.open(io.BytesIO(data)) as im:
            fmt = (im.format or "").upper()
            im.verify()
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise UndecodableImage(f"image bytes are not decodable: {exc}") from exc
    return "image/jpeg" if fmt == "JPEG" else "image/png"


def interpret_image(
    gateway: Any,
    image_bytes: bytes,
    instruction: str,
    model_id: str = "gpt-4o",
    stage: str | None = None,
    temperature: float = 0.7,
    max_output_tokens: int = 1024,
) -> str:
    """Attach the image and instruction, return the response text verbatim.

    Raises UndecodableImage before any gateway call if the bytes are corrupt.
    """
    if not instruction:
        raise ValueError("instruction must be non-empty")
    media_type = _sniff_media_type(image_bytes)
    request = ModelRequest(
        model_id=model_id,
        messages=(
            Message.text("system", VISION_SYSTEM_PROMPT),
            Message(
                role="user",
                parts=(
                    TextPart(instruction),
                    ImagePart(media_type=media_type,
                              base64_data=base64.b64encode(image_bytes).decode("ascii")),
                ),
            ),
        ),
        temperature=temperature,
        max_output_tokens=max_output_tokens,
        stage=stage,
    )
    return gateway.complete(request).text
