"""Alert-map rendering: grade discs at resolved pixel coordinates plus a legend.

Drawing rules are fixed so tests can assert exact pixels: a filled disc of
radius 12 in the grade's palette color with a 2 px black outline, the grade
token lettered next to it, and (when anything was annotated) a five-swatch
legend in the least-occupied corner. The input raster is never mutated.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass

from PIL import Image, ImageDraw, ImageFont, ImageStat

from disasteller.core.grades import GRADE_LABELS, DamageGrade, grade_color
from disasteller.errors import DisasTellerError

logger = logging.getLogger(__name__)

MARKER_RADIUS = 12
OUTLINE_WIDTH = 2


class MappingError(DisasTellerError):
    pass


class OutOfBounds(MappingError):
    """An annotation's coordinates fall outside the base map."""


@dataclass(frozen=True)
class MapAnnotation:
    location_name: str
    grade: DamageGrade
    x: int
    y: int


def annotate_map(
    base_map: Image.Image,
    annotations: list[MapAnnotation],
    radius: int = MARKER_RADIUS,
) -> Image.Image:
    """Render annotations onto a copy of ``base_map``.

    With no annotations the result is a pixel-identical copy. Otherwise the
    output is RGB, same dimensions, with one disc + grade token per annotation
    and a legend block. Raises OutOfBounds (naming the annotation) before any
    drawing happens.
    """
    width, height = base_map.size
    for ann in annotations:
        if not (0 <= ann.x < width and 0 <= ann.y < height):
            raise OutOfBounds(
                f"annotation {ann.location_name!r} at ({ann.x},{ann.y}) "
                f"outside {width}x{height} map"
            )
    if not annotations:
        return base_map.copy()

    out = base_map.convert("RGB")
    if out is base_map:  # convert() may return self for matching modes on some paths
        out = base_map.copy()
    legend_box = _pick_legend_box(out, annotations, radius)
    draw = ImageDraw.Draw(out)
    font = ImageFont.load_default()

    for ann in annotations:
        color = grade_color(ann.grade)
        bbox = (ann.x - radius, ann.y - radius, ann.x + radius, ann.y + radius)
        draw.ellipse(bbox, fill=color, outline=(0, 0, 0), width=OUTLINE_WIDTH)
        _draw_token(draw, font, ann, radius, width, height)

    if legend_box is not None:
        _draw_legend(draw, font, legend_box)
    else:
        logger.warning("map %dx%d too small for the legend block; skipped", width, height)
    return out


def _draw_token(draw, font, ann: MapAnnotation, radius: int, width: int, height: int) -> None:
    token = ann.grade.token
    tb = draw.textbbox((0, 0), token, font=font)
    tw, th = tb[2] - tb[0], tb[3] - tb[1]
    tx = ann.x + radius + 3
    if tx + tw >= width:
        tx = ann.x - radius - 3 - tw
    ty = min(max(ann.y - th // 2, 0), max(height - th - 1, 0))
    draw.text((tx, ty), token, fill=(0, 0, 0), font=font)


def _legend_size(font) -> tuple[int, int, int]:
    probe = Image.new("RGB", (1, 1))
    draw = ImageDraw.Draw(probe)
    row_h = 16
    widest = 0
    for grade in DamageGrade:
        label = f"{grade.token} {GRADE_LABELS[grade]}"
        tb = draw.textbbox((0, 0), label, font=font)
        widest = max(widest, tb[2] - tb[0])
    width = 8 + 12 + 6 + widest + 8        # pad, swatch, gap, text, pad
    height = 8 + row_h * len(DamageGrade) + 4
    return width, height, row_h


def _pick_legend_box(
    image: Image.Image, annotations: list[MapAnnotation], radius: int
) -> tuple[int, int, int, int] | None:
    """Least-occupied corner: avoid marker discs, then lowest pixel variance."""
    font = ImageFont.load_default()
    lw, lh, _ = _legend_size(font)
    width, height = image.size
    margin = 6
    if lw + 2 * margin > width or lh + 2 * margin > height:
        return None
    corners = [
        (margin, margin),
        (width - margin - lw, margin),
        (margin, height - margin - lh),
        (width - margin - lw, height - margin - lh),
    ]
    best = None
    for cx, cy in corners:
        box = (cx, cy, cx + lw, cy + lh)
        hits = sum(
            1
            for a in annotations
            if box[0] - radius <= a.x <= box[2] + radius
            and box[1] - radius <= a.y <= box[3] + radius
        )
        variance = sum(ImageStat.Stat(image.crop(box)).var)
        key = (hits, variance)
        if best is None or key < best[0]:
            best = (key, box)
    return best[1] if best else None


def _draw_legend(draw, font, box: tuple[int, int, int, int]) -> None:
    x0, y0, x1, y1 = box
    draw.rectangle(box, fill=(255, 255, 255), outline=(0, 0, 0), width=1)
    _, _, row_h = _legend_size(font)
    y = y0 + 6
    for grade in DamageGrade:
        draw.rectangle((x0 + 8, y, x0 + 8 + 12, y + 12),
                       fill=grade_color(grade), outline=(0, 0, 0), width=1)
        draw.text((x0 + 8 + 12 + 6, y), f"{grade.token} {GRADE_LABELS[grade]}",
                  fill=(0, 0, 0), font=font)
        y += row_h


def png_bytes(image: Image.Image) -> bytes:
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()
