import pytest
from PIL import Image

from disasteller.core.grades import DamageGrade, grade_color
from disasteller.toolkit.mapping import (
    MapAnnotation,
    OutOfBounds,
    annotate_map,
    png_bytes,
)


def _base(width=800, height=600):
    im = Image.new("RGB", (width, height), (230, 230, 225))
    for x in range(0, width, 50):
        for y in range(0, height, 40):
            im.putpixel((x, y), (90, 90, 90))
    return im


def test_zero_annotations_pixel_identical():
    base = _base(200, 150)
    out = annotate_map(base, [])
    assert out is not base
    assert out.size == base.size
    assert out.tobytes() == base.tobytes()


def test_input_never_mutated():
    base = _base()
    before = base.tobytes()
    annotate_map(base, [MapAnnotation("Hama Street", DamageGrade.G4, 120, 340)])
    assert base.tobytes() == before


def test_disc_center_pixel_exact_for_every_grade():
    base = _base()
    coords = [(100, 100), (300, 120), (500, 300), (200, 400), (650, 200)]
    annotations = [
        MapAnnotation(f"Site {g.token}", g, x, y)
        for g, (x, y) in zip(DamageGrade, coords)
    ]
    out = annotate_map(base, annotations)
    assert out.size == base.size
    for ann in annotations:
        assert out.getpixel((ann.x, ann.y)) == grade_color(ann.grade)


def test_marker_has_black_outline():
    out = annotate_map(_base(), [MapAnnotation("X", DamageGrade.G1, 400, 300)])
    # outline ring sits at the disc's bounding-box edge
    assert out.getpixel((400, 300 - 12)) == (0, 0, 0)


def test_out_of_bounds_names_annotation():
    base = _base(100, 80)
    with pytest.raises(OutOfBounds, match="Far Pier"):
        annotate_map(base, [MapAnnotation("Far Pier", DamageGrade.G2, 120, 10)])
    with pytest.raises(OutOfBounds):
        annotate_map(base, [MapAnnotation("Neg", DamageGrade.G2, -1, 10)])


def _has_legend(image, box_size=130):
    """Legend drawn => some corner region contains all five palette colors."""
    w, h = image.size
    corners = [(0, 0), (w - box_size, 0), (0, h - box_size), (w - box_size, h - box_size)]
    palette = {grade_color(g) for g in DamageGrade}
    for cx, cy in corners:
        region = image.crop((max(cx, 0), max(cy, 0),
                             min(cx + box_size, w), min(cy + box_size, h)))
        colors = {c for _, c in region.getcolors(maxcolors=100000)}
        if palette <= colors:
            return True
    return False


def test_legend_present_when_annotated():
    out = annotate_map(_base(), [MapAnnotation("X", DamageGrade.G3, 400, 300)])
    assert _has_legend(out)


def test_no_legend_without_annotations():
    out = annotate_map(_base(), [])
    assert not _has_legend(out)


def test_rgba_input_normalized_to_rgb():
    base = Image.new("RGBA", (300, 200), (200, 200, 200, 255))
    out = annotate_map(base, [MapAnnotation("X", DamageGrade.G5, 150, 100)])
    assert out.mode == "RGB"
    assert out.getpixel((150, 100)) == grade_color(DamageGrade.G5)


def test_png_bytes_round_trip():
    out = annotate_map(_base(120, 90), [])
    data = png_bytes(out)
    import io
    again = Image.open(io.BytesIO(data))
    assert again.size == (120, 90)
