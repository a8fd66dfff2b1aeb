"""Render an alert map: one disc per graded location plus the legend.

Location names resolve to pixels through the gazetteer (the model never
supplies coordinates), each disc's center is exactly the grade's palette
color, and the legend lands in the least-occupied corner.

    python3 demos/annotate_alert_map.py [out.png]
"""

import sys
import tempfile
from pathlib import Path

from PIL import Image

from disasteller.core.grades import DamageGrade, grade_color
from disasteller.toolkit.gazetteer import Gazetteer, GazetteerEntry, resolve_location
from disasteller.toolkit.mapping import MapAnnotation, annotate_map

out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else \
    Path(tempfile.mkdtemp(prefix="disasteller-map-")) / "alert_map.png"

base = Image.new("RGB", (800, 600), (228, 232, 226))

gazetteer = Gazetteer([
    GazetteerEntry("Harbor Front", aliases=("the harbor",), x=140, y=150),
    GazetteerEntry("Old Market", aliases=(), x=390, y=220),
    GazetteerEntry("River Bridge", aliases=(), x=620, y=310),
    GazetteerEntry("School Block", aliases=(), x=300, y=430),
    GazetteerEntry("Mill District", aliases=(), x=520, y=480),
])

graded = [
    ("Harbor Front", DamageGrade.G2),
    ("Old Market", DamageGrade.G5),
    ("River Bridge", DamageGrade.G3),
    ("School Block", DamageGrade.G1),
    ("Mill District", DamageGrade.G4),
]

annotations = []
for name, grade in graded:
    x, y = resolve_location(gazetteer, name)
    annotations.append(MapAnnotation(name, grade, x, y))
    print(f"{name:<14} {grade.token}  -> pixel ({x}, {y})  color {grade_color(grade)}")

rendered = annotate_map(base, annotations)
rendered.save(out_path)
print(f"\nwrote {out_path}")

# The drawing contract is pixel-exact: verify one center right here.
x, y = resolve_location(gazetteer, "old market")
assert rendered.getpixel((x, y)) == grade_color(DamageGrade.G5)
print("center-pixel check passed for Old Market (G5 dark red)")
