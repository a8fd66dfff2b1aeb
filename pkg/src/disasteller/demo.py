"""Self-contained offline demo fixture: a Wajima-style earthquake scenario,
the scripted model responses that drive all four stages through it, a scripted
evaluator, and a human-scores CSV.

Everything here is deterministic, so two runs of the demo produce byte
identical reports and maps. Tests and the narrative scripts in demos/ build on
this module instead of shipping binary fixtures.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from PIL import Image, ImageDraw

from disasteller.evaluation.scores import TARGETS

# (site_id, location name, grade token, damage description)
DEMO_SITES: tuple[tuple[str, str, str, str], ...] = (
    ("s1", "Wajima Drama Memorial Hall", "G4",
     "partial roof collapse over the main hall and buckled entrance columns"),
    ("s2", "Hama Street", "G5",
     "burned-out storefronts with leaning timber frames along the whole block"),
    ("s3", "Concrete Bridge", "G3",
     "cracked deck slab and visibly displaced bearing on the north abutment"),
    ("s4", "Central Nishikigawa Street", "G4",
     "toppled facades and heavy debris blocking the roadway"),
    ("s5", "North Asaichi Street", "G5",
     "widespread fire destruction and collapsed market stalls"),
    ("s6", "South Central Asaichi Street", "G2",
     "moderate cracking in masonry walls, structures standing"),
)

DEMO_MAP_SIZE = (800, 600)

DEMO_COORDS: dict[str, tuple[int, int]] = {
    "Wajima Drama Memorial Hall": (150, 200),
    "Hama Street": (420, 140),
    "Concrete Bridge": (610, 300),
    "Central Nishikigawa Street": (360, 330),
    "North Asaichi Street": (300, 450),
    "South Central Asaichi Street": (520, 470),
}

EMERGENCY_QUERY = "noto earthquake 2024 casualties"
ASSIGNMENT_QUERY = "earthquake reconstruction cost estimates japan"

GUIDELINE_TEXT = """\
Macroseismic Damage Classification Handbook

Purpose and scope. This handbook defines a five level classification of
building damage for rapid post earthquake field assessment, aligned with the
European macroseismic practice of grading structural and non structural
damage. Each survey team assigns one damage grade per building or site after
inspecting the load bearing system, the roof, infill walls, and foundations.
The grade expresses the severity of the observed damage, not the cause, and
must be supported by the indicators listed below.

Grade 1, negligible to slight damage. No structural damage and only slight
non structural damage. Hairline cracks appear in very few walls, small pieces
of plaster may fall, and loose stones or roof tiles may drop in isolated
spots. The load bearing system is unaffected and the building remains fully
serviceable. Typical indicators: fine plaster cracks under one millimetre,
undisturbed door and window frames, no measurable tilt.

Grade 2, moderate damage. Slight structural damage combined with moderate non
structural damage. Cracks occur in many walls, fairly large pieces of plaster
fall, and parts of chimneys or parapets fail. Masonry shows diagonal cracking
around openings; reinforced concrete frames show cracks in partition and
infill walls. The structure retains most of its original capacity and short
term occupancy is usually possible after inspection.

Grade 3, substantial to heavy damage. Moderate structural damage with heavy
non structural damage. Large and extensive cracks develop in most walls, roof
tiles detach over wide areas, chimneys fracture at the roof line, and
individual non structural elements collapse. In reinforced concrete buildings
cracks appear in columns and beam column joints and in shear walls. Repair is
demanding and access must be restricted until shoring is installed.

Grade 4, very heavy damage. Heavy structural damage with very heavy non
structural damage. Serious failure of walls, with gaps opening through the
thickness; partial structural collapse of roofs or intermediate floors;
crushing of concrete in columns and buckling of reinforcement bars. The
building is unsafe to enter, and adjacent streets should be closed where
collapse into the road is possible.

Grade 5, destruction. Very heavy structural damage amounting to total or near
total collapse of the building. Large parts of the load bearing system have
failed; floors pancake or the structure overturns. Search and rescue effort
takes precedence over any engineering assessment, and demolition is usually
the only option.

Vulnerability and grading procedure. Buildings of different vulnerability
reach a given damage grade at different shaking intensities; the classifier
must therefore record the structure type (unreinforced masonry, confined
masonry, reinforced concrete frame, timber frame, steel frame) together with
the assigned grade. Where a site contains several structures, assign the site
the grade of the most damaged load bearing structure that affects public
safety. When the evidence lies between two grades, assign the higher grade if
the damage indicators involve the load bearing system, otherwise the lower.
Photographs must show each indicator used to justify the classification, and
descriptions of damage should reference the indicator vocabulary of this
handbook: crack width, plaster fall, tile displacement, chimney failure, wall
gap, partial collapse, pancaked floor, overturned structure.

Grading from imagery. Remote grading from photographs follows the same scale
with two cautions. First, interior structural damage is systematically under
represented in street level imagery, so a grade assigned from facade evidence
alone is a lower bound between Grade 2 and Grade 4. Second, fire following
earthquake can raze timber districts to Grade 5 while leaving isolated
concrete structures at Grade 2 or Grade 3; mixed blocks must be graded per
structure, never averaged. An assessment note should state whether the grade
derives from structural deformation, fire consumption, or both.

Mapping and reporting. Each graded site is plotted on the region map using
the standard colour ramp from green for Grade 1 through yellow and orange to
red and dark red for Grade 5, so that responders can read the severity
distribution at a glance. The written assessment accompanying the map lists,
for every site, the location name, the damage description with indicator
vocabulary, and the assigned grade token. Grades in text always use the short
token form, Grade 1 to Grade 5, to keep parsing unambiguous for downstream
reporting and classification systems that consume the assessment.
"""


def _site_image(index: int) -> Image.Image:
    """Small deterministic placeholder photo for one site."""
    colors = [(168, 128, 96), (96, 96, 104), (140, 140, 132),
              (120, 104, 88), (88, 80, 72), (152, 144, 120)]
    im = Image.new("RGB", (64, 48), colors[index % len(colors)])
    draw = ImageDraw.Draw(im)
    draw.line((0, 47 - index * 4, 63, index * 6), fill=(30, 30, 30), width=2)
    draw.rectangle((4 + index * 3, 8, 20 + index * 3, 28), outline=(10, 10, 10))
    return im


def _global_map() -> Image.Image:
    im = Image.new("RGB", DEMO_MAP_SIZE, (226, 232, 226))
    draw = ImageDraw.Draw(im)
    # A few street- and shoreline-like strokes so corners differ in variance.
    draw.line((0, 120, 800, 90), fill=(120, 150, 190), width=8)
    draw.line((80, 0, 240, 600), fill=(180, 180, 180), width=5)
    draw.line((0, 380, 800, 420), fill=(180, 180, 180), width=5)
    draw.line((520, 0, 640, 600), fill=(180, 180, 180), width=5)
    draw.rectangle((640, 430, 780, 560), fill=(208, 220, 208))
    for x in range(100, 800, 140):
        draw.rectangle((x, 220, x + 36, 250), fill=(200, 204, 210))
    return im


def make_demo_scenario(root: str | Path) -> Path:
    """Write the demo scenario tree under ``root``; returns the manifest path."""
    root = Path(root)
    (root / "sites").mkdir(parents=True, exist_ok=True)

    for i, (site_id, _, _, _) in enumerate(DEMO_SITES):
        _site_image(i).save(root / "sites" / f"{site_id}.png")
    _global_map().save(root / "map.png")

    gazetteer = [
        {"name": name, "aliases": [name.replace(" Street", " St.")], "x": x, "y": y}
        for name, (x, y) in DEMO_COORDS.items()
    ]
    (root / "gazetteer.json").write_text(json.dumps(gazetteer, indent=2) + "\n",
                                         encoding="utf-8")
    (root / "guideline.txt").write_text(GUIDELINE_TEXT, encoding="utf-8")

    fixture = {
        EMERGENCY_QUERY: [
            {"title": "Noto Peninsula earthquake: situation report",
             "url": "https://example.org/noto-2024-report",
             "snippet": "Casualty figures and infrastructure losses from the 2024 event."},
            {"title": "Historical earthquake response timelines",
             "url": "https://example.org/response-timelines",
             "snippet": "Emergency service mobilisation in past Japanese earthquakes."},
            {"title": "Fire-following-earthquake case studies",
             "url": "https://example.org/fire-following",
             "snippet": "Urban fire spread after strong shaking in timber districts."},
        ],
        ASSIGNMENT_QUERY: [
            {"title": "Reconstruction cost benchmarks", "url": "https://example.org/costs",
             "snippet": "Budget envelopes for municipal earthquake reconstruction."},
            {"title": "Recovery program retrospectives", "url": "https://example.org/recovery",
             "snippet": "Phased rebuilding programs and their funding profiles."},
            {"title": "Temporary housing logistics", "url": "https://example.org/housing",
             "snippet": "Personnel and material planning for shelter construction."},
        ],
    }
    (root / "websearch_fixture.json").write_text(json.dumps(fixture, indent=2) + "\n",
                                                 encoding="utf-8")

    manifest = {
        "scenario_id": "wajima-demo",
        "region_name": "Wajima City",
        "sites": [
            {"site_id": site_id, "location_name": name, "image": f"sites/{site_id}.png"}
            for site_id, name, _, _ in DEMO_SITES
        ],
        "global_map": "map.png",
        "gazetteer": "gazetteer.json",
        "guideline": "guideline.txt",
    }
    manifest_path = root / "scenario.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def demo_config_dict(scenario_dir: str | Path) -> dict:
    """Engine config wired to the demo's web-search fixture."""
    return {
        "gateway": {"endpoint": "https://api.openai.com/v1", "model_id": "gpt-4o"},
        "tools": {
            "web_search": {
                "mode": "fixture",
                "fixture_path": str(Path(scenario_dir) / "websearch_fixture.json"),
            }
        },
    }


def write_demo_config(scenario_dir: str | Path, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(demo_config_dict(scenario_dir), indent=2) + "\n",
                    encoding="utf-8")
    return path


def _expert_summary_text() -> str:
    assess_lines = [f"{name} - {desc}; assessed {grade}"
                    for _, name, grade, desc in DEMO_SITES]
    grade_lines = [f"{name}: {grade}" for _, name, grade, _ in DEMO_SITES]
    return (
        "## Overview\n\n"
        "Six sites across the Wajima City market district were assessed from "
        "post-event imagery. Damage concentrates along the Asaichi corridor, "
        "where fire followed the shaking; the river crossing and the memorial "
        "hall show structural distress.\n\n"
        "## Site Assessments\n\n" + "\n".join(assess_lines) + "\n\n"
        "## Damage Grades\n\n" + "\n".join(grade_lines) + "\n"
    )


def _alert_news_text() -> str:
    return (
        "## Headline\n\n"
        "Severe earthquake damage confirmed across the Wajima market district; "
        "avoid the Asaichi corridor.\n\n"
        "## Dangerous Areas\n\n"
        "Hama Street and North Asaichi Street: burned and collapsed frontages, "
        "unstable debris.\n"
        "Concrete Bridge: cracked deck, single-lane emergency use only.\n"
        "Wajima Drama Memorial Hall and Central Nishikigawa Street: partial "
        "collapse risk near facades.\n\n"
        "## Safety Instructions\n\n"
        "Keep clear of marked frontages, do not enter cordoned blocks, follow "
        "staff direction at the shelter, and report trapped persons to the "
        "emergency line immediately.\n"
    )


def _emergency_text() -> str:
    return (
        "## Priority Areas\n\n"
        "North Asaichi Street and Hama Street: search and rescue, fire watch.\n"
        "Concrete Bridge: immediate assessment and shoring to reopen the "
        "transport link.\n\n"
        "## Required Services\n\n"
        "Urban search-and-rescue teams, structural engineers for shoring, "
        "water tenders for residual hot spots, medical triage at the memorial "
        "hall forecourt.\n\n"
        "## Historical Reference\n\n"
        "Comparable fire-following-earthquake events in timber districts "
        "required sustained fire watch for several days and early bridge "
        "shoring to keep relief routes open.\n"
    )


def _assignment_text() -> str:
    return (
        "## Allocation by Location\n\n"
        "Wajima Drama Memorial Hall: 20 medical personnel, including 5 doctors "
        "and 15 nurses, supported by 10 logistics staff.\n"
        "Hama Street: 24 search-and-rescue specialists and 8 fire-watch crew.\n"
        "Concrete Bridge: 6 structural engineers and 12 works crew for shoring.\n"
        "Central Nishikigawa Street: 10 debris-clearance operators.\n"
        "North Asaichi Street: 18 search-and-rescue specialists and 6 medics.\n"
        "South Central Asaichi Street: 4 building inspectors.\n\n"
        "## Totals\n\n"
        "118 personnel in total: 49 rescue and fire, 31 medical, 38 "
        "engineering and logistics.\n\n"
        "## Situation\n\n"
        "A strong earthquake has caused heavy structural and fire damage in "
        "the Wajima market district. Assessment, rescue, and shelter "
        "operations are underway.\n\n"
        "## Guidance\n\n"
        "Shelter is open at the memorial hall forecourt. Stay away from "
        "cordoned streets, conserve water, and check on neighbours where it "
        "is safe to do so.\n\n"
        "## Coordination Statement\n\n"
        "We are coordinating with governmental agencies and non-governmental "
        "organisations to ensure a comprehensive response.\n\n"
        "## Damage Summary\n\n"
        "Two sites destroyed by fire, two with very heavy structural damage, "
        "one substantially damaged river crossing, one moderately damaged "
        "block.\n\n"
        "## Phases\n\n"
        "Phase 1 (weeks 1-4): make-safe works, debris clearance, temporary "
        "shelter.\n"
        "Phase 2 (months 2-9): bridge repair, utility restoration, temporary "
        "market structures.\n"
        "Phase 3 (months 10-24): permanent rebuilding of the market district.\n\n"
        "## Budget Estimate\n\n"
        "Based on previous comparable events, an estimated budget of "
        "approximately $1 billion is required to cover structural repairs, "
        "infrastructure restoration, and the rebuilding program.\n"
    )


def demo_script_entries() -> list[dict]:
    """Script entries for the golden four-stage run, in wire-ready JSON form."""

    def tool_call(call_id: str, tool_id: str, arguments: dict) -> dict:
        return {"call_id": call_id, "tool_id": tool_id, "arguments": arguments}

    def entry(stage: str, index: int, text: str = "", calls: list[dict] | None = None) -> dict:
        response: dict = {
            "text": text,
            "tool_calls": calls or [],
            "finish_reason": "tool_call" if calls else "stop",
            "usage": {},
        }
        return {"stage": stage, "index": index, "response": response,
                "request_digest": None}

    entries: list[dict] = []
    # Expert: one batched interpret_image round (6 nested completions), one
    # file_search round, one annotate_map round, then the summary.
    entries.append(entry("expert", 0, calls=[
        tool_call(f"call-int-{site_id}", "interpret_image",
                  {"site_id": site_id, "instruction": f"Describe the damage at {name}."})
        for site_id, name, _, _ in DEMO_SITES
    ]))
    for offset, (_, name, grade, desc) in enumerate(DEMO_SITES):
        entries.append(entry("expert", 1 + offset,
                             text=f"At {name}: {desc}. Consistent with {grade}."))
    entries.append(entry("expert", 7, calls=[
        tool_call("call-fs", "file_search",
                  {"query": "damage grade classification", "k": 3})
    ]))
    entries.append(entry("expert", 8, calls=[
        tool_call("call-map", "annotate_map", {
            "annotations": [{"location_name": name, "grade": grade}
                            for _, name, grade, _ in DEMO_SITES]
        })
    ]))
    entries.append(entry("expert", 9, text=_expert_summary_text()))

    entries.append(entry("alerts", 0, text=_alert_news_text()))

    entries.append(entry("emergency", 0, calls=[
        tool_call("call-ws-e", "web_search", {"query": EMERGENCY_QUERY, "k": 3})
    ]))
    entries.append(entry("emergency", 1, text=_emergency_text()))

    entries.append(entry("assignment", 0, calls=[
        tool_call("call-ws-a", "web_search", {"query": ASSIGNMENT_QUERY, "k": 3})
    ]))
    entries.append(entry("assignment", 1, text=_assignment_text()))
    return entries


def write_demo_script(path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(demo_script_entries(), indent=2) + "\n", encoding="utf-8")
    return path


DEMO_EVALUATOR_SCORES: dict[str, int] = {
    "ExpertSummary": 8, "AlertNews": 7, "EmergencyServices": 7,
    "HumanAllocation": 8, "PublicNotice": 7, "ReconstructionPlan": 8,
    "LocalGrading": 7, "MapAnnotation": 6,
}

_EVALUATOR_WEAKNESSES: dict[str, str] = {
    "ExpertSummary": "grades are justified but indicator vocabulary is thin for two sites.",
    "AlertNews": "instructions are clear; the headline underplays the bridge closure.",
    "EmergencyServices": "priorities are sound; resource quantities are not yet stated.",
    "HumanAllocation": "numbers are concrete; skill mix for night shifts is unaddressed.",
    "PublicNotice": "coordination statement is generic and repeats the guidance section.",
    "ReconstructionPlan": "the budget basis is a single analogue; phases lack milestones.",
    "LocalGrading": "two adjacent sites may share one fire origin; grades look consistent.",
    "MapAnnotation": "markers sit on the right blocks but two labels crowd each other.",
}


def demo_evaluator_entries() -> list[dict]:
    """Scripted evaluator replies for all eight targets."""
    entries = []
    for target in TARGETS:
        score = DEMO_EVALUATOR_SCORES[target]
        text = f"SCORE: {score}/10\nWEAKNESSES: {_EVALUATOR_WEAKNESSES[target]}"
        entries.append({
            "stage": f"evaluate.{target}", "index": 0,
            "response": {"text": text, "tool_calls": [],
                         "finish_reason": "stop", "usage": {}},
            "request_digest": None,
        })
    return entries


def write_demo_evaluator_script(path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(demo_evaluator_entries(), indent=2) + "\n", encoding="utf-8")
    return path


def write_demo_human_scores(path: str | Path, rounds: int = 5) -> Path:
    """A rounds x 8-target human-ratings CSV with mild round-to-round spread."""
    offsets = (0, 1, -1, 0, 1)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "target", "score", "explanation"])
        for round_no in range(1, rounds + 1):
            for target in TARGETS:
                base = DEMO_EVALUATOR_SCORES[target] - 1
                score = min(10, max(1, base + offsets[(round_no - 1) % len(offsets)]))
                writer.writerow([round_no, target, score,
                                 f"round {round_no} manual review of {target}"])
    return path
