"""Disaster scenario: a region, its site images, the global map, and data files.

A scenario is described by a single JSON manifest:

    {
      "scenario_id": "wajima-demo",
      "region_name": "Wajima City",
      "sites": [{"site_id": "s1", "location_name": "Hama Street", "image": "sites/s1.png"}, ...],
      "global_map": "map.png",
      "gazetteer": "gazetteer.json",
      "guideline": "guideline.txt"
    }

Paths are relative to the manifest's directory. Everything is validated at
load time so a broken scenario fails before any model call.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from disasteller.core.grades import DamageGrade
from disasteller.errors import DisasTellerError


class ScenarioInvalid(DisasTellerError):
    """Manifest malformed, or a referenced file is missing or undecodable."""


@dataclass(frozen=True)
class SiteImage:
    site_id: str
    location_name: str
    image_path: Path
    width: int
    height: int

    def read_bytes(self) -> bytes:
        return self.image_path.read_bytes()


@dataclass(frozen=True)
class SiteAssessment:
    """Per-site finding: free-text description plus the assigned grade."""

    site_id: str
    location_name: str
    description: str
    grade: DamageGrade
    guideline_citations: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        return {
            "site_id": self.site_id,
            "location_name": self.location_name,
            "description": self.description,
            "grade": self.grade.token,
            "guideline_citations": list(self.guideline_citations),
        }


@dataclass(frozen=True)
class DisasterScenario:
    scenario_id: str
    region_name: str
    sites: tuple[SiteImage, ...]
    global_map_path: Path
    map_width: int
    map_height: int
    gazetteer_path: Path
    guideline_path: Path

    def site_by_id(self, site_id: str) -> SiteImage:
        for s in self.sites:
            if s.site_id == site_id:
                return s
        raise ScenarioInvalid(f"unknown site_id {site_id!r}")


def _image_size(path: Path, what: str) -> tuple[int, int]:
    try:
        with Image.open(path) as im:
            w, h = im.size
    except (UnidentifiedImageError, OSError) as exc:
        raise ScenarioInvalid(f"{what} is not a decodable image: {path} ({exc})") from exc
    if w < 1 or h < 1:
        raise ScenarioInvalid(f"{what} has degenerate dimensions {w}x{h}: {path}")
    return w, h


def load_scenario(manifest_path: str | Path) -> DisasterScenario:
    """Load and validate a scenario manifest.

    Raises ScenarioInvalid on any structural problem: missing fields, missing
    files, undecodable images, zero sites, or duplicate site ids.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise ScenarioInvalid(f"manifest not found: {manifest_path}")
    try:
        data = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioInvalid(f"manifest is not valid JSON: {exc}") from exc

    base = manifest_path.parent

    def required(field: str) -> object:
        if field not in data:
            raise ScenarioInvalid(f"manifest missing field {field!r}")
        return data[field]

    scenario_id = str(required("scenario_id"))
    region_name = str(required("region_name"))
    raw_sites = required("sites")
    if not isinstance(raw_sites, list) or not raw_sites:
        raise ScenarioInvalid("manifest must list at least one site")

    sites: list[SiteImage] = []
    seen: set[str] = set()
    for i, raw in enumerate(raw_sites):
        if not isinstance(raw, dict):
            raise ScenarioInvalid(f"sites[{i}] must be an object")
        for field in ("site_id", "location_name", "image"):
            if field not in raw:
                raise ScenarioInvalid(f"sites[{i}] missing field {field!r}")
        site_id = str(raw["site_id"])
        if site_id in seen:
            raise ScenarioInvalid(f"duplicate site_id {site_id!r}")
        seen.add(site_id)
        image_path = base / str(raw["image"])
        if not image_path.is_file():
            raise ScenarioInvalid(f"site image missing: {image_path}")
        w, h = _image_size(image_path, f"site image {site_id!r}")
        sites.append(SiteImage(site_id, str(raw["location_name"]), image_path, w, h))

    map_path = base / str(required("global_map"))
    if not map_path.is_file():
        raise ScenarioInvalid(f"global map missing: {map_path}")
    mw, mh = _image_size(map_path, "global map")

    gazetteer_path = base / str(required("gazetteer"))
    if not gazetteer_path.is_file():
        raise ScenarioInvalid(f"gazetteer missing: {gazetteer_path}")
    guideline_path = base / str(required("guideline"))
    if not guideline_path.is_file():
        raise ScenarioInvalid(f"guideline missing: {guideline_path}")

    return DisasterScenario(
        scenario_id=scenario_id,
        region_name=region_name,
        sites=tuple(sites),
        global_map_path=map_path,
        map_width=mw,
        map_height=mh,
        gazetteer_path=gazetteer_path,
        guideline_path=guideline_path,
    )
