import json

import pytest

from disasteller.core.scenario import ScenarioInvalid, load_scenario
from disasteller.demo import DEMO_SITES, make_demo_scenario


def test_demo_scenario_loads(demo_tree):
    scenario = load_scenario(demo_tree["manifest"])
    assert scenario.scenario_id == "wajima-demo"
    assert len(scenario.sites) == 6
    assert scenario.map_width == 800 and scenario.map_height == 600
    assert scenario.sites[0].location_name == DEMO_SITES[0][1]
    assert scenario.sites[0].width >= 1


def _mutate_manifest(tmp_path, mutate):
    manifest = make_demo_scenario(tmp_path / "s")
    data = json.loads(manifest.read_text())
    mutate(data, manifest.parent)
    manifest.write_text(json.dumps(data))
    return manifest


def test_missing_site_image_invalid(tmp_path):
    manifest = _mutate_manifest(
        tmp_path, lambda d, base: d["sites"][0].update({"image": "sites/nope.png"}))
    with pytest.raises(ScenarioInvalid, match="missing"):
        load_scenario(manifest)


def test_missing_global_map_invalid(tmp_path):
    def mutate(d, base):
        (base / d["global_map"]).unlink()
    manifest = _mutate_manifest(tmp_path, mutate)
    with pytest.raises(ScenarioInvalid, match="global map"):
        load_scenario(manifest)


def test_zero_sites_invalid(tmp_path):
    manifest = _mutate_manifest(tmp_path, lambda d, base: d.update({"sites": []}))
    with pytest.raises(ScenarioInvalid, match="at least one site"):
        load_scenario(manifest)


def test_duplicate_site_id_invalid(tmp_path):
    def mutate(d, base):
        d["sites"][1]["site_id"] = d["sites"][0]["site_id"]
    manifest = _mutate_manifest(tmp_path, mutate)
    with pytest.raises(ScenarioInvalid, match="duplicate site_id"):
        load_scenario(manifest)


def test_missing_field_invalid(tmp_path):
    manifest = _mutate_manifest(tmp_path, lambda d, base: d.pop("gazetteer"))
    with pytest.raises(ScenarioInvalid, match="gazetteer"):
        load_scenario(manifest)


def test_undecodable_image_invalid(tmp_path):
    def mutate(d, base):
        (base / d["sites"][0]["image"]).write_bytes(b"not a png at all")
    manifest = _mutate_manifest(tmp_path, mutate)
    with pytest.raises(ScenarioInvalid, match="not a decodable image"):
        load_scenario(manifest)


def test_manifest_not_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ScenarioInvalid, match="not valid JSON"):
        load_scenario(path)
