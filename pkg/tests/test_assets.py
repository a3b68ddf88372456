import json
import shutil

import pytest

from ahplus import assets
from ahplus.assets import AssetError, catalog, load_asset
from ahplus.fusion import build_ah4_ring


def test_every_asset_loads():
    for name in catalog():
        assert load_asset(name) is not None


def test_ah4_asset_matches_builder():
    assert load_asset("ah4.ring").same_structure(build_ah4_ring())


def test_census_of_printed_gauge():
    assert load_asset("ahp1.appendixA.gauge").census() == {1: 25, 2: 14, 3: 10, 4: 3, 5: 1}


def test_unknown_asset():
    with pytest.raises(AssetError):
        load_asset("nope.graph")


def test_digest_mismatch(tmp_path, monkeypatch):
    data = tmp_path / "data"
    shutil.copytree(assets.DATA_DIR, data)
    f = data / "ahp1.principal.graph.json"
    doc = json.loads(f.read_text())
    doc["name"] = "tampered"
    f.write_text(json.dumps(doc))
    monkeypatch.setattr(assets, "DATA_DIR", data)
    monkeypatch.setattr(assets, "MANIFEST", data / "manifest.json")
    assets.catalog.cache_clear()
    try:
        with pytest.raises(AssetError, match="digest"):
            assets.load_json("ahp1.principal.graph")
    finally:
        assets.catalog.cache_clear()
