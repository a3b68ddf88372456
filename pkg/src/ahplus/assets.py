"""Catalog of shipped data files, loaded by name with digest checks."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .connections import Connection, EdgeSpaceMap, LabeledGauge
from .graphs import BipartiteGraph, Cell, Edge, FourGraph, fp_weights
from .scalars import Scalar

__all__ = ["AssetError", "AssetEntry", "catalog", "load_asset", "load_json", "write_manifest", "DATA_DIR"]

DATA_DIR = Path(str(resources.files("ahplus") / "data"))
MANIFEST = DATA_DIR / "manifest.json"

_SUFFIX_KIND = {
    ".graph.json": "graph",
    ".fourgraph.json": "four-graph",
    ".connection.json": "connection",
    ".edgemap.json": "edge-map",
    ".gauge.json": "gauge",
    ".ring.json": "fusion-ring",
    ".fusion.json": "fusion-data",
}


class AssetError(ValueError):
    pass


@dataclass(frozen=True)
class AssetEntry:
    name: str
    kind: str
    file: str
    digest: str
    status: str = "verified"


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _kind_of(fname: str) -> tuple[str, str]:
    for suf, kind in _SUFFIX_KIND.items():
        if fname.endswith(suf):
            return fname[: -len(suf)], kind
    raise AssetError(f"unknown asset type for {fname}")


def write_manifest() -> dict:
    """Recompute digests of every data file (maintenance helper)."""
    entries = {}
    for path in sorted(DATA_DIR.glob("*.json")):
        if path.name == MANIFEST.name:
            continue
        name, kind = _kind_of(path.name)
        status = json.loads(path.read_text()).get("status", "verified")
        entries[path.name[: -len(".json")]] = {
            "kind": kind,
            "file": path.name,
            "sha256": _digest(path),
            "status": status,
        }
    MANIFEST.write_text(json.dumps({"version": 1, "assets": entries}, indent=1, sort_keys=True) + "\n")
    catalog.cache_clear()
    return entries


@lru_cache(maxsize=1)
def catalog() -> dict[str, AssetEntry]:
    data = json.loads(MANIFEST.read_text())
    return {
        name: AssetEntry(name, e["kind"], e["file"], e["sha256"], e.get("status", "verified"))
        for name, e in data["assets"].items()
    }


def load_json(name: str) -> dict:
    cat = catalog()
    if name not in cat:
        raise AssetError(f"no asset named {name!r}")
    entry = cat[name]
    path = DATA_DIR / entry.file
    if _digest(path) != entry.digest:
        raise AssetError(f"digest mismatch for {name} ({entry.file})")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise AssetError(f"{entry.file}: {exc}") from None


@lru_cache(maxsize=None)
def load_asset(name: str):
    """Parse a catalog entry into its typed object."""
    kind = catalog()[name].kind if name in catalog() else None
    if kind is None:
        raise AssetError(f"no asset named {name!r}")
    data = load_json(name)
    if kind == "graph":
        return BipartiteGraph.from_json(data, name)
    if kind == "four-graph":
        return FourGraph.from_json(data, resolve=_resolve_graph)
    if kind == "connection":
        return connection_from_json(data)
    if kind == "edge-map":
        return edge_map_from_json(data)
    if kind == "gauge":
        return LabeledGauge.from_json(data)
    if kind == "fusion-ring":
        from .fusion import FusionRing

        return FusionRing.from_json(data)
    if kind == "fusion-data":
        from .fusion import parse_fusion_data

        return parse_fusion_data(data)
    raise AssetError(f"cannot load kind {kind}")


def _resolve_graph(ref: str) -> BipartiteGraph:
    if not ref.endswith(".graph"):
        ref = f"{ref}.graph"
    return load_asset(ref)


def _resolve_fg(ref) -> FourGraph:
    if isinstance(ref, dict):
        return FourGraph.from_json(ref, resolve=_resolve_graph)
    if not ref.endswith(".fourgraph"):
        ref = f"{ref}.fourgraph"
    return load_asset(ref)


def _path_label(path: tuple[Edge, Edge], middle_index: int) -> str:
    """Short label of a two-edge path: the middle vertex when edges are simple."""
    a, b = path
    if len(a.word) == 2 and len(b.word) == 2 and "_" not in a.word[1] + b.word[1]:
        return a.dst
    return f"{a} | {b}"


def connection_from_json(data: dict, fg: FourGraph | None = None) -> Connection:
    fg = fg or _resolve_fg(data["four_graph"])
    w = data.get("weights")
    wt = wb = None
    if w:
        wt = fp_weights(fg.G0, w["norm_sq"], w["top_base"])
        wb = fp_weights(fg.G2, w["norm_sq"], w["bottom_base"])
    listed = {}
    for blk in data.get("blocks", []):
        listed[blk["a"], blk["c"]] = blk
    singles = {tuple(k.split("-", 1)): Scalar.coerce(v) for k, v in data.get("singletons", {}).items()}
    default = data.get("default")
    default = Scalar.coerce(default) if default is not None else None
    vals: dict[Cell, Scalar] = {}
    for (x0, x2), (rows, cols) in fg.blocks.items():
        if (x0, x2) in listed:
            blk = listed.pop((x0, x2))
            rlab = [_path_label(r, 0) for r in rows]
            clab = [_path_label(c, 0) for c in cols]
            if sorted(rlab) != sorted(blk["rows"]) or sorted(clab) != sorted(blk["cols"]):
                raise AssetError(f"block {x0}-{x2}: labels {blk['rows']}/{blk['cols']} do not match {rlab}/{clab}")
            for i, rl in enumerate(blk["rows"]):
                e3, e2 = rows[rlab.index(rl)]
                for j, cl in enumerate(blk["cols"]):
                    e0, e1 = cols[clab.index(cl)]
                    x = Scalar.coerce(blk["matrix"][i][j])
                    if x:
                        vals[Cell(e0, e1, e2, e3)] = x
            continue
        if len(rows) == 1 and len(cols) == 1:
            x = singles.pop((x0, x2), default)
            if x is None:
                raise AssetError(f"no value for 1x1 block {x0}-{x2}")
            (e3, e2), (e0, e1) = rows[0], cols[0]
            if x:
                vals[Cell(e0, e1, e2, e3)] = x
            continue
        raise AssetError(f"block {x0}-{x2} of shape {len(rows)}x{len(cols)} is not listed")
    if listed or singles:
        raise AssetError(f"entries for blocks not in the 4-graph: {sorted(listed) + sorted(singles)}")
    return Connection(fg, vals, wt, wb, data.get("name", ""))


def edge_map_from_json(data: dict) -> EdgeSpaceMap:
    """``{"left": [{"source": word, "image": {word: expr}}], "right": [...]}``."""
    out = {}
    issues = []
    for side in ("left", "right"):
        m = {}
        for item in data.get(side, []):
            src = Edge.parse(item["source"])
            if src in m:
                issues.append(f"{side}: source edge {src} listed twice; the later entry is kept")
            m[src] = {Edge.parse(t): Scalar.coerce(x) for t, x in item["image"].items()}
            m[src] = {t: x for t, x in m[src].items() if x}
        out[side] = m
    em = EdgeSpaceMap(out["left"], out["right"], data.get("name", ""))
    em.issues = issues
    return em
