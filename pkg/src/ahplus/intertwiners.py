"""Named intertwiner generators, slice diagrams and their state-sum evaluation.

A generator acts on vertical edge paths: a path through a word of objects
is the tuple of vertex tokens it visits, so a word with n nontrivial
objects has paths of n+1 tokens.  A diagram is a list of slices read top to
bottom; each slice is a horizontal word of generators (``~`` marks the
adjoint) and identity strands ``id(obj)``.  A state is one choice of
intermediate path per slice boundary with nonzero coefficients; the value
of a diagram at a (top, bottom) pair is the sum of the state products.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .connections import EdgeSpaceMap, Report
from .expr import parse_scalar
from .graphs import BipartiteGraph, Edge, vertex_of
from .scalars import ONE_S, ZERO_S, Scalar

__all__ = [
    "DiagramError",
    "BoundaryError",
    "Generator",
    "Item",
    "Slice",
    "Diagram",
    "Model",
    "Evaluation",
    "parse_diagram",
    "format_diagram",
    "parse_path",
    "evaluate_coefficient",
    "evaluate_map",
    "derived_generator",
    "check_duality",
    "Probe",
    "Relation",
    "check_relation",
    "check_ah_relations",
]

ALIASES = {"ρ": "rho", "α": "alpha", "κ": "kappa", "κ̄": "kappabar", "kbar": "kappabar"}


class DiagramError(ValueError):
    """Structural problem: unknown names, slices that do not compose."""


class BoundaryError(DiagramError):
    """Top or bottom labels are not paths of the boundary words."""


def _word(objs: Iterable[str]) -> tuple[str, ...]:
    return tuple(ALIASES.get(o, o) for o in objs if ALIASES.get(o, o) != "1")


def _key(e: Edge, empty: bool) -> tuple[str, ...]:
    if empty:
        if len(e.word) != 2 or e.src != e.dst:
            raise DiagramError(f"{e} is not an identity edge")
        return (e.word[0],)
    return e.word


@dataclass(frozen=True, eq=False)
class Generator:
    name: str
    source: tuple[str, ...]
    target: tuple[str, ...]
    payload: EdgeSpaceMap
    prefactor: Scalar = ONE_S

    def __post_init__(self):
        object.__setattr__(self, "source", _word(self.source))
        object.__setattr__(self, "target", _word(self.target))

    def adjoint(self) -> Generator:
        name = self.name[:-1] if self.name.endswith("~") else self.name + "~"
        return Generator(name, self.target, self.source, self.payload.adjoint(), self.prefactor)

    @cached_property
    def _tables(self) -> dict[str, dict[tuple, list[tuple[tuple, Scalar]]]]:
        out = {}
        for side in ("left", "right"):
            t = defaultdict(list)
            for s, col in self.payload.side(side).items():
                sk = _key(s, not self.source)
                for e, x in col.items():
                    if x:
                        t[sk].append((_key(e, not self.target), x * self.prefactor))
            out[side] = dict(t)
        return out

    def images(self, seg: tuple, side: str = "left") -> list[tuple[tuple, Scalar]]:
        return self._tables[side].get(seg, [])

    def coeff(self, src: tuple, dst: tuple, side: str = "left", scaled: bool = False) -> Scalar:
        """Payload coefficient; with ``scaled`` the prefactor is included."""
        for out, x in self.images(src, side):
            if out == dst:
                return x if scaled else x / self.prefactor
        return ZERO_S


@dataclass(frozen=True)
class Item:
    """One horizontal factor of a slice: an identity strand or a generator."""

    gen: Generator | None = None
    obj: str | None = None

    @property
    def source(self) -> tuple[str, ...]:
        return self.gen.source if self.gen else _word([self.obj])

    @property
    def target(self) -> tuple[str, ...]:
        return self.gen.target if self.gen else _word([self.obj])

    def __str__(self) -> str:
        return self.gen.name if self.gen else f"id({self.obj})"


@dataclass(frozen=True)
class Slice:
    items: tuple[Item, ...]

    @property
    def source(self) -> tuple[str, ...]:
        return tuple(o for it in self.items for o in it.source)

    @property
    def target(self) -> tuple[str, ...]:
        return tuple(o for it in self.items for o in it.target)

    def apply(self, path: tuple, side: str = "left") -> list[tuple[tuple, Scalar]]:
        pos = 0
        parts = []
        for it in self.items:
            k = len(it.source)
            seg = (vertex_of(path[pos]),) + path[pos + 1 : pos + k + 1]
            if it.gen is None:
                parts.append([(seg, ONE_S)])
            else:
                imgs = it.gen.images(seg, side)
                if not imgs:
                    return []
                parts.append(imgs)
            pos += k
        if pos != len(path) - 1:
            raise DiagramError(f"path {path} does not fit slice source {self.source}")
        out = [((path[0],), ONE_S)]
        for imgs in parts:
            out = [(acc + seg[1:], x * y) for acc, x in out for seg, y in imgs]
        return out

    def __str__(self) -> str:
        return ", ".join(str(i) for i in self.items)


@dataclass
class Diagram:
    slices: list[Slice]
    scale: Scalar = ONE_S
    name: str = ""

    def __post_init__(self):
        if not self.slices:
            raise DiagramError("a diagram needs at least one slice")
        for i in range(len(self.slices) - 1):
            a, b = self.slices[i].target, self.slices[i + 1].source
            if a != b:
                raise DiagramError(f"slice {i + 1} ends in {a} but slice {i + 2} starts from {b}")

    @property
    def source(self) -> tuple[str, ...]:
        return self.slices[0].source

    @property
    def target(self) -> tuple[str, ...]:
        return self.slices[-1].target

    def stacked(self, other: Diagram) -> Diagram:
        """self on top of other."""
        return Diagram(self.slices + other.slices, self.scale * other.scale)

    def generators(self) -> list[Generator]:
        return [it.gen for s in self.slices for it in s.items if it.gen]


@dataclass
class Model:
    """Object graphs (left and right vertical graphs) plus named generators."""

    objects: dict[str, tuple[BipartiteGraph, BipartiteGraph]]
    generators: dict[str, Generator] = field(default_factory=dict)
    regions: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def graph(self, obj: str, side: str) -> BipartiteGraph:
        try:
            left, right = self.objects[obj]
        except KeyError:
            raise DiagramError(f"unknown object {obj!r}") from None
        return left if side == "left" else right

    def generator(self, name: str) -> Generator:
        base, adj = (name[:-1], True) if name.endswith("~") else (name, False)
        if base not in self.generators:
            raise DiagramError(f"unknown generator {base!r}")
        g = self.generators[base]
        return g.adjoint() if adj else g

    def add(self, g: Generator) -> Generator:
        self.generators[g.name] = g
        return g

    def starts(self, word: tuple[str, ...], side: str, after: tuple[str, ...] = ()) -> tuple[str, ...]:
        probe = word or after
        if not probe and side in self.regions:
            return self.regions[side]
        if not probe:
            raise DiagramError("cannot enumerate regions of an empty word without context")
        g = self.graph(probe[0], side)
        return tuple(dict.fromkeys(e.src for e in g.edges))

    def paths(self, word: tuple[str, ...], side: str = "left", after: tuple[str, ...] = ()) -> list[tuple]:
        out = [(v,) for v in self.starts(word, side, after)]
        for obj in word:
            g = self.graph(obj, side)
            out = [p + e.word[1:] for p in out for e in g.out(vertex_of(p[-1]))]
        return out

    def is_path(self, word: tuple[str, ...], path: tuple, side: str = "left") -> bool:
        if len(path) != len(word) + 1:
            return False
        for i, obj in enumerate(word):
            e = Edge((vertex_of(path[i]), path[i + 1]))
            if e not in set(self.graph(obj, side).edges):
                return False
        return True


@dataclass
class Evaluation:
    value: Scalar
    states: int
    top: tuple
    bottom: tuple

    @property
    def consistent(self) -> bool:
        return self.states > 0


def parse_path(text) -> tuple[str, ...]:
    """``"* b b~"`` or ``("*", "b", "b~")``."""
    if isinstance(text, (tuple, list)):
        return tuple(text)
    toks = tuple(text.split())
    if not toks:
        raise BoundaryError("empty edge word")
    return toks


def _propagate(d: Diagram, top: tuple, side: str, stop=None) -> dict[tuple, list]:
    layer = {top: [d.scale, 1]}
    for s in d.slices:
        nxt: dict[tuple, list] = {}
        for p, (x, n) in layer.items():
            for q, y in s.apply(p, side):
                slot = nxt.setdefault(q, [ZERO_S, 0])
                slot[0] = slot[0] + x * y
                slot[1] += n
        layer = nxt
    return layer


def evaluate_coefficient(d: Diagram, top, bottom, model: Model | None = None, side: str = "left") -> Evaluation:
    """Sum over all states with the given boundary labels.

    With a model, boundary labels are checked against the object graphs and
    a mismatch raises BoundaryError.  A consistent boundary with no states
    evaluates to exact zero with ``states == 0``.
    """
    top, bottom = parse_path(top), parse_path(bottom)
    if model is not None:
        for word, p, where in ((d.source, top, "top"), (d.target, bottom, "bottom")):
            if word and not model.is_path(word, p, side):
                raise BoundaryError(f"{where} label {' '.join(p)} is not a path of {'.'.join(word)}")
            if not word and len(p) != 1:
                raise BoundaryError(f"{where} label of the trivial object must be a single vertex")
    if len(top) != len(d.source) + 1 or len(bottom) != len(d.target) + 1:
        raise BoundaryError("boundary labels have the wrong length")
    res = _propagate(d, top, side)
    x, n = res.get(bottom, [ZERO_S, 0])
    return Evaluation(x, n, top, bottom)


def evaluate_map(d: Diagram, model: Model, side: str = "left", tops=None) -> dict[tuple, dict[tuple, Scalar]]:
    """All coefficients of the diagram, as top path -> {bottom path: value}."""
    if tops is None:
        tops = model.paths(d.source, side, d.target)
    out = {}
    for t in tops:
        res = _propagate(d, t, side)
        out[t] = {b: x for b, (x, _) in res.items() if x}
    return out


def _edge(path: tuple) -> Edge:
    return Edge(path if len(path) > 1 else path * 2)


def derived_generator(name: str, d: Diagram, model: Model, prefactor: Scalar = ONE_S) -> Generator:
    """Freeze a diagram into a generator; ``prefactor`` is kept separate from the payload."""
    maps = {}
    for side in ("left", "right"):
        m = evaluate_map(d, model, side)
        maps[side] = {_edge(t): {_edge(b): x for b, x in col.items()} for t, col in m.items() if col}
    return Generator(name, d.source, d.target, EdgeSpaceMap(maps["left"], maps["right"], name), prefactor)


# ---------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"^id\((?P<obj>[^)]+)\)$")


def parse_diagram(text: str, model: Model, name: str = "") -> Diagram:
    """One slice per line, items separated by commas.

    ``scale <expr>`` lines multiply the whole diagram; ``#`` starts a comment.
    """
    slices = []
    scale = ONE_S
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("scale"):
            try:
                scale = scale * Scalar.coerce(parse_scalar(line[5:].strip()))
            except Exception as exc:
                raise DiagramError(f"line {lineno}: bad scale: {exc}") from None
            continue
        items = []
        for tok in (t.strip() for t in line.split(",")):
            m = _TOKEN.match(tok)
            try:
                if m:
                    obj = ALIASES.get(m["obj"].strip(), m["obj"].strip())
                    if obj != "1":
                        model.graph(obj, "left")
                    items.append(Item(obj=obj))
                else:
                    items.append(Item(gen=model.generator(tok)))
            except DiagramError as exc:
                raise DiagramError(f"line {lineno}: {exc}") from None
        slices.append(Slice(tuple(items)))
    try:
        return Diagram(slices, scale, name)
    except DiagramError as exc:
        raise DiagramError(f"{name or 'diagram'}: {exc}") from None


def format_diagram(d: Diagram) -> str:
    lines = []
    if d.scale != ONE_S:
        lines.append(f"scale {d.scale.serialize()}")
    lines += [str(s) for s in d.slices]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# duality


def check_duality(r: Generator, rbar: Generator, expected: Scalar, sides=("left",)) -> Report:
    """r(xx, xYx) * rbar(YY, YxY) == expected on every edge x-Y of the first object."""
    rep = Report(f"duality:{r.name},{rbar.name}")
    for side in sides:
        for (x,), col in r._tables[side].items():
            for out, _ in col:
                if len(out) != 3 or vertex_of(out[2]) != x:
                    continue
                Y = vertex_of(out[1])
                a = r.coeff((x,), out, side)
                b = rbar.coeff((Y,), (Y, x, Y), side)
                rep.checked += 1
                if a * b != expected:
                    rep.fail(side=side, pair=f"{x}-{Y}", product=(a * b).serialize(), expected=expected.serialize())
    return rep


# ---------------------------------------------------------------------------
# relations


@dataclass
class Probe:
    """Expected value of one coefficient; ``on`` limits it to "lhs" or "rhs"."""

    top: str
    bottom: str
    expected: str
    on: str | None = None


@dataclass
class Relation:
    """``kind``: "scalar" (each side is c times the identity, same c),
    "equal" (both sides agree as maps) or "flagged" (recorded, not checked)."""

    name: str
    kind: str
    lhs: str = ""
    rhs: str = ""
    probes: list[Probe] = field(default_factory=list)
    dims: list[tuple[tuple[str, ...], tuple[str, ...], int]] = field(default_factory=list)
    note: str = ""


def _ser(x: Scalar) -> str:
    return x.serialize()


def _scalar_of(mp: dict) -> Scalar | None:
    """c if the map is c times the identity, else None."""
    c = None
    for t, col in mp.items():
        for b, x in col.items():
            if b != t or (c is not None and x != c):
                return None
            c = x
        if t not in col:
            return None
    return c


def check_relation(rel: Relation, model: Model, hom_dim=None) -> Report:
    rep = Report(f"relation:{rel.name}")
    if rel.note:
        rep.notes.append(rel.note)
    if rel.kind == "flagged":
        rep.flagged = True
        rep.notes.append("flagged: out-of-scope")
        return rep
    for src, tgt, want in rel.dims:
        if hom_dim is None:
            rep.notes.append(f"dimension of ({'.'.join(src)}, {'.'.join(tgt)}) not computed")
            continue
        got = hom_dim(src, tgt)
        rep.checked += 1
        rep.notes.append(f"dim({'.'.join(src)}, {'.'.join(tgt)}) = {got}")
        if got != want:
            rep.fail(kind="dimension", space=f"({'.'.join(src)}, {'.'.join(tgt)})", got=got, expected=want)
    if not rep.passed:
        return rep
    sides = {"lhs": parse_diagram(rel.lhs, model, "lhs"), "rhs": parse_diagram(rel.rhs, model, "rhs")}
    maps = {k: {s: evaluate_map(d, model, s) for s in ("left", "right")} for k, d in sides.items()}
    if rel.kind == "scalar":
        cs = {}
        for k, mp in maps.items():
            c = _scalar_of(mp["left"])
            rep.checked += 1
            if c is None:
                rep.fail(kind="not a multiple of the identity", side=k)
            cs[k] = c
        if None not in cs.values():
            rep.checked += 1
            if cs["lhs"] != cs["rhs"]:
                rep.fail(kind="scalars differ", lhs=_ser(cs["lhs"]), rhs=_ser(cs["rhs"]))
            rep.notes.append(f"c = {_ser(cs['lhs'])}")
    elif rel.kind == "equal":
        for s in ("left", "right"):
            rep.checked += 1
            if maps["lhs"][s] != maps["rhs"][s]:
                diff = [
                    (t, b)
                    for t in set(maps["lhs"][s]) | set(maps["rhs"][s])
                    for b in set(maps["lhs"][s].get(t, {})) | set(maps["rhs"][s].get(t, {}))
                    if maps["lhs"][s].get(t, {}).get(b) != maps["rhs"][s].get(t, {}).get(b)
                ]
                t, b = sorted(diff)[0]
                rep.fail(kind="sides differ", side=s, count=len(diff), top=" ".join(t), bottom=" ".join(b))
    else:
        raise DiagramError(f"unknown relation kind {rel.kind!r}")
    for pr in rel.probes:
        want = Scalar.coerce(parse_scalar(pr.expected))
        for k, d in sides.items():
            if pr.on not in (None, k):
                continue
            ev = evaluate_coefficient(d, pr.top, pr.bottom, model)
            rep.checked += 1
            info = dict(side=k, top=pr.top, bottom=pr.bottom, value=_ser(ev.value), states=ev.states)
            if ev.states != 1:
                rep.fail(kind="state count", **info)
            elif ev.value != want:
                rep.fail(kind="value", expected=_ser(want), **info)
            else:
                rep.notes.append(f"{k} at ({pr.top} | {pr.bottom}) = {_ser(ev.value)}")
    return rep


def check_ah_relations(model: Model, relations: list[Relation], hom_dim=None) -> list[Report]:
    return [check_relation(r, model, hom_dim) for r in relations]
