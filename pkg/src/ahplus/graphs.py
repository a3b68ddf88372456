"""Bipartite graphs, 4-graphs, cells and exact Perron-Frobenius weights.

Edges are vertex words.  A token ``"f_1"`` means "vertex f, reached by the edge
tagged 1", so a single edge is a word of length two and a composite vertical
edge such as ``c c~ f_1 f 6`` is the concatenation of its pieces.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

from .linalg import nullspace
from .qsqrt17 import ONE, ZERO, QSqrt17
from .scalars import Scalar, certified_sign

__all__ = [
    "Edge",
    "BipartiteGraph",
    "FourGraph",
    "Cell",
    "WeightVector",
    "GraphError",
    "fp_weights",
    "cells",
    "vertex_of",
]


class GraphError(ValueError):
    pass


def vertex_of(token: str) -> str:
    return token.split("_", 1)[0]


def _tag_of(token: str) -> str:
    parts = token.split("_", 1)
    return parts[1] if len(parts) == 2 else ""


@dataclass(frozen=True, order=True)
class Edge:
    word: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> Edge:
        toks = tuple(text.split())
        if len(toks) < 2:
            raise GraphError(f"edge word needs two vertices: {text!r}")
        return cls(toks)

    @classmethod
    def simple(cls, u: str, v: str, tag="") -> Edge:
        return cls((u, f"{v}_{tag}" if tag not in ("", None) else v))

    @property
    def src(self) -> str:
        return vertex_of(self.word[0])

    @property
    def dst(self) -> str:
        return vertex_of(self.word[-1])

    @property
    def vertices(self) -> tuple[str, ...]:
        return tuple(vertex_of(t) for t in self.word)

    def __add__(self, other: Edge) -> Edge:
        if self.dst != other.src:
            raise GraphError(f"cannot join {self} and {other}")
        return Edge(self.word + other.word[1:])

    def reversed(self) -> Edge:
        verts = self.vertices
        tags = [_tag_of(t) for t in self.word]
        n = len(verts)
        out = [verts[-1]]
        for i in range(n - 2, -1, -1):
            t = tags[i + 1]
            out.append(f"{verts[i]}_{t}" if t else verts[i])
        return Edge(tuple(out))

    def __str__(self) -> str:
        return " ".join(self.word)

    def __repr__(self) -> str:
        return f"Edge({str(self)!r})"


@dataclass(frozen=True)
class BipartiteGraph:
    """Edges run from the ``even`` side to the ``odd`` side.

    For the vertical graphs of a 4-graph the even side is the initial vertex set.
    """

    even: tuple[str, ...]
    odd: tuple[str, ...]
    edges: tuple[Edge, ...]
    name: str = ""

    def __post_init__(self):
        ev, od = set(self.even), set(self.odd)
        if len(ev) != len(self.even) or len(od) != len(self.odd):
            raise GraphError(f"{self.name}: repeated vertex label")
        if len(set(self.edges)) != len(self.edges):
            raise GraphError(f"{self.name}: repeated edge id")
        for e in self.edges:
            if e.src not in ev or e.dst not in od:
                raise GraphError(f"{self.name}: edge {e} has an unknown endpoint")

    @classmethod
    def from_triples(cls, even, odd, triples, name="") -> BipartiteGraph:
        edges = tuple(Edge.simple(u, v, t[0] if t else "") for u, v, *t in triples)
        return cls(tuple(even), tuple(odd), edges, name)

    @classmethod
    def from_json(cls, data: dict, name="") -> BipartiteGraph:
        return cls.from_triples(data["even"], data["odd"], data["edges"], data.get("name", name))

    def to_json(self) -> dict:
        triples = []
        for e in self.edges:
            if len(e.word) != 2:
                raise GraphError("only simple edges serialize as triples")
            triples.append([e.src, e.dst, _tag_of(e.word[1])])
        return {"name": self.name, "even": list(self.even), "odd": list(self.odd), "edges": triples}

    @cached_property
    def _out(self) -> dict[str, tuple[Edge, ...]]:
        out = defaultdict(list)
        for e in self.edges:
            out[e.src].append(e)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _between(self) -> dict[tuple[str, str], tuple[Edge, ...]]:
        out = defaultdict(list)
        for e in self.edges:
            out[e.src, e.dst].append(e)
        return {k: tuple(v) for k, v in out.items()}

    def out(self, u: str) -> tuple[Edge, ...]:
        return self._out.get(u, ())

    def between(self, u: str, v: str) -> tuple[Edge, ...]:
        return self._between.get((u, v), ())

    def multiplicity(self, u: str, v: str) -> int:
        return len(self.between(u, v))

    def census(self) -> dict[tuple[str, str], int]:
        return {k: len(v) for k, v in self._between.items()}

    def adjacency(self) -> list[list[int]]:
        return [[self.multiplicity(u, v) for v in self.odd] for u in self.even]

    def reversed(self, name="") -> BipartiteGraph:
        return BipartiteGraph(self.odd, self.even, tuple(e.reversed() for e in self.edges), name)

    def same_as(self, other: BipartiteGraph) -> bool:
        return (
            set(self.even) == set(other.even)
            and set(self.odd) == set(other.odd)
            and set(self.edges) == set(other.edges)
        )


class Cell(NamedTuple):
    """A loop around the square: e0 (V0->V1), e1 (V1->V2), e2 (V3->V2), e3 (V0->V3)."""

    e0: Edge
    e1: Edge
    e2: Edge
    e3: Edge

    @property
    def corners(self) -> tuple[str, str, str, str]:
        return self.e0.src, self.e0.dst, self.e1.dst, self.e3.dst


@dataclass(frozen=True)
class FourGraph:
    V0: tuple[str, ...]
    V1: tuple[str, ...]
    V2: tuple[str, ...]
    V3: tuple[str, ...]
    G0: BipartiteGraph
    G1: BipartiteGraph
    G2: BipartiteGraph
    G3: BipartiteGraph

    def __post_init__(self):
        checks = [
            ("G0", self.G0, self.V0, self.V1),
            ("G1", self.G1, self.V1, self.V2),
            ("G2", self.G2, self.V3, self.V2),
            ("G3", self.G3, self.V0, self.V3),
        ]
        for name, g, a, b in checks:
            if set(g.even) - set(a) or set(g.odd) - set(b):
                raise GraphError(f"{name} uses vertices outside its vertex sets")

    @classmethod
    def build(cls, G0, G1, G2, G3) -> FourGraph:
        return cls(G0.even, G0.odd, G2.odd, G2.even, G0, G1, G2, G3)

    @cached_property
    def cell_list(self) -> tuple[Cell, ...]:
        out = []
        for x0 in self.V0:
            for e0 in self.G0.out(x0):
                for e1 in self.G1.out(e0.dst):
                    x2 = e1.dst
                    for e3 in self.G3.out(x0):
                        for e2 in self.G2.between(e3.dst, x2):
                            out.append(Cell(e0, e1, e2, e3))
        return tuple(out)

    @cached_property
    def blocks(self) -> dict[tuple[str, str], tuple[list, list]]:
        """(x0, x2) -> (rows, cols): rows are (e3, e2) paths, columns (e0, e1) paths."""
        out = {}
        for x0 in self.V0:
            cols_by = defaultdict(list)
            for e0 in self.G0.out(x0):
                for e1 in self.G1.out(e0.dst):
                    cols_by[e1.dst].append((e0, e1))
            rows_by = defaultdict(list)
            for e3 in self.G3.out(x0):
                for x2 in self.V2:
                    for e2 in self.G2.between(e3.dst, x2):
                        rows_by[x2].append((e3, e2))
            for x2 in self.V2:
                r, c = rows_by.get(x2, []), cols_by.get(x2, [])
                if r or c:
                    out[x0, x2] = (r, c)
        return out

    @cached_property
    def dual_blocks(self) -> dict[tuple[str, str], tuple[list, list]]:
        """(x1, x3) -> (rows, cols): rows are (e0, e3) pairs, columns (e1, e2) pairs."""
        rows_by = defaultdict(list)
        for x0 in self.V0:
            for e0 in self.G0.out(x0):
                for e3 in self.G3.out(x0):
                    rows_by[e0.dst, e3.dst].append((e0, e3))
        cols_by = defaultdict(list)
        for x1 in self.V1:
            for e1 in self.G1.out(x1):
                for x3 in self.V3:
                    for e2 in self.G2.between(x3, e1.dst):
                        cols_by[x1, x3].append((e1, e2))
        keys = sorted(set(rows_by) | set(cols_by), key=lambda k: (self.V1.index(k[0]), self.V3.index(k[1])))
        return {k: (rows_by.get(k, []), cols_by.get(k, [])) for k in keys}

    def block_shapes(self) -> dict[tuple[str, str], tuple[int, int]]:
        return {k: (len(r), len(c)) for k, (r, c) in self.blocks.items()}

    def vertical_census(self) -> tuple[dict, dict]:
        return self.G3.census(), self.G1.census()

    def to_json(self) -> dict:
        return {
            "V0": list(self.V0),
            "V1": list(self.V1),
            "V2": list(self.V2),
            "V3": list(self.V3),
            "G0": self.G0.to_json(),
            "G1": self.G1.to_json(),
            "G2": self.G2.to_json(),
            "G3": self.G3.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict, resolve=None) -> FourGraph:
        def graph(key):
            g = data[key]
            if isinstance(g, str) or "ref" in g:
                if resolve is None:
                    raise GraphError(f"{key} is a reference but no resolver was given")
                return resolve(g if isinstance(g, str) else g["ref"])
            return BipartiteGraph.from_json(g, key)

        G0, G1, G2, G3 = (graph(k) for k in ("G0", "G1", "G2", "G3"))
        return cls(
            tuple(data.get("V0", G0.even)),
            tuple(data.get("V1", G0.odd)),
            tuple(data.get("V2", G2.odd)),
            tuple(data.get("V3", G2.even)),
            G0,
            G1,
            G2,
            G3,
        )


def cells(fg: FourGraph) -> list[Cell]:
    return list(fg.cell_list)


@dataclass(frozen=True)
class WeightVector:
    values: dict[str, Scalar]
    base: str
    norm_sq: Scalar | None = field(default=None, compare=False)

    def __getitem__(self, v: str) -> Scalar:
        return self.values[v]

    def __contains__(self, v: str) -> bool:
        return v in self.values

    def merged(self, other: WeightVector) -> WeightVector:
        vals = dict(self.values)
        for k, x in other.values.items():
            if k in vals and vals[k] != x:
                raise GraphError(f"inconsistent weight at {k}")
            vals[k] = x
        return WeightVector(vals, self.base, self.norm_sq)


def fp_weights(g: BipartiteGraph, norm_sq, base: str) -> WeightVector:
    """Exact Perron-Frobenius weights of ``g`` for the eigenvalue ``norm_sq``.

    Even weights span the kernel of A A^T - norm_sq; odd weights are A^T x / norm.
    """
    lam = _to_base_field(norm_sq)
    A = g.adjacency()
    ne, no = len(g.even), len(g.odd)
    M = [[QSqrt17(sum(A[i][k] * A[j][k] for k in range(no))) for j in range(ne)] for i in range(ne)]
    for i in range(ne):
        M[i][i] = M[i][i] - lam
    basis = nullspace(M, ne, ZERO, ONE)
    if not basis:
        raise GraphError(f"{g.name}: {lam} is not an eigenvalue of A A^T")
    if len(basis) > 1:
        raise GraphError(f"{g.name}: eigenspace has dimension {len(basis)} (disconnected graph?)")
    x = [Scalar.coerce(c) for c in basis[0]]
    norm = Scalar.sqrt_of(lam)
    inv_norm = norm.inverse()
    vals = {v: x[i] for i, v in enumerate(g.even)}
    for k, v in enumerate(g.odd):
        vals[v] = sum((x[i] * A[i][k] for i in range(ne) if A[i][k]), Scalar()) * inv_norm
    if base not in vals:
        raise GraphError(f"{g.name}: unknown base vertex {base}")
    scale = vals[base].inverse()
    vals = {v: w * scale for v, w in vals.items()}
    for v, w in vals.items():
        if certified_sign(w) <= 0:
            raise GraphError(f"{g.name}: weight at {v} is not positive")
    return WeightVector(vals, base, Scalar.coerce(lam))


def _to_base_field(x) -> QSqrt17:
    if isinstance(x, Scalar):
        if not x.in_base_field():
            raise GraphError("norm_sq must lie in Q(sqrt17)")
        return x.base_value()
    if isinstance(x, str):
        return _to_base_field(Scalar.coerce(x))
    return QSqrt17.coerce(x)


def union_vertices(*groups: Iterable[str]) -> tuple[str, ...]:
    seen = []
    for g in groups:
        for v in g:
            if v not in seen:
                seen.append(v)
    return tuple(seen)
