"""Biunitary connections on 4-graphs and their calculus.

A connection stores one exact scalar per cell.  Matrices are grouped by
``(x0, x2)`` with rows the V3-paths and columns the V1-paths.  Vertical edge
space maps (intertwiners, gauges, isometries) are stored column-wise: each
source edge maps to a combination of target edges.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .graphs import BipartiteGraph, Cell, Edge, FourGraph, GraphError, WeightVector, vertex_of
from .linalg import sparse_nullspace
from .scalars import ONE_S, ZERO_S, Scalar, ScalarError, certified_sign

__all__ = [
    "Connection",
    "EdgeSpaceMap",
    "Report",
    "ConnectionError_",
    "check_biunitary",
    "compose",
    "compose_all",
    "direct_sum",
    "conjugate",
    "identity_connection",
    "pullback",
    "intertwiner_space",
    "find_vertical_gauge",
    "verify_gauge",
    "complement_connection",
    "classify_phase_connections",
    "check_isometry",
    "LabeledGauge",
    "resolve_gauge",
    "map_blocks",
    "phase_connection",
    "phase_holonomy",
]


class ConnectionError_(ValueError):
    """Shape or graph mismatch between connections or maps."""


@dataclass
class Report:
    name: str
    passed: bool = True
    checked: int = 0
    failures: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    flagged: bool = False

    def fail(self, **info):
        self.passed = False
        self.failures.append(info)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "flagged": self.flagged,
            "checked": self.checked,
            "failures": self.failures,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# connections


@dataclass
class Connection:
    fg: FourGraph
    values: dict[Cell, Scalar]
    weights_top: WeightVector | None = None
    weights_bottom: WeightVector | None = None
    name: str = ""

    def __post_init__(self):
        known = set(self.fg.cell_list)
        for cell in self.values:
            if cell not in known:
                raise ConnectionError_(f"{self.name}: value for a non-cell {cell}")

    def __getitem__(self, cell: Cell) -> Scalar:
        return self.values.get(cell, ZERO_S)

    def value(self, e0: Edge, e1: Edge, e2: Edge, e3: Edge) -> Scalar:
        return self.values.get(Cell(e0, e1, e2, e3), ZERO_S)

    def block(self, x0: str, x2: str) -> tuple[list, list, list[list[Scalar]]]:
        rows, cols = self.fg.blocks.get((x0, x2), ([], []))
        M = [[self.value(e0, e1, e2, e3) for (e0, e1) in cols] for (e3, e2) in rows]
        return rows, cols, M

    def mu(self, v: str, side: str) -> Scalar:
        w = self.weights_top if side == "top" else self.weights_bottom
        if w is None:
            raise ConnectionError_(f"{self.name}: missing {side} weights")
        return w[v]

    def relabeled(self, name: str) -> Connection:
        return Connection(self.fg, self.values, self.weights_top, self.weights_bottom, name)

    def nonzero_cells(self) -> int:
        return sum(1 for x in self.values.values() if x)


def _unit_defects(M, tag) -> list[dict]:
    """Entries of M M^T - I that are nonzero (M square)."""
    out = []
    n = len(M)
    for i in range(n):
        for j in range(i, n):
            s = sum((M[i][k] * M[j][k] for k in range(len(M[i]))), ZERO_S)
            if i == j:
                s = s - 1
            if s:
                out.append({"grouping": tag, "entry": [i, j], "defect": s.serialize()})
    return out


def check_biunitary(c: Connection, renormalized: bool = True) -> Report:
    """Exact unitarity of every (x0, x2) block and of the renormalized (x1, x3) family.

    The renormalized check uses W'(cell) = sqrt(mu(x0) mu(x2) / (mu(x1) mu(x3))) W(cell),
    tested in squared form so no new radicals are needed.
    """
    rep = Report(f"biunitary:{c.name}")
    fg = c.fg
    for (x0, x2), (rows, cols) in fg.blocks.items():
        rep.checked += 1
        label = f"{x0}-{x2}"
        if len(rows) != len(cols):
            rep.fail(block=label, grouping="direct", shape=[len(rows), len(cols)])
            continue
        _, _, M = c.block(x0, x2)
        for d in _unit_defects(M, "direct"):
            rep.fail(block=label, **d)
    if not renormalized:
        return rep
    if c.weights_top is None or c.weights_bottom is None:
        raise ConnectionError_(f"{c.name}: renormalized check needs weights")
    for (x1, x3), (rows, cols) in fg.dual_blocks.items():
        rep.checked += 1
        label = f"{x1}|{x3}"
        if len(rows) != len(cols):
            rep.fail(block=label, grouping="renormalized", shape=[len(rows), len(cols)])
            continue
        M = [[c.value(e0, e1, e2, e3) for (e1, e2) in cols] for (e0, e3) in rows]
        m13 = c.mu(x1, "top") * c.mu(x3, "bottom")
        mu0 = [c.mu(e0.src, "top") for (e0, _) in rows]
        mu2 = [c.mu(e1.dst, "bottom") for (e1, _) in cols]
        n = len(rows)
        for i in range(n):
            for j in range(i, n):
                s = sum((mu2[k] * M[i][k] * M[j][k] for k in range(n)), ZERO_S)
                target = m13 / mu0[i] if i == j else ZERO_S
                if s != target:
                    rep.fail(block=label, grouping="renormalized-rows", entry=[i, j],
                             defect=(s - target).serialize())
        for k in range(n):
            for l in range(k, n):
                s = sum((mu0[i] * M[i][k] * M[i][l] for i in range(n)), ZERO_S)
                target = m13 / mu2[k] if k == l else ZERO_S
                if s != target:
                    rep.fail(block=label, grouping="renormalized-cols", entry=[k, l],
                             defect=(s - target).serialize())
    return rep


def _vertical(edges: Iterable[Edge], even, odd, name) -> BipartiteGraph:
    return BipartiteGraph(tuple(even), tuple(odd), tuple(edges), name)


def compose(c1: Connection, c2: Connection, name: str = "") -> Connection:
    """Stack c1 over c2; composite vertical edges are concatenated words."""
    if not c1.fg.G2.same_as(c2.fg.G0):
        raise ConnectionError_(f"cannot compose {c1.name} with {c2.name}: middle graphs differ")
    f1, f2 = c1.fg, c2.fg
    right = [a + b for a in f1.G1.edges for b in f2.G1.out(a.dst)]
    left = [a + b for a in f1.G3.edges for b in f2.G3.out(a.dst)]
    fg = FourGraph(
        f1.V0, f1.V1, f2.V2, f2.V3,
        f1.G0,
        _vertical(right, f1.V1, f2.V2, "G1"),
        f2.G2,
        _vertical(left, f1.V0, f2.V3, "G3"),
    )
    by_mid = defaultdict(list)
    for cell, x in c2.values.items():
        if x:
            by_mid[cell.e0].append((cell, x))
    vals: dict[Cell, Scalar] = {}
    for cell, x in c1.values.items():
        if not x:
            continue
        for cell2, y in by_mid.get(cell.e2, ()):
            key = Cell(cell.e0, cell.e1 + cell2.e1, cell2.e2, cell.e3 + cell2.e3)
            vals[key] = vals.get(key, ZERO_S) + x * y
    vals = {k: v for k, v in vals.items() if v}
    return Connection(fg, vals, c1.weights_top, c2.weights_bottom, name or f"{c1.name}{c2.name}")


def compose_all(*cs: Connection, name: str = "") -> Connection:
    out = cs[0]
    for c in cs[1:]:
        out = compose(out, c)
    return out.relabeled(name) if name else out


def _retag(e: Edge, mark: str) -> Edge:
    last = e.word[-1]
    v, _, t = last.partition("_")
    return Edge(e.word[:-1] + (f"{v}_{t}{mark}",))


def direct_sum(c1: Connection, c2: Connection, name: str = "") -> Connection:
    """Disjoint union of vertical graphs; colliding edge ids of c2 get a prime."""
    f1, f2 = c1.fg, c2.fg
    if not (f1.G0.same_as(f2.G0) and f1.G2.same_as(f2.G2)):
        raise ConnectionError_("direct sum needs identical horizontal graphs")
    ren = {}
    clash = set(f1.G1.edges) & set(f2.G1.edges) or set(f1.G3.edges) & set(f2.G3.edges)
    for e in f2.G1.edges + f2.G3.edges:
        ren[e] = _retag(e, "'") if clash else e
    fg = FourGraph(
        f1.V0, f1.V1, f1.V2, f1.V3, f1.G0,
        _vertical(f1.G1.edges + tuple(ren[e] for e in f2.G1.edges), f1.V1, f1.V2, "G1"),
        f1.G2,
        _vertical(f1.G3.edges + tuple(ren[e] for e in f2.G3.edges), f1.V0, f1.V3, "G3"),
    )
    vals = dict(c1.values)
    for cell, x in c2.values.items():
        vals[Cell(cell.e0, ren[cell.e1], cell.e2, ren[cell.e3])] = x
    return Connection(fg, vals, c1.weights_top, c1.weights_bottom, name or f"{c1.name}+{c2.name}")


def _sqrt_ratio(num: Scalar, den: Scalar) -> Scalar:
    return (num / den).sqrt()


def conjugate(c: Connection, name: str = "") -> Connection:
    """Swap upper and lower graphs, reversing vertical edges.

    Value rule: sqrt(mu(x0) mu(x2) / (mu(x1) mu(x3))) W on the reflected cell.
    """
    f = c.fg
    fg = FourGraph(
        f.V3, f.V2, f.V1, f.V0,
        f.G2,
        f.G1.reversed("G1"),
        f.G0,
        f.G3.reversed("G3"),
    )
    cache = {}
    vals = {}
    for cell, x in c.values.items():
        if not x:
            continue
        x0, x1, x2, x3 = cell.corners
        key = (x0, x1, x2, x3)
        fac = cache.get(key)
        if fac is None:
            fac = _sqrt_ratio(c.mu(x0, "top") * c.mu(x2, "bottom"), c.mu(x1, "top") * c.mu(x3, "bottom"))
            cache[key] = fac
        vals[Cell(cell.e2, cell.e1.reversed(), cell.e0, cell.e3.reversed())] = fac * x
    return Connection(fg, vals, c.weights_bottom, c.weights_top, name or f"conj({c.name})")


def identity_connection(g: BipartiteGraph, weights: WeightVector | None = None, name="1") -> Connection:
    right = tuple(Edge((v, v)) for v in g.odd)
    left = tuple(Edge((v, v)) for v in g.even)
    fg = FourGraph(
        g.even, g.odd, g.odd, g.even, g,
        _vertical(right, g.odd, g.odd, "G1"),
        g,
        _vertical(left, g.even, g.even, "G3"),
    )
    vals = {Cell(e, Edge((e.dst, e.dst)), e, Edge((e.src, e.src))): ONE_S for e in g.edges}
    return Connection(fg, vals, weights, weights, name)


# ---------------------------------------------------------------------------
# vertical edge space maps


@dataclass
class EdgeSpaceMap:
    """Block maps on vertical edge spaces, stored as source edge -> {target edge: coeff}."""

    left: dict[Edge, dict[Edge, Scalar]]
    right: dict[Edge, dict[Edge, Scalar]]
    name: str = ""
    issues: list[str] = field(default_factory=list)

    def side(self, which: str) -> dict[Edge, dict[Edge, Scalar]]:
        return self.left if which == "left" else self.right

    def coeff(self, which: str, target: Edge, source: Edge) -> Scalar:
        return self.side(which).get(source, {}).get(target, ZERO_S)

    def adjoint(self) -> EdgeSpaceMap:
        def tr(m):
            out = defaultdict(dict)
            for s, col in m.items():
                for t, x in col.items():
                    out[t][s] = x
            return dict(out)

        return EdgeSpaceMap(tr(self.left), tr(self.right), f"{self.name}*")

    def scaled(self, k: Scalar) -> EdgeSpaceMap:
        def sc(m):
            return {s: {t: x * k for t, x in col.items()} for s, col in m.items()}

        return EdgeSpaceMap(sc(self.left), sc(self.right), self.name)

    def then(self, other: EdgeSpaceMap) -> EdgeSpaceMap:
        """Apply self first, then other."""

        def mul(a, b):
            out = {}
            for s, col in a.items():
                acc = {}
                for m, x in col.items():
                    for t, y in b.get(m, {}).items():
                        acc[t] = acc.get(t, ZERO_S) + x * y
                out[s] = {t: v for t, v in acc.items() if v}
            return out

        return EdgeSpaceMap(mul(self.left, other.left), mul(self.right, other.right))

    def block(self, which: str, targets: list[Edge], sources: list[Edge]) -> list[list[Scalar]]:
        m = self.side(which)
        return [[m.get(s, {}).get(t, ZERO_S) for s in sources] for t in targets]

    def to_json(self) -> dict:
        def enc(m):
            return [
                {"source": str(s), "image": {str(t): x.serialize() for t, x in sorted(col.items())}}
                for s, col in sorted(m.items())
            ]

        return {"name": self.name, "left": enc(self.left), "right": enc(self.right)}


def _edge_blocks(g: BipartiteGraph) -> dict[tuple[str, str], list[Edge]]:
    out = defaultdict(list)
    for e in g.edges:
        out[e.src, e.dst].append(e)
    return out


def map_blocks(src: FourGraph, dst: FourGraph):
    """Yield (side, (u, v), target edges, source edges) over all vertical blocks."""
    for side, gs, gt in (("left", src.G3, dst.G3), ("right", src.G1, dst.G1)):
        bs, bt = _edge_blocks(gs), _edge_blocks(gt)
        for key in sorted(set(bs) | set(bt), key=_key_order(gs, gt)):
            yield side, key, bt.get(key, []), bs.get(key, [])


def _key_order(gs, gt):
    ev = list(dict.fromkeys(gs.even + gt.even))
    od = list(dict.fromkeys(gs.odd + gt.odd))
    return lambda k: (ev.index(k[0]), od.index(k[1]))


def check_isometry(m: EdgeSpaceMap, src: FourGraph, dst: FourGraph, unitary=False) -> Report:
    rep = Report(f"{'unitary' if unitary else 'isometry'}:{m.name}")
    for side, (u, v), T, S in map_blocks(src, dst):
        if not S:
            continue
        rep.checked += 1
        label = f"{side}:{u}-{v}"
        if unitary and len(S) != len(T):
            rep.fail(block=label, shape=[len(T), len(S)])
            continue
        M = m.block(side, T, S)
        for i in range(len(S)):
            for j in range(i, len(S)):
                s = sum((M[k][i] * M[k][j] for k in range(len(T))), ZERO_S)
                if i == j:
                    s = s - 1
                if s:
                    rep.fail(block=label, entry=[str(S[i]), str(S[j])], defect=s.serialize())
    return rep


def _intertwining_residuals(c1: Connection, c2: Connection, T: EdgeSpaceMap, stop_first=False):
    """Residuals of (1 x T_left) W1 = W2 (1 x T_right), keyed by cell coordinates."""
    f1, f2 = c1.fg, c2.fg
    out = []
    for (x0, x2), (rows2, _) in f2.blocks.items():
        _, cols1 = f1.blocks.get((x0, x2), ([], []))
        for e3t, e2 in rows2:
            for e0, e1s in cols1:
                lhs = ZERO_S
                for e3s in f1.G3.between(x0, e3t.dst):
                    a = T.coeff("left", e3t, e3s)
                    if a:
                        lhs = lhs + a * c1.value(e0, e1s, e2, e3s)
                rhs = ZERO_S
                for e1t in f2.G1.between(e0.dst, x2):
                    b = T.coeff("right", e1t, e1s)
                    if b:
                        rhs = rhs + c2.value(e0, e1t, e2, e3t) * b
                r = lhs - rhs
                if r:
                    out.append({"block": f"{x0}-{x2}", "row": f"{e3t} / {e2}", "col": f"{e0} / {e1s}",
                                "residual": r.serialize()})
                    if stop_first:
                        return out
    return out


def _check_horizontal(c1: Connection, c2: Connection):
    if not (c1.fg.G0.same_as(c2.fg.G0) and c1.fg.G2.same_as(c2.fg.G2)):
        raise ConnectionError_(f"{c1.name} and {c2.name} have different horizontal graphs")


def intertwiner_space(c1: Connection, c2: Connection) -> tuple[int, list[EdgeSpaceMap]]:
    """Exact basis of vertical edge space maps T with (1 x T_L) W1 = W2 (1 x T_R)."""
    _check_horizontal(c1, c2)
    f1, f2 = c1.fg, c2.fg
    variables = []
    for side, key, T, S in map_blocks(f1, f2):
        for t in T:
            for s in S:
                variables.append((side, t, s))
    eqs = []
    for (x0, x2), (rows2, _) in f2.blocks.items():
        _, cols1 = f1.blocks.get((x0, x2), ([], []))
        for e3t, e2 in rows2:
            for e0, e1s in cols1:
                eq = {}
                for e3s in f1.G3.between(x0, e3t.dst):
                    w = c1.value(e0, e1s, e2, e3s)
                    if w:
                        eq[("left", e3t, e3s)] = w
                for e1t in f2.G1.between(e0.dst, x2):
                    w = c2.value(e0, e1t, e2, e3t)
                    if w:
                        k = ("right", e1t, e1s)
                        eq[k] = eq.get(k, ZERO_S) - w
                eq = {k: v for k, v in eq.items() if v}
                if eq:
                    eqs.append(eq)
    basis = sparse_nullspace(eqs, variables, ONE_S)
    maps = []
    for vec in basis:
        left, right = defaultdict(dict), defaultdict(dict)
        for (side, t, s), x in vec.items():
            if x:
                (left if side == "left" else right)[s][t] = x
        maps.append(EdgeSpaceMap(dict(left), dict(right), f"({c1.name},{c2.name})"))
    return len(maps), maps


def _first_nonzero(m: EdgeSpaceMap, src: FourGraph, dst: FourGraph):
    for side, key, T, S in map_blocks(src, dst):
        for s in S:
            for t in T:
                x = m.coeff(side, t, s)
                if x:
                    yield side, key, len(T), len(S), x


def find_vertical_gauge(c1: Connection, c2: Connection) -> tuple[EdgeSpaceMap | None, dict]:
    """Unitary generator of a one-dimensional intertwiner space, sign-normalized."""
    dim, basis = intertwiner_space(c1, c2)
    info = {"dimension": dim}
    if dim != 1:
        return None, info
    T = basis[0]
    scale = None
    for side, key, nt, ns, x in _first_nonzero(T, c1.fg, c2.fg):
        if nt == ns == 1:
            scale = x
            break
    if scale is None:
        side, key, nt, ns, x = next(_first_nonzero(T, c1.fg, c2.fg))
        S = c1.fg.G3.between(*key) if side == "left" else c1.fg.G1.between(*key)
        s0 = S[0]
        lam = sum((y * y for y in T.side(side).get(s0, {}).values()), ZERO_S)
        try:
            scale = lam.sqrt()
        except ScalarError:
            info["reason"] = "normalizing constant outside the supported tower"
            return None, info
    T = T.scaled(scale.inverse())
    first = next(_first_nonzero(T, c1.fg, c2.fg))[-1]
    if certified_sign(first) < 0:
        T = T.scaled(-ONE_S)
    T.name = f"gauge({c1.name},{c2.name})"
    rep = check_isometry(T, c1.fg, c2.fg, unitary=True)
    if not rep.passed:
        info["reason"] = "generator is not a multiple of a unitary"
        info["defects"] = rep.failures[:5]
        return None, info
    return T, info


def verify_gauge(c1: Connection, c2: Connection, g: EdgeSpaceMap) -> Report:
    _check_horizontal(c1, c2)
    rep = check_isometry(g, c1.fg, c2.fg, unitary=True)
    rep.name = f"gauge:{g.name}"
    res = _intertwining_residuals(c1, c2, g)
    rep.checked += sum(len(r) * len(c) for r, c in c2.fg.blocks.values())
    for r in res:
        rep.fail(kind="intertwining", **r)
    return rep


# ---------------------------------------------------------------------------
# pullback and complements


def pullback(prod: Connection, embed: EdgeSpaceMap, fg: FourGraph, name="") -> Connection:
    """Connection on ``fg`` obtained by restricting ``prod`` along an isometric embedding.

    W(e0, r, e2, l) = sum V_L[l', l] W_prod(e0, r', e2, l') V_R[r', r].
    """
    vals = {}
    for cell in fg.cell_list:
        e0, r, e2, l = cell
        acc = ZERO_S
        for l2, a in embed.left.get(l, {}).items():
            for r2, b in embed.right.get(r, {}).items():
                w = prod.value(e0, r2, e2, l2)
                if w:
                    acc = acc + a * w * b
        if acc:
            vals[cell] = acc
    return Connection(fg, vals, prod.weights_top, prod.weights_bottom, name)


def _dot(u: dict, v: dict) -> Scalar:
    return sum((x * v[k] for k, x in u.items() if k in v), ZERO_S)


def _orth_complement(space: list[Edge], image: list[dict]) -> list[dict]:
    """Orthonormal completion of ``image`` (orthonormal columns) inside span(space)."""
    basis = [dict(v) for v in image]
    new = []
    for e in space:
        v = {e: ONE_S}
        for b in basis:
            c = b.get(e, ZERO_S)
            if c:
                for k, x in b.items():
                    v[k] = v.get(k, ZERO_S) - c * x
        v = {k: x for k, x in v.items() if x}
        if not v:
            continue
        n2 = _dot(v, v)
        try:
            n = n2.sqrt()
        except ScalarError:
            continue
        v = {k: x / n for k, x in v.items()}
        basis.append(v)
        new.append(v)
        if len(basis) == len(space):
            break
    if len(basis) != len(space):
        raise ConnectionError_(f"could not complete an orthonormal basis over {[str(e) for e in space]}")
    return new


def complement_connection(prod: Connection, embed: EdgeSpaceMap, name="") -> tuple[Connection, EdgeSpaceMap]:
    """Connection on the orthogonal complement of the image of ``embed``."""
    f = prod.fg
    new_edges = {"left": [], "right": []}
    cols = {"left": {}, "right": {}}
    for side, g in (("left", f.G3), ("right", f.G1)):
        imgs = defaultdict(list)
        for s, col in embed.side(side).items():
            imgs[s.src, s.dst].append(col)
        for key, space in _edge_blocks(g).items():
            image = imgs.get(key, [])
            for col in image:
                if _dot(col, col) != ONE_S:
                    raise ConnectionError_(f"embedding is not isometric at {key}")
            for i in range(len(image)):
                for j in range(i + 1, len(image)):
                    if _dot(image[i], image[j]):
                        raise ConnectionError_(f"embedding is not isometric at {key}")
            comp = _orth_complement(space, image)
            for i, v in enumerate(comp):
                u, w = key
                e = Edge.simple(u, w, "" if len(comp) == 1 else str(i + 1))
                new_edges[side].append(e)
                cols[side][e] = v
    fg = FourGraph(
        f.V0, f.V1, f.V2, f.V3, f.G0,
        _vertical(new_edges["right"], f.V1, f.V2, "G1"),
        f.G2,
        _vertical(new_edges["left"], f.V0, f.V3, "G3"),
    )
    emb = EdgeSpaceMap(cols["left"], cols["right"], f"complement({embed.name})")
    return pullback(prod, emb, fg, name or "complement"), emb


# ---------------------------------------------------------------------------
# phase connections


def classify_phase_connections(fg: FourGraph, order=None) -> list[dict[Cell, int]]:
    """Sign connections on a 4-graph with 1x1 blocks, one representative per gauge class.

    Gauge acts by a sign on each vertical edge; the invariant is the sign holonomy
    around cycles of the graph whose nodes are vertical edges and whose links are
    cells.  Representatives flip the cell closing each independent cycle.
    """
    for key, (rows, cols) in fg.blocks.items():
        if len(rows) != 1 or len(cols) != 1:
            raise ConnectionError_(f"block {key} is not 1x1")
    cells_ = list(fg.cell_list)
    if order is not None:
        cells_.sort(key=order)
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    closing = []
    for cell in cells_:
        a, b = find(("L", cell.e3)), find(("R", cell.e1))
        if a == b:
            closing.append(cell)
        else:
            parent[a] = b
    reps = []
    for mask in range(2 ** len(closing)):
        signs = {cell: 1 for cell in cells_}
        for i, cell in enumerate(closing):
            if mask >> i & 1:
                signs[cell] = -1
        reps.append(signs)
    return reps


def phase_holonomy(fg: FourGraph, signs: dict[Cell, int], order=None) -> tuple[int, ...]:
    """Gauge invariant of a sign connection: its sign around each independent cycle.

    Cycles are closed in the same order as ``classify_phase_connections``, so the
    k-th representative there has holonomy -1 exactly at the set bits of k.
    """
    cells_ = list(fg.cell_list)
    if order is not None:
        cells_.sort(key=order)
    adj: dict = defaultdict(list)
    parent: dict = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    closing = []
    for cell in cells_:
        a, b = ("L", cell.e3), ("R", cell.e1)
        if find(a) == find(b):
            closing.append((cell, a, b))
        else:
            parent[find(a)] = find(b)
            adj[a].append((b, signs[cell]))
            adj[b].append((a, signs[cell]))
    pot: dict = {}
    for root in list(adj):
        if root in pot:
            continue
        pot[root] = 1
        stack = [root]
        while stack:
            x = stack.pop()
            for y, sg in adj[x]:
                if y not in pot:
                    pot[y] = pot[x] * sg
                    stack.append(y)
    return tuple(signs[c] * pot.get(a, 1) * pot.get(b, 1) for c, a, b in closing)


def phase_connection(fg: FourGraph, signs: dict[Cell, int], weights=None, name="") -> Connection:
    vals = {cell: Scalar.coerce(s) for cell, s in signs.items()}
    return Connection(fg, vals, weights, weights, name)


# ---------------------------------------------------------------------------
# printed gauges with word labels


@dataclass
class LabeledGauge:
    """Gauge blocks as printed: word labels plus expression matrices."""

    name: str
    singletons: dict[str, list[str]]
    blocks: list[dict]
    status: str = "verified"

    @classmethod
    def from_json(cls, data: dict) -> LabeledGauge:
        return cls(data.get("name", ""), data.get("singletons", {}), data.get("blocks", []),
                   data.get("status", "verified"))

    def census(self) -> dict[int, int]:
        out = defaultdict(int)
        out[1] = sum(len(v) for v in self.singletons.values())
        for b in self.blocks:
            out[len(b["rows"])] += 1
        return dict(sorted(out.items()))

    def matrices(self) -> list[tuple[str, list[list[Scalar]]]]:
        out = []
        for value, pairs in self.singletons.items():
            for p in pairs:
                out.append((p, [[Scalar.coerce(value)]]))
        for b in self.blocks:
            label = f"{b['cols'][0]} ..."
            out.append((label, [[Scalar.coerce(x) for x in row] for row in b["matrix"]]))
        return out

    def check_unitarity(self) -> Report:
        """Every printed matrix is square and exactly orthogonal (M M^T = I)."""
        rep = Report(f"unitarity:{self.name}")
        for label, M in self.matrices():
            rep.checked += 1
            if any(len(row) != len(M) for row in M):
                rep.fail(block=label, kind="not square")
                continue
            for d in _unit_defects(M, "rows"):
                rep.fail(block=label, **d)
        rep.notes.append("census " + ", ".join(f"{k}x{k}: {v}" for k, v in self.census().items()))
        return rep


def _token_distance(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    n, m = len(a), len(b)
    dp = list(range(m + 1))
    for i in range(1, n + 1):
        prev, dp[0] = dp[0], i
        for j in range(1, m + 1):
            cur = dp[j]
            dp[j] = min(dp[j] + 1, dp[j - 1] + 1, prev + (a[i - 1] != b[j - 1]))
            prev = cur
    return dp[m]


def _match_labels(labels: list[str], edges: list[Edge], strict=False) -> tuple[list[Edge], list[str]]:
    """Map printed labels onto edges; unmatched labels take the nearest unused edge."""
    notes = []
    chosen: list[Edge | None] = [None] * len(labels)
    used = set()
    for i, lab in enumerate(labels):
        e = Edge(tuple(lab.split()))
        if e in edges and e not in used:
            chosen[i] = e
            used.add(e)
    for i, lab in enumerate(labels):
        if chosen[i] is not None:
            continue
        if strict:
            raise ConnectionError_(f"label {lab!r} is not an unused edge of its block")
        free = [e for e in edges if e not in used]
        toks = tuple(lab.split())
        ranked = sorted(free, key=lambda e: (_token_distance(toks, e.word), e.word))
        if not ranked:
            raise ConnectionError_(f"label {lab!r} has no edge left to match")
        best = ranked[0]
        if len(ranked) > 1 and _token_distance(toks, ranked[1].word) == _token_distance(toks, best.word):
            raise ConnectionError_(f"label {lab!r} is ambiguous between {best} and {ranked[1]}")
        chosen[i] = best
        used.add(best)
        notes.append(f"label '{lab}' read as '{best}'")
    return chosen, notes


def resolve_gauge(lg: LabeledGauge, src: Connection, dst: Connection, strict=False) -> tuple[EdgeSpaceMap, list[str]]:
    """Turn a labeled gauge into an EdgeSpaceMap between ``src`` and ``dst``.

    Labels that are not edges of the block are matched to the nearest unused
    edge (token edit distance) and reported, unless ``strict``.
    """
    notes = []
    left, right = defaultdict(dict), defaultdict(dict)
    fs, ft = src.fg, dst.fg

    def side_of(u, v):
        if u in fs.V0 and v in fs.V3:
            return "left", fs.G3, ft.G3
        if u in fs.V1 and v in fs.V2:
            return "right", fs.G1, ft.G1
        raise ConnectionError_(f"no vertical block {u}-{v}")

    seen = set()
    for value, pairs in lg.singletons.items():
        x = Scalar.coerce(value)
        for p in pairs:
            u, v = p.split("-", 1)
            side, gs, gt = side_of(u, v)
            S, T = gs.between(u, v), gt.between(u, v)
            if len(S) != 1 or len(T) != 1:
                raise ConnectionError_(f"singleton {p} names a {len(T)}x{len(S)} block")
            if (side, u, v) in seen:
                notes.append(f"block {p} listed twice")
            seen.add((side, u, v))
            (left if side == "left" else right)[S[0]][T[0]] = x
    for b in lg.blocks:
        ends = [(vertex_of(l.split()[0]), vertex_of(l.split()[-1])) for l in b["rows"] + b["cols"]]
        u, v = max(set(ends), key=ends.count)
        side, gs, gt = side_of(u, v)
        S, T = list(gs.between(u, v)), list(gt.between(u, v))
        if len(S) != len(b["cols"]) or len(T) != len(b["rows"]):
            raise ConnectionError_(f"block {u}-{v}: printed shape does not match the edge spaces")
        cols, n1 = _match_labels(b["cols"], S, strict)
        rows, n2 = _match_labels(b["rows"], T, strict)
        notes += [f"block {u}-{v}: {n}" for n in n1 + n2]
        if (side, u, v) in seen:
            notes.append(f"block {u}-{v} listed twice")
        seen.add((side, u, v))
        m = left if side == "left" else right
        for i, t in enumerate(rows):
            for j, s in enumerate(cols):
                x = Scalar.coerce(b["matrix"][i][j])
                if x:
                    m[s][t] = x
    for side, key, T, S in map_blocks(fs, ft):
        if S and (side, *key) not in seen:
            notes.append(f"block {key[0]}-{key[1]} ({side}) has no printed data")
    return EdgeSpaceMap(dict(left), dict(right), lg.name), notes
