"""Fusion rings, based modules and bimodules as nonnegative integer matrices.

Conventions.  ``N[i][j][k]`` is the multiplicity of basis element k in i*j.
A module matrix ``M_i[k][j]`` is the multiplicity of kappa_j in kappa_k xi_i,
so a right module satisfies ``M_i M_j = sum_m N[i][j][m] M_m`` and a left
module ``M_j M_i = sum_m N[i][j][m] M_m`` (row vectors are acted on).
"""

from __future__ import annotations

import itertools
import json
import re
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np
import sympy

from .connections import Report
from .qsqrt17 import QSqrt17
from .scalars import Scalar

__all__ = [
    "FusionError",
    "FusionDataError",
    "SearchBudgetExceeded",
    "FusionRing",
    "Algebraic",
    "FusionModule",
    "FusionBimodule",
    "FusionData",
    "check_ring",
    "fp_dims",
    "build_ah4_ring",
    "group_ring",
    "regular_module",
    "regular_bimodule",
    "check_module",
    "check_bimodule",
    "is_transitive",
    "canonical_form",
    "enumerate_modules",
    "enumerate_modules_brute",
    "enumerate_rings",
    "algebra_objects",
    "compatibility",
    "parse_fusion_data",
    "serialize_fusion_data",
    "import_matrix_list",
    "parse_compat_records",
]

EPS = 1e-9


class FusionError(ValueError):
    pass


class FusionDataError(FusionError):
    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, message: str, frontier=None):
        super().__init__(message)
        self.frontier = frontier


def _tuplify(x):
    if isinstance(x, (list, tuple)):
        return tuple(_tuplify(y) for y in x)
    return int(x)


# ---------------------------------------------------------------------------
# rings


@dataclass(frozen=True)
class FusionRing:
    labels: tuple[str, ...]
    N: tuple
    unit: int = 0
    dual: tuple[int, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "N", _tuplify(self.N))
        if not self.dual:
            object.__setattr__(self, "dual", tuple(_infer_dual(self.N, self.unit)))
        else:
            object.__setattr__(self, "dual", tuple(int(x) for x in self.dual))

    @property
    def rank(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return label if isinstance(label, int) else self.labels.index(label)

    def product(self, i, j) -> dict[str, int]:
        i, j = self.index(i), self.index(j)
        return {self.labels[k]: n for k, n in enumerate(self.N[i][j]) if n}

    def left_matrix(self, i) -> list[list[int]]:
        """Row j is i*j."""
        i = self.index(i)
        return [list(self.N[i][j]) for j in range(self.rank)]

    def same_structure(self, other: FusionRing) -> bool:
        return self.N == other.N and self.unit == other.unit and self.dual == other.dual

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "labels": list(self.labels),
            "unit": self.unit,
            "dual": list(self.dual),
            "N": [[list(row) for row in block] for block in self.N],
        }

    @classmethod
    def from_json(cls, data: dict) -> FusionRing:
        try:
            return cls(tuple(data["labels"]), data["N"], data.get("unit", 0), tuple(data.get("dual", ())), data.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise FusionDataError(f"malformed ring: {exc}", data.get("name", "ring") if isinstance(data, dict) else "ring")


def _infer_dual(N, unit) -> list[int]:
    n = len(N)
    out = []
    for i in range(n):
        js = [j for j in range(n) if N[i][j][unit]]
        out.append(js[0] if len(js) == 1 else -1)
    return out


def check_ring(r: FusionRing) -> Report:
    rep = Report(f"ring:{r.name or 'ring'}")
    n, N, u, du = r.rank, r.N, r.unit, r.dual
    if len(N) != n or any(len(b) != n or any(len(row) != n for row in b) for b in N):
        rep.fail(kind="shape")
        return rep
    if any(x < 0 for b in N for row in b for x in row):
        rep.fail(kind="negative structure constant")
    for i in range(n):
        rep.checked += 2
        for k in range(n):
            want = int(i == k)
            if N[u][i][k] != want or N[i][u][k] != want:
                rep.fail(kind="unit", i=r.labels[i], k=r.labels[k])
    if any(not 0 <= d < n for d in du):
        rep.fail(kind="dual", detail="no unique dual")
        return rep
    for i in range(n):
        rep.checked += 1
        if du[du[i]] != i:
            rep.fail(kind="dual not an involution", i=r.labels[i])
        for j in range(n):
            if N[i][j][u] != int(j == du[i]):
                rep.fail(kind="unit coefficient", i=r.labels[i], j=r.labels[j])
    for i, j, k in itertools.product(range(n), repeat=3):
        rep.checked += 1
        x = N[i][j][k]
        if not (x == N[du[i]][k][j] == N[k][du[j]][i]):
            rep.fail(kind="Frobenius reciprocity", i=r.labels[i], j=r.labels[j], k=r.labels[k])
        if x != N[du[j]][du[i]][du[k]]:
            rep.fail(kind="dual not an anti-automorphism", i=r.labels[i], j=r.labels[j], k=r.labels[k])
    for i, j, k, l in itertools.product(range(n), repeat=4):
        rep.checked += 1
        a = sum(N[i][j][m] * N[m][k][l] for m in range(n))
        b = sum(N[j][k][m] * N[i][m][l] for m in range(n))
        if a != b:
            rep.fail(kind="associativity", i=r.labels[i], j=r.labels[j], k=r.labels[k], l=r.labels[l], lhs=a, rhs=b)
    return rep


@dataclass(frozen=True)
class Algebraic:
    """A PF root outside the supported tower: its factor and an approximation."""

    poly: str
    approx: float

    def __float__(self):
        return self.approx

    def serialize(self) -> str:
        return f"root({self.poly}) ~ {self.approx:.15g}"


_X = sympy.Symbol("x")
_S17 = sympy.sqrt(17)


def _to_q17(e) -> QSqrt17:
    e = sympy.expand(e)
    coeffs = e.as_coefficients_dict()
    extra = set(coeffs) - {sympy.Integer(1), _S17}
    if extra:
        raise FusionError(f"{e} is not in Q(sqrt17)")

    def frac(v):
        v = sympy.Rational(v)
        return Fraction(int(v.p), int(v.q))

    return QSqrt17(frac(coeffs.get(sympy.Integer(1), 0)), frac(coeffs.get(_S17, 0)))


def pf_eigenvalue(M) -> Scalar | Algebraic:
    """Largest eigenvalue of a nonnegative integer matrix, exactly when it is
    at most quadratic over Q(sqrt17)."""
    A = np.array(M, dtype=float)
    lam = float(max(abs(np.linalg.eigvals(A)))) if A.size else 0.0
    p = sympy.Matrix(M).charpoly(_X).as_expr()
    _, factors = sympy.factor_list(p, _X, extension=_S17)
    best = min(factors, key=lambda f: abs(complex(f[0].subs(_X, lam).evalf(30))) / max(1.0, lam ** sympy.degree(f[0], _X)))
    f = sympy.Poly(best[0], _X)
    cs = [c / f.LC() for c in f.all_coeffs()]
    if f.degree() == 1:
        return Scalar.coerce(_to_q17(-cs[1]))
    if f.degree() == 2:
        b, c = _to_q17(cs[1]), _to_q17(cs[2])
        half = Scalar.coerce(-b) * Scalar.coerce(Fraction(1, 2))
        disc = b * b * QSqrt17(Fraction(1, 4)) - c
        for root in (half + Scalar.sqrt_of(disc), half - Scalar.sqrt_of(disc)):
            if abs(float(root) - lam) < 1e-6 * max(1.0, lam):
                return root
    return Algebraic(str(f.as_expr()), lam)


def fp_dims(r: FusionRing) -> dict[str, Scalar | Algebraic]:
    return dict(zip(r.labels, _fp_dims(r)))


@lru_cache(maxsize=256)
def _fp_dims(r: FusionRing) -> tuple:
    return tuple(pf_eigenvalue(r.left_matrix(i)) for i in range(r.rank))


def check_fp_dims(r: FusionRing, dims: dict) -> Report:
    """d_i d_j = sum_k N[i][j][k] d_k, exactly where the dimensions are exact."""
    rep = Report(f"fp-dims:{r.name or 'ring'}")
    ds = [dims[lab] for lab in r.labels]
    exact = all(isinstance(d, Scalar) for d in ds)
    for i, j in itertools.product(range(r.rank), repeat=2):
        rep.checked += 1
        if exact:
            rhs = sum((ds[k] * Scalar.coerce(n) for k, n in enumerate(r.N[i][j]) if n), Scalar.coerce(0))
            ok = ds[i] * ds[j] == rhs
        else:
            rhs = sum(float(ds[k]) * n for k, n in enumerate(r.N[i][j]))
            ok = abs(float(ds[i]) * float(ds[j]) - rhs) < EPS * max(1.0, rhs)
        if not ok:
            rep.fail(kind="dimension not multiplicative", i=r.labels[i], j=r.labels[j])
    if not exact:
        rep.notes.append("some dimensions are not quadratic over Q(sqrt17); checked numerically")
    return rep


def global_dim(r: FusionRing) -> float:
    return sum(float(d) ** 2 for d in fp_dims(r).values())


def group_ring(n: int, name: str = "") -> FusionRing:
    labels = tuple(f"g{i}" for i in range(n))
    N = [[[int(k == (i + j) % n) for k in range(n)] for j in range(n)] for i in range(n)]
    return FusionRing(labels, N, 0, tuple((-i) % n for i in range(n)), name or f"Z/{n}")


def build_ah4_ring() -> FusionRing:
    """Rank 8: a_i (Z/4) and a_i x, with a_i x = x a_{-i} and x^2 = 1 + 2 sum_k a_k x."""
    labels = tuple([f"a{i}" for i in range(4)] + [f"a{i}x" for i in range(4)])
    n = 8
    N = [[[0] * n for _ in range(n)] for _ in range(n)]

    def g(i):
        return i % 4

    def gx(i):
        return 4 + i % 4

    for i in range(4):
        for j in range(4):
            N[g(i)][g(j)][g(i + j)] += 1
            N[g(i)][gx(j)][gx(i + j)] += 1
            N[gx(i)][g(j)][gx(i - j)] += 1
            # a_i x a_j x = a_{i-j} x^2
            N[gx(i)][gx(j)][g(i - j)] += 1
            for k in range(4):
                N[gx(i)][gx(j)][gx(k)] += 2
    dual = tuple([(-i) % 4 for i in range(4)] + [4 + i for i in range(4)])
    return FusionRing(labels, N, 0, dual, "AH4")


def enumerate_rings(max_rank: int = 3, max_entry: int = 3) -> list[FusionRing]:
    """Every fusion ring of rank <= max_rank with structure constants <= max_entry,
    up to relabeling of the non-unit basis."""
    out = []
    seen = set()
    for n in range(1, max_rank + 1):
        others = list(range(1, n))
        duals = set()
        for perm in itertools.permutations(others):
            d = (0,) + tuple(perm)
            if all(d[d[i]] == i for i in range(n)):
                duals.add(d)
        for d in sorted(duals):
            # free coefficients: N[i][j][k] for non-unit i, j, k
            slots = [(i, j, k) for i in others for j in others for k in others]
            pos = {s: t for t, s in enumerate(slots)}
            # reciprocity ties N[i][j][k] to N[i*][k][j] and N[k][j*][i]
            ties = [(t, pos[(d[i], k, j)], pos[(k, d[j], i)]) for t, (i, j, k) in enumerate(slots)]
            for vals in itertools.product(range(max_entry + 1), repeat=len(slots)):
                if any(vals[a] != vals[b] or vals[a] != vals[c] for a, b, c in ties):
                    continue
                N = [[[0] * n for _ in range(n)] for _ in range(n)]
                for i in range(n):
                    N[0][i][i] = N[i][0][i] = 1
                for i in others:
                    N[i][d[i]][0] = 1
                for (i, j, k), v in zip(slots, vals):
                    N[i][j][k] = v
                r = FusionRing(tuple(f"x{i}" for i in range(n)), N, 0, d)
                if not check_ring(r).passed:
                    continue
                key = min(_relabel_key(r, (0,) + p) for p in itertools.permutations(others))
                if key in seen:
                    continue
                seen.add(key)
                out.append(FusionRing(r.labels, N, 0, d, f"R{n}.{len(out)}"))
    return out


def _relabel_key(r: FusionRing, p) -> tuple:
    n = r.rank
    inv = [0] * n
    for a, b in enumerate(p):
        inv[b] = a
    return tuple(r.N[p[i]][p[j]][p[k]] for i in range(n) for j in range(n) for k in range(n)) + tuple(
        inv[r.dual[p[i]]] for i in range(n)
    )


# ---------------------------------------------------------------------------
# modules


@dataclass
class FusionModule:
    ring: FusionRing
    labels: tuple[str, ...]
    mats: tuple
    name: str = ""
    order: str = "right"

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.mats = _tuplify(self.mats)

    @property
    def rank(self) -> int:
        return len(self.labels)

    def to_json(self) -> dict:
        return {"name": self.name, "labels": list(self.labels), "order": self.order, "matrices": [[list(r) for r in m] for m in self.mats]}


def _matmul(A, B):
    n, m, p = len(A), len(B), len(B[0]) if B else 0
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(m)) for j in range(p)) for i in range(n))


def _fp_vector(mats) -> np.ndarray | None:
    """Common positive eigenvector of the action, or None."""
    n = len(mats[0])
    S = np.zeros((n, n))
    for M in mats:
        S += np.array(M, dtype=float)
    w, V = np.linalg.eig(S)
    v = np.real(V[:, int(np.argmax(np.real(w)))])
    v = v if v.sum() >= 0 else -v
    if np.any(v <= EPS):
        return None
    return v / v.min()


def _module_axioms(ring: FusionRing, mats, order: str, rep: Report, tag: str = "") -> None:
    n = len(mats[0]) if mats else 0
    r = ring.rank
    if len(mats) != r or any(len(M) != n or any(len(row) != n for row in M) for M in mats):
        rep.fail(kind="shape", where=tag)
        return
    if any(x < 0 for M in mats for row in M for x in row):
        rep.fail(kind="negative entry", where=tag)
    ident = tuple(tuple(int(a == b) for b in range(n)) for a in range(n))
    rep.checked += 1
    if mats[ring.unit] != ident:
        rep.fail(kind="unit does not act as identity", where=tag)
    for i in range(r):
        rep.checked += 1
        if mats[ring.dual[i]] != tuple(zip(*mats[i])):
            rep.fail(kind="reciprocity", where=tag, i=ring.labels[i])
    for i, j in itertools.product(range(r), repeat=2):
        rep.checked += 1
        lhs = _matmul(mats[i], mats[j]) if order == "right" else _matmul(mats[j], mats[i])
        rhs = tuple(
            tuple(sum(ring.N[i][j][m] * mats[m][a][b] for m in range(r)) for b in range(n)) for a in range(n)
        )
        if lhs != rhs:
            rep.fail(kind="associativity", where=tag, i=ring.labels[i], j=ring.labels[j])


def is_transitive(mats) -> bool:
    n = len(mats[0])
    seen = {0}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        for M in mats:
            for b in range(n):
                if (M[a][b] or M[b][a]) and b not in seen:
                    seen.add(b)
                    queue.append(b)
    return len(seen) == n


def check_module(m: FusionModule) -> Report:
    rep = Report(f"module:{m.name or 'module'}")
    _module_axioms(m.ring, m.mats, m.order, rep)
    if rep.passed:
        rep.checked += 1
        if _fp_vector(m.mats) is None and is_transitive(m.mats):
            rep.fail(kind="no positive FP weight vector")
    return rep


def regular_module(r: FusionRing, order: str = "right") -> FusionModule:
    if order == "right":
        mats = [[[r.N[k][i][j] for j in range(r.rank)] for k in range(r.rank)] for i in range(r.rank)]
    else:
        mats = [[[r.N[i][k][j] for j in range(r.rank)] for k in range(r.rank)] for i in range(r.rank)]
    return FusionModule(r, r.labels, mats, f"regular({r.name})", order)


def _permute(mats, perm):
    return tuple(tuple(tuple(M[perm[a]][perm[b]] for b in range(len(perm))) for a in range(len(perm))) for M in mats)


def canonical_form(mats) -> tuple[tuple, tuple[int, ...]]:
    """Lexicographically least matrix list over basis permutations (branch and bound).

    The key is grown one basis position at a time, so a prefix that already
    exceeds the best prefix is cut.
    """
    n = len(mats[0])
    best: list | None = None
    best_perm: tuple = ()

    def block(perm, c):
        p = len(perm)
        out = []
        for M in mats:
            for q in range(p):
                out.append(M[c][perm[q]])
                out.append(M[perm[q]][c])
            out.append(M[c][c])
        return tuple(out)

    def rec(perm, blocks):
        nonlocal best, best_perm
        p = len(perm)
        if p == n:
            if best is None or blocks < best:
                best, best_perm = list(blocks), tuple(perm)
            return
        for c in range(n):
            if c in perm:
                continue
            blk = block(perm, c)
            if best is not None and blocks + [blk] > best[: p + 1]:
                continue
            perm.append(c)
            blocks.append(blk)
            rec(perm, blocks)
            perm.pop()
            blocks.pop()

    rec([], [])
    return tuple(best), best_perm


@dataclass
class _Eq:
    lhs: list  # products: (u, v) each an int var id or ("c", value)
    rhs: list  # linear: (coef, var id or ("c", value))
    vars: frozenset = field(default_factory=frozenset)


def _dim_bounds(r: FusionRing) -> list[int]:
    out = []
    for d in fp_dims(r).values():
        x = float(d)
        out.append(int(x + EPS))
    return out


class _ModuleSearch:
    """Backtracking over the free entries of the action matrices.

    Cuts: reciprocity (only one matrix per dual pair is free and self-dual ones
    are symmetric), entries at most d_i and squared row sums at most d_i^2,
    and every associativity equation checked as soon as either side is
    complete.
    """

    def __init__(self, ring: FusionRing, n: int, budget: float | None = None, order: str = "right"):
        self.ring, self.n, self.order = ring, n, order
        self.budget = budget
        self.dims = [float(d) for d in fp_dims(ring).values()]
        bounds = _dim_bounds(ring)
        r = ring.rank
        self.cell = {}  # (i, a, b) -> var id or ("c", value)
        self.var_bound = []
        self.var_matrix = []
        self.order_vars = []
        for a in range(n):
            for i in range(r):
                if i == ring.unit:
                    continue
                for b in range(n):
                    for ii, aa, bb in ((i, a, b),):
                        if (ii, aa, bb) in self.cell:
                            continue
                        v = len(self.var_bound)
                        self.var_bound.append(bounds[ii])
                        self.var_matrix.append(ii)
                        self.cell[(ii, aa, bb)] = v
                        self.cell[(ring.dual[ii], bb, aa)] = v
                        self.order_vars.append(v)
        for a in range(n):
            for b in range(n):
                self.cell[(ring.unit, a, b)] = ("c", int(a == b))
        self.eqs = []
        for i, j in itertools.product(range(r), repeat=2):
            if ring.unit in (i, j):
                continue
            for a, b in itertools.product(range(n), repeat=2):
                if self.order == "right":
                    lhs = [(self.cell[(i, a, p)], self.cell[(j, p, b)]) for p in range(n)]
                else:
                    lhs = [(self.cell[(j, a, p)], self.cell[(i, p, b)]) for p in range(n)]
                rhs = [(ring.N[i][j][m], self.cell[(m, a, b)]) for m in range(r) if ring.N[i][j][m]]
                vs = {x for pr in lhs for x in pr if not isinstance(x, tuple)}
                vs |= {x for _, x in rhs if not isinstance(x, tuple)}
                self.eqs.append(_Eq(lhs, rhs, frozenset(vs)))
        self.by_var = [[] for _ in self.var_bound]
        for e in self.eqs:
            for v in e.vars:
                self.by_var[v].append(e)
        self.rows = {}  # (i, a) -> var ids in that row of M_i
        for (i, a, b), v in self.cell.items():
            if not isinstance(v, tuple) and i != ring.unit:
                self.rows.setdefault((i, a), []).append(v)
        self.rows_of = [[] for _ in self.var_bound]
        for key, vs in self.rows.items():
            for v in vs:
                self.rows_of[v].append(key)

    def _val(self, x, vals):
        if isinstance(x, tuple):
            return x[1]
        return vals[x]

    def _ok(self, e: _Eq, vals) -> bool:
        lo_l, full_l = 0, True
        for u, v in e.lhs:
            a, b = self._val(u, vals), self._val(v, vals)
            if a is None or b is None:
                if a == 0 or b == 0:
                    continue
                full_l = False
            else:
                lo_l += a * b
        lo_r, full_r = 0, True
        for c, x in e.rhs:
            a = self._val(x, vals)
            if a is None:
                full_r = False
            else:
                lo_r += c * a
        if full_l and full_r:
            return lo_l == lo_r
        if full_r:
            return lo_l <= lo_r
        if full_l:
            return lo_r <= lo_l
        return True

    def _row_ok(self, v, vals) -> bool:
        for i, a in self.rows_of[v]:
            s = sum((vals[x] or 0) ** 2 for x in set(self.rows[(i, a)]))
            if s > self.dims[i] ** 2 + EPS:
                return False
        return True

    def run(self):
        vals = [None] * len(self.var_bound)
        start = time.monotonic()
        nodes = 0

        def rec(pos):
            nonlocal nodes
            if pos == len(self.order_vars):
                yield tuple(
                    tuple(tuple(self._val(self.cell[(i, a, b)], vals) for b in range(self.n)) for a in range(self.n))
                    for i in range(self.ring.rank)
                )
                return
            v = self.order_vars[pos]
            for x in range(self.var_bound[v] + 1):
                nodes += 1
                if self.budget is not None and nodes % 4096 == 0 and time.monotonic() - start > self.budget:
                    raise SearchBudgetExceeded(
                        f"module search over rank {self.n} exceeded {self.budget}s", frontier={"depth": pos, "nodes": nodes}
                    )
                vals[v] = x
                if self._row_ok(v, vals) and all(self._ok(e, vals) for e in self.by_var[v]):
                    yield from rec(pos + 1)
                vals[v] = None

        if not self.order_vars:
            yield tuple(
                tuple(tuple(self._val(self.cell[(i, a, b)], vals) for b in range(self.n)) for a in range(self.n))
                for i in range(self.ring.rank)
            )
            return
        yield from rec(0)


def _finish(ring, found, order, transitive, prefix) -> list[FusionModule]:
    out = {}
    for mats in found:
        if transitive and not is_transitive(mats):
            continue
        key, perm = canonical_form(mats)
        if key in out:
            continue
        out[key] = _permute(mats, perm)
    mods = []
    for key in sorted(out, key=lambda k: (len(out[k][0]), k)):
        mats = out[key]
        n = len(mats[0])
        m = FusionModule(ring, tuple(f"m{j}" for j in range(n)), mats, "", order)
        if not check_module(m).passed:
            continue
        m.name = f"{prefix}{n}_{sum(1 for x in mods if x.rank == n) + 1}"
        mods.append(m)
    return mods


def enumerate_modules(
    r: FusionRing, max_rank: int, transitive: bool = True, budget: float | None = None, order: str = "right"
) -> list[FusionModule]:
    """All based modules of rank <= max_rank up to basis permutation.

    Every result is re-checked with ``check_module``.  Names are ``<rank>_<k>``.
    """
    found = []
    start = time.monotonic()
    for n in range(1, max_rank + 1):
        left = None if budget is None else budget - (time.monotonic() - start)
        if left is not None and left <= 0:
            raise SearchBudgetExceeded(f"budget exhausted before rank {n}", frontier={"rank": n})
        found.extend(_ModuleSearch(r, n, left, order).run())
    return _finish(r, found, order, transitive, "")


def enumerate_modules_brute(r: FusionRing, max_rank: int, transitive: bool = True, limit: int = 300_000, order: str = "right"):
    """Exhaustive reference: every matrix list within the entry bounds is built
    and tested with ``check_module``.  Ranks whose search space exceeds
    ``limit`` are skipped; returns (modules, largest rank covered)."""
    bounds = _dim_bounds(r)
    found = []
    covered = 0
    for n in range(1, max_rank + 1):
        free = []
        for i in range(r.rank):
            if i == r.unit or r.dual[i] < i:
                continue
            for a in range(n):
                for b in range(n):
                    if r.dual[i] == i and b < a:
                        continue
                    free.append((i, a, b))
        size = 1
        for i, _, _ in free:
            size *= bounds[i] + 1
        if size > limit:
            break
        covered = n
        for vals in itertools.product(*[range(bounds[i] + 1) for i, _, _ in free]):
            M = [[[0] * n for _ in range(n)] for _ in range(r.rank)]
            for a in range(n):
                M[r.unit][a][a] = 1
            for (i, a, b), x in zip(free, vals):
                M[i][a][b] = x
                M[r.dual[i]][b][a] = x
            mod = FusionModule(r, tuple(range(n)), M, order=order)
            rep = Report("brute")
            _module_axioms(r, mod.mats, order, rep)
            if rep.passed:
                found.append(mod.mats)
    return _finish(r, found, order, transitive, ""), covered


def algebra_objects(m: FusionModule) -> list[dict[str, int]]:
    """For each basis element j, the object sum_i (kappa_j xi_i, kappa_j) xi_i."""
    out = []
    for j in range(m.rank):
        obj = {m.ring.labels[i]: m.mats[i][j][j] for i in range(m.ring.rank) if m.mats[i][j][j]}
        if obj not in out:
            out.append(obj)
    return out


# ---------------------------------------------------------------------------
# bimodules


@dataclass
class FusionBimodule:
    """``L[a][x][y]``: multiplicity of y in a.x; ``R[b][x][y]``: of y in x.b."""

    left: FusionRing
    right: FusionRing
    labels: tuple[str, ...]
    L: tuple
    R: tuple
    name: str = ""

    def __post_init__(self):
        self.labels = tuple(self.labels)
        self.L = _tuplify(self.L)
        self.R = _tuplify(self.R)

    @property
    def rank(self) -> int:
        return len(self.labels)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "left": self.left.name,
            "right": self.right.name,
            "labels": list(self.labels),
            "left_matrices": [[list(r) for r in m] for m in self.L],
            "right_matrices": [[list(r) for r in m] for m in self.R],
        }


def check_bimodule(X: FusionBimodule) -> Report:
    rep = Report(f"bimodule:{X.name or 'bimodule'}")
    _module_axioms(X.left, X.L, "left", rep, "left action")
    _module_axioms(X.right, X.R, "right", rep, "right action")
    if not rep.passed:
        return rep
    for a, b in itertools.product(range(X.left.rank), range(X.right.rank)):
        rep.checked += 1
        if _matmul(X.L[a], X.R[b]) != _matmul(X.R[b], X.L[a]):
            rep.fail(kind="actions do not commute", a=X.left.labels[a], b=X.right.labels[b])
    return rep


def regular_bimodule(r: FusionRing) -> FusionBimodule:
    L = [[[r.N[a][x][y] for y in range(r.rank)] for x in range(r.rank)] for a in range(r.rank)]
    R = [[[r.N[x][b][y] for y in range(r.rank)] for x in range(r.rank)] for b in range(r.rank)]
    return FusionBimodule(r, r, r.labels, L, R, f"regular({r.name})")


def _bimodule_fp(X: FusionBimodule) -> np.ndarray:
    """FP weights, unit length.  Only ratios matter to the compatibility test."""
    v = _fp_vector(list(X.L) + list(X.R))
    if v is None:
        raise FusionError(f"{X.name}: no positive FP vector")
    return v / np.sqrt(float(v @ v))


def compatibility(
    L: FusionBimodule,
    M: FusionBimodule,
    candidates: list[FusionBimodule],
    max_entry: int = 3,
    budget: float | None = None,
) -> list[tuple[FusionBimodule, tuple]]:
    """Candidates N admitting a pairing tensor t[l][m][n] for L (x)_B M -> N.

    t must be B-balanced, A- and C-equivariant, reach every n, and satisfy
    dim(l) dim(m) = lam * sum_n t[l][m][n] dim(n) for one lam > 0 shared by
    all pairs.  FP weights of a bimodule are only fixed up to scale, so lam
    absorbs the normalization.  Returns (N, witness) pairs.
    """
    if not L.right.same_structure(M.left):
        raise FusionError("middle rings differ")
    for X in (L, M):
        if not is_transitive(X.L + X.R):
            raise FusionError(f"{X.name} is decomposable")
    out = []
    for N in candidates:
        if not (N.left.same_structure(L.left) and N.right.same_structure(M.right)):
            continue
        if not is_transitive(N.L + N.R):
            continue
        t = _pairing(L, M, N, max_entry, budget)
        if t is not None:
            out.append((N, t))
    return out


def _pairing(L, M, N, max_entry, budget):
    nl, nm, nn = L.rank, M.rank, N.rank
    vL, vM, vN = _bimodule_fp(L), _bimodule_fp(M), _bimodule_fp(N)

    def var(l, m, n):
        return (l * nm + m) * nn + n

    eqs = []  # (pos terms, neg terms): lists of (coef, var)
    for b in range(L.right.rank):
        if b == L.right.unit:
            continue
        for l, m, n in itertools.product(range(nl), range(nm), range(nn)):
            pos = [(L.R[b][l][x], var(x, m, n)) for x in range(nl) if L.R[b][l][x]]
            neg = [(M.L[b][m][x], var(l, x, n)) for x in range(nm) if M.L[b][m][x]]
            eqs.append((pos, neg))
    for a in range(L.left.rank):
        if a == L.left.unit:
            continue
        for l, m, n in itertools.product(range(nl), range(nm), range(nn)):
            pos = [(L.L[a][l][x], var(x, m, n)) for x in range(nl) if L.L[a][l][x]]
            neg = [(N.L[a][x][n], var(l, m, x)) for x in range(nn) if N.L[a][x][n]]
            eqs.append((pos, neg))
    for c in range(M.right.rank):
        if c == M.right.unit:
            continue
        for l, m, n in itertools.product(range(nl), range(nm), range(nn)):
            pos = [(M.R[c][m][x], var(l, x, n)) for x in range(nm) if M.R[c][m][x]]
            neg = [(N.R[c][x][n], var(l, m, x)) for x in range(nn) if N.R[c][x][n]]
            eqs.append((pos, neg))
    nvar = nl * nm * nn
    by_var = [[] for _ in range(nvar)]
    for e in eqs:
        for v in {x for _, x in e[0]} | {x for _, x in e[1]}:
            by_var[v].append(e)
    vals = [None] * nvar
    start = time.monotonic()
    nodes = 0

    def side(terms):
        s, full = 0, True
        for c, x in terms:
            if vals[x] is None:
                full = False
            else:
                s += c * vals[x]
        return s, full

    def ok(e):
        (p, fp), (q, fq) = side(e[0]), side(e[1])
        if fp and fq:
            return p == q
        if fp:
            return q <= p
        if fq:
            return p <= q
        return True

    # target[0]: sum_n t d(n) expected per unit of d(l) d(m), fixed by the first pair
    target = [None]

    def dim_ok(l, m):
        s = sum(vals[var(l, m, n)] * vN[n] for n in range(nn))
        if s <= 0:
            return False
        want = vL[l] * vM[m]
        if target[0] is None:
            return True
        return abs(s - want * target[0]) < 1e-7 * max(1.0, s)

    def dim_partial(l, m, upto):
        if target[0] is None:
            return True
        s = sum(vals[var(l, m, n)] * vN[n] for n in range(upto + 1))
        return s <= vL[l] * vM[m] * target[0] + 1e-7

    def rec(v):
        nonlocal nodes
        if v == nvar:
            if all(any(vals[var(l, m, n)] for l in range(nl) for m in range(nm)) for n in range(nn)):
                return tuple(vals)
            return None
        l, rest = divmod(v, nm * nn)
        m, n = divmod(rest, nn)
        for x in range(max_entry + 1):
            nodes += 1
            if budget is not None and nodes % 4096 == 0 and time.monotonic() - start > budget:
                raise SearchBudgetExceeded("pairing search exceeded budget", frontier={"var": v})
            vals[v] = x
            if not dim_partial(l, m, n):
                break
            if n == nn - 1 and not dim_ok(l, m):
                continue
            if all(ok(e) for e in by_var[v]):
                fixed = n == nn - 1 and target[0] is None
                if fixed:
                    target[0] = sum(vals[var(l, m, k)] * vN[k] for k in range(nn)) / (vL[l] * vM[m])
                got = rec(v + 1)
                if fixed:
                    target[0] = None
                if got is not None:
                    return got
        vals[v] = None
        return None

    t = rec(0)
    if t is None:
        return None
    return tuple(tuple(tuple(t[var(l, m, n)] for n in range(nn)) for m in range(nm)) for l in range(nl))


# ---------------------------------------------------------------------------
# files


@dataclass
class FusionData:
    rings: dict[str, FusionRing] = field(default_factory=dict)
    modules: dict[str, FusionModule] = field(default_factory=dict)
    bimodules: dict[str, FusionBimodule] = field(default_factory=dict)
    compat: list[dict] = field(default_factory=list)


def parse_fusion_data(src) -> FusionData:
    """Load a fusion data document (dict, JSON text or path), checking every block."""
    if isinstance(src, Path) or (isinstance(src, str) and not src.lstrip().startswith("{")):
        src = Path(src).read_text()
    if isinstance(src, str):
        try:
            src = json.loads(src)
        except json.JSONDecodeError as exc:
            raise FusionDataError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", "json") from None
    fd = FusionData()
    for name, rd in src.get("rings", {}).items():
        r = FusionRing.from_json({**rd, "name": name})
        rep = check_ring(r)
        if not rep.passed:
            raise FusionDataError(f"{rep.failures[0]['kind']}", f"rings.{name}")
        fd.rings[name] = r

    def ring(name, where):
        if name not in fd.rings:
            raise FusionDataError(f"unknown ring {name!r}", where)
        return fd.rings[name]

    for name, md in src.get("modules", {}).items():
        where = f"modules.{name}"
        try:
            m = FusionModule(ring(md["ring"], where), md["labels"], md["matrices"], name, md.get("order", "right"))
        except (KeyError, TypeError, ValueError) as exc:
            raise FusionDataError(f"malformed module: {exc}", where) from None
        rep = check_module(m)
        if not rep.passed:
            raise FusionDataError(f"{rep.failures[0]['kind']}", where)
        fd.modules[name] = m
    for name, bd in src.get("bimodules", {}).items():
        where = f"bimodules.{name}"
        try:
            X = FusionBimodule(
                ring(bd["left"], where), ring(bd["right"], where), bd["labels"], bd["left_matrices"], bd["right_matrices"], name
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FusionDataError(f"malformed bimodule: {exc}", where) from None
        rep = check_bimodule(X)
        if not rep.passed:
            raise FusionDataError(f"{rep.failures[0]['kind']}", where)
        fd.bimodules[name] = X
    for k, rec in enumerate(src.get("compat", [])):
        if not {"l", "m", "result"} <= set(rec):
            raise FusionDataError("compatibility record needs l, m, result", f"compat[{k}]")
        fd.compat.append({"l": rec["l"], "m": rec["m"], "result": list(rec["result"])})
    return fd


def serialize_fusion_data(fd: FusionData) -> dict:
    def strip(d):
        d = dict(d)
        d.pop("name", None)
        return d

    mods = {}
    for name, m in fd.modules.items():
        d = strip(m.to_json())
        d["ring"] = next(k for k, r in fd.rings.items() if r is m.ring or r.same_structure(m.ring))
        mods[name] = d
    bims = {}
    for name, X in fd.bimodules.items():
        d = strip(X.to_json())
        d["left"] = next(k for k, r in fd.rings.items() if r.same_structure(X.left))
        d["right"] = next(k for k, r in fd.rings.items() if r.same_structure(X.right))
        bims[name] = d
    return {
        "format": "ahplus-fusion",
        "version": 1,
        "rings": {k: strip(r.to_json()) for k, r in fd.rings.items()},
        "modules": mods,
        "bimodules": bims,
        "compat": fd.compat,
    }


def import_matrix_list(text: str, ring: FusionRing, name: str = "") -> tuple[FusionModule, Report]:
    """Read a ``{{{...}}}`` list whose k-th matrix has (kappa_k xi_i, kappa_j) at (i, j).

    Both action orders are tried; the report records which one the data obeys.
    """
    try:
        blocks = json.loads(text.replace("{", "[").replace("}", "]"))
    except json.JSONDecodeError as exc:
        raise FusionDataError(f"column {exc.colno}: {exc.msg}", name or "matrix list") from None
    n = len(blocks)
    try:
        mats = [[[blocks[k][i][j] for j in range(n)] for k in range(n)] for i in range(ring.rank)]
    except (IndexError, TypeError):
        raise FusionDataError(f"expected {n} matrices of shape {ring.rank}x{n}", name or "matrix list") from None
    rep = Report(f"import:{name}")
    for order in ("right", "left"):
        m = FusionModule(ring, tuple(f"k{j}" for j in range(n)), mats, name, order)
        chk = check_module(m)
        rep.checked += chk.checked
        if chk.passed:
            rep.notes.append(f"action order: {order}")
            return m, rep
    rep.fail(kind="module axioms fail in both orders", detail=chk.failures[:3])
    raise FusionDataError(f"not a based module ({chk.failures[0]['kind']})", name or "matrix list")


_COMPAT = re.compile(r"^\s*(\S+)\s*\.\s*(\S+)\s*=\s*\{([^}]*)\}\s*$")


def parse_compat_records(text: str) -> list[dict]:
    """Lines ``l . m = {n1, n2}``; ``#`` starts a comment."""
    out = []
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0]
        if not line.strip():
            continue
        mt = _COMPAT.match(line)
        if not mt:
            raise FusionDataError("expected 'l . m = {...}'", f"line {no}")
        items = [s.strip() for s in mt.group(3).split(",") if s.strip()]
        out.append({"l": mt.group(1), "m": mt.group(2), "result": items})
    return out
