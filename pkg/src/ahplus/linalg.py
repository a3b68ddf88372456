"""Exact Gaussian elimination over any field whose elements support + - * / and == 0."""

from __future__ import annotations

from typing import Callable, Hashable, Sequence

__all__ = ["rref", "nullspace", "sparse_nullspace"]


def _default_cost(x) -> int:
    terms = getattr(x, "terms", None)
    return len(terms) if terms is not None else 1


def rref(rows: list[list], ncols: int, zero, one) -> tuple[list[list], list[int]]:
    """Reduced row echelon form of a dense matrix; returns (rows, pivot columns)."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != zero), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = one / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != zero:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def nullspace(rows: list[list], ncols: int, zero, one) -> list[list]:
    """Basis of {x : rows . x = 0}, one vector per free column."""
    red, pivots = rref(rows, ncols, zero, one)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for row, pc in zip(red, pivots):
            if row[f] != zero:
                v[pc] = -row[f]
        basis.append(v)
    return basis


def sparse_nullspace(
    equations: Sequence[dict],
    variables: Sequence[Hashable],
    one,
    cost: Callable = _default_cost,
) -> list[dict]:
    """Nullspace of a sparse system given as ``{var: coeff}`` rows.

    Variables are eliminated in the given order; within a column the pivot is the
    row whose pivot entry is cheapest (fewest tower terms), ties broken by row
    order, so results are deterministic.  Returns basis vectors as dicts.
    """
    order = {v: i for i, v in enumerate(variables)}
    pending = [dict(e) for e in equations if e]
    pivot_rows: dict[Hashable, dict] = {}
    for var in variables:
        cands = [i for i, row in enumerate(pending) if var in row]
        if not cands:
            continue
        best = min(cands, key=lambda i: (cost(pending[i][var]), i))
        prow = pending.pop(best)
        inv = one / prow[var]
        prow = {k: x * inv for k, x in prow.items()}
        for row in pending:
            f = row.get(var)
            if f is None:
                continue
            for k, x in prow.items():
                y = row.get(k)
                y = -f * x if y is None else y - f * x
                if y:
                    row[k] = y
                else:
                    row.pop(k, None)
        pending = [row for row in pending if row]
        pivot_rows[var] = prow
    # back substitution into reduced form
    pivots = sorted(pivot_rows, key=order.__getitem__, reverse=True)
    for var in pivots:
        prow = pivot_rows[var]
        for other in pivots:
            if other == var:
                continue
            orow = pivot_rows[other]
            f = orow.get(var)
            if f is None:
                continue
            for k, x in prow.items():
                y = orow.get(k)
                y = -f * x if y is None else y - f * x
                if y:
                    orow[k] = y
                else:
                    orow.pop(k, None)
    free = [v for v in variables if v not in pivot_rows]
    basis = []
    for fv in free:
        vec = {fv: one}
        for pv, prow in pivot_rows.items():
            c = prow.get(fv)
            if c is not None:
                vec[pv] = -c
        basis.append(vec)
    return basis
