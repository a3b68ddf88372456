"""Brute-force references for the fusion tests.  Nothing here imports the
package's search, pruning or axiom code."""

import itertools

import numpy as np


def ring_axioms_ok(N, dual):
    n = len(N)
    for i, j, k in itertools.product(range(n), repeat=3):
        # (i j, k) = (j, i* k) = (i, k j*)
        if not (N[i][j][k] == N[dual[i]][k][j] == N[k][dual[j]][i]):
            return False
    for a, b, c in itertools.product(range(n), repeat=3):
        left = sum(N[a][b][m] * np.array(N[m][c]) for m in range(n))
        right = sum(N[b][c][m] * np.array(N[a][m]) for m in range(n))
        if not np.array_equal(left, right):
            return False
    return True


def rings_up_to_rank(max_rank, max_entry):
    """Canonical tensors of all based rings with unit 0 and entries <= max_entry."""
    out = set()
    for n in range(1, max_rank + 1):
        nonunit = range(1, n)
        duals = set()
        for p in itertools.permutations(nonunit):
            d = (0,) + p
            if all(d[d[i]] == i for i in range(n)):
                duals.add(d)
        for dual in sorted(duals):
            free = [(i, j, k) for i in nonunit for j in nonunit for k in nonunit]
            for vals in itertools.product(range(max_entry + 1), repeat=len(free)):
                N = [[[0] * n for _ in range(n)] for _ in range(n)]
                for i in range(n):
                    N[0][i][i] = N[i][0][i] = 1
                for i in nonunit:
                    N[i][dual[i]][0] = 1
                for (i, j, k), x in zip(free, vals):
                    N[i][j][k] = x
                if ring_axioms_ok(N, dual):
                    out.add(canonical_ring(N))
    return out


def canonical_ring(N):
    n = len(N)
    best = None
    for p in itertools.permutations(range(1, n)):
        perm = (0,) + p
        inv = {perm[i]: i for i in range(n)}
        key = tuple(
            tuple(tuple(N[inv[i]][inv[j]][inv[k]] for k in range(n)) for j in range(n)) for i in range(n)
        )
        if best is None or key < best:
            best = key
    return best


def pf_dims(N):
    return [max(abs(np.linalg.eigvals(np.array(N[i], dtype=float)))) for i in range(len(N))]


def modules_brute(N, dual, unit, rank, limit):
    """Transitive right modules of one rank, canonical under basis permutation.

    Returns None when the search space exceeds ``limit``.
    """
    n = len(N)
    bound = [int(np.floor(d + 1e-9)) for d in pf_dims(N)]
    free = []
    for i in range(n):
        if i == unit or dual[i] < i:
            continue
        for a in range(rank):
            for b in range(rank):
                if dual[i] == i and b < a:
                    continue
                free.append((i, a, b))
    size = 1
    for i, _, _ in free:
        size *= bound[i] + 1
    if size > limit:
        return _modules_by_generator(N, dual, unit, rank, bound, limit)
    found = set()
    for vals in itertools.product(*[range(bound[i] + 1) for i, _, _ in free]):
        M = np.zeros((n, rank, rank), dtype=np.int64)
        M[unit] = np.eye(rank, dtype=np.int64)
        for (i, a, b), x in zip(free, vals):
            M[i, a, b] = x
            M[dual[i], b, a] = x
        if _accept(N, M, rank):
            found.add(canonical_module(M))
    return found


def _modules_by_generator(N, dual, unit, rank, bound, limit):
    """Rank-3 rings {1, x, y} with x self-dual and y in x*x: every symmetric
    M_x is tried, and M_y is solved from x*x = 1 + a x + c y."""
    n = len(N)
    if n != 3 or unit != 0 or dual[1] != 1 or N[1][1][2] == 0:
        return None
    if (bound[1] + 1) ** (rank * (rank + 1) // 2) > limit:
        return None
    a, c = N[1][1][1], N[1][1][2]
    found = set()
    cells = [(i, j) for i in range(rank) for j in range(i, rank)]
    for vals in itertools.product(range(bound[1] + 1), repeat=len(cells)):
        X = np.zeros((rank, rank), dtype=np.int64)
        for (i, j), v in zip(cells, vals):
            X[i, j] = X[j, i] = v
        Y = X @ X - np.eye(rank, dtype=np.int64) - a * X
        if (Y % c).any():
            continue
        Y //= c
        if (Y < 0).any():
            continue
        M = np.stack([np.eye(rank, dtype=np.int64), X, Y])
        if _accept(N, M, rank):
            found.add(canonical_module(M))
    return found


def _accept(N, M, rank):
    n = len(N)
    for i in range(n):
        for j in range(n):
            if not np.array_equal(M[i] @ M[j], np.tensordot(np.array(N[i][j]), M, axes=1)):
                return False
    # transitive: the union of supports is strongly connected
    reach = (M.sum(axis=0) > 0).astype(int)
    closure = np.linalg.matrix_power(reach + np.eye(rank, dtype=int), rank) > 0
    return bool(closure.all())


def canonical_module(M):
    M = np.asarray(M)
    rank = M.shape[1]
    best = None
    for p in itertools.permutations(range(rank)):
        P = list(p)
        key = tuple(M[:, P][:, :, P].flatten().tolist())
        if best is None or key < best:
            best = key
    return best
