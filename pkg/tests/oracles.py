"""Float reference computations that share no code with the exact package."""

import numpy as np


def pf_vector(g):
    """Perron-Frobenius vector of a bipartite graph, from numpy's eigensolver."""
    verts = list(g.even) + list(g.odd)
    idx = {v: i for i, v in enumerate(verts)}
    A = np.zeros((len(verts), len(verts)))
    for e in g.edges:
        A[idx[e.src], idx[e.dst]] += 1
        A[idx[e.dst], idx[e.src]] += 1
    vals, vecs = np.linalg.eigh(A)
    v = np.abs(vecs[:, np.argmax(vals)])
    return {x: v[idx[x]] for x in verts}, float(vals.max()) ** 2


def biunitary_defect(c):
    """Largest |W W^T - I| over both groupings, with floats."""
    fg = c.fg
    val = {cell: float(x) for cell, x in c.values.items()}
    worst = 0.0
    for (rows, cols) in fg.blocks.values():
        M = np.array([[val.get((e0, e1, e2, e3), 0.0) for (e0, e1) in cols] for (e3, e2) in rows])
        worst = max(worst, np.abs(M @ M.T - np.eye(len(rows))).max())
    top, _ = pf_vector(fg.G0)
    bot, _ = pf_vector(fg.G2)
    for (rows, cols) in fg.dual_blocks.values():
        M = np.zeros((len(rows), len(cols)))
        for i, (e0, e3) in enumerate(rows):
            for j, (e1, e2) in enumerate(cols):
                x = val.get((e0, e1, e2, e3), 0.0)
                M[i, j] = x * np.sqrt(top[e0.src] * bot[e1.dst] / (top[e0.dst] * bot[e3.dst]))
        worst = max(worst, np.abs(M @ M.T - np.eye(len(rows))).max())
    return worst


def orthogonal_defect(M):
    M = np.array([[float(x) for x in row] for row in M])
    return np.abs(M @ M.T - np.eye(len(M))).max()
