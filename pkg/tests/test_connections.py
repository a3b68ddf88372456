from hypothesis import given, settings
from hypothesis import strategies as st

from ahplus import Scalar, ahp1
from ahplus.assets import load_asset
from ahplus.connections import (
    Connection,
    check_biunitary,
    classify_phase_connections,
    compose,
    conjugate,
    find_vertical_gauge,
    intertwiner_space,
    phase_holonomy,
    verify_gauge,
)

from oracles import biunitary_defect, orthogonal_defect


def test_kappa_biunitary_exact_and_numeric():
    k = ahp1.kappa()
    assert check_biunitary(k).passed
    assert biunitary_defect(k) < 1e-12


def test_perturbed_cell_is_localized():
    k = ahp1.kappa()
    vals = dict(k.values)
    cell = next(c for c in k.fg.cell_list if len(k.fg.blocks[c.e0.src, c.e1.dst][0]) == 2)
    vals[cell] = -vals[cell]
    rep = check_biunitary(Connection(k.fg, vals, k.weights_top, k.weights_bottom, "bad"))
    assert not rep.passed
    x0, x1, x2, x3 = cell.corners
    assert {f["block"] for f in rep.failures} <= {f"{x0}-{x2}", f"{x1}|{x3}"}


def test_rho_and_alpha_biunitary():
    for c in (ahp1.rho(), ahp1.alpha()):
        assert check_biunitary(c).passed
        assert biunitary_defect(c) < 1e-12


def test_irreducibility_and_conjugate():
    k = ahp1.kappa()
    assert intertwiner_space(k, k)[0] == 1
    kb = conjugate(k)
    assert check_biunitary(kb).passed
    # kappa kappabar contains the identity once: dim(1, kappa kappabar) = 1
    assert intertwiner_space(ahp1.identity(), compose(k, ahp1.kappabar()))[0] == 1


def test_appendix_matrices_orthogonal_numeric():
    lg = load_asset("ahp1.appendixA-corrected.gauge")
    mats = lg.matrices()
    assert len(mats) == 53
    assert lg.census() == {1: 25, 2: 14, 3: 10, 4: 3, 5: 1}
    assert max(orthogonal_defect(M) for _, M in mats) < 1e-12


def test_solved_gauge_is_printed_up_to_sign():
    T, info = find_vertical_gauge(ahp1.rak(), ahp1.arak())
    assert info["dimension"] == 1
    w = ahp1.w_map()
    pairs = [(side, s, t, x) for side in ("left", "right") for s, col in w.side(side).items() for t, x in col.items()]
    assert len(pairs) == 223
    assert all(T.coeff(side, t, s) == -x for side, s, t, x in pairs)
    assert verify_gauge(ahp1.rak(), ahp1.arak(), T).passed


def test_broken_gauge_entry_fails():
    w = ahp1.w_map()
    src = next(iter(w.left))
    tgt = next(iter(w.left[src]))
    bad = w.scaled(Scalar.coerce(1))
    bad.left[src] = dict(bad.left[src])
    bad.left[src][tgt] = -bad.left[src][tgt]
    rep = verify_gauge(ahp1.rak(), ahp1.arak(), bad)
    assert not rep.passed


def _orbit_count(fg):
    """Brute force: sign patterns on cells modulo flipping a vertical edge."""
    cells = list(fg.cell_list)
    edges = sorted({("L", c.e3) for c in cells} | {("R", c.e1) for c in cells})
    gens = []
    for e in edges:
        m = 0
        for i, c in enumerate(cells):
            if ("L", c.e3) == e or ("R", c.e1) == e:
                m |= 1 << i
        gens.append(m)
    seen = set()
    orbits = 0
    for start in range(2 ** len(cells)):
        if start in seen:
            continue
        orbits += 1
        stack = [start]
        seen.add(start)
        while stack:
            x = stack.pop()
            for g in gens:
                y = x ^ g
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return orbits


def test_alpha_class_count_matches_brute_force():
    fg = ahp1.alpha().fg
    reps = classify_phase_connections(fg)
    assert len(reps) == _orbit_count(fg) == 2
    hols = {phase_holonomy(fg, r) for r in reps}
    assert len(hols) == 2


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_holonomy_is_gauge_invariant(data):
    fg = ahp1.alpha().fg
    cells = list(fg.cell_list)
    signs = {c: data.draw(st.sampled_from([1, -1])) for c in cells}
    flips = {}
    for c in cells:
        for key in (("L", c.e3), ("R", c.e1)):
            if key not in flips:
                flips[key] = data.draw(st.sampled_from([1, -1]))
    moved = {c: s * flips["L", c.e3] * flips["R", c.e1] for c, s in signs.items()}
    assert phase_holonomy(fg, moved) == phase_holonomy(fg, signs)
