import json

import numpy as np
import pytest
import sympy

from ahplus import parse_scalar
from ahplus.assets import load_asset
from ahplus.fusion import (
    FusionDataError,
    FusionRing,
    algebra_objects,
    build_ah4_ring,
    check_bimodule,
    check_module,
    check_ring,
    compatibility,
    enumerate_modules,
    enumerate_rings,
    fp_dims,
    group_ring,
    import_matrix_list,
    parse_compat_records,
    parse_fusion_data,
    regular_bimodule,
    regular_module,
    serialize_fusion_data,
)

from fusion_oracles import canonical_ring, pf_dims, rings_up_to_rank


def elt(r, **coeffs):
    return {k: v for k, v in coeffs.items() if v}


def test_ah4_relations():
    r = build_ah4_ring()
    assert check_ring(r).passed
    xi_sq = {"a0": 1, "a0x": 2, "a1x": 2, "a2x": 2, "a3x": 2}
    assert r.product("a0x", "a0x") == xi_sq
    assert r.product("a1", "a2x") == {"a3x": 1}
    assert r.product("a1x", "a2x") == {"a3": 1, "a0x": 2, "a1x": 2, "a2x": 2, "a3x": 2}
    # alpha_i xi = xi alpha_{-i}
    for i in range(4):
        assert r.product(f"a{i}", "a0x") == r.product("a0x", f"a{(-i) % 4}")


def test_ah4_dims_against_numpy_and_sympy():
    r = build_ah4_ring()
    dims = fp_dims(r)
    ref = pf_dims([[list(x) for x in y] for y in r.N])
    for k, lab in enumerate(r.labels):
        assert abs(float(dims[lab]) - ref[k]) < 1e-9
    assert dims["a0x"] == parse_scalar("4+sqrt17")
    d = sympy.Integer(4) + sympy.sqrt(17)
    assert sympy.expand((1 + d) / 2 * (1 + d) - (1 + 5 * d)) == 0


def test_fibonacci_dimension():
    fib = FusionRing(("1", "x"), (((1, 0), (0, 1)), ((0, 1), (1, 1))), 0, (0, 1), "Fib")
    assert check_ring(fib).passed
    d = fp_dims(fib)["x"]
    assert d.serialize() == "1/2+1/2*sqrt(5)"
    assert abs(float(d) - (1 + 5**0.5) / 2) < 1e-12


def test_ring_enumeration_matches_independent_brute_force():
    mine = {canonical_ring([[list(x) for x in y] for y in r.N]) for r in enumerate_rings(3, 3)}
    assert mine == rings_up_to_rank(3, 3)


def test_reciprocity_violation_is_named():
    bad = FusionRing(("1", "x"), (((1, 0), (0, 1)), ((0, 1), (2, 1))), 0, (0, 1), "bad")
    rep = check_ring(bad)
    assert not rep.passed
    assert any("reciprocity" in f["kind"] for f in rep.failures)
    doc = {"rings": {"bad": {**bad.to_json()}}}
    doc["rings"]["bad"].pop("name", None)
    with pytest.raises(FusionDataError) as err:
        parse_fusion_data(doc)
    assert err.value.where == "rings.bad"


def test_z2_modules():
    mods = enumerate_modules(group_ring(2), 4)
    assert sorted(m.rank for m in mods) == [1, 2]


def test_trivial_ring_one_module():
    r = group_ring(1)
    mods = enumerate_modules(r, 4)
    assert [m.rank for m in mods] == [1]
    assert algebra_objects(mods[0]) == [{r.labels[0]: 1}]


def test_regular_module_algebra_is_unit():
    r = build_ah4_ring()
    m = regular_module(r)
    assert check_module(m).passed
    # basis element x carries the algebra x xbar
    want = []
    for i, x in enumerate(r.labels):
        obj = r.product(x, r.labels[r.dual[i]])
        if obj not in want:
            want.append(obj)
    assert algebra_objects(m) == want
    assert {"a0": 1} in want


def test_fusion_data_roundtrip():
    fd = load_asset("z2.bimodules.fusion")
    doc = serialize_fusion_data(fd)
    again = serialize_fusion_data(parse_fusion_data(json.dumps(doc)))
    assert again == doc
    r = build_ah4_ring()
    assert FusionRing.from_json(json.loads(json.dumps(r.to_json()))) == r


def test_malformed_json_is_positioned():
    with pytest.raises(FusionDataError) as err:
        parse_fusion_data('{"rings": {,}}')
    assert "line 1" in str(err.value)


def test_import_matrix_list():
    z2 = group_ring(2)
    m, rep = import_matrix_list("{{{1,0},{0,1}},{{0,1},{1,0}}}", z2, "reg")
    assert check_module(m).passed
    assert any("action order" in n for n in rep.notes)
    with pytest.raises(FusionDataError):
        import_matrix_list("{{{1,1},{0,1}},{{0,1},{1,0}}}", z2, "bad")


def test_compat_records():
    recs = parse_compat_records("8_14 . 8_41 = {12_11, 14_11}  # printed\n")
    assert recs == [{"l": "8_14", "m": "8_41", "result": ["12_11", "14_11"]}]
    with pytest.raises(FusionDataError):
        parse_compat_records("8_14 8_41 {}")


def _witness_ok(L, M, N, t):
    """Balanced and equivariant, recomputed with numpy."""
    t = np.array(t)
    for b in range(len(L.R)):
        if not np.array_equal(np.einsum("lx,xmn->lmn", np.array(L.R[b]), t), np.einsum("mx,lxn->lmn", np.array(M.L[b]), t)):
            return False
    for a in range(len(L.L)):
        if not np.array_equal(np.einsum("lx,xmn->lmn", np.array(L.L[a]), t), np.einsum("lmx,xn->lmn", t, np.array(N.L[a]))):
            return False
    for c in range(len(M.R)):
        if not np.array_equal(np.einsum("mx,lxn->lmn", np.array(M.R[c]), t), np.einsum("lmx,xn->lmn", t, np.array(N.R[c]))):
            return False
    return bool((t.sum(axis=(0, 1)) > 0).all())


@pytest.fixture(scope="module")
def z2b():
    return load_asset("z2.bimodules.fusion").bimodules


def test_bimodules_valid(z2b):
    for X in z2b.values():
        assert check_bimodule(X).passed


def test_unit_coherence(z2b):
    reg = z2b["regular"]
    cands = list(z2b.values())
    for X in cands:
        assert X.name in [N.name for N, _ in compatibility(X, reg, cands)]
        assert X.name in [N.name for N, _ in compatibility(reg, X, cands)]


def test_true_products_pass(z2b):
    # regular is the unit; right (x) left = 2 point; point (x) point = 2 point
    cands = list(z2b.values())
    cases = [("regular", "regular", "regular"), ("right", "left", "point"), ("point", "point", "point")]
    for l, m, n in cases:
        res = dict((N.name, t) for N, t in compatibility(z2b[l], z2b[m], cands))
        assert n in res
        assert _witness_ok(z2b[l], z2b[m], z2b[n], res[n])


def test_witnesses_recheck(z2b):
    cands = list(z2b.values())
    for L in cands:
        for M in cands:
            for N, t in compatibility(L, M, cands):
                assert _witness_ok(L, M, N, t)


def test_regular_bimodule_of_ah4():
    X = regular_bimodule(build_ah4_ring())
    assert check_bimodule(X).passed
