import mpmath
import pytest

from ahplus import ahp1, beta, parse_scalar
from ahplus.intertwiners import (
    BoundaryError,
    DiagramError,
    evaluate_coefficient,
    evaluate_map,
    format_diagram,
    parse_diagram,
)

from conftest import close, mp_beta

ZIGZAGS = ["r, id(kappa)\nid(kappa), rbar~\n", "id(kappabar), r\nrbar~, id(kappabar)\n"]


@pytest.fixture(scope="module")
def m():
    return ahp1.model()


@pytest.mark.parametrize("text", ZIGZAGS)
@pytest.mark.parametrize("side", ["left", "right"])
def test_zigzag_is_identity(m, text, side):
    d = parse_diagram(text, m)
    mp = evaluate_map(d, m, side)
    assert mp
    for top, row in mp.items():
        assert row == {top: 1}


def test_duality_product(m):
    rep = ahp1.verify_duality()
    assert rep.passed and rep.checked == 25


def test_boundary_errors(m):
    d = parse_diagram(ahp1.DERIVED["U"][1], m)
    with pytest.raises(BoundaryError):
        evaluate_coefficient(d, "zz", "* b", m)
    with pytest.raises(BoundaryError):
        evaluate_coefficient(d, "* b b~ g", "* *~", m)


def test_consistent_boundary_without_states_is_zero(m):
    d = parse_diagram("id(kappa)\n", m)
    ev = evaluate_coefficient(d, "* A", "b A", m)
    assert ev.states == 0 and ev.value == 0


def test_diagram_errors(m):
    with pytest.raises(DiagramError):
        parse_diagram("nosuchgen\n", m)
    with pytest.raises(DiagramError):
        parse_diagram("r\nid(rho)\n", m)
    with pytest.raises(DiagramError):
        parse_diagram("scale b(\nr\n", m)


def test_format_roundtrip(m):
    for text in ZIGZAGS + [t for pair in ahp1.RELATIONS_TEXT.values() for t in pair]:
        d = parse_diagram(text, m)
        again = parse_diagram(format_diagram(d), m)
        assert format_diagram(again) == format_diagram(d)


def test_witnesses_numeric():
    # printed witness values against an independent mpmath evaluation
    b1 = mp_beta(1)
    assert close(parse_scalar("b(1)"), b1)
    assert close(parse_scalar("-sqrt(b(1))"), -mpmath.sqrt(b1))
    assert close(parse_scalar("-b(1)^2/2"), -b1**2 / 2)
    assert parse_scalar("b(1)^2/2") == parse_scalar("5/4+1/4*sqrt17")


def _status(m):
    return [r.passed for r in ahp1.verify_relations(m, dims=False)[:3]]


def test_relations_default_conventions():
    m = ahp1.model()
    reps = ahp1.verify_relations(m, dims=False)
    assert [r.passed for r in reps[:3]] == [True, True, True]
    assert reps[3].flagged


def test_relation_pattern_under_w_flip():
    # relations 1 and 3 use w an even number of times; relation 2 uses it once
    assert _status(ahp1.model(w_sign=1)) == [True, False, True]


def test_relation_pattern_under_alpha_flip():
    # relation 1 has one alpha cap, relation 2 one, relation 3 none
    assert _status(ahp1.model(alpha_sign=-1)) == [False, False, True]


def test_printed_trivalent_prefactor_breaks_relation_3_only():
    assert _status(ahp1.model(trivalent="printed")) == [True, True, False]


def test_lemma_sides_swap_with_w():
    a = {r.item: (r.ok, r.ok_w_flipped) for r in ahp1.lemma_coefficients(ahp1.model())}
    b = {r.item: (r.ok, r.ok_w_flipped) for r in ahp1.lemma_coefficients(ahp1.model(w_sign=1))}
    pinned = {r.item for r in ahp1.lemma_coefficients(ahp1.model()) if r.how == "pinned"}
    for item in pinned:
        ok, flip = a[item]
        if flip is None:
            assert b[item] == (ok, None)
        else:
            assert b[item] == (flip, ok)
    assert all(ok or flip for ok, flip in a.values())


def test_rrho_pinned_value(m):
    rows = {r.item: r for r in ahp1.lemma_coefficients(m)}
    assert rows["rrho1"].value == beta(1)
    assert close(rows["rhorhorho1"].value, mp_beta(2) * mpmath.sqrt(mp_beta(1) / 2))
