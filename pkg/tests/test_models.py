from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from smallbasis.lambdas import lambda_q_exact, lambda_z_exact, verify_certificate
from smallbasis.lattice import Lattice
from smallbasis.models import (
    BaseLocusError,
    FubiniStudy,
    ModelError,
    MonomialIdeal,
    MonomialModel,
    Weighted,
    WeightedGeneral,
    base_locus_q,
    build_model,
    corollary_b_check,
    ideal_filtration,
    predicted_small_span,
    small_section_chain,
    strictly_small_span,
    sup_norm_monomial,
    sup_norm_section,
    theorem_a_check,
    veronese,
)
from smallbasis.norms import eval_norm
from smallbasis.reals import rpow, rsqrt

HALF = Weighted(Fraction(1, 2), Fraction(1, 2))
P1_HALF = MonomialModel("P1", HALF, 12)

unit_fracs = st.fractions(min_value=Fraction(1, 10), max_value=Fraction(9, 10), max_denominator=10)


def p1_models():
    return st.one_of(
        st.builds(lambda b, g: MonomialModel("P1", Weighted(b, g), 8), unit_fracs, unit_fracs),
        st.builds(lambda a, b: MonomialModel("P1", WeightedGeneral(a, b), 8),
                  st.fractions(Fraction(1, 3), 3, max_denominator=6), st.fractions(Fraction(1, 3), 3, max_denominator=6)),
        st.builds(lambda t: MonomialModel("P2", FubiniStudy(t), 6),
                  st.fractions(Fraction(1, 2), 1, max_denominator=10)),
    )


def test_weight_examples():
    assert [P1_HALF.weight(m) for m in P1_HALF.monomials(2)] == [4, 1, Fraction(1, 4)]
    fs = MonomialModel("P2", FubiniStudy(), 4)
    assert [fs.weight(m) for m in fs.monomials(1)] == [1, 1, 1]
    assert fs.weight((1, 1, 1)) == rpow(Fraction(3), Fraction(-3, 2))
    assert fs.weight((3, 0, 0)) == 1
    assert fs.weight((0, 0, 0)) == 1
    assert P1_HALF.weight((0, 0)) == 1
    assert sup_norm_monomial(P1_HALF, (2, 0)) == Fraction(1, 4)
    assert HALF.alpha == 2


def test_irrational_alpha_boundary():
    m = MonomialModel("P1", Weighted(Fraction(1, 3), Fraction(2, 3)), 12)
    # weight equals 1 exactly at i = d * gamma
    assert m.weight((2, 1)) == 1
    assert m.weight((1, 2)) > 1 > m.weight((3, 0))


def numeric_monomial_sup(model, i, d, samples=2000):
    a = float(model.metric.alpha) if isinstance(model.metric, Weighted) else float(model.metric.a)
    b = float(model.metric.beta) if isinstance(model.metric, Weighted) else float(model.metric.b)
    best = 0.0
    for k in range(samples + 1):
        t = (math.pi / 2) * k / samples
        x, y = math.cos(t), math.sin(t)
        best = max(best, x ** i * y ** (d - i) / max(a * x, b * y) ** d)
    return best


@pytest.mark.parametrize("metric", [HALF, Weighted(Fraction(7, 10), Fraction(2, 5)), WeightedGeneral(2, 3)])
def test_monomial_weights_against_grid(metric):
    model = MonomialModel("P1", metric, 4)
    for d in range(1, 5):
        for i in range(d + 1):
            exact = float(model.weight((i, d - i)))
            num = numeric_monomial_sup(model, i, d)
            assert num <= exact * (1 + 1e-12)
            assert num >= exact * (1 - 1e-2)


def test_section_norm_examples():
    s = sup_norm_section(P1_HALF, [1, 1, 0])  # Y^2 + XY
    assert s.lower_sq == 17
    assert s.lower > 1
    mono = sup_norm_section(P1_HALF, [0, 0, 3])
    assert mono.exact == Fraction(3, 4) and mono.certified
    zero = sup_norm_section(P1_HALF, [0, 0, 0])
    assert zero.upper == 0


@settings(max_examples=30)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=5))
def test_section_norm_bracket_contains_numeric_sup(coeffs):
    assume(any(coeffs))
    s = sup_norm_section(P1_HALF, coeffs)
    d = len(coeffs) - 1
    ws = [float(P1_HALF.weight((i, d - i))) for i in range(d + 1)]
    theta = np.linspace(0, 2 * np.pi, 5000, endpoint=False)
    num = float(np.abs(np.polynomial.polynomial.polyval(np.exp(1j * theta), np.array(coeffs) * ws)).max())
    assert s.lower <= num * (1 + 1e-12)
    assert num <= s.upper * (1 + 1e-12)
    assert s.grid_max <= s.upper


def test_span_examples():
    assert strictly_small_span(P1_HALF, 2).same_as(Lattice.coordinate(3, [2]))
    assert strictly_small_span(P1_HALF, 2, strict=False).same_as(Lattice.coordinate(3, [1, 2]))
    assert strictly_small_span(P1_HALF, 1).same_as(Lattice.coordinate(2, [1]))
    with pytest.raises(ModelError):
        strictly_small_span(MonomialModel("P2", FubiniStudy(), 3), 2)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_span_against_section_enumeration(d):
    """Sections with L2 bound < 1 (a superset of the strictly small ones) add nothing."""
    ws = [P1_HALF.weight((i, d - i)) for i in range(d + 1)]
    for strict in (True, False):
        found = []
        for coeffs in itertools.product((-1, 0, 1), repeat=d + 1):
            if any(coeffs):
                low = sum(c * c * w * w for c, w in zip(coeffs, ws))
                if (low < 1) if strict else (low <= 1):
                    found.append(coeffs)
        oracle = Lattice.from_generators(found, d + 1) if found else Lattice.zero(d + 1)
        assert strictly_small_span(P1_HALF, d, strict).same_as(oracle)


@settings(max_examples=60)
@given(unit_fracs, unit_fracs, st.integers(1, 12))
def test_span_closed_form(beta, gamma, d):
    m = MonomialModel("P1", Weighted(beta, gamma), 12)
    for strict in (True, False):
        assert strictly_small_span(m, d, strict).same_as(predicted_small_span(m, d, strict))


def test_base_locus():
    assert [l.name for l in base_locus_q(P1_HALF, [(3, 0)])] == ["(0:1)"]
    assert base_locus_q(P1_HALF, [(1, 0), (0, 1)]) == ()
    strict = [P1_HALF.monomials(4)[i] for i in (3, 4)]
    assert [l.name for l in base_locus_q(P1_HALF, strict)] == ["(0:1)"]
    p2 = MonomialModel("P2", FubiniStudy(blowup=False), 4)
    assert [l.name for l in base_locus_q(p2, [(1, 0, 0), (0, 1, 0)])] == ["(0:0:1)"]
    assert [l.name for l in base_locus_q(p2, [(1, 1, 0)])] == ["X = 0", "Y = 0"]
    assert [l.name for l in base_locus_q(MonomialModel("P2", FubiniStudy(Fraction(1, 2)), 2),
                                         [(1, 0, 0), (0, 1, 0), (0, 0, 1)])] == ["E"]


def test_veronese():
    ring = build_model(P1_HALF)
    assert veronese(ring, 1) == ring
    v2 = veronese(ring, 2)
    assert [v2.rank(n) for n in range(4)] == [1, 3, 5, 7]
    assert v2.norm(1) == ring.norm(2)
    with pytest.raises(ModelError):
        veronese(ring, 0)


def test_ideal_filtration_examples():
    ring = build_model(P1_HALF)
    f = ideal_filtration(ring, MonomialIdeal(((1, 0),)), [3])
    assert f.piece(3).sub.module.rank == 3 and f.piece(3).quotient.module.rank == 1
    assert f.multiplicative
    unit = ideal_filtration(ring, MonomialIdeal.unit(2), [2])
    assert unit.piece(2).quotient.module.rank == 0
    p2 = build_model(MonomialModel("P2", FubiniStudy(), 3))
    ideal = MonomialIdeal(((2, 0, 0), (1, 1, 0)))
    lat = ideal.sublattice(p2, 2)
    got = {p2.monomials(2)[next(i for i, x in enumerate(r) if x)] for r in lat.basis}
    assert got == {(2, 0, 0), (1, 1, 0)}


@settings(max_examples=40)
@given(p1_models(), st.data())
def test_submultiplicativity(model, data):
    ring = build_model(model)
    n1 = data.draw(st.integers(0, 3))
    n2 = data.draw(st.integers(0, 3))
    s1 = data.draw(st.lists(st.integers(-3, 3), min_size=ring.rank(n1), max_size=ring.rank(n1)))
    s2 = data.draw(st.lists(st.integers(-3, 3), min_size=ring.rank(n2), max_size=ring.rank(n2)))
    prod = ring.multiply(n1, s1, n2, s2)
    assert eval_norm(ring.norm(n1 + n2), prod) <= eval_norm(ring.norm(n1), s1) * eval_norm(ring.norm(n2), s2)


@settings(max_examples=30)
@given(p1_models(), st.integers(0, 3), st.integers(0, 3))
def test_monomial_weight_law(model, n1, n2):
    for a in model.monomials(n1):
        for b in model.monomials(n2):
            ab = tuple(x + y for x, y in zip(a, b))
            lhs = model.weight(a) * model.weight(b)
            assert lhs >= model.weight(ab)
            if model.space == "P1":
                assert lhs == model.weight(ab)


def test_sup_proxy_is_not_submultiplicative():
    # the weighted sup over monomials fails for s = X + Y, a = b = 2: the l1 proxy is needed
    ring = build_model(MonomialModel("P1", WeightedGeneral(2, 2), 4))
    s = (Fraction(1), Fraction(1))
    sq = ring.multiply(1, s, 1, s)
    sup_proxy = max(abs(c) * w for c, w in zip(sq, ring.weights(2)))
    assert sup_proxy > max(abs(c) * w for c, w in zip(s, ring.weights(1))) ** 2
    assert eval_norm(ring.norm(2), sq) <= eval_norm(ring.norm(1), s) ** 2


def test_fs_t_power_one_breaks_submultiplicativity():
    ring = build_model(MonomialModel("P2", FubiniStudy(Fraction(1, 2), "1"), 4))
    x = ring.monomial_vector((1, 0, 0))
    assert eval_norm(ring.norm(2), ring.multiply(1, x, 1, x)) > eval_norm(ring.norm(1), x) ** 2


def test_small_section_chain_example():
    ring = build_model(MonomialModel("P1", WeightedGeneral(2, 2), 8))
    sc = small_section_chain(ring, (1, 0), 5)
    res = sc.result
    assert res.max_norm <= res.bound
    assert lambda_q_exact(ring.component(5)).value <= res.bound
    assert res.is_q_basis(ring.component(5).module)
    assert sc.op_norms_ok
    assert all(v == 0 for v in sc.collapse_ranks.values())
    degenerate = small_section_chain(ring, (1, 0), 1)
    assert degenerate.result.bound == lambda_q_exact(ring.component(1)).value
    with pytest.raises(ModelError):
        small_section_chain(ring, (1, 1), 3)
    with pytest.raises(ModelError):
        small_section_chain(ring, (1, 0), 3, ideals=[MonomialIdeal(((1, 0),)), MonomialIdeal(((1, 0),))])


def test_theorem_a_examples():
    ring = build_model(MonomialModel("P1", WeightedGeneral(2, 2), 8))
    rep = theorem_a_check(ring, [(1, 0), (0, 1)], 6)
    assert rep.upsilon == Fraction(1, 2)
    assert [Fraction(x) for x in rep.extra["B_z"]] == [Fraction(1, n * n) for n in range(1, 7)]
    assert rep.verdict
    # brute-force cross-check of the weight-structure shortcut
    for n in range(1, 7):
        comp = ring.component(n)
        assert lambda_z_exact(comp, shortcut=False).value == lambda_z_exact(comp).value == Fraction(1, 2 ** n)
    assert len(theorem_a_check(ring, [(1, 0), (0, 1)], 1).degrees) == 1
    with pytest.raises(BaseLocusError) as info:
        theorem_a_check(build_model(P1_HALF), [(2, 0)], 3)
    assert [l.name for l in info.value.loci] == ["(0:1)"]


def test_corollary_b_examples():
    fs = build_model(MonomialModel("P2", FubiniStudy(Fraction(9, 10)), 4))
    rep = corollary_b_check(fs, 1, 4)
    assert [d.degree for d in rep.degrees] == [1, 2, 3, 4]
    assert all(d.strictly_small for d in rep.degrees)
    for d in rep.degrees:
        assert verify_certificate(d.certificate, fs.component(d.degree))
        assert all(x < 1 for x in d.certificate.norms)
    neg = corollary_b_check(build_model(P1_HALF), 3, 2)
    assert not neg.hypothesis_holds
    assert [l.name for l in neg.obstruction] == ["(0:1)"]
    assert neg.degrees[1].witness["forced_monomial"] == [0, 2]
    assert neg.verdict


def test_model_validation():
    with pytest.raises(ModelError):
        MonomialModel("P1", FubiniStudy(), 3)
    with pytest.raises(ModelError):
        MonomialModel("P1", HALF, 0)
    with pytest.raises(ModelError):
        Weighted(Fraction(3, 2), Fraction(1, 2))
    with pytest.raises(ModelError):
        P1_HALF.monomials(13)
    assert MonomialModel.from_json(P1_HALF.to_json()) == P1_HALF
