from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from smallbasis.lattice import Lattice, ModuleMap, quotient_module, rank
from smallbasis.norms import (
    AlgebraicValue,
    Ellipsoid,
    NotInSpanError,
    Polyhedral,
    QuotientNorm,
    Scaled,
    SubNorm,
    WeightedL1,
    WeightedSup,
    eval_norm,
    four_space_norms,
    norm_from_json,
    norm_to_json,
    operator_norm,
    quotient_norm_minimizer,
)
from smallbasis.reals import rsqrt

weights = st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=6)
small_int = st.integers(-4, 4)


def vec(n):
    return st.lists(small_int, min_size=n, max_size=n)


def as_poly(ws):
    """The same weighted sup norm written as explicit functionals (forces the LP path)."""
    k = len(ws)
    return Polyhedral(tuple(tuple(w if j == i else Fraction(0) for j in range(k)) for i, w in enumerate(ws)))


def one_dim_kernel_oracle(norm_fs, preimage, kernel):
    """min_t max_j |f_j.(p + t k)| by checking every breakpoint of the convex piecewise-linear function."""
    a = [Fraction(sum(f[i] * preimage[i] for i in range(len(f)))) for f in norm_fs]
    b = [Fraction(sum(f[i] * kernel[i] for i in range(len(f)))) for f in norm_fs]
    cands = {Fraction(0)}
    for i in range(len(a)):
        if b[i]:
            cands.add(-a[i] / b[i])
        for j in range(len(a)):
            for s in (1, -1):
                den = b[i] - s * b[j]
                if den:
                    cands.add((s * a[j] - a[i]) / den)
    return min(max(abs(ai + t * bi) for ai, bi in zip(a, b)) for t in cands)


def test_weighted_sup_example():
    assert eval_norm(WeightedSup((2, 3)), (1, -1)) == 3


def test_ellipsoid_example():
    assert eval_norm(Ellipsoid(((1, 0), (0, 1))), (3, 4)) == 5
    assert eval_norm(Ellipsoid(((2, 1), (1, 3))), (0, 1)) == rsqrt(Fraction(3))


def test_sup_quotient_example():
    z2 = Lattice.standard(2)
    beta = ModuleMap(z2, Lattice.standard(1), ((1,), (1,)))
    for inner in (WeightedSup((1, 1)), as_poly((Fraction(1), Fraction(1)))):
        value, witness = quotient_norm_minimizer(QuotientNorm(beta, inner), (1,))
        assert value == Fraction(1, 2)
        assert witness == (Fraction(1, 2), Fraction(1, 2))


def test_ellipsoid_quotient():
    z2 = Lattice.standard(2)
    beta = ModuleMap(z2, Lattice.standard(1), ((1,), (1,)))
    value, witness = quotient_norm_minimizer(QuotientNorm(beta, Ellipsoid(((1, 0), (0, 1)))), (1,))
    assert value == rsqrt(Fraction(1, 2))
    assert witness == (Fraction(1, 2), Fraction(1, 2))


def test_span_and_dimension_errors():
    lat = Lattice.coordinate(2, [0])
    sub = SubNorm(ModuleMap.inclusion(lat, Lattice.standard(2)), WeightedSup((1, 1)))
    with pytest.raises(NotInSpanError):
        eval_norm(sub, (0, 1))
    with pytest.raises(ValueError):
        eval_norm(WeightedSup((1, 1)), (1, 2, 3))
    with pytest.raises(ValueError):
        Ellipsoid(((1, 2), (2, 1)))
    with pytest.raises(ValueError):
        Polyhedral(((1, 1), (2, 2)))
    with pytest.raises(ValueError):
        WeightedSup((1, 0))


@given(st.lists(weights, min_size=3, max_size=3), vec(3), vec(3), st.integers(-3, 3))
def test_norm_axioms(ws, u, v, c):
    for n in (WeightedSup(ws), WeightedL1(ws), as_poly(ws), Scaled(Fraction(3, 2), WeightedSup(ws))):
        nu, nv = eval_norm(n, u), eval_norm(n, v)
        s = [a + b for a, b in zip(u, v)]
        assert eval_norm(n, s) <= nu + nv
        assert eval_norm(n, [c * a for a in u]) == abs(c) * nu
        assert (nu == 0) == (not any(u))


@given(st.lists(weights, min_size=3, max_size=3), vec(3), vec(3))
def test_quotient_norm_against_breakpoint_oracle(ws, kernel, t_pre):
    assume(any(kernel))
    z3 = Lattice.standard(3)
    q = quotient_module(z3, [kernel])
    assume(q.lattice.rank == 2)
    t = q.proj.apply(t_pre)
    fs = [[w if j == i else 0 for j in range(3)] for i, w in enumerate(ws)]
    expected = one_dim_kernel_oracle(fs, t_pre, kernel)
    for inner in (WeightedSup(ws), as_poly(ws)):
        qn = QuotientNorm(q.proj, inner)
        value, witness = quotient_norm_minimizer(qn, t)
        assert value == expected
        assert tuple(q.proj.apply(witness)) == tuple(Fraction(x) for x in t)
        assert eval_norm(inner, witness) == value


@given(st.lists(st.lists(st.integers(-3, 3), min_size=2, max_size=2), min_size=2, max_size=4),
       vec(2), vec(2))
def test_polyhedral_quotient_upper_bounded_by_preimages(fs, kernel, base):
    assume(rank(fs) == 2 and any(kernel))
    z2 = Lattice.standard(2)
    q = quotient_module(z2, [kernel])
    inner = Polyhedral(tuple(tuple(f) for f in fs))
    qn = QuotientNorm(q.proj, inner)
    t = q.proj.apply(base)
    value = eval_norm(qn, t)
    assert value == one_dim_kernel_oracle(fs, base, kernel)
    for s in range(-3, 4):
        pre = [b + s * k for b, k in zip(base, kernel)]
        assert value <= eval_norm(inner, pre)


def sup_operator_oracle(mat, wd, wc):
    """Max of the codomain sup norm over the vertices of the domain unit box."""
    best = Fraction(0)
    for signs in itertools.product((1, -1), repeat=len(wd)):
        v = [Fraction(s) / w for s, w in zip(signs, wd)]
        img = [sum(v[i] * mat[i][j] for i in range(len(v))) for j in range(len(wc))]
        best = max(best, max(abs(x) * w for x, w in zip(img, wc)))
    return best


@given(st.lists(weights, min_size=2, max_size=3), st.lists(weights, min_size=2, max_size=3), st.data())
def test_operator_norm_sup_to_sup(wd, wc, data):
    mat = data.draw(st.lists(vec(len(wc)), min_size=len(wd), max_size=len(wd)))
    phi = ModuleMap(Lattice.standard(len(wd)), Lattice.standard(len(wc)), tuple(tuple(r) for r in mat))
    op = operator_norm(phi, WeightedSup(wd), WeightedSup(wc))
    assert op == sup_operator_oracle(mat, wd, wc)
    assert operator_norm(phi, as_poly(wd), as_poly(wc)) == op


@given(st.lists(weights, min_size=2, max_size=3), st.lists(weights, min_size=2, max_size=3), st.data())
def test_operator_norm_bounds_images(wd, wc, data):
    mat = data.draw(st.lists(vec(len(wc)), min_size=len(wd), max_size=len(wd)))
    phi = ModuleMap(Lattice.standard(len(wd)), Lattice.standard(len(wc)), tuple(tuple(r) for r in mat))
    dom, cod = WeightedL1(wd), WeightedSup(wc)
    op = operator_norm(phi, dom, cod)
    for v in itertools.product(range(-2, 3), repeat=len(wd)):
        assert eval_norm(cod, phi.apply(v)) <= op * eval_norm(dom, v)


def test_operator_norm_ellipsoid():
    z2 = Lattice.standard(2)
    ident = ModuleMap(z2, z2, ((1, 0), (0, 1)))
    e = Ellipsoid(((1, 0), (0, 1)))
    assert operator_norm(ident, e, e) == 1
    diag = ModuleMap(z2, z2, ((3, 0), (0, 4)))
    assert operator_norm(diag, e, e) == 4
    shear = ModuleMap(z2, z2, ((1, 1), (0, 1)))
    val = operator_norm(shear, e, e)
    assert isinstance(val, AlgebraicValue)
    assert abs(float(val) - (1 + 5 ** 0.5) / 2) < 1e-12


@given(st.data())
def test_four_space_identity(data):
    k = data.draw(st.integers(2, 4))
    fs = data.draw(st.lists(vec(k), min_size=k, max_size=k + 2))
    assume(rank(fs) == k)
    norm = Polyhedral(tuple(tuple(f) for f in fs))
    w_rows = data.draw(st.lists(vec(k), min_size=1, max_size=k))
    assume(rank(w_rows) == len(w_rows))
    w = Lattice.from_generators(w_rows, k)
    u_rows = w.basis[: data.draw(st.integers(0, w.rank))]
    u = Lattice.from_generators(u_rows, k) if u_rows else Lattice.zero(k)
    t_rows = u.basis[: data.draw(st.integers(0, u.rank))]
    t = Lattice.from_generators(t_rows, k) if t_rows else Lattice.zero(k)
    four = four_space_norms(norm, t, u, w)
    coeffs = data.draw(st.lists(small_int, min_size=w.rank, max_size=w.rank))
    v = [sum(c * row[j] for c, row in zip(coeffs, w.basis)) for j in range(k)]
    a, b = four.evaluate(v)
    assert a == b


def test_json_roundtrip():
    z2 = Lattice.standard(2)
    beta = ModuleMap(z2, Lattice.standard(1), ((1,), (1,)))
    norms = [WeightedSup((1, Fraction(1, 2))), Polyhedral(((1, 2), (0, 1))), Ellipsoid(((2, 1), (1, 3))),
             QuotientNorm(beta, WeightedL1((1, 2))), Scaled(Fraction(2, 3), WeightedSup((1, 1))),
             SubNorm(ModuleMap.inclusion(Lattice.coordinate(2, [1]), z2), WeightedSup((1, 3)))]
    for n in norms:
        assert norm_from_json(norm_to_json(n)) == n
