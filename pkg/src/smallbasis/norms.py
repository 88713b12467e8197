"""Norms on real spans of lattices: base kinds, sub-norms, quotient norms, scaling.

Values are exact.  Weighted and polyhedral norms evaluate to rationals (or exact
reals when weights are irrational), ellipsoidal norms to square roots of rationals.
Quotient norms are evaluated by a coordinate shortcut when the kernel is a
coordinate subspace of a weighted norm, by Gram-matrix projection for ellipsoidal
trees and by an exact linear program for polyhedral trees.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lattice import (
    ContainmentError,
    Lattice,
    ModuleMap,
    as_fraction_vector,
    det,
    dot,
    inverse,
    left_nullspace,
    mat_mul,
    quotient_module,
    rank,
    rref,
    right_inverse_rows,
    solve_left,
    transpose,
    vec_mat,
)
from .lp import simplex_max
from .reals import CReal, Number, approx, from_json, number_to_json, rsqrt

DEFAULT_VERTEX_CAP = 1 << 20


class UnsupportedNormError(NotImplementedError):
    """The requested computation is not available for this norm kind."""


class VertexCapError(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"unit-ball vertex enumeration needs {count} candidates, cap is {cap}")
        self.count = count
        self.cap = cap


class NotInSpanError(ValueError):
    pass


def _number(x) -> Number:
    return x if isinstance(x, CReal) else Fraction(x)


def _rational(x) -> bool:
    return not isinstance(x, CReal)


# ---------------------------------------------------------------------------
# norm kinds

class Norm:
    """Common interface; concrete kinds are frozen dataclasses below."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def span(self) -> Lattice | None:
        """Lattice whose real span carries the norm; None means the whole ambient space."""
        return None

    def __call__(self, v: Sequence) -> Number:
        return eval_norm(self, v)


def _check_weights(weights) -> tuple:
    ws = tuple(_number(w) for w in weights)
    if not ws:
        raise ValueError("weights must be nonempty")
    if any(w <= 0 for w in ws):
        raise ValueError("weights must be positive")
    return ws


@dataclass(frozen=True)
class WeightedSup(Norm):
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", _check_weights(self.weights))

    @property
    def dim(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class WeightedL1(Norm):
    """Weighted sum of absolute coordinates."""

    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", _check_weights(self.weights))

    @property
    def dim(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class Polyhedral(Norm):
    functionals: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        fs = tuple(as_fraction_vector(f) for f in self.functionals)
        if not fs:
            raise ValueError("need at least one functional")
        if len({len(f) for f in fs}) != 1:
            raise ValueError("functionals have different lengths")
        if rank(fs) != len(fs[0]):
            raise ValueError("functionals are not jointly injective")
        object.__setattr__(self, "functionals", fs)

    @property
    def dim(self) -> int:
        return len(self.functionals[0])


@dataclass(frozen=True)
class Ellipsoid(Norm):
    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        g = tuple(as_fraction_vector(r) for r in self.gram)
        n = len(g)
        if n == 0 or any(len(r) != n for r in g):
            raise ValueError("gram matrix must be square and nonempty")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("gram matrix must be symmetric")
        if any(det([row[:k] for row in g[:k]]) <= 0 for k in range(1, n + 1)):
            raise ValueError("gram matrix must be positive definite")
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return len(self.gram)


@dataclass(frozen=True)
class SubNorm(Norm):
    inclusion: ModuleMap
    outer: Norm

    def __post_init__(self):
        if self.outer.dim != self.inclusion.codomain.ambient_dim:
            raise ValueError("outer norm dimension differs from inclusion codomain")
        if not self.inclusion.is_injective_q():
            raise ValueError("inclusion is not injective over Q")
        span = self.outer.span
        if span is not None and not all(span.in_span(r) for r in self.inclusion.matrix):
            raise NotInSpanError("inclusion image leaves the outer norm's span")

    @property
    def dim(self) -> int:
        return self.inclusion.domain.ambient_dim

    @property
    def span(self) -> Lattice:
        return self.inclusion.domain


@dataclass(frozen=True)
class QuotientNorm(Norm):
    surjection: ModuleMap
    inner: Norm

    def __post_init__(self):
        if self.inner.dim != self.surjection.domain.ambient_dim:
            raise ValueError("inner norm dimension differs from surjection domain")
        if not self.surjection.is_surjective_q():
            raise ValueError("map is not surjective over Q")
        span = self.inner.span
        if span is not None and not all(span.in_span(r) for r in self.surjection.domain.basis):
            raise NotInSpanError("surjection domain leaves the inner norm's span")

    @property
    def dim(self) -> int:
        return self.surjection.codomain.ambient_dim

    @property
    def span(self) -> Lattice:
        return self.surjection.codomain


@dataclass(frozen=True)
class Scaled(Norm):
    factor: object
    base: Norm

    def __post_init__(self):
        f = _number(self.factor)
        if f <= 0:
            raise ValueError("scale factor must be positive")
        object.__setattr__(self, "factor", f)

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def span(self) -> Lattice | None:
        return self.base.span


@dataclass(frozen=True)
class NormedModule:
    module: Lattice
    norm: Norm

    def __post_init__(self):
        if self.norm.dim != self.module.ambient_dim:
            raise ValueError("norm dimension differs from module ambient dimension")
        span = self.norm.span
        if span is not None and not all(span.in_span(r) for r in self.module.basis):
            raise NotInSpanError("module leaves the span of its norm")

    @property
    def rank(self) -> int:
        return self.module.rank

    def __call__(self, v: Sequence) -> Number:
        return eval_norm(self.norm, v)


# ---------------------------------------------------------------------------
# structural helpers

def _signed_unit(row: Sequence) -> tuple[int, int] | None:
    """(index, sign) when row is ±e_index."""
    nz = [(i, x) for i, x in enumerate(row) if x]
    if len(nz) != 1 or abs(nz[0][1]) != 1:
        return None
    return nz[0][0], (1 if nz[0][1] > 0 else -1)


def _coordinate_support(lat: Lattice) -> list[int] | None:
    """Coordinates of the span when the span is a coordinate subspace."""
    if not lat.basis:
        return []
    r, pivots = rref(lat.basis)
    for row, p in zip(r, pivots):
        if any(x for j, x in enumerate(row) if j != p):
            return None
    return pivots


@dataclass(frozen=True)
class WeightedView:
    """On its span the norm is a weighted sup or l1 norm of the listed coordinates."""

    kind: str  # "sup" or "l1"
    weights: dict  # ambient coordinate -> weight

    def evaluate(self, v: Sequence) -> Number:
        terms = [w * abs(Fraction(v[i])) for i, w in self.weights.items() if v[i]]
        if not terms:
            return Fraction(0)
        if self.kind == "sup":
            return max(terms)
        total = Fraction(0)
        for t in terms:
            total = total + t
        return total


def weighted_view(n: Norm) -> WeightedView | None:
    cached = _VIEW_CACHE.get(id(n))
    if cached is not None and cached[0] is n:
        return cached[1]
    view = _weighted_view(n)
    _remember(_VIEW_CACHE, n, view)
    return view


_CACHE_LIMIT = 50000
_VIEW_CACHE: dict[int, tuple[Norm, WeightedView | None]] = {}


def _remember(cache: dict, key_obj, value) -> None:
    # entries hold a reference to the key object, so ids cannot be recycled while cached
    if len(cache) > _CACHE_LIMIT:
        cache.clear()
    cache[id(key_obj)] = (key_obj, value)


def _weighted_view(n: Norm) -> WeightedView | None:
    if isinstance(n, WeightedSup):
        return WeightedView("sup", dict(enumerate(n.weights)))
    if isinstance(n, WeightedL1):
        return WeightedView("l1", dict(enumerate(n.weights)))
    if isinstance(n, Scaled):
        base = weighted_view(n.base)
        if base is None:
            return None
        return WeightedView(base.kind, {i: w * n.factor for i, w in base.weights.items()})
    if isinstance(n, SubNorm):
        outer = weighted_view(n.outer)
        if outer is None:
            return None
        weights = {}
        for drow, irow in zip(n.inclusion.domain.basis, n.inclusion.matrix):
            src, tgt = _signed_unit(drow), _signed_unit(irow)
            if src is None or tgt is None or tgt[0] not in outer.weights or src[0] in weights:
                return None
            weights[src[0]] = outer.weights[tgt[0]]
        if len(set(_signed_unit(r)[0] for r in n.inclusion.matrix)) != len(weights):
            return None
        return WeightedView(outer.kind, weights)
    if isinstance(n, QuotientNorm):
        inner = weighted_view(n.inner)
        if inner is None:
            return None
        beta = n.surjection
        if _coordinate_support(beta.codomain) is None:
            return None
        weights = {}
        for drow, brow in zip(beta.domain.basis, beta.matrix):
            src = _signed_unit(drow)
            if src is None or src[0] not in inner.weights:
                return None
            if not any(brow):
                continue
            tgt = _signed_unit(brow)
            if tgt is None or tgt[0] in weights:
                return None
            weights[tgt[0]] = inner.weights[src[0]]
        return WeightedView(inner.kind, weights)
    return None


def _root_kind(n: Norm) -> str:
    """'poly' for rational polyhedral trees, 'ellipsoid' for ellipsoidal ones, else 'other'."""
    if isinstance(n, (WeightedSup, WeightedL1)):
        return "poly" if all(_rational(w) for w in n.weights) else "other"
    if isinstance(n, Polyhedral):
        return "poly"
    if isinstance(n, Ellipsoid):
        return "ellipsoid"
    if isinstance(n, Scaled):
        return _root_kind(n.base) if _rational(n.factor) else "other"
    if isinstance(n, SubNorm):
        return _root_kind(n.outer)
    if isinstance(n, QuotientNorm):
        return _root_kind(n.inner)
    return "other"


def _frame(n: Norm) -> list[tuple]:
    span = n.span
    if span is None:
        return [tuple(int(i == j) for j in range(n.dim)) for i in range(n.dim)]
    return list(span.basis)


def _check_vector(n: Norm, v: Sequence) -> tuple[Fraction, ...]:
    if len(v) != n.dim:
        raise ValueError(f"dimension mismatch: expected {n.dim}, got {len(v)}")
    v = as_fraction_vector(v)
    span = n.span
    if span is not None and not span.in_span(v):
        raise NotInSpanError("vector is not in the span of the norm")
    return v


# ---------------------------------------------------------------------------
# compiled polyhedral form:  ||x|| = min { s : a_r.x + b_r.y <= g_r s  for all r }

@dataclass
class _Form:
    n_in: int
    n_aux: int
    rows: list  # (a, b, g)
    eqs: list  # (ea, eb) with ea.x + eb.y = 0


def _zeros(k):
    return [Fraction(0)] * k


def _compile(n: Norm) -> _Form:
    if isinstance(n, Polyhedral):
        rows = []
        for f in n.functionals:
            rows.append((list(f), [], Fraction(1)))
            rows.append(([-x for x in f], [], Fraction(1)))
        return _Form(n.dim, 0, rows, [])
    if isinstance(n, WeightedSup):
        rows = []
        for i, w in enumerate(n.weights):
            e = _zeros(n.dim)
            e[i] = w
            rows.append((e, [], Fraction(1)))
            rows.append(([-x for x in e], [], Fraction(1)))
        return _Form(n.dim, 0, rows, [])
    if isinstance(n, WeightedL1):
        k = n.dim
        rows = []
        for i in range(k):
            e = _zeros(k)
            e[i] = Fraction(1)
            u = _zeros(k)
            u[i] = Fraction(-1)
            rows.append((e, u, Fraction(0)))
            rows.append(([-x for x in e], list(u), Fraction(0)))
        rows.append((_zeros(k), list(n.weights), Fraction(1)))
        return _Form(k, k, rows, [])
    if isinstance(n, Scaled):
        f = _compile(n.base)
        return _Form(f.n_in, f.n_aux, [(a, b, g / n.factor) for a, b, g in f.rows], f.eqs)
    if isinstance(n, SubNorm):
        f = _compile(n.outer)
        pm = mat_mul(right_inverse_rows(n.inclusion.domain.basis), n.inclusion.matrix)
        def pull(a):
            return [dot(row, a) for row in pm]
        return _Form(n.dim, f.n_aux, [(pull(a), b, g) for a, b, g in f.rows],
                     [(pull(ea), eb) for ea, eb in f.eqs])
    if isinstance(n, QuotientNorm):
        f = _compile(n.inner)
        beta = n.surjection
        dom = beta.domain.basis
        r = len(dom)
        k = n.dim
        def push(a):
            return [dot(row, a) for row in dom]
        rows = [(_zeros(k), push(a) + list(b), g) for a, b, g in f.rows]
        eqs = [(_zeros(k), push(ea) + list(eb)) for ea, eb in f.eqs]
        for j in range(k):
            ex = _zeros(k)
            ex[j] = Fraction(-1)
            eqs.append((ex, [Fraction(beta.matrix[i][j]) for i in range(r)] + _zeros(f.n_aux)))
        return _Form(k, r + f.n_aux, rows, eqs)
    raise UnsupportedNormError(f"no polyhedral form for {type(n).__name__}")


@dataclass
class PolyForm:
    """Equality-free form with compressed auxiliary variables."""

    n_in: int
    rows: list  # (a, b, g) with len(b) == n_free
    z0: list  # n_aux x n_in
    nfree: list  # n_aux x n_free
    n_aux: int

    @property
    def n_free(self) -> int:
        return len(self.rows[0][1]) if self.rows else 0

    def recover(self, x: Sequence, w: Sequence) -> list[Fraction]:
        return [dot(zr, x) + dot(nr, w) for zr, nr in zip(self.z0, self.nfree)]


def _finalize(f: _Form) -> PolyForm:
    na, ni = f.n_aux, f.n_in
    z0 = [_zeros(ni) for _ in range(na)]
    free_cols = list(range(na))
    nmat = [[Fraction(int(i == j)) for j in range(na)] for i in range(na)]
    if f.eqs and na:
        aug = [list(eb) + list(ea) for ea, eb in f.eqs]
        r, pivots = rref(aug)
        ypiv = [(i, p) for i, p in enumerate(pivots) if p < na]
        pivset = {p for _, p in ypiv}
        free_cols = [j for j in range(na) if j not in pivset]
        nmat = [_zeros(len(free_cols)) for _ in range(na)]
        for idx, j in enumerate(free_cols):
            nmat[j][idx] = Fraction(1)
        for i, p in ypiv:
            row = r[i]
            for idx, j in enumerate(free_cols):
                nmat[p][idx] = -row[j]
            z0[p] = [-row[na + l] for l in range(ni)]
    rows = []
    for a, b, g in f.rows:
        b = list(b) + _zeros(na - len(b))
        a2 = [a[l] + sum(b[j] * z0[j][l] for j in range(na) if b[j]) for l in range(ni)]
        b2 = [sum(b[j] * nmat[j][idx] for j in range(na) if b[j]) for idx in range(len(free_cols))]
        rows.append((a2, b2, g))
    # keep only a column basis of the auxiliary block
    if rows and free_cols:
        _, piv = rref([b for _, b, _ in rows])
        rows = [(a, [b[j] for j in piv], g) for a, b, g in rows]
        nmat = [[row[j] for j in piv] for row in nmat]
    return PolyForm(ni, rows, z0, nmat, na)


_FORM_CACHE: dict[int, tuple[Norm, PolyForm]] = {}


def poly_form(n: Norm) -> PolyForm:
    hit = _FORM_CACHE.get(id(n))
    if hit is not None and hit[0] is n:
        return hit[1]
    if _root_kind(n) != "poly":
        raise UnsupportedNormError("norm tree is not rational polyhedral")
    form = _finalize(_compile(n))
    _remember(_FORM_CACHE, n, form)
    return form


def _form_eval(form: PolyForm, x: Sequence) -> tuple[Fraction, list[Fraction]]:
    """Value and an optimal auxiliary vector (in compressed coordinates)."""
    vals = [dot(a, x) for a, _, _ in form.rows]
    if form.n_free == 0 and all(g > 0 for _, _, g in form.rows):
        return max(Fraction(0), max(v / g for v, (_, _, g) in zip(vals, form.rows))), []
    a_eq = [[g for _, _, g in form.rows]]
    b_eq = [Fraction(1)]
    for j in range(form.n_free):
        a_eq.append([b[j] for _, b, _ in form.rows])
        b_eq.append(Fraction(0))
    res = simplex_max(vals, a_eq, b_eq)
    w = [-y for y in res.duals[1:]]
    if len(w) < form.n_free:
        w += _zeros(form.n_free - len(w))
    return res.value, w


def form_support(form: PolyForm, x: Sequence) -> tuple[Fraction, list[Fraction]]:
    """Value at x and a linear functional f with f.y <= ||y|| everywhere and f.x = ||x||."""
    vals = [dot(a, x) for a, _, _ in form.rows]
    nr = len(form.rows)
    a_eq = [[g for _, _, g in form.rows]]
    b_eq = [Fraction(1)]
    for j in range(form.n_free):
        a_eq.append([b[j] for _, b, _ in form.rows])
        b_eq.append(Fraction(0))
    res = simplex_max(vals, a_eq, b_eq)
    f = [sum(lam * a[i] for lam, (a, _, _) in zip(res.x, form.rows) if lam) for i in range(form.n_in)]
    return res.value, f


def dual_bound(form: PolyForm, h: Sequence, basis: Sequence[Sequence]) -> Fraction:
    """max h.c over {c : ||c.B|| <= 1} with B the given basis rows."""
    rows = [([dot(brow, a) for brow in basis], b, g) for a, b, g in form.rows]
    r = len(basis)
    a_eq = []
    b_eq = []
    for j in range(r):
        a_eq.append([a[j] for a, _, _ in rows])
        b_eq.append(Fraction(h[j]))
    for j in range(form.n_free):
        a_eq.append([b[j] for _, b, _ in rows])
        b_eq.append(Fraction(0))
    res = simplex_max([-g for _, _, g in rows], a_eq, b_eq)
    return -res.value


# ---------------------------------------------------------------------------
# Gram form for ellipsoidal trees (matrix in frame coordinates)

_GRAM_CACHE: dict[int, tuple[Norm, list]] = {}


def gram_form(n: Norm) -> list[list[Fraction]]:
    hit = _GRAM_CACHE.get(id(n))
    if hit is not None and hit[0] is n:
        return hit[1]
    g = _gram(n)
    _remember(_GRAM_CACHE, n, g)
    return g


def _frame_coords(n: Norm, rows: Sequence[Sequence]) -> list[list[Fraction]]:
    span = n.span
    if span is None:
        return [list(as_fraction_vector(r)) for r in rows]
    return [span.coords(r) for r in rows]


def _gram(n: Norm) -> list[list[Fraction]]:
    if isinstance(n, Ellipsoid):
        return [list(r) for r in n.gram]
    if isinstance(n, Scaled):
        if not _rational(n.factor):
            raise UnsupportedNormError("irrational scale on an ellipsoidal norm")
        c2 = n.factor * n.factor
        return [[c2 * x for x in row] for row in gram_form(n.base)]
    if isinstance(n, SubNorm):
        a = _frame_coords(n.outer, n.inclusion.matrix)
        return mat_mul(mat_mul(a, gram_form(n.outer)), transpose(a))
    if isinstance(n, QuotientNorm):
        gc, pd = _quotient_gram_parts(n)
        if not pd:
            return []
        h = mat_mul(mat_mul(transpose(pd), inverse(gc)), pd)
        return inverse(h)
    raise UnsupportedNormError(f"no Gram form for {type(n).__name__}")


def _quotient_gram_parts(n: QuotientNorm):
    beta = n.surjection
    a = _frame_coords(n.inner, beta.domain.basis)
    gc = mat_mul(mat_mul(a, gram_form(n.inner)), transpose(a))
    pd = beta.coord_matrix()
    return gc, pd


# ---------------------------------------------------------------------------
# evaluation

def eval_norm(n: Norm, v: Sequence) -> Number:
    v = _check_vector(n, v)
    return _eval(n, v)


def _eval(n: Norm, v: tuple) -> Number:
    if not any(v):
        return Fraction(0)
    view = weighted_view(n)
    if view is not None:
        return view.evaluate(v)
    if isinstance(n, Polyhedral):
        return max(abs(dot(f, v)) for f in n.functionals)
    if isinstance(n, Ellipsoid):
        return rsqrt(dot(vec_mat(v, n.gram), v))
    if isinstance(n, Scaled):
        return n.factor * _eval(n.base, v)
    if isinstance(n, SubNorm):
        return _eval(n.outer, n.inclusion.apply(v))
    if isinstance(n, QuotientNorm):
        return _minimize(n, v)[0]
    raise UnsupportedNormError(f"cannot evaluate {type(n).__name__}")


def quotient_norm_minimizer(n: QuotientNorm, t: Sequence) -> tuple[Number, tuple[Fraction, ...]]:
    """Exact value of the quotient norm at t and a preimage attaining it."""
    if not isinstance(n, QuotientNorm):
        raise TypeError("expected a QuotientNorm")
    t = _check_vector(n, t)
    return _minimize(n, t)


def _fast_quotient(n: QuotientNorm, t: tuple):
    """Coordinate shortcut: weighted inner norm and a kernel spanned by coordinate vectors."""
    inner = weighted_view(n.inner)
    if inner is None:
        return None
    beta = n.surjection
    dom = beta.domain
    if not all(_signed_unit(r) is not None and _signed_unit(r)[0] in inner.weights for r in dom.basis):
        return None
    kers = _kernel_rows(beta)
    support = sorted({i for row in kers for i, x in enumerate(row) if x})
    if len(support) != len(kers):
        return None
    c = _preimage_coords(beta, t)
    v = list(vec_mat(c, dom.basis, dom.ambient_dim))
    for i in support:
        v[i] = Fraction(0)
    v = tuple(Fraction(x) for x in v)
    return inner.evaluate(v), v


_KER_CACHE: dict[int, tuple[ModuleMap, list]] = {}


def _kernel_rows(beta: ModuleMap) -> list[list[Fraction]]:
    hit = _KER_CACHE.get(id(beta))
    if hit is not None and hit[0] is beta:
        return hit[1]
    ker = [vec_mat(c, beta.domain.basis, beta.domain.ambient_dim)
           for c in left_nullspace(beta.matrix)] if beta.matrix else []
    _remember(_KER_CACHE, beta, ker)
    return ker


def _preimage_coords(beta: ModuleMap, t: Sequence) -> list[Fraction]:
    c = solve_left(beta.matrix, t)
    if c is None:
        raise NotInSpanError("vector is not in the image of the surjection")
    return c


def _minimize(n: QuotientNorm, t: tuple) -> tuple[Number, tuple[Fraction, ...]]:
    beta = n.surjection
    dom = beta.domain
    if not any(t):
        return Fraction(0), tuple(_zeros(dom.ambient_dim))
    fast = _fast_quotient(n, t)
    if fast is not None:
        return fast
    kind = _root_kind(n)
    if kind == "ellipsoid":
        gc, pd = _quotient_gram_parts(n)
        g = gram_form(n)
        d = n.surjection.codomain.coords(t)
        c = vec_mat(vec_mat(vec_mat(d, g), transpose(pd)), inverse(gc))
        witness = tuple(Fraction(x) for x in vec_mat(c, dom.basis, dom.ambient_dim))
        return rsqrt(dot(vec_mat(d, g), d)), witness
    if kind == "poly":
        form = poly_form(n)
        value, w = _form_eval(form, t)
        y = form.recover(t, w)
        c = y[:dom.rank]
        witness = tuple(Fraction(x) for x in vec_mat(c, dom.basis, dom.ambient_dim))
        return value, witness
    raise UnsupportedNormError("quotient minimizer needs a polyhedral or ellipsoidal inner norm")


# ---------------------------------------------------------------------------
# operator norms

class AlgebraicValue:
    """Square root of an irrational algebraic eigenvalue, kept symbolically."""

    def __init__(self, square):
        self.square = square

    def __float__(self):
        import sympy
        return float(sympy.sqrt(self.square).evalf(30))

    def __repr__(self):
        return f"AlgebraicValue(sqrt({self.square}))"


def _facets(n: Norm, cap: int) -> list[list[Fraction]] | None:
    """Functionals h with ||x|| = max |h.x| on the span, for quotient-free polyhedral trees."""
    if isinstance(n, Polyhedral):
        return [list(f) for f in n.functionals]
    if isinstance(n, WeightedSup):
        if not all(_rational(w) for w in n.weights):
            return None
        out = []
        for i, w in enumerate(n.weights):
            e = _zeros(n.dim)
            e[i] = w
            out.append(e)
        return out
    if isinstance(n, WeightedL1):
        if not all(_rational(w) for w in n.weights):
            return None
        count = 1 << max(n.dim - 1, 0)
        if count > cap:
            raise VertexCapError(count, cap)
        out = []
        for signs in itertools.product((1, -1), repeat=n.dim - 1):
            s = (1,) + signs
            out.append([si * w for si, w in zip(s, n.weights)])
        return out
    if isinstance(n, Scaled):
        base = _facets(n.base, cap)
        if base is None or not _rational(n.factor):
            return None
        return [[n.factor * x for x in h] for h in base]
    if isinstance(n, SubNorm):
        base = _facets(n.outer, cap)
        if base is None:
            return None
        pm = mat_mul(right_inverse_rows(n.inclusion.domain.basis), n.inclusion.matrix)
        return [[dot(row, h) for row in pm] for h in base]
    return None


def _vertices_from_facets(hs: list[list[Fraction]], r: int, cap: int) -> list[list[Fraction]]:
    """Vertices (one per ± pair) of {c in R^r : |h.c| <= 1 for all h}."""
    from math import comb
    count = comb(len(hs), r) * (1 << (r - 1))
    if count > cap:
        raise VertexCapError(count, cap)
    seen = set()
    out = []
    for subset in itertools.combinations(range(len(hs)), r):
        m = [hs[i] for i in subset]
        if det(m) == 0:
            continue
        minv = inverse(m)
        for signs in itertools.product((1, -1), repeat=r - 1):
            s = (1,) + signs
            c = [sum(minv[i][j] * s[j] for j in range(r)) for i in range(r)]
            if all(abs(dot(h, c)) <= 1 for h in hs):
                key = tuple(c)
                neg = tuple(-x for x in c)
                if key not in seen and neg not in seen:
                    seen.add(key)
                    out.append(c)
    return out


def _ball_points(n: Norm, lat: Lattice, cap: int) -> list[tuple[tuple[Fraction, ...], Number]]:
    """Pairs (vector, scale) such that the points scale*vector generate the unit ball of n
    restricted to the span of lat, up to sign."""
    if lat.rank == 0:
        return []
    view = weighted_view(n)
    support = _coordinate_support(lat)
    if view is not None and support is not None and all(i in view.weights for i in support):
        k = n.dim
        if view.kind == "l1":
            out = []
            for i in support:
                e = [Fraction(0)] * k
                e[i] = Fraction(1)
                out.append((tuple(e), 1 / view.weights[i]))
            return out
        if all(_rational(view.weights[i]) for i in support):
            count = 1 << (len(support) - 1)
            if count > cap:
                raise VertexCapError(count, cap)
            out = []
            for signs in itertools.product((1, -1), repeat=len(support) - 1):
                s = (1,) + signs
                e = [Fraction(0)] * k
                for si, i in zip(s, support):
                    e[i] = si / view.weights[i]
                out.append((tuple(e), Fraction(1)))
            return out
    if isinstance(n, Scaled):
        return [(v, sc / n.factor) for v, sc in _ball_points(n.base, lat, cap)]
    if isinstance(n, QuotientNorm):
        beta = n.surjection
        if lat.rank != beta.codomain.rank:
            raise UnsupportedNormError("unit ball of a quotient norm restricted to a proper subspace")
        inner = _ball_points(n.inner, beta.domain, cap)
        return [(beta.apply(v), sc) for v, sc in inner if any(beta.apply(v))]
    hs = _facets(n, cap)
    if hs is not None:
        hc = [[dot(brow, h) for brow in lat.basis] for h in hs]
        verts = _vertices_from_facets(hc, lat.rank, cap)
        return [(tuple(Fraction(x) for x in vec_mat(c, lat.basis, lat.ambient_dim)), Fraction(1))
                for c in verts]
    raise UnsupportedNormError(f"no vertex description for {type(n).__name__}")


def operator_norm(phi: ModuleMap, dom: Norm, cod: Norm, cap: int = DEFAULT_VERTEX_CAP):
    """sup ||phi(v)||_cod over ||v||_dom = 1 on the span of phi's domain."""
    if dom.dim != phi.domain.ambient_dim or cod.dim != phi.codomain.ambient_dim:
        raise ValueError("dimension mismatch between map and norms")
    lat = phi.domain
    if lat.rank == 0:
        return Fraction(0)
    if _root_kind(dom) == "ellipsoid" and weighted_view(dom) is None:
        return _operator_norm_ellipsoid(phi, dom, cod, cap)
    best: Number = Fraction(0)
    for v, scale in _ball_points(dom, lat, cap):
        val = eval_norm(cod, phi.apply(v)) * scale
        if val > best:
            best = val
    return best


def _operator_norm_ellipsoid(phi: ModuleMap, dom: Norm, cod: Norm, cap: int):
    lat = phi.domain
    a = _frame_coords(dom, lat.basis)
    gd = mat_mul(mat_mul(a, gram_form(dom)), transpose(a))
    gd_inv = inverse(gd)
    if _root_kind(cod) == "ellipsoid" and weighted_view(cod) is None:
        import sympy
        b = _frame_coords(cod, phi.matrix)
        gc = mat_mul(mat_mul(b, gram_form(cod)), transpose(b))
        m = sympy.Matrix(mat_mul(gd_inv, gc))
        eig = max(m.eigenvals().keys(), key=lambda e: float(sympy.re(e.evalf(50))))
        eig = sympy.nsimplify(eig)
        if eig.is_Rational:
            return rsqrt(Fraction(int(eig.p), int(eig.q)))
        return AlgebraicValue(eig)
    hs = _facets(cod, cap)
    if hs is None:
        raise UnsupportedNormError("ellipsoid domain needs a facet description of the codomain norm")
    best: Number = Fraction(0)
    for h in hs:
        hc = [dot(row, h) for row in phi.matrix]
        val = rsqrt(dot(vec_mat(hc, gd_inv), hc))
        if val > best:
            best = val
    return best


# ---------------------------------------------------------------------------
# the four-space construction

@dataclass(frozen=True)
class FourSpaceNorms:
    first: QuotientNorm  # sub-norm on W, then quotient by U
    second: QuotientNorm  # quotient by T, sub-norm on W/T, then quotient by U/T
    to_first: ModuleMap  # W -> W/U
    to_second: ModuleMap  # W -> W/T -> (W/T)/(U/T)

    def evaluate(self, w: Sequence) -> tuple[Number, Number]:
        return (eval_norm(self.first, self.to_first.apply(w)),
                eval_norm(self.second, self.to_second.apply(w)))


def four_space_norms(v_norm: Norm, t: Lattice, u: Lattice, w: Lattice) -> FourSpaceNorms:
    k = v_norm.dim
    for lat in (t, u, w):
        if lat.ambient_dim != k:
            raise ValueError("ambient dimension mismatch")
    if not u.contains_lattice(t):
        raise ContainmentError("T is not contained in U")
    if not w.contains_lattice(u):
        raise ContainmentError("U is not contained in W")
    v = v_norm.span or Lattice.standard(k)
    if not v.contains_lattice(w):
        raise ContainmentError("W is not contained in V")
    sub_w = SubNorm(ModuleMap.inclusion(w, v), v_norm)
    q_wu = quotient_module(w, u.basis)
    first = QuotientNorm(q_wu.proj, sub_w)

    q_vt = quotient_module(v, t.basis)
    n_vt = QuotientNorm(q_vt.proj, v_norm)
    wt = Lattice.from_generators([q_vt.proj.apply(r) for r in w.basis], q_vt.lattice.ambient_dim)
    ut_gens = [q_vt.proj.apply(r) for r in u.basis]
    sub_wt = SubNorm(ModuleMap.inclusion(wt, q_vt.lattice), n_vt)
    q2 = quotient_module(wt, ut_gens)
    second = QuotientNorm(q2.proj, sub_wt)

    w_to_wt = ModuleMap(w, wt, tuple(tuple(int(x) for x in q_vt.proj.apply(r)) for r in w.basis))
    return FourSpaceNorms(first, second, q_wu.proj, w_to_wt.then(q2.proj))


# ---------------------------------------------------------------------------
# serialization

def norm_to_json(n: Norm) -> dict:
    if isinstance(n, WeightedSup):
        return {"kind": "WeightedSup", "weights": [number_to_json(w) for w in n.weights]}
    if isinstance(n, WeightedL1):
        return {"kind": "WeightedL1", "weights": [number_to_json(w) for w in n.weights]}
    if isinstance(n, Polyhedral):
        return {"kind": "Polyhedral", "functionals": [[str(x) for x in f] for f in n.functionals]}
    if isinstance(n, Ellipsoid):
        return {"kind": "Ellipsoid", "gram": [[str(x) for x in r] for r in n.gram]}
    if isinstance(n, SubNorm):
        return {"kind": "SubNorm", "inclusion": n.inclusion.to_json(), "outer": norm_to_json(n.outer)}
    if isinstance(n, QuotientNorm):
        return {"kind": "QuotientNorm", "surjection": n.surjection.to_json(), "inner": norm_to_json(n.inner)}
    if isinstance(n, Scaled):
        return {"kind": "Scaled", "factor": number_to_json(n.factor), "base": norm_to_json(n.base)}
    raise TypeError(type(n).__name__)


def norm_from_json(obj: dict) -> Norm:
    kind = obj.get("kind")
    if kind == "WeightedSup":
        return WeightedSup(tuple(from_json(w) for w in obj["weights"]))
    if kind == "WeightedL1":
        return WeightedL1(tuple(from_json(w) for w in obj["weights"]))
    if kind == "Polyhedral":
        return Polyhedral(tuple(tuple(Fraction(x) for x in f) for f in obj["functionals"]))
    if kind == "Ellipsoid":
        return Ellipsoid(tuple(tuple(Fraction(x) for x in r) for r in obj["gram"]))
    if kind == "SubNorm":
        return SubNorm(ModuleMap.from_json(obj["inclusion"]), norm_from_json(obj["outer"]))
    if kind == "QuotientNorm":
        return QuotientNorm(ModuleMap.from_json(obj["surjection"]), norm_from_json(obj["inner"]))
    if kind == "Scaled":
        return Scaled(from_json(obj["factor"]), norm_from_json(obj["base"]))
    raise ValueError(f"unknown norm kind {kind!r}")


def value_str(x) -> str:
    if isinstance(x, AlgebraicValue):
        return f"sqrt({x.square})"
    return str(x) if isinstance(x, CReal) else str(Fraction(x))


def value_approx(x, digits: int = 20) -> str:
    if isinstance(x, AlgebraicValue):
        import sympy
        return str(sympy.sqrt(x.square).evalf(digits))
    return approx(x, digits)
