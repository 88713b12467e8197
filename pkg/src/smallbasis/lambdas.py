"""Short-vector enumeration and exact lambda_Q / lambda_Z with certificates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .lattice import (
    Lattice,
    ModuleMap,
    det,
    dot,
    hnf_basis,
    is_primitive,
    lll_reduce,
    rank,
    vec_mat,
)
from .norms import (
    NormedModule,
    UnsupportedNormError,
    _form_eval,
    _frame_coords,
    _root_kind,
    dual_bound,
    eval_norm,
    form_support,
    gram_form,
    operator_norm,
    poly_form,
    weighted_view,
)
from .reals import CReal, Number, number_to_json, rceil, rfloor, rsqrt

DEFAULT_VECTOR_CAP = 10**6
MAX_RANK = 8


class EnumerationCapError(RuntimeError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"enumeration exceeded cap {cap} after {count} candidates")
        self.count = count
        self.cap = cap


@dataclass(frozen=True)
class SmallBasisCertificate:
    kind: str  # "Q-basis" or "Z-basis"
    vectors: tuple[tuple[Fraction, ...], ...]
    norms: tuple
    value: Number

    def verify(self, m: NormedModule) -> bool:
        return verify_certificate(self, m)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "vectors": [[str(x) for x in v] for v in self.vectors],
            "norms": [number_to_json(x) for x in self.norms],
            "lambda": number_to_json(self.value),
        }


def verify_certificate(cert: SmallBasisCertificate, m: NormedModule) -> bool:
    """Independent check: membership, rank or unimodularity, and re-evaluated norms."""
    lat = m.module
    if len(cert.vectors) != lat.rank or len(cert.norms) != len(cert.vectors):
        return False
    if not cert.vectors:
        return cert.value == 0
    coords = []
    for v in cert.vectors:
        if not lat.contains(v):
            return False
        coords.append(lat.int_coords(v))
    d = det(coords)
    if cert.kind == "Q-basis":
        if d == 0:
            return False
    elif cert.kind == "Z-basis":
        if abs(d) != 1:
            return False
    else:
        return False
    for v, n in zip(cert.vectors, cert.norms):
        if eval_norm(m.norm, v) != n:
            return False
    return cert.value == max(cert.norms)


@dataclass(frozen=True)
class LambdaResult:
    value: Number | None  # None when only a bracket is known
    certificate: SmallBasisCertificate
    exact: bool = True
    lower: Number | None = None
    upper: Number | None = None
    method: str = "enumeration"
    notes: tuple = field(default=())

    def to_json(self) -> dict:
        return {
            "value": None if self.value is None else number_to_json(self.value),
            "exact": self.exact,
            "lower": None if self.lower is None else number_to_json(self.lower),
            "upper": None if self.upper is None else number_to_json(self.upper),
            "method": self.method,
            "certificate": self.certificate.to_json(),
        }


# ---------------------------------------------------------------------------
# enumeration

def _canonical(v: Sequence) -> bool:
    for x in v:
        if x:
            return x > 0
    return False


def _key(item):
    val, v = item
    return (val, v)


def _sort(items):
    # values can be exact reals; sort by value then coordinates
    from functools import cmp_to_key

    def cmp(a, b):
        if a[0] < b[0]:
            return -1
        if b[0] < a[0]:
            return 1
        return (a[1] > b[1]) - (a[1] < b[1])

    return sorted(items, key=cmp_to_key(cmp))


def _enum_weighted(view, lat: Lattice, bound: Number, cap: int) -> list:
    h = hnf_basis(lat.basis)
    r = len(h)
    k = lat.ambient_dim
    pivots = [next(i for i, x in enumerate(row) if x) for row in h]
    ends = pivots[1:] + [k]
    out = []
    l1 = view.kind == "l1"

    def rec(j, x, used, leading):
        if j == r:
            if leading:
                return
            val = view.evaluate(x)
            if val <= bound:
                out.append((val, tuple(Fraction(t) for t in x)))
                if len(out) > cap:
                    raise EnumerationCapError(len(out), cap)
            return
        p = pivots[j]
        hp = h[j][p]
        w = view.weights.get(p)
        room = bound - used if l1 else bound
        radius = room / w
        lo = rceil((-radius - x[p]) / hp)
        hi = rfloor((radius - x[p]) / hp)
        if leading:
            lo = max(lo, 0)
        for c in range(lo, hi + 1):
            nx = list(x)
            if c:
                row = h[j]
                for col in range(p, k):
                    if row[col]:
                        nx[col] += c * row[col]
            # columns p .. ends[j]-1 are now final
            nused = used
            ok = True
            for col in range(p, ends[j]):
                if nx[col]:
                    wc = view.weights.get(col)
                    if wc is None:
                        ok = False
                        break
                    term = wc * abs(nx[col])
                    if l1:
                        nused = nused + term
                        if nused > bound:
                            ok = False
                            break
                    elif term > bound:
                        ok = False
                        break
            if ok:
                rec(j + 1, nx, nused, leading and c == 0)

    rec(0, [Fraction(0)] * k, Fraction(0), True)
    return out


def _rational_upper(x: Number) -> Fraction:
    if isinstance(x, CReal):
        scale = 1 << 30
        return Fraction(rfloor(x * scale) + 1, scale)
    return Fraction(x)


def _enum_ellipsoid(norm, lat: Lattice, bound: Number, cap: int) -> list:
    a = _frame_coords(norm, lat.basis)
    g = gram_form(norm)
    r = lat.rank
    q = [[sum(a[i][s] * g[s][t] * a[j][t] for s in range(len(g)) for t in range(len(g)))
          for j in range(r)] for i in range(r)]
    # q(c) = sum_i d_i (c_i + sum_{j>i} mu[i][j] c_j)^2
    work = [row[:] for row in q]
    d = [Fraction(0)] * r
    mu = [[Fraction(0)] * r for _ in range(r)]
    for i in range(r):
        d[i] = work[i][i]
        for j in range(i + 1, r):
            mu[i][j] = work[i][j] / d[i]
        for kk in range(i + 1, r):
            for ll in range(i + 1, r):
                work[kk][ll] -= mu[i][kk] * mu[i][ll] * d[i]
    b2 = _rational_upper(bound * bound)
    exact_b2 = bound * bound
    out = []
    c = [0] * r

    def rec(i, remaining):
        if i < 0:
            if not any(c):
                return
            v = tuple(Fraction(x) for x in vec_mat(c, lat.basis, lat.ambient_dim))
            if not _canonical(v):
                return
            qv = sum(q[s][t] * c[s] * c[t] for s in range(r) for t in range(r))
            if qv <= exact_b2:
                out.append((rsqrt(qv), v))
                if len(out) > cap:
                    raise EnumerationCapError(len(out), cap)
            return
        center = -sum(mu[i][j] * c[j] for j in range(i + 1, r))
        s = rsqrt(remaining / d[i])
        lo = rceil(center - s)
        hi = rfloor(center + s)
        for ci in range(lo, hi + 1):
            c[i] = ci
            rest = remaining - d[i] * (ci - center) ** 2
            if rest >= 0:
                rec(i - 1, rest)
        c[i] = 0

    rec(r - 1, b2)
    return out


def _enum_poly(norm, lat: Lattice, bound: Number, cap: int) -> list:
    form = poly_form(norm)
    basis = [[int(x) for x in row] for row in lll_reduce(lat.basis)]
    r = len(basis)
    radii = []
    for j in range(r):
        e = [Fraction(int(i == j)) for i in range(r)]
        radii.append(rfloor(bound * dual_bound(form, e, basis)))
    direct = form.n_free == 0 and all(g > 0 for _, _, g in form.rows)
    if direct:
        # constraints G_j . c <= bound in basis coordinates
        cons = [[dot(brow, a) / g for brow in basis] for a, _, g in form.rows]
        slack = [[sum(abs(row[i]) * radii[i] for i in range(k + 1, r)) for k in range(r)] for row in cons]
    else:
        box = 1
        for kk in radii:
            box *= 2 * kk + 1
        if box > 4 * cap:
            raise EnumerationCapError(box, 4 * cap)
    out = []
    supports: list = []
    seen_supports: set = set()
    c = [0] * r
    partial = [Fraction(0)] * (len(cons) if direct else 0)

    def rng(j, leading):
        lo = 0 if leading else -radii[j]
        hi = radii[j]
        if direct:
            for row, sl, pj in zip(cons, slack, partial):
                gk = row[j]
                if gk > 0:
                    hi = min(hi, rfloor((bound - pj + sl[j]) / gk))
                elif gk < 0:
                    lo = max(lo, rceil((bound - pj + sl[j]) / gk))
        return lo, hi

    def rec(j, leading):
        if j == r:
            if leading:
                return
            v = tuple(Fraction(x) for x in vec_mat(c, basis, lat.ambient_dim))
            if direct:
                val, _ = _form_eval(form, v)
            else:
                # cached supporting functionals reject most points without an LP
                if any(dot(f, v) > bound for f in supports):
                    return
                val, f = form_support(form, v)
                f = tuple(f)
                if f not in seen_supports:
                    seen_supports.add(f)
                    supports.append(f)
            if val <= bound:
                out.append((val, v))
                if len(out) > cap:
                    raise EnumerationCapError(len(out), cap)
            return
        lo, hi = rng(j, leading)
        for x in range(lo, hi + 1):
            c[j] = x
            if direct:
                for t, row in enumerate(cons):
                    partial[t] += row[j] * x
            rec(j + 1, leading and x == 0)
            if direct:
                for t, row in enumerate(cons):
                    partial[t] -= row[j] * x
        c[j] = 0

    rec(0, True)
    # canonical sign is the first nonzero ambient coordinate
    return [(val, v) if _canonical(v) else (val, tuple(-x for x in v)) for val, v in out]


def _enumerate(m: NormedModule, bound: Number, cap: int = DEFAULT_VECTOR_CAP) -> list:
    if bound <= 0 or m.rank == 0:
        return []
    view = weighted_view(m.norm)
    if view is not None:
        items = _enum_weighted(view, m.module, bound, cap)
    else:
        kind = _root_kind(m.norm)
        if kind == "ellipsoid":
            items = _enum_ellipsoid(m.norm, m.module, bound, cap)
        elif kind == "poly":
            items = _enum_poly(m.norm, m.module, bound, cap)
        else:
            raise UnsupportedNormError("enumeration needs a weighted, polyhedral or ellipsoidal norm")
    return _sort(items)


def enumerate_small_vectors(m: NormedModule, bound, cap: int = DEFAULT_VECTOR_CAP) -> list:
    """All lattice vectors with norm at most ``bound``, one of each ± pair, sorted by
    (norm, coordinates)."""
    return [v for _, v in _enumerate(m, bound, cap)]


# ---------------------------------------------------------------------------
# lambda

def _shortcut(m: NormedModule):
    """Weighted norm on a coordinate lattice: the unit vectors are optimal for both lambdas."""
    view = weighted_view(m.norm)
    if view is None:
        return None
    items = []
    seen = set()
    for row in m.module.basis:
        nz = [(i, x) for i, x in enumerate(row) if x]
        if len(nz) != 1 or abs(nz[0][1]) != 1 or nz[0][0] not in view.weights or nz[0][0] in seen:
            return None
        i = nz[0][0]
        seen.add(i)
        e = tuple(Fraction(int(j == i)) for j in range(m.module.ambient_dim))
        items.append((view.weights[i], e))
    return _sort(items)


def _certificate(kind: str, items) -> SmallBasisCertificate:
    vectors = tuple(v for _, v in items)
    norms = tuple(val for val, _ in items)
    value = max(norms) if norms else Fraction(0)
    return SmallBasisCertificate(kind, vectors, norms, value)


def _greedy_q(items, lat: Lattice):
    chosen = []
    coords = []
    for val, v in items:
        cv = lat.int_coords(v)
        if rank(coords + [cv]) > len(coords):
            chosen.append((val, v))
            coords.append(cv)
            if len(chosen) == lat.rank:
                return chosen
    return None


def _generates(coords: list[list[int]], r: int) -> bool:
    h = hnf_basis(coords)
    if len(h) != r:
        return False
    prod = 1
    for row in h:
        prod *= next(x for x in row if x)
    return prod == 1


def _basis_subset(items, lat: Lattice):
    r = lat.rank
    coords = [lat.int_coords(v) for _, v in items]
    if not _generates(coords, r):
        return None
    n = len(items)

    def dfs(start, chosen):
        if len(chosen) == r:
            return chosen
        for idx in range(start, n - (r - len(chosen)) + 1):
            trial = chosen + [idx]
            if is_primitive([coords[i] for i in trial]):
                found = dfs(idx + 1, trial)
                if found is not None:
                    return found
        return None

    found = dfs(0, [])
    return None if found is None else [items[i] for i in found]


def _select(items, lat: Lattice, integral: bool):
    """Optimal basis among the enumerated items, or None if they do not suffice."""
    q = _greedy_q(items, lat)
    if q is None or not integral:
        return q
    lam_q = max(val for val, _ in q)
    thresholds = []
    for val, _ in items:
        if val >= lam_q and (not thresholds or val != thresholds[-1]):
            thresholds.append(val)
    for b in thresholds:
        cands = [it for it in items if it[0] <= b]
        found = _basis_subset(cands, lat)
        if found is not None:
            return _sort(found)
    return None


def _reduced_items(m: NormedModule):
    basis = lll_reduce(m.module.basis)
    return _sort([(eval_norm(m.norm, tuple(Fraction(x) for x in row)),
                   tuple(Fraction(x) for x in row)) for row in basis])


def _lambda(m: NormedModule, integral: bool, cap: int, shortcut: bool = True) -> LambdaResult:
    kind = "Z-basis" if integral else "Q-basis"
    r = m.rank
    if r == 0:
        return LambdaResult(Fraction(0), _certificate(kind, []), True, Fraction(0), Fraction(0), "zero-rank")
    sc = _shortcut(m) if shortcut else None
    if sc is not None:
        cert = _certificate(kind, sc)
        return LambdaResult(cert.value, cert, True, cert.value, cert.value, "coordinate-weights")
    upper_items = _reduced_items(m)
    upper = max(val for val, _ in upper_items)
    upper_cert = _certificate(kind, upper_items)
    if r > MAX_RANK:
        return _bracket(m, integral, cap, upper, upper_cert)
    # grow the bound from the shortest reduced vector; any basis found within the
    # current bound is optimal because every shorter vector has been enumerated
    b = min(val for val, _ in upper_items)
    while True:
        b = min(b, upper)
        try:
            items = _enumerate(m, b, cap)
        except EnumerationCapError:
            return _bracket(m, integral, cap, upper, upper_cert)
        chosen = _select(items, m.module, integral)
        if chosen is not None:
            break
        if b == upper:  # cannot happen: the reduced basis itself is enumerated
            raise RuntimeError("enumeration did not recover a basis")
        b = 2 * b
    cert = _certificate(kind, chosen)
    return LambdaResult(cert.value, cert, True, cert.value, cert.value, "enumeration")


def _bracket(m: NormedModule, integral: bool, cap: int, upper, upper_cert) -> LambdaResult:
    """Shrink the bound until enumeration fits; the result is exact if it already suffices."""
    kind = "Z-basis" if integral else "Q-basis"
    b = upper / 2
    lower = Fraction(0)
    for _ in range(64):
        try:
            items = _enumerate(m, b, cap) if m.rank <= MAX_RANK else None
        except EnumerationCapError:
            b = b / 2
            continue
        if items is None:
            break
        chosen = _select(items, m.module, integral)
        if chosen is not None:
            cert = _certificate(kind, chosen)
            return LambdaResult(cert.value, cert, True, cert.value, cert.value, "enumeration")
        lower = b
        break
    return LambdaResult(None, upper_cert, False, lower, upper, "bracket",
                        ("lower is a strict lower bound; upper is attained by the certificate",))


def lambda_q_exact(m: NormedModule, cap: int = DEFAULT_VECTOR_CAP, shortcut: bool = True) -> LambdaResult:
    """Minimal max-norm over Q-bases.  ``shortcut=False`` forces enumeration even when the
    norm is a weighted norm on a coordinate lattice."""
    return _lambda(m, False, cap, shortcut)


def lambda_z_exact(m: NormedModule, cap: int = DEFAULT_VECTOR_CAP, shortcut: bool = True) -> LambdaResult:
    """Minimal max-norm over free Z-bases of the free part."""
    return _lambda(m, True, cap, shortcut)


@dataclass(frozen=True)
class PushBound:
    bound: Number
    certificate: SmallBasisCertificate
    op_norm: Number
    source: LambdaResult


def lambda_push_bound(phi: ModuleMap, m1: NormedModule, n2, cap: int = DEFAULT_VECTOR_CAP) -> PushBound:
    """Push an optimal Q-basis of m1 through an isomorphism over Q."""
    if not phi.is_iso_q():
        raise ValueError("map is not an isomorphism over Q")
    if phi.domain != m1.module:
        raise ValueError("map domain differs from the module")
    src = lambda_q_exact(m1, cap)
    op = operator_norm(phi, m1.norm, n2)
    items = [(eval_norm(n2, phi.apply(v)), phi.apply(v)) for v in src.certificate.vectors]
    cert = _certificate("Q-basis", items)
    lam = src.value if src.exact else src.upper
    return PushBound(op * lam, cert, op, src)
