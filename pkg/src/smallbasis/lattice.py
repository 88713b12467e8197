"""Exact integer and rational matrix algebra, and lattices embedded in Q^k."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

IntMatrix = list[list[int]]
Vector = tuple[Fraction, ...]


class ContainmentError(ValueError):
    """A vector or lattice is not contained where it is required to be."""


# ---------------------------------------------------------------------------
# plain matrix helpers

def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*a)] if a else []


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    if not a:
        return []
    if not b:
        return [[] for _ in a]
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def vec_mat(v: Sequence, a: Sequence[Sequence], ncols: int | None = None) -> list:
    """Row vector times matrix."""
    if not a:
        return [0] * (ncols or 0)
    out = [0] * len(a[0])
    for x, row in zip(v, a):
        if x:
            for j, y in enumerate(row):
                out[j] += x * y
    return out


def dot(u: Sequence, v: Sequence):
    return sum(x * y for x, y in zip(u, v))


def as_fraction_vector(v: Iterable) -> Vector:
    return tuple(Fraction(x) for x in v)


def is_integral(v: Iterable) -> bool:
    return all(Fraction(x).denominator == 1 for x in v)


# ---------------------------------------------------------------------------
# rational linear algebra

def rref(rows: Sequence[Sequence]) -> tuple[list[list[Fraction]], list[int]]:
    m = [[Fraction(x) for x in row] for row in rows]
    pivots: list[int] = []
    if not m:
        return m, pivots
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : A x = 0} returned as a list of vectors."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    r, pivots = rref(rows) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -r[i][f]
        basis.append(x)
    return basis


def left_nullspace(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    """Basis of {y : y A = 0}."""
    return nullspace(transpose(rows), len(rows))


def solve_left(rows: Sequence[Sequence], v: Sequence) -> list[Fraction] | None:
    """Coefficients c with sum c_i rows[i] = v, or None if v is not in the row span.

    When the rows are dependent the solution with zero weight on non-pivot rows is returned.
    """
    n = len(rows)
    if n == 0:
        return [] if all(Fraction(x) == 0 for x in v) else None
    aug = [[Fraction(rows[i][j]) for i in range(n)] + [Fraction(v[j])] for j in range(len(v))]
    r, pivots = rref(aug)
    if n in pivots:
        return None
    c = [Fraction(0)] * n
    for i, p in enumerate(pivots):
        c[p] = r[i][n]
    return c


def inverse(a: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(a)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(a)]
    r, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in r]


def det(a: Sequence[Sequence]):
    """Exact determinant by fraction-free elimination."""
    n = len(a)
    if n == 0:
        return 1
    m = [[Fraction(x) for x in row] for row in a]
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    d = sign * m[n - 1][n - 1]
    return int(d) if d.denominator == 1 else d


def right_inverse_rows(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    """P with rows . P = I for a matrix with independent rows (P = B^T (B B^T)^{-1})."""
    if not rows:
        return []
    bt = transpose(rows)
    g = inverse(mat_mul(rows, bt))
    return mat_mul(bt, g)


# ---------------------------------------------------------------------------
# integer normal forms

def _row_op(m, i, j, q):
    """row_i -= q * row_j"""
    if q:
        ri, rj = m[i], m[j]
        for k in range(len(ri)):
            ri[k] -= q * rj[k]


def _col_op(m, i, j, q):
    """col_i -= q * col_j"""
    if q:
        for row in m:
            row[i] -= q * row[j]


def smith_normal_form(a: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U A V = D, U and V unimodular, D diagonal with d_i | d_{i+1}."""
    m = len(a)
    n = len(a[0]) if m else 0
    d = [[int(x) for x in row] for row in a]
    u = identity(m)
    v = identity(n)
    for t in range(min(m, n)):
        while True:
            entries = [(abs(d[i][j]), i, j) for i in range(t, m) for j in range(t, n) if d[i][j]]
            if not entries:
                return u, d, v
            _, pi, pj = min(entries)
            if pi != t:
                d[t], d[pi] = d[pi], d[t]
                u[t], u[pi] = u[pi], u[t]
            if pj != t:
                for row in d:
                    row[t], row[pj] = row[pj], row[t]
                for row in v:
                    row[t], row[pj] = row[pj], row[t]
            p = d[t][t]
            clean = True
            for i in range(t + 1, m):
                q = d[i][t] // p
                _row_op(d, i, t, q)
                _row_op(u, i, t, q)
                if d[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = d[t][j] // p
                _col_op(d, j, t, q)
                _col_op(v, j, t, q)
                if d[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if d[i][j] % p), None)
            if bad is None:
                break
            # fold the offending row into row t so the pivot shrinks on the next pass
            bi = bad[0]
            _row_op(d, t, bi, -1)
            _row_op(u, t, bi, -1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return u, d, v


def invariant_factors(a: Sequence[Sequence[int]]) -> list[int]:
    _, d, _ = smith_normal_form(a)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0)) if d[i][i]]


def hermite_normal_form(a: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix]:
    """Row-style HNF.  Returns (H, U) with U A = H, U unimodular and the nonzero rows
    of H in echelon form with positive pivots and reduced entries above each pivot."""
    m = len(a)
    n = len(a[0]) if m else 0
    h = [[int(x) for x in row] for row in a]
    u = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if h[i][c]]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(h[i][c]), i))
            h[r], h[piv] = h[piv], h[r]
            u[r], u[piv] = u[piv], u[r]
            done = True
            for i in range(r + 1, m):
                if h[i][c]:
                    q = h[i][c] // h[r][c]
                    _row_op(h, i, r, q)
                    _row_op(u, i, r, q)
                    if h[i][c]:
                        done = False
            if done:
                break
        if not any(h[i][c] for i in range(r, m)):
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = h[i][c] // h[r][c]
            _row_op(h, i, r, q)
            _row_op(u, i, r, q)
        r += 1
    return h, u


def hnf_basis(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Nonzero rows of the HNF: a canonical basis of the lattice the rows generate."""
    if not rows:
        return []
    h, _ = hermite_normal_form(rows)
    return [row for row in h if any(row)]


def is_unimodular(a: Sequence[Sequence[int]]) -> bool:
    return len(a) == (len(a[0]) if a else 0) and abs(det(a)) == 1


def is_primitive(rows: Sequence[Sequence[int]]) -> bool:
    """True when the rows extend to a basis of the integer lattice they live in
    (all invariant factors equal one and the rows are independent)."""
    if not rows:
        return True
    f = invariant_factors(rows)
    return len(f) == len(rows) and all(x == 1 for x in f)


def lll_reduce(rows: Sequence[Sequence], delta: Fraction = Fraction(3, 4)) -> list[list]:
    """Exact LLL reduction with respect to the Euclidean inner product."""
    b = [[Fraction(x) for x in row] for row in rows]
    n = len(b)
    if n <= 1:
        return [list(row) for row in rows]

    def gso():
        bs = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        norms = []
        for i in range(n):
            v = list(b[i])
            for j in range(i):
                mu[i][j] = dot(b[i], bs[j]) / norms[j]
                v = [x - mu[i][j] * y for x, y in zip(v, bs[j])]
            bs.append(v)
            norms.append(dot(v, v))
        return bs, mu, norms

    bs, mu, norms = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                bs, mu, norms = gso()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            bs, mu, norms = gso()
            k = max(k - 1, 1)
    out = []
    for row in b:
        out.append([int(x) if x.denominator == 1 else x for x in row])
    return out


# ---------------------------------------------------------------------------
# lattices

def _check_divisibility(torsion: Sequence[int]) -> None:
    for d in torsion:
        if d < 2:
            raise ValueError("torsion invariant factors must be at least 2")
    for a, b in zip(torsion, torsion[1:]):
        if b % a:
            raise ValueError("torsion invariant factors must divide in sequence")


def combine_torsion(*lists: Iterable[int]) -> tuple[int, ...]:
    """Invariant factors of a direct sum of cyclic groups."""
    ds = [d for lst in lists for d in lst if d > 1]
    if not ds:
        return ()
    diag = [[ds[i] if i == j else 0 for j in range(len(ds))] for i in range(len(ds))]
    return tuple(x for x in invariant_factors(diag) if x > 1)


@lru_cache(maxsize=65536)
def _unit_positions(basis: tuple) -> tuple[tuple[int, int], ...] | None:
    """(position, sign) per row when the rows are signed unit vectors on distinct coordinates."""
    out, seen = [], set()
    for row in basis:
        nz = [(i, x) for i, x in enumerate(row) if x]
        if len(nz) != 1 or abs(nz[0][1]) != 1 or nz[0][0] in seen:
            return None
        seen.add(nz[0][0])
        out.append((nz[0][0], nz[0][1]))
    return tuple(out)


@dataclass(frozen=True)
class Lattice:
    ambient_dim: int
    basis: tuple[tuple[int, ...], ...] = ()
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        basis = tuple(tuple(int(x) for x in row) for row in self.basis)
        for row in basis:
            if len(row) != self.ambient_dim:
                raise ValueError("basis row length differs from ambient dimension")
        if basis and _unit_positions(basis) is None and rank(basis) != len(basis):
            raise ValueError("basis rows are linearly dependent")
        torsion = tuple(int(d) for d in self.torsion)
        _check_divisibility(torsion)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "torsion", torsion)

    @classmethod
    def standard(cls, k: int) -> "Lattice":
        return cls(k, tuple(tuple(r) for r in identity(k)))

    @classmethod
    def coordinate(cls, k: int, indices: Iterable[int]) -> "Lattice":
        idx = sorted(set(indices))
        return cls(k, tuple(tuple(int(j == i) for j in range(k)) for i in idx))

    @classmethod
    def from_generators(cls, rows: Iterable[Sequence], ambient_dim: int) -> "Lattice":
        rows = [list(r) for r in rows]
        for r in rows:
            if not is_integral(r):
                raise ValueError("generators must be integral")
        return cls(ambient_dim, tuple(tuple(r) for r in hnf_basis([[int(x) for x in r] for r in rows])))

    @classmethod
    def zero(cls, k: int) -> "Lattice":
        return cls(k)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def is_free(self) -> bool:
        return not self.torsion

    def coords(self, v: Sequence) -> list[Fraction]:
        """Rational coordinates of v in the basis; raises if v is outside the span."""
        if len(v) != self.ambient_dim:
            raise ValueError("dimension mismatch")
        c = self._solve(v)
        if c is None:
            raise ContainmentError("vector is not in the span of the lattice")
        return c

    def _solve(self, v: Sequence) -> list[Fraction] | None:
        units = _unit_positions(self.basis)
        if units is None:
            return solve_left(self.basis, v)
        pos = {}
        for k, (i, sgn) in enumerate(units):
            pos[i] = (k, sgn)
        c = [Fraction(0)] * len(units)
        for i, x in enumerate(v):
            if x:
                hit = pos.get(i)
                if hit is None:
                    return None
                c[hit[0]] = Fraction(x) * hit[1]
        return c

    def int_coords(self, v: Sequence) -> list[int]:
        c = self.coords(v)
        if not is_integral(c):
            raise ContainmentError("vector is not in the lattice")
        return [int(x) for x in c]

    def in_span(self, v: Sequence) -> bool:
        return self._solve(v) is not None

    def contains(self, v: Sequence) -> bool:
        c = self._solve(v)
        return c is not None and is_integral(c)

    def element(self, c: Sequence) -> Vector:
        return tuple(Fraction(x) for x in vec_mat(c, self.basis, self.ambient_dim))

    def contains_lattice(self, other: "Lattice") -> bool:
        return all(self.contains(row) for row in other.basis)

    def same_as(self, other: "Lattice") -> bool:
        """Equality of the free parts as subsets of the ambient space (and of torsion)."""
        if self.ambient_dim != other.ambient_dim or self.torsion != other.torsion:
            return False
        return hnf_basis(self.basis) == hnf_basis(other.basis)

    def hnf(self) -> "Lattice":
        return Lattice(self.ambient_dim, tuple(tuple(r) for r in hnf_basis(self.basis)), self.torsion)

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "basis": [[str(x) for x in row] for row in self.basis],
            "torsion": [str(d) for d in self.torsion],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Lattice":
        return cls(int(obj["ambient_dim"]),
                   tuple(tuple(int(x) for x in row) for row in obj.get("basis", [])),
                   tuple(int(d) for d in obj.get("torsion", [])))


@dataclass(frozen=True)
class ModuleMap:
    """Homomorphism given by the images of the domain basis in codomain ambient coordinates."""

    domain: Lattice
    codomain: Lattice
    matrix: tuple[tuple[int, ...], ...] = field(default=())

    def __post_init__(self):
        mat = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if len(mat) != self.domain.rank:
            raise ValueError("matrix row count differs from domain rank")
        for row in mat:
            if len(row) != self.codomain.ambient_dim:
                raise ValueError("matrix row length differs from codomain ambient dimension")
            if not self.codomain.contains(row):
                raise ContainmentError("image of a basis vector is not in the codomain")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def inclusion(cls, sub: Lattice, sup: Lattice) -> "ModuleMap":
        if sub.ambient_dim != sup.ambient_dim:
            raise ValueError("ambient dimensions differ")
        return cls(sub, sup, sub.basis)

    @classmethod
    def identity(cls, lat: Lattice) -> "ModuleMap":
        return cls(lat, lat, lat.basis)

    def apply(self, v: Sequence) -> Vector:
        """Image of an ambient vector of the domain span."""
        c = self.domain.coords(v)
        return tuple(Fraction(x) for x in vec_mat(c, self.matrix, self.codomain.ambient_dim))

    def coord_matrix(self) -> list[list[Fraction]]:
        """Images expressed in codomain basis coordinates."""
        return [self.codomain.coords(row) for row in self.matrix]

    def is_injective_q(self) -> bool:
        return rank(self.matrix) == self.domain.rank if self.matrix else True

    def is_surjective_q(self) -> bool:
        return (rank(self.matrix) if self.matrix else 0) == self.codomain.rank

    def is_iso_q(self) -> bool:
        return self.is_injective_q() and self.domain.rank == self.codomain.rank

    def is_surjective(self) -> bool:
        """Surjective on free parts: the image has index one in the codomain."""
        if not self.is_surjective_q():
            return False
        if self.codomain.rank == 0:
            return True
        c = [[int(x) for x in row] for row in self.coord_matrix()]
        return all(x == 1 for x in invariant_factors(c))

    def then(self, other: "ModuleMap") -> "ModuleMap":
        """Composite other ∘ self."""
        rows = tuple(tuple(int(x) for x in other.apply(row)) for row in self.matrix)
        return ModuleMap(self.domain, other.codomain, rows)

    def image(self) -> Lattice:
        return Lattice.from_generators(self.matrix, self.codomain.ambient_dim)

    def to_json(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "codomain": self.codomain.to_json(),
            "matrix": [[str(x) for x in row] for row in self.matrix],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ModuleMap":
        return cls(Lattice.from_json(obj["domain"]), Lattice.from_json(obj["codomain"]),
                   tuple(tuple(int(x) for x in row) for row in obj["matrix"]))


@dataclass(frozen=True)
class Quotient:
    """Result of ``quotient_module``: the quotient lattice, its projection and integral lifts."""

    lattice: Lattice
    proj: ModuleMap
    lifts: tuple[tuple[int, ...], ...]

    def lift(self, t: Sequence) -> Vector:
        """An ambient preimage of a quotient vector (integral for lattice vectors)."""
        c = self.lattice.coords(t)
        return tuple(Fraction(x) for x in vec_mat(c, self.lifts, self.proj.domain.ambient_dim))

    def __iter__(self):
        # unpacks as (Q, proj)
        return iter((self.lattice, self.proj))


def _relation_coords(m: Lattice, rows: Iterable[Sequence]) -> list[list[int]]:
    out = []
    for r in rows:
        try:
            out.append(m.int_coords(r))
        except ContainmentError as exc:
            raise ContainmentError(f"row {list(r)} is not contained in the module") from exc
    return out


def _selection_quotient(m: Lattice, rel: list[list[int]]) -> tuple[list[int], list[int]] | None:
    """If the relations span exactly a set of basis coordinates, return (kept, killed)."""
    killed = set()
    for row in rel:
        nz = [i for i, x in enumerate(row) if x]
        if len(nz) > 1:
            return None
        if nz and abs(row[nz[0]]) != 1:
            return None
        killed.update(nz)
    kept = [i for i in range(m.rank) if i not in killed]
    return kept, sorted(killed)


def quotient_module(m: Lattice, rows: Iterable[Sequence] | Lattice) -> Quotient:
    """M / N for N generated by ``rows`` (ambient vectors inside M)."""
    if isinstance(rows, Lattice):
        rows = rows.basis
    rel = _relation_coords(m, rows)
    r = m.rank
    sel = _selection_quotient(m, rel)
    if sel is not None:
        kept, _ = sel
        free = len(kept)
        proj_rows = tuple(tuple(int(i == k) for k in kept) for i in range(r))
        q = Lattice(free, tuple(tuple(row) for row in identity(free)), m.torsion)
        lifts = tuple(m.basis[i] for i in kept)
        return Quotient(q, ModuleMap(m, q, proj_rows), lifts)
    if not rel:
        q = Lattice(r, tuple(tuple(row) for row in identity(r)), m.torsion)
        return Quotient(q, ModuleMap(m, q, tuple(tuple(row) for row in identity(r))), m.basis)
    _, d, v = smith_normal_form(rel)
    diag = [d[i][i] for i in range(min(len(d), r)) if d[i][i]]
    s = len(diag)
    free = r - s
    torsion = combine_torsion(diag, m.torsion)
    q = Lattice(free, tuple(tuple(row) for row in identity(free)), torsion)
    proj_rows = tuple(tuple(row[s:]) for row in v)
    vinv = inverse(v)
    lifts = tuple(tuple(int(x) for x in vec_mat([int(y) for y in vinv[s + t]], m.basis, m.ambient_dim))
                  for t in range(free))
    return Quotient(q, ModuleMap(m, q, proj_rows), lifts)


def saturate(n: Lattice | Iterable[Sequence], m: Lattice) -> Lattice:
    """(N ⊗ Q) ∩ M."""
    rows = n.basis if isinstance(n, Lattice) else [list(r) for r in n]
    rel = _relation_coords(m, rows)
    if not rel or not any(any(r) for r in rel):
        return Lattice(m.ambient_dim)
    _, d, v = smith_normal_form(rel)
    s = sum(1 for i in range(min(len(d), m.rank)) if d[i][i])
    vinv = inverse(v)
    gens = [vec_mat([int(y) for y in vinv[t]], m.basis, m.ambient_dim) for t in range(s)]
    return Lattice.from_generators(gens, m.ambient_dim)
