"""Monomial section rings on P^1 and P^2 with explicit metrics.

Degree-d sections are integer combinations of monomials.  On P^1 the monomial
X^i Y^(d-i) sits at position i, so Y^d comes first; on P^2 the monomial
X^i Y^j Z^k sits in lexicographic order of (i, j).  Each monomial carries its exact
sup-norm weight.  The component norm is the weighted l1 norm in these
coordinates: it agrees with the sup norm on monomials, bounds it from above on
every section, and is submultiplicative whenever the weights are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .chain import (
    ChainBoundResult,
    ChainSpec,
    GrowthBoundReport,
    chain_lambda_bound,
    growth_report,
)
from .lambdas import (
    DEFAULT_VECTOR_CAP,
    LambdaResult,
    SmallBasisCertificate,
    lambda_q_exact,
    lambda_z_exact,
    verify_certificate,
)
from .lattice import Lattice, ModuleMap, quotient_module
from .norms import (
    NormedModule,
    QuotientNorm,
    SubNorm,
    WeightedL1,
    eval_norm,
    operator_norm,
)
from .reals import CReal, Number, number_to_json, rpow, rsqrt


class ModelError(ValueError):
    pass


class BaseLocusError(ValueError):
    def __init__(self, loci):
        self.loci = tuple(loci)
        super().__init__("nonempty base locus: " + ", ".join(l.name for l in self.loci))


# ---------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class Weighted:
    """P^1 metric max{alpha|x|, beta|y|} with alpha = beta^(1 - 1/gamma)."""

    beta: Fraction
    gamma: Fraction

    def __post_init__(self):
        b, g = Fraction(self.beta), Fraction(self.gamma)
        if not (0 < b < 1 and 0 < g < 1):
            raise ModelError("beta and gamma must lie strictly between 0 and 1")
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "gamma", g)

    @property
    def alpha(self) -> Number:
        return rpow(self.beta, 1 - 1 / self.gamma)

    def weight(self, i: int, d: int) -> Number:
        # 1 / (alpha^i beta^(d-i)) = beta^(i/gamma - d)
        return rpow(self.beta, Fraction(i) / self.gamma - d)

    def to_json(self) -> dict:
        return {"kind": "Weighted", "beta": str(self.beta), "gamma": str(self.gamma)}


@dataclass(frozen=True)
class WeightedGeneral:
    """P^1 metric max{a|x|, b|y|}."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        a, b = Fraction(self.a), Fraction(self.b)
        if a <= 0 or b <= 0:
            raise ModelError("a and b must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def weight(self, i: int, d: int) -> Number:
        return self.a ** -i * self.b ** -(d - i)

    def to_json(self) -> dict:
        return {"kind": "WeightedGeneral", "a": str(self.a), "b": str(self.b)}


@dataclass(frozen=True)
class FubiniStudy:
    """P^2 Fubini-Study weights times tau^p; ``blowup`` adds the exceptional locus E.

    ``t_power`` is "n" (p equals the degree) or "1" (p = 1 in positive degree).
    """

    tau: Fraction = Fraction(1)
    t_power: str = "n"
    blowup: bool = True

    def __post_init__(self):
        t = Fraction(self.tau)
        if not (0 < t <= 1):
            raise ModelError("tau must lie in (0, 1]")
        if self.t_power not in ("n", "1"):
            raise ModelError("t_power must be 'n' or '1'")
        object.__setattr__(self, "tau", t)

    def weight(self, exps: Sequence[int]) -> Number:
        n = sum(exps)
        if n == 0:
            return Fraction(1)
        num = 1
        for e in exps:
            num *= e ** e
        base = rsqrt(Fraction(num, n ** n))
        p = n if self.t_power == "n" else 1
        return base * self.tau ** p

    @property
    def has_exceptional(self) -> bool:
        return self.blowup and self.tau < 1

    def to_json(self) -> dict:
        return {"kind": "FubiniStudy", "tau": str(self.tau), "t_power": self.t_power,
                "blowup": self.blowup}


def metric_from_json(obj: dict):
    kind = obj.get("kind")
    if kind == "Weighted":
        return Weighted(Fraction(obj["beta"]), Fraction(obj["gamma"]))
    if kind == "WeightedGeneral":
        return WeightedGeneral(Fraction(obj["a"]), Fraction(obj["b"]))
    if kind == "FubiniStudy":
        return FubiniStudy(Fraction(obj.get("tau", 1)), str(obj.get("t_power", "n")),
                           bool(obj.get("blowup", True)))
    raise ModelError(f"unknown metric kind {kind!r}")


# ---------------------------------------------------------------------------
# model

_VARS = {"P1": ("X", "Y"), "P2": ("X", "Y", "Z")}


@dataclass(frozen=True)
class MonomialModel:
    space: str
    metric: object
    max_degree: int

    def __post_init__(self):
        if self.space not in _VARS:
            raise ModelError(f"unsupported space {self.space!r}")
        if self.space == "P1" and not isinstance(self.metric, (Weighted, WeightedGeneral)):
            raise ModelError("P1 models need a Weighted or WeightedGeneral metric")
        if self.space == "P2" and not isinstance(self.metric, FubiniStudy):
            raise ModelError("P2 models need a FubiniStudy metric")
        if int(self.max_degree) < 1:
            raise ModelError("max_degree must be at least 1")
        object.__setattr__(self, "max_degree", int(self.max_degree))

    @property
    def variables(self) -> tuple[str, ...]:
        return _VARS[self.space]

    @property
    def arithmetic_dim(self) -> int:
        return 2 if self.space == "P1" else 3

    def _check_degree(self, d: int) -> None:
        if d < 0 or d > self.max_degree:
            raise ModelError(f"degree {d} outside 0..{self.max_degree}")

    def monomials(self, d: int) -> list[tuple[int, ...]]:
        self._check_degree(d)
        return _monomials(self.space, d)

    def rank(self, d: int) -> int:
        return len(self.monomials(d))

    def weight(self, exps: Sequence[int]) -> Number:
        exps = tuple(int(e) for e in exps)
        if len(exps) != len(self.variables) or any(e < 0 for e in exps):
            raise ModelError("bad exponent vector")
        d = sum(exps)
        self._check_degree(d)
        if self.space == "P1":
            return self.metric.weight(exps[0], d)
        return self.metric.weight(exps)

    def to_json(self) -> dict:
        return {"space": self.space, "metric": self.metric.to_json(), "max_degree": self.max_degree}

    @classmethod
    def from_json(cls, obj: dict) -> "MonomialModel":
        try:
            return cls(str(obj["space"]), metric_from_json(obj["metric"]), int(obj["max_degree"]))
        except KeyError as exc:
            raise ModelError(f"missing model field {exc}") from exc


@lru_cache(maxsize=None)
def _monomials(space: str, d: int) -> list[tuple[int, ...]]:
    if space == "P1":
        return [(i, d - i) for i in range(d + 1)]
    return [(i, j, d - i - j) for i in range(d + 1) for j in range(d - i + 1)]


def sup_norm_monomial(model: MonomialModel, exps: Sequence[int]) -> Number:
    return model.weight(exps)


# ---------------------------------------------------------------------------
# graded ring

@dataclass(frozen=True)
class NormedGradedRing:
    """Components R_n = sections of model degree n*step."""

    model: MonomialModel
    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise ModelError("step must be at least 1")

    @property
    def max_degree(self) -> int:
        return self.model.max_degree // self.step

    def model_degree(self, n: int) -> int:
        return n * self.step

    def monomials(self, n: int) -> list[tuple[int, ...]]:
        return self.model.monomials(self.model_degree(n))

    def rank(self, n: int) -> int:
        return len(self.monomials(n))

    def index(self, exps: Sequence[int]) -> int:
        exps = tuple(int(e) for e in exps)
        return _index_map(self.model.space, sum(exps))[exps]

    def degree_of(self, exps: Sequence[int]) -> int:
        d = sum(exps)
        if d % self.step:
            raise ModelError("monomial degree is not a multiple of the grading step")
        return d // self.step

    def weights(self, n: int) -> tuple:
        return _weights(self, n)

    def norm(self, n: int) -> WeightedL1:
        return _norm(self, n)

    def component(self, n: int) -> NormedModule:
        return _component(self, n)

    def monomial_vector(self, exps: Sequence[int]) -> tuple[Fraction, ...]:
        n = self.degree_of(exps)
        v = [Fraction(0)] * self.rank(n)
        v[self.index(exps)] = Fraction(1)
        return tuple(v)

    def section(self, n: int, coeffs: dict) -> tuple[Fraction, ...]:
        v = [Fraction(0)] * self.rank(n)
        for exps, c in coeffs.items():
            if self.degree_of(exps) != n:
                raise ModelError("monomial of the wrong degree in section")
            v[self.index(exps)] += Fraction(c)
        return tuple(v)

    def multiply(self, n1: int, v1: Sequence, n2: int, v2: Sequence) -> tuple[Fraction, ...]:
        m1, m2 = self.monomials(n1), self.monomials(n2)
        out = [Fraction(0)] * self.rank(n1 + n2)
        idx = _index_map(self.model.space, self.model_degree(n1 + n2))
        for a, x in zip(m1, v1):
            if not x:
                continue
            for b, y in zip(m2, v2):
                if y:
                    out[idx[tuple(p + q for p, q in zip(a, b))]] += Fraction(x) * Fraction(y)
        return tuple(out)

    def upsilon(self) -> Number:
        """Largest degree-1 monomial weight."""
        return max(self.weights(1))

    def sections_in_degree(self, n: int, vectors: Iterable[Sequence]) -> list:
        return [tuple(Fraction(x) for x in v) for v in vectors]


@lru_cache(maxsize=None)
def _index_map(space: str, d: int) -> dict:
    return {m: i for i, m in enumerate(_monomials(space, d))}


@lru_cache(maxsize=4096)
def _weights(ring: NormedGradedRing, n: int) -> tuple:
    return tuple(ring.model.weight(m) for m in ring.monomials(n))


@lru_cache(maxsize=4096)
def _norm(ring: NormedGradedRing, n: int) -> WeightedL1:
    return WeightedL1(_weights(ring, n))


@lru_cache(maxsize=4096)
def _component(ring: NormedGradedRing, n: int) -> NormedModule:
    return NormedModule(Lattice.standard(ring.rank(n)), _norm(ring, n))


def build_model(spec: MonomialModel | dict) -> NormedGradedRing:
    if isinstance(spec, dict):
        spec = MonomialModel.from_json(spec)
    return NormedGradedRing(spec)


def veronese(ring: NormedGradedRing, h: int) -> NormedGradedRing:
    if h < 1:
        raise ModelError("h must be at least 1")
    if ring.step * h > ring.model.max_degree:
        raise ModelError("Veronese step exceeds the model's maximal degree")
    return NormedGradedRing(ring.model, ring.step * h)


def module_degree(h: int, n_ring: int, n_module: int) -> int:
    """Degree of x*m for x in R_n and m in M_n' of an h-graded module."""
    return h * n_ring + n_module


# ---------------------------------------------------------------------------
# sup norms of sections on P^1

@dataclass(frozen=True)
class SectionNorm:
    lower_sq: Number  # exact square of the L2 lower bound
    lower: float
    upper: float
    grid_max: float
    exact: Number | None
    certified: bool
    samples: int

    def to_json(self) -> dict:
        return {"lower_sq": number_to_json(self.lower_sq), "lower": self.lower, "upper": self.upper,
                "grid_max": self.grid_max,
                "exact": None if self.exact is None else number_to_json(self.exact),
                "certified": self.certified, "samples": self.samples}


def sup_norm_section(model: MonomialModel, coeffs: Sequence[int], tol: float = 1e-9,
                     max_samples: int = 1 << 20) -> SectionNorm:
    """Bounds on the sup norm of sum_i a_i X^i Y^(d-i).

    The sup is the maximum over theta of |sum_i a_i w_i exp(1j*i*theta)|; the upper bound
    inflates the grid maximum by the worst dip allowed between samples.
    """
    if model.space != "P1":
        raise ModelError("section sup norms are available on P1 models only")
    d = len(coeffs) - 1
    ws = [model.weight((i, d - i)) for i in range(d + 1)]
    lower_sq: Number = Fraction(0)
    for a, w in zip(coeffs, ws):
        if a:
            lower_sq = lower_sq + Fraction(a) ** 2 * w * w
    nz = [(i, a) for i, a in enumerate(coeffs) if a]
    if not nz:
        return SectionNorm(Fraction(0), 0.0, 0.0, 0.0, Fraction(0), True, 0)
    if len(nz) == 1:
        i, a = nz[0]
        val = abs(Fraction(a)) * ws[i]
        f = float(val)
        return SectionNorm(lower_sq, f, f, f, val, True, 0)
    lo, hi = nz[0][0], nz[-1][0]
    c = np.array([float(a) * float(w) for a, w in zip(coeffs[lo:hi + 1], ws[lo:hi + 1])])
    deg = hi - lo
    lower = math.sqrt(float(lower_sq))
    samples = 1024
    while True:
        theta = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
        vals = np.abs(np.polynomial.polynomial.polyval(np.exp(1j * theta), c))
        grid = float(vals.max())
        # |p|^2 is a real trigonometric polynomial of degree deg; Bernstein bounds its
        # curvature by deg^2 M^2, so M^2 <= grid^2 / (1 - (pi deg / samples)^2 / 2)
        shrink = 1 - (math.pi * deg / samples) ** 2 / 2
        if shrink > 0:
            upper = grid / math.sqrt(shrink) * (1 + 1e-12) + 1e-300
            best_lower = max(grid, lower)
            done = upper - best_lower <= tol * upper
            if done or samples >= max_samples:
                return SectionNorm(lower_sq, lower, upper, grid, None, done, samples)
        elif samples >= max_samples:
            return SectionNorm(lower_sq, lower, math.inf, grid, None, False, samples)
        samples *= 2


# ---------------------------------------------------------------------------
# spans and base loci

def _p1_metric(model: MonomialModel):
    if model.space != "P1" or not isinstance(model.metric, (Weighted, WeightedGeneral)):
        raise ModelError("small spans are computed for weighted P1 models")
    return model.metric


def strictly_small_span(model: MonomialModel, d: int, strict: bool = True) -> Lattice:
    """Span of the sections of degree d with sup norm < 1 (or <= 1 when not strict).

    A monomial enters when its weight passes the test.  Nothing else can: the L2 lower
    bound exceeds |a_j| w_j >= 1 (resp. > 1) as soon as a coefficient a_j sits on a
    monomial that fails the test.
    """
    _p1_metric(model)
    keep = []
    for i, m in enumerate(model.monomials(d)):
        w = model.weight(m)
        if (w < 1) if strict else (w <= 1):
            keep.append(i)
    return Lattice.coordinate(d + 1, keep)


def predicted_small_span(model: MonomialModel, d: int, strict: bool = True) -> Lattice:
    """Closed form for the Weighted metric: X^i Y^(d-i) with i > d*gamma (strict) or i >= d*gamma."""
    metric = _p1_metric(model)
    if not isinstance(metric, Weighted):
        raise ModelError("closed form is stated for the Weighted metric")
    cut = d * metric.gamma
    idx = [i for i in range(d + 1) if (i > cut if strict else i >= cut)]
    return Lattice.coordinate(d + 1, idx)


@dataclass(frozen=True, order=True)
class Locus:
    name: str
    vanishing: tuple[str, ...]  # coordinates that vanish; empty for the exceptional locus


_EXCEPTIONAL = Locus("E", ())


def _locus_name(space: str, vanishing: tuple[str, ...]) -> str:
    vars_ = _VARS[space]
    if not vanishing:
        return "all"
    if len(vanishing) == len(vars_) - 1:
        coords = ["0" if v in vanishing else "1" for v in vars_]
        return "(" + ":".join(coords) + ")"
    return " = ".join(vanishing) + " = 0"


def _supports(model: MonomialModel, sections) -> list[set]:
    out = []
    for s in sections:
        if isinstance(s, dict):
            out.append({tuple(int(e) for e in m) for m, c in s.items() if c})
        elif s and isinstance(next(iter(s)), (int, np.integer)):
            out.append({tuple(int(e) for e in s)})
        else:
            out.append({tuple(int(e) for e in m) for m in s})
    for sup in out:
        for m in sup:
            if len(m) != len(model.variables):
                raise ModelError("exponent vector of the wrong length")
    return out


def base_locus_q(model: MonomialModel, sections) -> tuple[Locus, ...]:
    """Coordinate loci on which every given section vanishes identically.

    A section vanishes on {x_v = 0 for v in V} exactly when each monomial of its support
    involves a variable of V.  Only maximal loci are returned; the exceptional locus of a
    blown-up Fubini-Study model is always included.
    """
    vars_ = model.variables
    supports = _supports(model, sections)
    found = []
    for size in range(0, len(vars_)):
        for vanishing in _subsets(vars_, size):
            vidx = [vars_.index(v) for v in vanishing]
            if any(set(vanishing) > set(f.vanishing) for f in found):
                continue
            if all(all(any(m[i] > 0 for i in vidx) for m in sup) for sup in supports):
                found.append(Locus(_locus_name(model.space, vanishing), vanishing))
    out = sorted(found)
    if isinstance(model.metric, FubiniStudy) and model.metric.has_exceptional:
        out.append(_EXCEPTIONAL)
    return tuple(out)


def _subsets(vars_, size):
    from itertools import combinations
    return [tuple(c) for c in combinations(vars_, size)]


# ---------------------------------------------------------------------------
# monomial ideals and filtrations

@dataclass(frozen=True)
class MonomialIdeal:
    generators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        gens = []
        for g in self.generators:
            if not all(isinstance(e, (int, np.integer)) and e >= 0 for e in g):
                raise ModelError("ideal generators must be exponent vectors")
            gens.append(tuple(int(e) for e in g))
        if len({len(g) for g in gens}) > 1:
            raise ModelError("generators have different numbers of variables")
        object.__setattr__(self, "generators", tuple(sorted(set(gens))))

    @classmethod
    def unit(cls, nvars: int) -> "MonomialIdeal":
        return cls(((0,) * nvars,))

    def contains_monomial(self, m: Sequence[int]) -> bool:
        return any(all(a >= b for a, b in zip(m, g)) for g in self.generators)

    def monomials(self, ring: NormedGradedRing, n: int) -> list[int]:
        return [i for i, m in enumerate(ring.monomials(n)) if self.contains_monomial(m)]

    def sublattice(self, ring: NormedGradedRing, n: int) -> Lattice:
        return _ideal_lattice(self, ring, n)

    def includes(self, other: "MonomialIdeal") -> bool:
        return all(self.contains_monomial(g) for g in other.generators)

    def to_json(self) -> list:
        return [list(g) for g in self.generators]


@lru_cache(maxsize=8192)
def _ideal_lattice(ideal: MonomialIdeal, ring: NormedGradedRing, n: int) -> Lattice:
    return Lattice.coordinate(ring.rank(n), ideal.monomials(ring, n))


@dataclass(frozen=True)
class FiltrationPiece:
    degree: int
    sub: NormedModule  # I_n with the sub-norm
    quotient: NormedModule  # (R_I)_n with the quotient norm
    proj: ModuleMap


@dataclass(frozen=True)
class IdealFiltration:
    ideal: MonomialIdeal
    pieces: tuple[FiltrationPiece, ...]
    multiplicative: bool

    def piece(self, n: int) -> FiltrationPiece:
        for p in self.pieces:
            if p.degree == n:
                return p
        raise KeyError(n)


def ideal_filtration(ring: NormedGradedRing, ideal: MonomialIdeal, degrees: Iterable[int]) -> IdealFiltration:
    if not isinstance(ideal, MonomialIdeal):
        raise ModelError("only monomial ideals are supported")
    degrees = sorted(set(int(n) for n in degrees))
    pieces = []
    for n in degrees:
        rn = ring.component(n)
        lat = ideal.sublattice(ring, n)
        sub = NormedModule(lat, SubNorm(ModuleMap.inclusion(lat, rn.module), ring.norm(n)))
        q = quotient_module(rn.module, lat.basis)
        quot = NormedModule(q.lattice, QuotientNorm(q.proj, ring.norm(n)))
        pieces.append(FiltrationPiece(n, sub, quot, q.proj))
    ok = True
    top = ring.max_degree
    for n in degrees:
        for n2 in range(0, top - n + 1):
            target = ideal.sublattice(ring, n + n2)
            for i in ideal.monomials(ring, n):
                for j in range(ring.rank(n2)):
                    x = [0] * ring.rank(n)
                    x[i] = 1
                    y = [0] * ring.rank(n2)
                    y[j] = 1
                    if not target.contains(ring.multiply(n, x, n2, y)):
                        ok = False
    return IdealFiltration(ideal, tuple(pieces), ok)


# ---------------------------------------------------------------------------
# chains of small-section multiplications

@dataclass(frozen=True)
class SmallSectionChain:
    chain: ChainSpec
    result: ChainBoundResult
    collapse_ranks: dict  # degree -> rank of I_n(R; I_0) / R_{n-1} s
    op_norms: tuple  # (module index, rows of multiplication, ||phi_i||, ||s||^rows)
    s_norm: Number

    @property
    def op_norms_ok(self) -> bool:
        return all(op <= bound for _, _, op, bound in self.op_norms)


def _multiplication_map(ring: NormedGradedRing, s: tuple, n: int, dom: Lattice, cod: Lattice) -> ModuleMap:
    rows = []
    sv = ring.monomial_vector(s)
    for b in dom.basis:
        rows.append(tuple(int(x) for x in ring.multiply(n, b, 1, sv)))
    return ModuleMap(dom, cod, tuple(rows))


def small_section_chain(ring: NormedGradedRing, s: Sequence[int], n: int, n1: int = 1,
                        ideals: Sequence[MonomialIdeal] | None = None,
                        cap: int = DEFAULT_VECTOR_CAP) -> SmallSectionChain:
    s = tuple(int(e) for e in s)
    if len(s) != len(ring.model.variables) or ring.degree_of(s) != 1 or sum(1 for e in s if e) != 1:
        raise ModelError("s must be a degree-one monomial")
    if not (1 <= n1 <= n):
        raise ModelError("need 1 <= n1 <= n")
    nv = len(s)
    if ideals is None:
        ideals = [MonomialIdeal((s,)), MonomialIdeal.unit(nv)]
    ideals = list(ideals)
    if MonomialIdeal((s,)).generators != ideals[0].generators:
        raise ModelError("the chain must start at the ideal generated by s")
    if not ideals[-1].contains_monomial((0,) * nv):
        raise ModelError("the chain must end at the unit ideal")
    for a, b in zip(ideals, ideals[1:]):
        if not b.includes(a) or a.includes(b):
            raise ModelError("ideal chain is not strictly increasing")

    s_norm = ring.norm(1)(ring.monomial_vector(s))
    modules = [ring.component(n1)]
    degrees = [n1]
    maps = []
    for k in range(n1 + 1, n + 1):
        rk = ring.component(k)
        for r, ideal in enumerate(ideals):
            lat = ideal.sublattice(ring, k)
            if lat.rank == rk.module.rank:
                mod = rk
            else:
                mod = NormedModule(lat, SubNorm(ModuleMap.inclusion(lat, rk.module), ring.norm(k)))
            prev = modules[-1].module
            if r == 0:
                maps.append(_multiplication_map(ring, s, k - 1, prev, lat))
            else:
                maps.append(ModuleMap(prev, lat, prev.basis))
            modules.append(mod)
            degrees.append(k)
    chain = ChainSpec(tuple(modules), tuple(maps))
    result = chain_lambda_bound(chain, cap)

    collapse = {}
    for k in range(n1 + 1, n + 1):
        lat = ideals[0].sublattice(ring, k)
        img = _multiplication_map(ring, s, k - 1, ring.component(k - 1).module, lat)
        q = quotient_module(lat, list(img.matrix))
        collapse[k] = q.lattice.rank
    ops = []
    for i, m in enumerate(modules[:-1]):
        rows = n - degrees[i]
        phi = chain.phi(i)
        op = operator_norm(phi, m.norm, modules[-1].norm)
        ops.append((i, rows, op, s_norm ** rows if rows else Fraction(1)))
    return SmallSectionChain(chain, result, collapse, tuple(ops), s_norm)


# ---------------------------------------------------------------------------
# lambda growth against n^e upsilon^n

def _section_data(ring: NormedGradedRing, sections) -> list[tuple[int, tuple, Number]]:
    out = []
    for s in sections:
        if isinstance(s, dict):
            items = {tuple(int(e) for e in m): c for m, c in s.items() if c}
        else:
            items = {tuple(int(e) for e in s): 1}
        degs = {ring.degree_of(m) for m in items}
        if len(degs) != 1:
            raise ModelError("section is not homogeneous")
        deg = degs.pop()
        if deg < 1:
            raise ModelError("sections must have positive degree")
        vec = ring.section(deg, items)
        out.append((deg, vec, ring.norm(deg)(vec), items))
    return out


def theorem_a_check(ring: NormedGradedRing, sections, N: int, cap: int = DEFAULT_VECTOR_CAP) -> GrowthBoundReport:
    """Exact lambda_Z (and lambda_Q) of R_n for n <= N against n^e upsilon^n growth."""
    if N < 1:
        raise ModelError("N must be at least 1")
    data = _section_data(ring, sections)
    if not data:
        raise ModelError("need at least one section")
    loci = base_locus_q(ring.model, [items for *_, items in data])
    if loci:
        raise BaseLocusError(loci)
    upsilon = max(rpow(norm, Fraction(1, deg)) for deg, _, norm, _ in data)
    d = ring.model.arithmetic_dim
    e_z = Fraction((d + 2) * (d - 1), 2)
    e_q = Fraction(d * (d - 1), 2)
    degrees = list(range(1, N + 1))
    lz, lq, ranks, exact = [], [], [], True
    certs = []
    for n in degrees:
        comp = ring.component(n)
        z = lambda_z_exact(comp, cap)
        q = lambda_q_exact(comp, cap)
        exact = exact and z.exact and q.exact
        lz.append(z.value if z.exact else z.upper)
        lq.append(q.value if q.exact else q.upper)
        ranks.append(comp.rank)
        certs.append(z)
    bz = [v / (rpow(Fraction(n), e_z) * rpow(upsilon, n)) for n, v in zip(degrees, lz)]
    bq = [v / (rpow(Fraction(n), e_q) * rpow(upsilon, n)) for n, v in zip(degrees, lq)]

    def shape_ok(b):
        return all(x <= b[0] for x in b) and all(y <= x for x, y in zip(b[1:], b[2:]))

    report = growth_report("theoremA", degrees, lz, bz[0], e_z, upsilon, bz[0], 1)
    extra = {
        "arithmetic_dim": d,
        "exponent_z": str(e_z),
        "exponent_q": str(e_q),
        "ranks": ranks,
        "lambda_q": [number_to_json(x) for x in lq],
        "B_z": [number_to_json(x) for x in bz],
        "B_q": [number_to_json(x) for x in bq],
        "z_shape_ok": shape_ok(bz),
        "q_shape_ok": shape_ok(bq),
        "exact": exact,
        "section_norms": [number_to_json(norm) for _, _, norm, _ in data],
        "strictly_small": [bool(v < 1) for v in lz],
    }
    verdict = report.verdict and extra["z_shape_ok"] and extra["q_shape_ok"] and exact
    return replace(report, verdict=verdict, extra=extra)


# ---------------------------------------------------------------------------
# strictly small basis search

@dataclass(frozen=True)
class DegreeResult:
    degree: int
    rank: int
    lambda_z: Number
    strictly_small: bool
    certificate: SmallBasisCertificate | None
    witness: dict | None

    def to_json(self) -> dict:
        return {
            "n": self.degree,
            "rank": self.rank,
            "lambda_z": number_to_json(self.lambda_z),
            "strictly_small": self.strictly_small,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "witness": self.witness,
        }


@dataclass(frozen=True)
class CorollaryBReport:
    n0: int
    hypothesis_holds: bool
    hypothesis_exact: bool
    obstruction: tuple[Locus, ...]
    span_indices: tuple[int, ...]
    degrees: tuple[DegreeResult, ...]

    @property
    def verdict(self) -> bool:
        """True unless the span hypothesis holds and some degree still lacks a strictly small basis."""
        return (not self.hypothesis_holds) or all(d.strictly_small for d in self.degrees)

    def to_json(self) -> dict:
        return {
            "n0": self.n0,
            "hypothesis_holds": self.hypothesis_holds,
            "hypothesis_exact": self.hypothesis_exact,
            "obstruction": [l.name for l in self.obstruction],
            "span_indices": list(self.span_indices),
            "degrees": [d.to_json() for d in self.degrees],
            "verdict": self.verdict,
        }


def _strict_monomials(ring: NormedGradedRing, n: int) -> list[int]:
    model = ring.model
    d = ring.model_degree(n)
    if model.space == "P1":
        lat = strictly_small_span(model, d, strict=True)
        return [next(i for i, x in enumerate(row) if x) for row in lat.basis]
    return [i for i, w in enumerate(ring.weights(n)) if w < 1]


def corollary_b_check(ring: NormedGradedRing, n0: int, N: int, cap: int = DEFAULT_VECTOR_CAP) -> CorollaryBReport:
    if n0 < 1 or N < 1:
        raise ModelError("degrees start at 1")
    idx = _strict_monomials(ring, n0)
    mons = ring.monomials(n0)
    loci = base_locus_q(ring.model, [mons[i] for i in idx])
    # on P1 the strict span is monomial; on P2 only monomial sections are tested
    exact = ring.model.space == "P1"
    results = []
    for n in range(1, N + 1):
        comp = ring.component(n)
        lz = lambda_z_exact(comp, cap)
        value = lz.value if lz.exact else lz.upper
        small = lz.exact and value < 1 and all(x < 1 for x in lz.certificate.norms)
        if small and not verify_certificate(lz.certificate, comp):
            small = False
        witness = None
        if not small:
            worst = max(range(len(lz.certificate.norms)), key=lambda i: lz.certificate.norms[i])
            witness = {
                "lambda_z": number_to_json(value),
                "vector": [str(x) for x in lz.certificate.vectors[worst]],
                "norm": number_to_json(lz.certificate.norms[worst]),
                "method": lz.method,
            }
            if lz.method == "coordinate-weights":
                v = lz.certificate.vectors[worst]
                i = next(k for k, x in enumerate(v) if x)
                witness["forced_monomial"] = list(ring.monomials(n)[i])
        results.append(DegreeResult(n, comp.rank, value, small, lz.certificate if small else None, witness))
    return CorollaryBReport(n0, not loci, exact, loci, tuple(idx), tuple(results))
