"""Lifting small bases through filtrations, and growth transfer for graded modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .lambdas import DEFAULT_VECTOR_CAP, LambdaResult, lambda_q_exact
from .lattice import (
    ContainmentError,
    Lattice,
    ModuleMap,
    Quotient,
    det,
    quotient_module,
    solve_left,
)
from .norms import (
    NormedModule,
    QuotientNorm,
    SubNorm,
    eval_norm,
    operator_norm,
    quotient_norm_minimizer,
)
from .reals import Number, approx, number_to_json, rpow


@dataclass(frozen=True)
class ChainSpec:
    """Normed modules M_1, ..., M_n with maps alpha_i : M_{i-1} -> M_i (maps[i-1])."""

    modules: tuple[NormedModule, ...]
    maps: tuple[ModuleMap, ...] = ()

    def __post_init__(self):
        mods = tuple(self.modules)
        maps = tuple(self.maps)
        if not mods:
            raise ValueError("a chain needs at least one module")
        if len(maps) != len(mods) - 1:
            raise ValueError("need exactly one map between consecutive modules")
        for i, a in enumerate(maps):
            if a.domain != mods[i].module or not a.codomain.same_as(mods[i + 1].module):
                raise ValueError(f"map {i + 1} does not connect modules {i + 1} and {i + 2}")
            if not a.is_injective_q():
                raise ValueError(f"map {i + 1} is not injective over Q")
        object.__setattr__(self, "modules", mods)
        object.__setattr__(self, "maps", maps)

    @property
    def length(self) -> int:
        return len(self.modules)

    @property
    def top(self) -> NormedModule:
        return self.modules[-1]

    def phi(self, i: int) -> ModuleMap:
        """Composite M_i -> M_n (0-based i)."""
        top = self.top.module
        if i == self.length - 1:
            return ModuleMap(self.modules[i].module, top, self.modules[i].module.basis)
        m = self.maps[i]
        for a in self.maps[i + 1:]:
            m = m.then(a)
        return ModuleMap(m.domain, top, m.matrix)


@dataclass(frozen=True)
class StageTrace:
    index: int  # 1-based position of the filtration step
    quotient_rank: int
    lambda_original: Number  # lambda_Q of M_i / alpha_i(M_{i-1}) with the original norm
    op_norm: Number  # ||phi_i|| (1 for the top stage)
    lambda_pushed: Number  # lambda_Q of N_i / N_{i-1} inside M_n / N_{i-1}
    claim_ok: bool  # lambda_pushed <= op_norm * lambda_original
    e_norms: tuple
    g_norms: tuple
    running_bound: Number
    exact: bool

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "quotient_rank": self.quotient_rank,
            "lambda_original": number_to_json(self.lambda_original),
            "op_norm": number_to_json(self.op_norm),
            "lambda_pushed": number_to_json(self.lambda_pushed),
            "claim_ok": self.claim_ok,
            "e_norms": [number_to_json(x) for x in self.e_norms],
            "g_norms": [number_to_json(x) for x in self.g_norms],
            "running_bound": number_to_json(self.running_bound),
            "exact": self.exact,
        }


@dataclass(frozen=True)
class ChainBoundResult:
    bound: Number
    basis: tuple[tuple[Fraction, ...], ...]
    norms: tuple
    trace: tuple[StageTrace, ...]
    exact: bool

    @property
    def max_norm(self) -> Number:
        return max(self.norms) if self.norms else Fraction(0)

    def is_q_basis(self, m: Lattice) -> bool:
        if len(self.basis) != m.rank:
            return False
        if not self.basis:
            return True
        if not all(m.contains(v) for v in self.basis):
            return False
        return det([m.coords(v) for v in self.basis]) != 0

    def to_json(self) -> dict:
        return {
            "bound": number_to_json(self.bound),
            "max_norm": number_to_json(self.max_norm),
            "basis": [[str(x) for x in v] for v in self.basis],
            "norms": [number_to_json(x) for x in self.norms],
            "exact": self.exact,
            "trace": [t.to_json() for t in self.trace],
        }


def _lam_value(res: LambdaResult) -> Number:
    return res.value if res.exact else res.upper


@dataclass
class _Space:
    """M_n / N for a sublattice N, with its quotient norm; N = 0 uses M_n directly."""

    top: NormedModule
    quotient: Quotient | None

    @property
    def norm(self):
        if self.quotient is None:
            return self.top.norm
        return QuotientNorm(self.quotient.proj, self.top.norm)

    def proj(self, v: Sequence) -> tuple[Fraction, ...]:
        if self.quotient is None:
            return tuple(Fraction(x) for x in v)
        return self.quotient.proj.apply(v)

    def lift(self, t: Sequence) -> tuple[Fraction, ...]:
        if self.quotient is None:
            return tuple(Fraction(x) for x in t)
        return self.quotient.lift(t)

    @property
    def ambient_dim(self) -> int:
        if self.quotient is None:
            return self.top.module.ambient_dim
        return self.quotient.lattice.ambient_dim


def _space(top: NormedModule, lower: Lattice | None) -> _Space:
    if lower is None or lower.rank == 0:
        return _Space(top, None)
    return _Space(top, quotient_module(top.module, lower.basis))


def _floor(x: Fraction) -> int:
    return math.floor(x)


@dataclass(frozen=True)
class _StageOut:
    basis: list  # integral vectors of M_n
    norms: list  # norms in the stage space
    e_norms: tuple
    g_norms: tuple
    lam: LambdaResult
    sub_rank: int
    coefficients: tuple


def _stage(top: NormedModule, lower: Lattice | None, sub: Lattice, upper_basis: list,
           cap: int) -> _StageOut:
    """One rounding step: basis of M_n / lower from a basis of M_n / sub (lifted) and an
    optimal basis of sub / lower."""
    prev = _space(top, lower)
    norm_prev = prev.norm
    gens = [prev.proj(b) for b in sub.basis]
    s_lat = Lattice.from_generators(gens, prev.ambient_dim)
    lam = lambda_q_exact(NormedModule(s_lat, norm_prev), cap)
    e_small = list(lam.certificate.vectors)
    e_hat = [tuple(int(x) for x in prev.lift(e)) for e in e_small]
    e_norms = tuple(lam.certificate.norms)

    g_vectors = []
    g_norms = []
    coeffs = []
    if upper_basis:
        q_k = quotient_module(top.module, sub.basis)
        norm_k = QuotientNorm(q_k.proj, top.norm)
        for f1 in upper_basis:
            t = q_k.proj.apply(f1)
            _, f2 = quotient_norm_minimizer(norm_k, t)
            diff = prev.proj(tuple(Fraction(a) - b for a, b in zip(f1, f2)))
            a = solve_left(e_small, diff) if e_small else []
            if a is None:
                raise ArithmeticError("rounding difference left the span of the sub-basis")
            g = list(Fraction(x) for x in f1)
            for ai, eh in zip(a, e_hat):
                fl = _floor(ai)
                if fl:
                    g = [x - fl * y for x, y in zip(g, eh)]
            g = tuple(g)
            g_vectors.append(g)
            g_norms.append(eval_norm(norm_prev, prev.proj(g)))
            coeffs.append(tuple(a))
    basis = [tuple(Fraction(x) for x in e) for e in e_hat] + g_vectors
    norms = list(e_norms) + g_norms
    return _StageOut(basis, norms, e_norms, tuple(g_norms), lam, s_lat.rank, tuple(coeffs))


def _original_quotients(c: ChainSpec, cap: int):
    """lambda_Q and rank of Q_i = M_i / alpha_i(M_{i-1}) with the original norms."""
    out = []
    for i, m in enumerate(c.modules):
        if i == 0:
            nm = m
        else:
            a = c.maps[i - 1]
            q = quotient_module(m.module, list(a.matrix))
            nm = NormedModule(q.lattice, QuotientNorm(q.proj, m.norm))
        out.append((lambda_q_exact(nm, cap), nm.rank))
    return out


def chain_lambda_bound(c: ChainSpec, cap: int = DEFAULT_VECTOR_CAP) -> ChainBoundResult:
    n = c.length
    top = c.top
    k = top.module.ambient_dim
    phis = [c.phi(i) for i in range(n)]
    images = [Lattice.from_generators(phis[i].matrix, k) for i in range(n - 1)] + [top.module]
    originals = _original_quotients(c, cap)

    bound: Number = Fraction(0)
    op_norms = []
    for i in range(n):
        lam_i, rk_i = originals[i]
        if i == n - 1:
            op_norms.append(Fraction(1))
            bound = bound + _lam_value(lam_i)
        else:
            op = operator_norm(phis[i], c.modules[i].norm, top.norm)
            op_norms.append(op)
            bound = bound + op * _lam_value(lam_i) * rk_i

    basis: list = []
    trace = []
    exact = all(lam.exact for lam, _ in originals)
    for i in range(n - 1, -1, -1):
        lower = images[i - 1] if i >= 1 else None
        out = _stage(top, lower, images[i], basis, cap)
        basis = out.basis
        exact = exact and out.lam.exact
        lam_orig = _lam_value(originals[i][0])
        lam_push = _lam_value(out.lam)
        running = max(out.norms) if out.norms else Fraction(0)
        trace.append(StageTrace(i + 1, originals[i][1], lam_orig, op_norms[i], lam_push,
                                lam_push <= op_norms[i] * lam_orig, out.e_norms, out.g_norms,
                                running, out.lam.exact))
    norms = tuple(eval_norm(top.norm, v) for v in basis)
    return ChainBoundResult(bound, tuple(basis), norms, tuple(reversed(trace)), exact)


@dataclass(frozen=True)
class RoundLiftResult:
    basis: tuple[tuple[Fraction, ...], ...]  # e vectors then g vectors
    e_vectors: tuple
    g_vectors: tuple
    g_norms: tuple
    coefficients: tuple
    lambda_quotient: Number
    lambda_sub: Number
    sub_rank: int

    @property
    def bound(self) -> Number:
        return self.lambda_quotient + self.lambda_sub * self.sub_rank


def round_lift(m1: NormedModule, m2: NormedModule, alpha: ModuleMap,
               quotient_basis: Sequence[Sequence] | None = None,
               cap: int = DEFAULT_VECTOR_CAP) -> RoundLiftResult:
    """Extend an optimal Q-basis of alpha(M_1) to a Q-basis of M_2 by rounded lifts.

    ``quotient_basis`` optionally fixes the basis f_j of M_2 / alpha(M_1) (quotient
    coordinates); by default an optimal one is computed.
    """
    if alpha.domain != m1.module or not alpha.codomain.same_as(m2.module):
        raise ValueError("alpha does not connect the two modules")
    if not alpha.is_injective_q():
        raise ValueError("alpha is not injective over Q")
    sub = Lattice.from_generators(alpha.matrix, m2.module.ambient_dim)
    q = quotient_module(m2.module, sub.basis)
    qn = NormedModule(q.lattice, QuotientNorm(q.proj, m2.norm))
    lam_q = lambda_q_exact(qn, cap)
    if quotient_basis is None:
        fs = list(lam_q.certificate.vectors)
    else:
        fs = [tuple(Fraction(x) for x in f) for f in quotient_basis]
        for f in fs:
            if not q.lattice.contains(f):
                raise ContainmentError("quotient basis vector is not in the quotient lattice")
    lifts = [tuple(int(x) for x in q.lift(f)) for f in fs]
    out = _stage(m2, None, sub, lifts, cap)
    e_count = len(out.e_norms)
    return RoundLiftResult(tuple(out.basis), tuple(out.basis[:e_count]), tuple(out.basis[e_count:]),
                           out.g_norms, out.coefficients, _lam_value(lam_q), _lam_value(out.lam),
                           out.sub_rank)


# ---------------------------------------------------------------------------
# graded growth

@dataclass(frozen=True)
class GrowthTransfer:
    B: Number
    A_prime: Number
    terms: tuple


def graded_growth_transfer(A, e, upsilon, generators: Sequence[tuple[int, Number]], h: int = 1) -> GrowthTransfer:
    """B = max_k ||m_k|| upsilon^(-a_k/h) / h^e and A' = A B."""
    if not generators:
        raise ValueError("need at least one generator")
    if h < 1:
        raise ValueError("h must be at least 1")
    if A <= 0 or upsilon <= 0:
        raise ValueError("constants must be positive")
    e = Fraction(e)
    he = rpow(Fraction(h), e)
    terms = []
    for a, norm in generators:
        if a < 0:
            raise ValueError("generator degrees must be nonnegative")
        terms.append(norm * rpow(upsilon, Fraction(-a, h)) / he)
    B = max(terms)
    return GrowthTransfer(B, A * B, tuple(terms))


@dataclass(frozen=True)
class GrowthBoundReport:
    label: str
    degrees: tuple[int, ...]
    values: tuple
    A: Number
    e: Fraction
    upsilon: Number
    constant: Number  # the B (or A') multiplying n^e upsilon^n
    bounds: tuple
    ratios: tuple  # values / (n^e upsilon^n)
    fitted: tuple  # running max of ratios
    checked_from: int  # verdict covers degrees >= this
    verdict: bool
    extra: dict = field(default_factory=dict)

    def rows(self) -> list[dict]:
        return [{"n": n, "lambda": v, "bound": b, "ratio": r}
                for n, v, b, r in zip(self.degrees, self.values, self.bounds, self.ratios)]

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "A": number_to_json(self.A),
            "e": str(self.e),
            "upsilon": number_to_json(self.upsilon),
            "constant": number_to_json(self.constant),
            "checked_from": self.checked_from,
            "verdict": self.verdict,
            "rows": [{"n": r["n"], "lambda": number_to_json(r["lambda"]),
                      "bound": number_to_json(r["bound"]), "ratio": number_to_json(r["ratio"])}
                     for r in self.rows()],
            "extra": self.extra,
        }

    def csv_rows(self) -> list[list[str]]:
        out = [["n", "lambda", "bound", "ratio", "lambda_approx"]]
        for r in self.rows():
            out.append([str(r["n"]), _s(r["lambda"]), _s(r["bound"]), _s(r["ratio"]), approx(r["lambda"])])
        return out


def _s(x) -> str:
    return str(x) if not isinstance(x, Fraction) else str(x)


def growth_report(label: str, degrees, values, A, e, upsilon, constant, checked_from: int = 1,
                  extra: dict | None = None) -> GrowthBoundReport:
    e = Fraction(e)
    scales = [rpow(Fraction(n), e) * rpow(upsilon, n) for n in degrees]
    bounds = tuple(constant * s for s in scales)
    ratios = tuple(v / s for v, s in zip(values, scales))
    fitted = []
    best = None
    for r in ratios:
        best = r if best is None or r > best else best
        fitted.append(best)
    verdict = all(v <= b for n, v, b in zip(degrees, values, bounds) if n >= checked_from)
    return GrowthBoundReport(label, tuple(degrees), tuple(values), A, e, upsilon, constant, bounds,
                             ratios, tuple(fitted), checked_from, verdict, extra or {})


def ideal_quotient_growth(ring, I, J, K, degrees: Sequence[int], A=None, e=0, upsilon=None,
                          cap: int = DEFAULT_VECTOR_CAP) -> GrowthBoundReport:
    """Growth of lambda_Q((K/J)_n) from the hypothesis on R' = R/I.

    ``ring`` must provide ``component(n)``, ``norm(n)``, ``multiply`` and ``upsilon()``;
    ideals must provide ``sublattice(ring, n)`` and monomial ``generators``.
    """
    degrees = sorted(set(int(n) for n in degrees))
    if not degrees or degrees[0] < 1:
        raise ValueError("degrees must be positive")
    for n in degrees:
        jn, kn = J.sublattice(ring, n), K.sublattice(ring, n)
        if not kn.contains_lattice(jn):
            raise ContainmentError(f"J is not contained in K in degree {n}")
        for a in range(0, n + 1):
            for x in I.sublattice(ring, a).basis:
                for y in K.sublattice(ring, n - a).basis:
                    if not jn.contains(ring.multiply(a, x, n - a, y)):
                        raise ContainmentError(f"I*K is not contained in J in degree {n}")

    def component_lambda(n, sub_ideal, quot_ideal):
        rn = ring.component(n)
        top = sub_ideal.sublattice(ring, n) if sub_ideal is not None else rn.module
        inc = ModuleMap.inclusion(top, rn.module)
        q = quotient_module(top, quot_ideal.sublattice(ring, n).basis)
        nm = NormedModule(q.lattice, QuotientNorm(q.proj, SubNorm(inc, ring.norm(n))))
        return lambda_q_exact(nm, cap), q, nm

    # hypothesis constants for R' = R/I
    e = Fraction(e)
    if upsilon is None:
        upsilon = ring.upsilon()
    hyp = []
    for n in degrees:
        lam, _, _ = component_lambda(n, None, I)
        hyp.append(_lam_value(lam))
    hyp_ratios = [v / (rpow(Fraction(n), e) * rpow(upsilon, n)) for n, v in zip(degrees, hyp)]
    measured_A = max(hyp_ratios) if hyp_ratios else Fraction(0)
    if A is None:
        A = measured_A if measured_A > 0 else Fraction(1)

    # generators of K/J as an R'-module: monomial generators of K outside J
    gens = []
    for g in K.generators:
        a = ring.degree_of(g)
        if a < 1:
            a_deg = 0
        else:
            a_deg = a
        vec = ring.monomial_vector(g)
        if J.sublattice(ring, a_deg).contains(vec):
            continue
        if a_deg == 0:
            gens.append((0, Fraction(1)))
            continue
        _, q, nm = component_lambda(a_deg, K, J)
        gens.append((a_deg, eval_norm(nm.norm, q.proj.apply(vec))))
    values = []
    exact = True
    for n in degrees:
        lam, _, _ = component_lambda(n, K, J)
        exact = exact and lam.exact
        values.append(_lam_value(lam))
    if not gens:
        transfer = GrowthTransfer(Fraction(0), Fraction(0), ())
    else:
        transfer = graded_growth_transfer(A, e, upsilon, gens, 1)
    start = max([a for a, _ in gens], default=0) + 1
    extra = {
        "measured_A": number_to_json(measured_A),
        "hypothesis_values": [number_to_json(v) for v in hyp],
        "hypothesis_holds": all(v <= A * rpow(Fraction(n), e) * rpow(upsilon, n)
                                for n, v in zip(degrees, hyp)),
        "generators": [[a, number_to_json(x)] for a, x in gens],
        "B": number_to_json(transfer.B),
        "exact": exact,
    }
    return growth_report("ideal-quotient", degrees, values, A, e, upsilon, transfer.A_prime,
                         start, extra)
