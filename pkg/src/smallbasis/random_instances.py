"""Seeded generators for the randomized property suites."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .chain import ChainSpec
from .lattice import Lattice, ModuleMap, rank
from .norms import NormedModule, Polyhedral, WeightedSup


def random_weight(rng: random.Random, lo: Fraction = Fraction(1, 3), hi: Fraction = Fraction(3)) -> Fraction:
    den = rng.randint(1, 6)
    num = rng.randint(max(1, -(-lo.numerator * den // lo.denominator)), int(hi * den))
    return Fraction(num, den)


def random_full_rank(rng: random.Random, rows: int, cols: int, bound: int = 3) -> list[list[int]]:
    while True:
        m = [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)]
        if rank(m) == rows:
            return m


def random_polyhedral(rng: random.Random, dim: int, extra: int = 2, bound: int = 3) -> Polyhedral:
    count = dim + rng.randint(0, extra)
    while True:
        fs = [[rng.randint(-bound, bound) for _ in range(dim)] for _ in range(count)]
        if rank(fs) == dim:
            return Polyhedral(tuple(tuple(Fraction(x) for x in f) for f in fs))


def random_weighted_sup(rng: random.Random, dim: int) -> WeightedSup:
    return WeightedSup(tuple(random_weight(rng) for _ in range(dim)))


def random_sublattice(rng: random.Random, parent: Lattice, r: int, bound: int = 2) -> Lattice:
    """Rank-r sublattice generated by random integer combinations of the parent basis."""
    coeffs = random_full_rank(rng, r, parent.rank, bound)
    rows = [[sum(c * b[j] for c, b in zip(row, parent.basis)) for j in range(parent.ambient_dim)]
            for row in coeffs]
    return Lattice.from_generators(rows, parent.ambient_dim)


def sandwich_instances(seed: int, count: int = 150, poly_count: int = 50) -> list[NormedModule]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        k = rng.randint(1, 3)
        r = rng.randint(1, k)
        norm = random_weighted_sup(rng, k)
        lat = Lattice.standard(k) if r == k and rng.random() < 0.3 else \
            Lattice.from_generators(random_full_rank(rng, r, k), k)
        out.append(NormedModule(lat, norm))
    for _ in range(poly_count):
        lat = Lattice.from_generators(random_full_rank(rng, 2, 2), 2)
        out.append(NormedModule(lat, random_polyhedral(rng, 2)))
    return out


@dataclass(frozen=True)
class FourSpaceInstance:
    norm: Polyhedral
    t: Lattice
    u: Lattice
    w: Lattice
    vectors: tuple[tuple[int, ...], ...]


def four_space_instances(seed: int, count: int = 100, vectors: int = 20) -> list[FourSpaceInstance]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        k = rng.randint(2, 5)
        norm = random_polyhedral(rng, k)
        w_rank = rng.randint(1, k)
        w = random_sublattice(rng, Lattice.standard(k), w_rank)
        u_rank = rng.randint(0, w_rank)
        u = random_sublattice(rng, w, u_rank) if u_rank else Lattice.zero(k)
        t_rank = rng.randint(0, u_rank)
        t = random_sublattice(rng, u, t_rank) if t_rank else Lattice.zero(k)
        vs = []
        for _ in range(vectors):
            c = [rng.randint(-4, 4) for _ in range(w.rank)]
            vs.append(tuple(sum(ci * b[j] for ci, b in zip(c, w.basis)) for j in range(k)))
        out.append(FourSpaceInstance(norm, t, u, w, tuple(vs)))
    return out


def random_chain(rng: random.Random, max_length: int = 4, max_rank: int = 4) -> ChainSpec:
    length = rng.randint(1, max_length)
    ranks = sorted(rng.randint(1, max_rank) for _ in range(length))
    modules = []
    for r in ranks:
        norm = random_weighted_sup(rng, r) if rng.random() < 0.5 else random_polyhedral(rng, r)
        modules.append(NormedModule(Lattice.standard(r), norm))
    maps = []
    for a, b in zip(modules, modules[1:]):
        mat = random_full_rank(rng, a.rank, b.rank, 2)
        maps.append(ModuleMap(a.module, b.module, tuple(tuple(row) for row in mat)))
    return ChainSpec(tuple(modules), tuple(maps))


def chain_instances(seed: int, count: int = 100) -> list[ChainSpec]:
    rng = random.Random(seed)
    return [random_chain(rng) for _ in range(count)]
