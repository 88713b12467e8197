"""Exact two-phase simplex over the rationals (Bland's rule)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class Infeasible(ValueError):
    pass


class Unbounded(ValueError):
    pass


@dataclass(frozen=True)
class LPResult:
    value: Fraction
    x: tuple[Fraction, ...]
    duals: tuple[Fraction, ...]  # y with y A = c on basic columns, y b = value
    basis: tuple[int, ...]


def _pivot(t: list[list[Fraction]], r: int, c: int) -> None:
    row = t[r]
    p = row[c]
    if p != 1:
        inv = 1 / p
        t[r] = row = [x * inv for x in row]
    for i, other in enumerate(t):
        if i != r:
            f = other[c]
            if f:
                t[i] = [x - f * y for x, y in zip(other, row)]


def _run(t, basis, cost, allowed, max_iter):
    """Maximise cost over the tableau restricted to ``allowed`` entering columns."""
    m = len(t)
    rhs = len(t[0]) - 1
    for _ in range(max_iter):
        # reduced costs r_j = c_j - c_B B^{-1} a_j
        cb = [cost[b] for b in basis]
        entering = None
        for j in allowed:
            rj = cost[j] - sum(cb[i] * t[i][j] for i in range(m) if cb[i])
            if rj > 0:
                entering = j
                break
        if entering is None:
            return
        best = None
        for i in range(m):
            a = t[i][entering]
            if a > 0:
                ratio = t[i][rhs] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise Unbounded("objective is unbounded")
        r = best[1]
        _pivot(t, r, entering)
        basis[r] = entering
    raise RuntimeError("simplex iteration limit reached")


def simplex_max(c: Sequence, a: Sequence[Sequence], b: Sequence, max_iter: int = 100000) -> LPResult:
    """Maximise c.x subject to A x = b, x >= 0 exactly."""
    m = len(a)
    n = len(c)
    c = [Fraction(x) for x in c]
    signs = []
    rows = []
    for i in range(m):
        bi = Fraction(b[i])
        s = -1 if bi < 0 else 1
        signs.append(s)
        rows.append([Fraction(x) * s for x in a[i]] + [Fraction(int(k == i)) for k in range(m)] + [bi * s])
    t = rows
    basis = [n + i for i in range(m)]
    total = n + m
    # phase 1: maximise -sum(artificials)
    cost1 = [Fraction(0)] * n + [Fraction(-1)] * m
    _run(t, basis, cost1, range(total), max_iter)
    if any(t[i][total] != 0 for i in range(m) if basis[i] >= n):
        raise Infeasible("constraints are infeasible")
    # drive artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= n:
            j = next((j for j in range(n) if t[i][j] != 0), None)
            if j is None:
                continue
            _pivot(t, i, j)
            basis[i] = j
        keep.append(i)
    t = [t[i] for i in keep]
    basis = [basis[i] for i in keep]
    cost2 = c + [Fraction(0)] * m
    _run(t, basis, cost2, range(n), max_iter)
    x = [Fraction(0)] * n
    for i, bi in enumerate(basis):
        x[bi] = t[i][total]
    value = sum(ci * xi for ci, xi in zip(c, x))
    # duals from the artificial block, which holds B^{-1} (of the sign-adjusted system)
    y = [Fraction(0)] * m
    for k in range(m):
        acc = Fraction(0)
        for i, bi in enumerate(basis):
            if c[bi]:
                acc += c[bi] * t[i][n + k]
        y[k] = acc * signs[k]
    return LPResult(value, tuple(x), tuple(y), tuple(basis))
