"""Slow, direct reference computations used to check the optimised code.

Nothing here calls into flatmetrics, cghp or ghp.  ``ghp_grid`` uses the LP
solver, but with a formulation of its own (explicit Hall cut constraints in
place of slack-linearised total variation).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import lcm

from .errors import BudgetExceeded
from .lp import LpProblem, lp_solve

PROKHOROV_MAX_POINTS = 12
CGHP_MAX_CELLS = 16


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def prokhorov_bruteforce(dist, mu, nu) -> Fraction:
    """Prokhorov distance straight from the subset definition.

    ``eps`` passes when ``mu(A) <= nu(A^eps) + eps`` and the mirrored
    condition hold for every subset ``A`` (closed neighbourhoods).  The least
    passing ``eps`` lies in the finite set of distances and mass differences
    ``mu(A) - nu(B)``; midpoints are thrown in as well.  Passing is monotone in
    ``eps``, so the sorted candidates are bisected.
    """
    n = len(mu)
    if n > PROKHOROV_MAX_POINTS:
        raise BudgetExceeded("prokhorov oracle", n, PROKHOROV_MAX_POINTS)
    d = [[_frac(x) for x in row] for row in dist]
    mu = [_frac(x) for x in mu]
    nu = [_frac(x) for x in nu]
    full = 1 << n

    def total(m, A):
        return sum((m[i] for i in range(n) if A >> i & 1), Fraction(0))

    mu_of = [total(mu, A) for A in range(full)]
    nu_of = [total(nu, A) for A in range(full)]
    cands = {Fraction(0)}
    cands |= {d[i][j] for i in range(n) for j in range(n)}
    cands |= {abs(a - b) for a in mu_of for b in nu_of}
    cands = sorted(cands)
    cands = sorted(set(cands) | {(a + b) / 2 for a, b in zip(cands, cands[1:])})

    def nbhd(A, eps):
        out = 0
        for j in range(n):
            if any(A >> i & 1 and d[i][j] <= eps for i in range(n)):
                out |= 1 << j
        return out

    def passes(eps):
        for A in range(1, full):
            B = nbhd(A, eps)
            if mu_of[A] > nu_of[B] + eps or nu_of[A] > mu_of[B] + eps:
                return False
        return True

    # the largest candidate is at least both total masses, so it passes
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if passes(cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


def _scale(values):
    """Common denominator for a list of Fractions."""
    L = 1
    for v in values:
        L = lcm(L, v.denominator)
    return L


def cghp_bruteforce(dX, rootX, mX, dY, rootY, mY) -> Fraction:
    """Minimum of ``max(dis(R)/2, c(R))`` over every root-containing correspondence.

    The coupling term uses the max-flow/min-cut form

        c(R) = max(|mu|, |nu|) - min over A of (mu(X - A) + nu(R(A))),

    evaluated over all subsets ``A``.  All arithmetic is done on integers
    after clearing denominators.
    """
    n, m = len(mX), len(mY)
    N = n * m
    if N > CGHP_MAX_CELLS:
        raise BudgetExceeded("cghp oracle", N, CGHP_MAX_CELLS)
    dX = [[_frac(x) for x in r] for r in dX]
    dY = [[_frac(x) for x in r] for r in dY]
    mX = [_frac(x) for x in mX]
    mY = [_frac(x) for x in mY]
    L = _scale([x for r in dX for x in r] + [x for r in dY for x in r] + mX + mY)
    iX = [[int(x * L) for x in r] for r in dX]
    iY = [[int(x * L) for x in r] for r in dY]
    uX = [int(x * L) for x in mX]
    uY = [int(x * L) for x in mY]
    totX, totY = sum(uX), sum(uY)

    cell = [(i, j) for i in range(n) for j in range(m)]
    # dis over masks, built by adding the highest bit
    dis = [0] * (1 << N)
    for mask in range(1, 1 << N):
        h = mask.bit_length() - 1
        rest = mask ^ (1 << h)
        i, j = cell[h]
        best = dis[rest]
        r = rest
        while r:
            k = (r & -r).bit_length() - 1
            r &= r - 1
            a, b = cell[k]
            w = abs(iX[i][a] - iY[j][b])
            if w > best:
                best = w
        dis[mask] = best

    nuY = [sum(uY[j] for j in range(m) if B >> j & 1) for B in range(1 << m)]
    muX_out = [totX - sum(uX[i] for i in range(n) if A >> i & 1) for A in range(1 << n)]
    rowfull = (1 << m) - 1
    need = 1 << (rootX * m + rootY)

    best = None
    for mask in range(1 << N):
        if not mask & need:
            continue
        rows = [(mask >> (i * m)) & rowfull for i in range(n)]
        if not all(rows):
            continue
        img = [0] * (1 << n)
        for A in range(1, 1 << n):
            low = (A & -A).bit_length() - 1
            img[A] = img[A & (A - 1)] | rows[low]
        if img[-1] != rowfull:
            continue
        flow = min(muX_out[A] + nuY[img[A]] for A in range(1 << n))
        c2 = 2 * (max(totX, totY) - flow)
        val = max(dis[mask], c2)  # twice the objective, scaled by L
        if best is None or val < best:
            best = val
    return Fraction(best, 2 * L)


# ---------------------------------------------------------------------------
# localized predicate


def _ball(d, root, r):
    return [i for i in range(len(d)) if d[root][i] <= r]


def _hall_value(muX, R, lo, hi):
    """min over nu' in [lo, hi] of max(|mu|, |nu'|) - maxflow(R; mu, nu') as an LP.

    Variables: nu'_j (m of them), f, t.  The flow value ``f`` is bounded by
    every cut ``mu(A^c) + nu'(R(A))``.
    """
    n, m = len(muX), len(lo)
    V, F, T = 0, m, m + 1
    obj = [0] * (m + 2)
    obj[T] = 1
    lp = LpProblem(m + 2, obj)
    totX = sum(muX, Fraction(0))
    lp.add({T: 1, F: 1}, ">=", totX)
    row = {T: 1, F: 1}
    for j in range(m):
        row[V + j] = -1
    lp.add(row, ">=", 0)
    for A in range(1 << n):
        img = {j for i in range(n) if A >> i & 1 for j in range(m) if (i, j) in R}
        out = sum((muX[i] for i in range(n) if not A >> i & 1), Fraction(0))
        c = {F: 1}
        for j in img:
            c[V + j] = -1
        lp.add(c, "<=", out)
    lp.lower = list(lo) + [0, 0]
    lp.upper = list(hi) + [None, None]
    res = lp_solve(lp, "rational")
    return res.value


def localized_predicate(dX, rootX, mX, dY, rootY, mY, eps) -> bool:
    """``a(eps, 1/eps; X, Y) < eps / 2`` from first principles.

    Enumerates supports ``S`` of ``Y`` containing the ball of radius
    ``1/eps - eps`` and, for each, the maximal relations between the
    ``1/eps``-ball of ``X`` and ``S`` with distortion below ``eps``.  The
    coupling term with the free mass choice is the Hall LP above.
    """
    eps = _frac(eps)
    r = 1 / eps
    dX = [[_frac(x) for x in row] for row in dX]
    dY = [[_frac(x) for x in row] for row in dY]
    mX = [_frac(x) for x in mX]
    mY = [_frac(x) for x in mY]
    xb = _ball(dX, rootX, r)
    inner = set(_ball(dY, rootY, r - eps))
    must = inner | {rootY}
    rest = [j for j in range(len(dY)) if j not in must]
    for k in range(len(rest) + 1):
        for extra in combinations(rest, k):
            S = sorted(must | set(extra))
            if len(xb) * len(S) > CGHP_MAX_CELLS:
                raise BudgetExceeded("ghp grid oracle", len(xb) * len(S), CGHP_MAX_CELLS)
            if _support_ok(dX, xb, rootX, mX, dY, S, rootY, mY, inner, eps):
                return True
    return False


def _support_ok(dX, xb, rootX, mX, dY, S, rootY, mY, inner, eps) -> bool:
    n, m = len(xb), len(S)
    cells = [(a, b) for a in range(n) for b in range(m)]
    N = len(cells)
    ra, rb = xb.index(rootX), S.index(rootY)

    def w(c1, c2):
        (a1, b1), (a2, b2) = cells[c1], cells[c2]
        return abs(dX[xb[a1]][xb[a2]] - dY[S[b1]][S[b2]])

    good = [[w(k, l) < eps for l in range(N)] for k in range(N)]
    valid = []
    for mask in range(1 << N):
        ks = [k for k in range(N) if mask >> k & 1]
        if ra * m + rb not in ks:
            continue
        if not all(good[k][l] for k in ks for l in ks):
            continue
        if {cells[k][0] for k in ks} != set(range(n)) or {cells[k][1] for k in ks} != set(range(m)):
            continue
        valid.append(mask)
    vs = set(valid)
    muX = [mX[i] for i in xb]
    lo = [mY[S[b]] if S[b] in inner else Fraction(0) for b in range(m)]
    hi = [mY[S[b]] for b in range(m)]
    for mask in valid:
        if any(not mask >> k & 1 and (mask | 1 << k) in vs for k in range(N)):
            continue  # not maximal; its maximal extensions do at least as well
        R = {cells[k] for k in range(N) if mask >> k & 1}
        if _hall_value(muX, R, lo, hi) < eps / 2:
            return True
    return False


def ghp_grid(X, Y, grid) -> dict:
    """``{eps: P(eps)}`` with ``P(eps)`` true iff both directions beat ``eps / 2``.

    ``X`` and ``Y`` are anything with ``dist``, ``root`` and ``mass``.
    """
    out = {}
    for e in grid:
        a = localized_predicate(X.dist, X.root, X.mass, Y.dist, Y.root, Y.mass, e)
        b = a and localized_predicate(Y.dist, Y.root, Y.mass, X.dist, X.root, X.mass, e)
        out[e] = a and b
    return out


def bracket_from_grid(table: dict) -> tuple:
    """``(lo, hi)``: the largest failing and the smallest passing grid point (0 / None if absent)."""
    fails = [e for e, ok in table.items() if not ok]
    passes = [e for e, ok in table.items() if ok]
    return (max(fails) if fails else 0), (min(passes) if passes else None)
