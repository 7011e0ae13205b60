"""Compact GHP distance between finite pointed measured spaces.

For finite spaces the distance is

    min over correspondences R containing the root pair of
        max(dis(R) / 2, c(R)),   c(R) = min_a D(a; mu_X, mu_Y) + a(R^c).

``c`` can only go down and ``dis`` only up when pairs are added to ``R``, so
for a threshold ``t`` on the distortion it is enough to look at maximal
relations with ``dis <= t``.  Those are maximal cliques (through the root
cell) of the graph on ``X x Y`` joining cells whose distance mismatch is at
most ``t``.  The exact search walks the distinct mismatch values upward and
stops once ``t / 2`` reaches the best value found.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from . import _numeric as num
from .errors import BudgetExceeded, ValidationError
from .flatmetrics import (FREE, SUB, FiniteMeasure, GroundSpace, TransportPlan, hausdorff_distance,
                          min_discrepancy_plan, prokhorov_distance, tv_vectors)
from .spaces import FiniteSpace, SubspaceSpec, ball_indices

DEFAULT_BUDGET = 25
EXACT = "exact"
BOUNDS = "bounds"


@dataclass(frozen=True)
class Correspondence:
    """A relation between ``range(n)`` and ``range(m)`` given as index pairs."""

    pairs: frozenset
    n: int
    m: int

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset((int(i), int(j)) for i, j in self.pairs))
        for i, j in self.pairs:
            if not (0 <= i < self.n and 0 <= j < self.m):
                raise ValidationError("pair out of range", (i, j))

    @classmethod
    def identity(cls, n: int) -> "Correspondence":
        return cls(frozenset((i, i) for i in range(n)), n, n)

    def covers(self) -> bool:
        return ({i for i, _ in self.pairs} == set(range(self.n))
                and {j for _, j in self.pairs} == set(range(self.m)))

    def has_pair(self, i: int, j: int) -> bool:
        return (i, j) in self.pairs

    def near(self) -> list:
        return [[(i, j) in self.pairs for j in range(self.m)] for i in range(self.n)]

    def sorted_pairs(self) -> list:
        return sorted(self.pairs)


def check_correspondence(R: Correspondence, X: FiniteSpace, Y: FiniteSpace, pointed: bool = True) -> None:
    if (R.n, R.m) != (X.n, Y.n):
        raise ValidationError("correspondence shape mismatch", (R.n, R.m, X.n, Y.n))
    if not R.covers():
        missing = [i for i in range(R.n) if all(p[0] != i for p in R.pairs)]
        raise ValidationError("relation does not cover both sides", tuple(missing))
    if pointed and (X.root, Y.root) not in R.pairs:
        raise ValidationError("root pair missing", (X.root, Y.root))


def distortion(R: Correspondence, X: FiniteSpace, Y: FiniteSpace):
    if not R.pairs:
        raise ValidationError("empty correspondence")
    P = R.sorted_pairs()
    best = num.zero(X.backend)
    for a, (x1, y1) in enumerate(P):
        dx, dy = X.dist[x1], Y.dist[y1]
        for x2, y2 in P[a + 1:]:
            w = abs(dx[x2] - dy[y2])
            if w > best:
                best = w
    return best


@dataclass(frozen=True)
class CouplingCost:
    cost: object
    plan: TransportPlan


def coupling_cost(R: Correspondence, X: FiniteSpace, Y: FiniteSpace, marginals: str = FREE) -> CouplingCost:
    """``min_a D(a; mu_X, mu_Y) + a(R^c)`` as one LP.

    ``marginals=SUB`` restricts to sub-couplings; the optimum does not change.
    """
    return _cost_near(R.near(), X, Y, marginals)


def _cost_near(near, X: FiniteSpace, Y: FiniteSpace, marginals: str = FREE) -> CouplingCost:
    z = num.zero(X.backend)
    if all(v == 0 for v in X.mass) and all(v == 0 for v in Y.mass):
        return CouplingCost(z, TransportPlan(tuple((z,) * Y.n for _ in range(X.n))))
    sol = min_discrepancy_plan(X.mass, Y.mass, Y.mass, near, X.backend, marginals)
    return CouplingCost(sol.value, sol.plan)


@dataclass(frozen=True)
class CghpCertificate:
    value: object
    lower: object
    upper: object
    correspondence: Correspondence
    plan: TransportPlan
    distortion_half: object
    coupling_term: object
    mode: str = EXACT
    stats: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def exact(self) -> bool:
        return self.mode == EXACT


def _same_backend(X: FiniteSpace, Y: FiniteSpace) -> tuple:
    if X.backend == Y.backend:
        return X, Y
    # mixed inputs fall back to floats
    return X.to_backend(num.FLOAT), Y.to_backend(num.FLOAT)


def _mismatch(X: FiniteSpace, Y: FiniteSpace):
    """Cell index ``k = i * m + j``; ``w[k][l] = |d_X(i, i') - d_Y(j, j')|``."""
    n, m = X.n, Y.n
    cells = [(i, j) for i in range(n) for j in range(m)]
    w = [[abs(X.dist[i][k] - Y.dist[j][l]) for (k, l) in cells] for (i, j) in cells]
    return cells, w


def _maximal_cliques(adj: list, start: int) -> list:
    """Maximal cliques (bitmasks) containing ``start``; Bron-Kerbosch with pivoting."""
    out = []

    def expand(R, P, Xs):
        if not P and not Xs:
            out.append(R)
            return
        PX = P | Xs
        # pivot: vertex with most neighbours in P
        u, best = -1, -1
        q = PX
        while q:
            v = (q & -q).bit_length() - 1
            q &= q - 1
            c = bin(adj[v] & P).count("1")
            if c > best:
                u, best = v, c
        cand = P & ~adj[u]
        while cand:
            v = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            expand(R | (1 << v), P & adj[v], Xs & adj[v])
            P &= ~(1 << v)
            Xs |= 1 << v

    expand(1 << start, adj[start], 0)
    return out


def _mask_pairs(mask: int, m: int) -> frozenset:
    out = []
    k = 0
    while mask:
        if mask & 1:
            out.append((k // m, k % m))
        mask >>= 1
        k += 1
    return frozenset(out)


def cghp_distance(X: FiniteSpace, Y: FiniteSpace, mode: str = EXACT, budget: int = DEFAULT_BUDGET) -> CghpCertificate:
    """Compact GHP distance with a certificate.

    In exact mode ``|X| * |Y|`` must not exceed ``budget``.  Bounds mode
    returns a certified bracket: the lower end from the radius gap and the
    total-mass gap, the upper end from an explicit correspondence.
    """
    X, Y = _same_backend(X, Y)
    if mode == BOUNDS:
        return _bounds(X, Y)
    if mode != EXACT:
        raise ValueError(f"unknown mode {mode!r}")
    if X.n * Y.n > budget:
        raise BudgetExceeded("cghp exact search", X.n * Y.n, budget)
    return _exact(X, Y)


def _exact(X: FiniteSpace, Y: FiniteSpace) -> CghpCertificate:
    n, m = X.n, Y.n

    def cost(near):
        c = _cost_near(near, X, Y)
        return c.cost, c.plan, None

    stats = {}
    val, K, d, c = clique_search(X, Y, cost, stats=stats)
    R = Correspondence(_mask_pairs(K, m), n, m)
    return CghpCertificate(val, val, val, R, c[1], d / 2, c[0], EXACT, stats)


def clique_search(X: FiniteSpace, Y: FiniteSpace, cost, cap=None, stats=None):
    """Least ``max(dis(R)/2, cost(R))`` over root-containing correspondences.

    ``cost(near)`` takes a boolean matrix and returns a tuple whose first
    entry is the coupling term; it must be non-increasing in the relation.
    Returns ``(value, mask, dis, cost_tuple)`` or None when no relation
    beats ``cap``.
    """
    n, m = X.n, Y.n
    N = n * m
    _, w = _mismatch(X, Y)
    root = X.root * m + Y.root
    rowmask = [sum(1 << (i * m + j) for j in range(m)) for i in range(n)]
    colmask = [sum(1 << (i * m + j) for i in range(n)) for j in range(m)]
    thresholds = sorted({x for row in w for x in row})
    cache = {}
    if stats is None:
        stats = {}
    stats.update(thresholds=0, cliques=0, lps=0)

    def cost_of(mask):
        if mask not in cache:
            near = [[bool(mask >> (i * m + j) & 1) for j in range(m)] for i in range(n)]
            cache[mask] = cost(near)
            stats["lps"] += 1
        return cache[mask]

    def covering(mask):
        return all(mask & r for r in rowmask) and all(mask & c for c in colmask)

    def dis(mask):
        ks = [k for k in range(N) if mask >> k & 1]
        return max((w[a][b] for a in ks for b in ks), default=num.zero(X.backend))

    best = None
    bound = cap
    for t in thresholds:
        if bound is not None and t / 2 >= bound:
            break
        stats["thresholds"] += 1
        adj = [sum(1 << l for l in range(N) if l != k and w[k][l] <= t) for k in range(N)]
        hull = adj[root] | (1 << root)
        if not covering(hull):
            continue
        if bound is not None and cost_of(hull)[0] >= bound:
            continue
        for K in _maximal_cliques(adj, root):
            stats["cliques"] += 1
            if not covering(K):
                continue
            c = cost_of(K)
            d = dis(K)
            val = max(d / 2, c[0])
            if bound is None or val < bound:
                best = (val, K, d, c)
                bound = val
    return best


def _greedy_relation(X: FiniteSpace, Y: FiniteSpace) -> set:
    rx, ry = X.root_distances(), Y.root_distances()
    R = {(X.root, Y.root)}
    for i in range(X.n):
        j = min(range(Y.n), key=lambda j: (abs(rx[i] - ry[j]), j))
        R.add((i, j))
    covered = {j for _, j in R}
    for j in range(Y.n):
        if j not in covered:
            i = min(range(X.n), key=lambda i: (abs(rx[i] - ry[j]), i))
            R.add((i, j))
    return R


def _bounds(X: FiniteSpace, Y: FiniteSpace) -> CghpCertificate:
    two = 2
    lower = max(abs(X.radius() - Y.radius()) / two, abs(X.total_mass - Y.total_mass))
    n, m = X.n, Y.n

    def evaluate(pairs, bar=None):
        R = Correspondence(frozenset(pairs), n, m)
        d = distortion(R, X, Y)
        if bar is not None and d / two >= bar:
            return None
        c = coupling_cost(R, X, Y)
        return max(d / two, c.cost), R, d, c

    cur = set(_greedy_relation(X, Y))
    best = evaluate(cur)
    # seeds: pairs whose root distances differ by at most t, for a few t
    rx, ry = X.root_distances(), Y.root_distances()
    gaps = sorted({abs(a - b) for a in rx for b in ry})
    for t in gaps[:: max(1, len(gaps) // 6)] + gaps[-1:]:
        if best[0] <= lower:
            break
        cand = cur | {(i, j) for i in range(n) for j in range(m) if abs(rx[i] - ry[j]) <= t}
        res = evaluate(cand, best[0])
        if res is not None and res[0] < best[0]:
            best = res
    cur = set(best[1].pairs)
    improved = True
    rounds = 0
    # nothing can beat the certified lower bound
    while improved and rounds < 4 * n * m and best[0] > lower:
        improved = False
        rounds += 1
        for i in range(n):
            for j in range(m):
                cand = set(cur) ^ {(i, j)}
                if (X.root, Y.root) not in cand:
                    continue
                if not Correspondence(frozenset(cand), n, m).covers():
                    continue
                res = evaluate(cand, best[0])
                if res is not None and res[0] < best[0]:
                    cur, best, improved = cand, res, True
                    break
            if improved:
                break
    val, R, d, c = best
    lower = min(lower, val)
    return CghpCertificate(val, lower, val, R, c.plan, d / two, c.cost, BOUNDS)


def cgh_distance(X: FiniteSpace, Y: FiniteSpace, mode: str = EXACT, budget: int = DEFAULT_BUDGET) -> CghpCertificate:
    """Pointed Gromov-Hausdorff distance: cGHP with both measures set to zero."""
    X0 = X.with_mass([0] * X.n)
    Y0 = Y.with_mass([0] * Y.n)
    return cghp_distance(X0, Y0, mode, budget)


def cghp_nonpointed(X: FiniteSpace, Y: FiniteSpace, budget: int = DEFAULT_BUDGET):
    """Distance ignoring the roots: the least pointed value over all root choices."""
    best = None
    for a in range(X.n):
        for b in range(Y.n):
            Xa = FiniteSpace(X.dist, a, X.mass, X.labels, X.backend)
            Yb = FiniteSpace(Y.dist, b, Y.mass, Y.labels, Y.backend)
            cert = cghp_distance(Xa, Yb, EXACT, budget)
            if best is None or cert.value < best[0]:
                best = (cert.value, (a, b), cert)
    return best


def hp_distance(S1: SubspaceSpec, S2: SubspaceSpec):
    """Hausdorff-Prokhorov distance of two exact subspaces of one parent."""
    if S1.parent is not S2.parent and S1.parent != S2.parent:
        raise ValidationError("subspaces of different parents")
    P = S1.parent
    G = GroundSpace(P.dist, P.backend)
    h = hausdorff_distance(S1.support, S2.support, G)
    p = prokhorov_distance(FiniteMeasure(G, S1.lower), FiniteMeasure(G, S2.lower)).p
    return max(h, p)


# ---------------------------------------------------------------------------
# constructions


@dataclass(frozen=True)
class Projection:
    subspace: SubspaceSpec        # Y' inside Y
    space: FiniteSpace            # Y' realised, re-indexed
    correspondence: Correspondence  # R' between realised Xsub and Y'
    plan: TransportPlan           # alpha' in local indices
    bound: object                 # max(dis(R')/2, D(alpha') + alpha'(R'^c))
    verified: object = None       # exact cghp(Xsub, Y') when within budget


def project_subspace(X: FiniteSpace, Y: FiniteSpace, xsub: SubspaceSpec, witness: CghpCertificate,
                     r=None, budget: int = DEFAULT_BUDGET) -> Projection:
    """Transfer a subspace of ``X`` to one of ``Y`` without increasing the distance.

    ``Y'`` is the ``R``-image of the support of ``xsub``.  The witness plan is
    re-solved as a sub-coupling on ``R``, cut down to ``Xsub x Y'`` and its
    rows scaled to fit under the masses of ``xsub``.  With ``r`` the ball of
    radius ``r - 2 * value`` of ``Y`` is added to the mass (pointwise max).
    """
    if not witness.exact:
        raise ValidationError("projection needs an exact witness")
    if xsub.parent != X or not xsub.is_exact:
        raise ValidationError("xsub must be one exact subspace of X")
    be = X.backend
    eps = witness.value
    R = witness.correspondence
    check_correspondence(R, X, Y)
    if r is not None:
        r = num.to_number(r, be)
        if r < 2 * eps:
            raise ValidationError("radius must be at least twice the distance", ())
        inner = ball_indices(X, r)
        bad = [i for i in inner if i not in xsub.support or not num.le(X.mass[i], xsub.lower[i], be)]
        if bad:
            raise ValidationError("xsub must contain the ball of radius r", tuple(bad))

    alpha = coupling_cost(R, X, Y, SUB).plan.alpha
    Xp = set(xsub.support)
    Yp = sorted({j for i, j in R.pairs if i in Xp})
    Ys = set(Yp)
    z = num.zero(be)
    a1 = [[alpha[i][j] if (i in Xp and j in Ys) else z for j in range(Y.n)] for i in range(X.n)]
    a2 = []
    for i in range(X.n):
        s = sum(a1[i], z)
        cap = xsub.lower[i]
        if s > cap:
            f = cap / s
            a2.append([x * f for x in a1[i]])
        else:
            a2.append(list(a1[i]))
    muY = [sum((a2[i][j] for i in range(X.n)), z) for j in range(Y.n)]
    if r is not None:
        for j in ball_indices(Y, r - 2 * eps):
            if j not in Ys:
                raise ValidationError("inner ball of Y not covered by the image", (j,))
            muY[j] = max(muY[j], Y.mass[j])
    if be == num.FLOAT:
        # rounding can push a scaled entry a hair above the parent mass
        muY = [min(a, b) for a, b in zip(muY, Y.mass)]
    yspec = SubspaceSpec.exact(Y, Yp, [muY[j] if j in Ys else z for j in range(Y.n)])
    Xs = xsub.realize()
    Yr = yspec.realize()
    xs = list(xsub.support)
    xi = {i: k for k, i in enumerate(xs)}
    yi = {j: k for k, j in enumerate(Yp)}
    Rloc = Correspondence(frozenset((xi[i], yi[j]) for i, j in R.pairs if i in Xp and j in Ys), len(xs), len(Yp))
    plan = TransportPlan(tuple(tuple(a2[i][j] for j in Yp) for i in xs))
    far = sum((plan.alpha[a][b] for a in range(len(xs)) for b in range(len(Yp)) if (a, b) not in Rloc.pairs), z)
    D = discrepancy_of(plan, Xs.mass, Yr.mass)
    bound = max(distortion(Rloc, Xs, Yr) / 2, D + far)
    verified = None
    if Xs.n * Yr.n <= budget:
        verified = cghp_distance(Xs, Yr, EXACT, budget).value
    return Projection(yspec, Yr, Rloc, plan, bound, verified)


def discrepancy_of(plan: TransportPlan, mu, nu):
    return tv_vectors(plan.first_marginal(), mu) + tv_vectors(plan.second_marginal(), nu)


@dataclass(frozen=True)
class IsometryReport:
    f: tuple
    distortion: object
    covering: object
    eps: object
    prokhorov: object
    root_preserved: bool


def epsilon_isometry(R: Correspondence, X: FiniteSpace, Y: FiniteSpace) -> IsometryReport:
    """The map sending each ``x`` to its first ``R``-partner, with its quality.

    ``eps`` is the larger of the map's distortion and its covering radius;
    both are at most ``dis(R)``.  ``prokhorov`` compares the push-forward of
    ``mu_X`` with ``mu_Y``.
    """
    check_correspondence(R, X, Y, pointed=False)
    partners = {}
    for i, j in R.sorted_pairs():
        partners.setdefault(i, j)
    f = tuple(partners[i] for i in range(X.n))
    z = num.zero(X.backend)
    dis = max((abs(X.dist[a][b] - Y.dist[f[a]][f[b]]) for a in range(X.n) for b in range(X.n)), default=z)
    image = sorted(set(f))
    cov = max(min(Y.dist[y][v] for v in image) for y in range(Y.n))
    push = [z] * Y.n
    for i in range(X.n):
        push[f[i]] += X.mass[i]
    G = GroundSpace(Y.dist, Y.backend)
    p = prokhorov_distance(FiniteMeasure(G, push), FiniteMeasure(G, Y.mass)).p
    return IsometryReport(f, dis, cov, max(dis, cov), p, f[X.root] == Y.root)


def relation_from_pairs(pairs: Iterable, X: FiniteSpace, Y: FiniteSpace) -> Correspondence:
    R = Correspondence(frozenset(tuple(p) for p in pairs), X.n, Y.n)
    check_correspondence(R, X, Y)
    return R
