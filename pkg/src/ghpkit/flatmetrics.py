"""Hausdorff, total variation and Prokhorov distances on one finite ground space.

The Prokhorov distance is computed through approximate couplings: for a
threshold ``eps`` let

    g(eps) = min over plans a >= 0 of  D(a; mu, nu) + a({d > eps}),

with ``D(a; mu, nu) = TV(pi_1 a, mu) + TV(pi_2 a, nu)``.  Then the Prokhorov
distance is the least ``eps >= 0`` with ``g(eps) <= eps``.  Since ``g`` only
changes at pairwise distances, the least such ``eps`` is found by scanning
breakpoint intervals.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import _numeric as num
from .errors import ValidationError
from .lp import FlowNetwork, LpProblem, lp_solve, max_flow
from .spaces import validate_space

# marginal modes for plan LPs
FREE = "free"
SUB = "sub"              # pi_1 a <= mu, pi_2 a <= nu
LEFT_EXACT = "left"      # pi_1 a == mu, pi_2 a <= nu
COUPLING = "coupling"    # both marginals exact


@dataclass(frozen=True)
class GroundSpace:
    dist: tuple
    backend: str = num.RATIONAL

    @classmethod
    def from_matrix(cls, dist, backend: str | None = None) -> "GroundSpace":
        X = validate_space(dist, 0, None, None, backend)
        return cls(X.dist, X.backend)

    @property
    def n(self) -> int:
        return len(self.dist)


@dataclass(frozen=True)
class FiniteMeasure:
    ground: GroundSpace
    mass: tuple

    def __post_init__(self):
        m = tuple(num.to_number(x, self.ground.backend) for x in self.mass)
        if len(m) != self.ground.n:
            raise ValidationError("mass vector length mismatch", (len(m), self.ground.n))
        for i, x in enumerate(m):
            if x < 0:
                raise ValidationError("negative mass", (i,))
        object.__setattr__(self, "mass", m)

    @property
    def total(self):
        return sum(self.mass, num.zero(self.ground.backend))

    def of(self, subset: Iterable[int]):
        return sum((self.mass[i] for i in subset), num.zero(self.ground.backend))


@dataclass(frozen=True)
class TransportPlan:
    """Nonnegative n-by-m matrix; marginals are exact row/column sums."""

    alpha: tuple

    @property
    def shape(self):
        return (len(self.alpha), len(self.alpha[0]) if self.alpha else 0)

    def first_marginal(self) -> tuple:
        return tuple(sum(row) for row in self.alpha)

    def second_marginal(self) -> tuple:
        n, m = self.shape
        return tuple(sum(self.alpha[i][j] for i in range(n)) for j in range(m))

    def total(self):
        return sum(sum(row) for row in self.alpha)

    def mass_on(self, cells) -> object:
        return sum(self.alpha[i][j] for i, j in cells)

    def mass_off(self, keep) -> object:
        """Mass on cells ``(i, j)`` with ``keep(i, j)`` false."""
        n, m = self.shape
        return sum(self.alpha[i][j] for i in range(n) for j in range(m) if not keep(i, j))

    def entries(self, threshold=0):
        n, m = self.shape
        return [(i, j, self.alpha[i][j]) for i in range(n) for j in range(m) if self.alpha[i][j] > threshold]


def _same_ground(mu: FiniteMeasure, nu: FiniteMeasure) -> None:
    if mu.ground != nu.ground:
        raise ValidationError("measures live on different ground spaces")


def tv_vectors(a: Sequence, b: Sequence):
    """Total variation of two mass vectors: the larger of the positive and negative parts."""
    pos = sum((x - y for x, y in zip(a, b) if x > y), 0)
    neg = sum((y - x for x, y in zip(a, b) if y > x), 0)
    return max(pos, neg)


def total_variation(mu: FiniteMeasure, nu: FiniteMeasure):
    _same_ground(mu, nu)
    return num.to_number(tv_vectors(mu.mass, nu.mass), mu.ground.backend)


def discrepancy(plan: TransportPlan, mu_mass: Sequence, nu_mass: Sequence):
    return tv_vectors(plan.first_marginal(), mu_mass) + tv_vectors(plan.second_marginal(), nu_mass)


def hausdorff_distance(A: Iterable[int], B: Iterable[int], ground: GroundSpace):
    A, B = list(A), list(B)
    if not A or not B:
        raise ValidationError("Hausdorff distance needs nonempty sets")
    d = ground.dist
    ab = max(min(d[a][b] for b in B) for a in A)
    ba = max(min(d[a][b] for a in A) for b in B)
    return max(ab, ba)


# ---------------------------------------------------------------------------
# plan LPs


@dataclass(frozen=True)
class PlanSolution:
    value: object          # D + mass off the near set
    plan: TransportPlan
    nu_choice: tuple       # the second measure used (fixed or optimised)


def min_discrepancy_plan(mu: Sequence, nu_lo: Sequence, nu_hi: Sequence, near, backend: str,
                         marginals: str = FREE) -> PlanSolution:
    """Minimise ``D(a; mu, nu') + a(not near)`` over plans ``a`` and ``nu_lo <= nu' <= nu_hi``.

    ``near[i][j]`` is truthy on cells that are free of charge.  When
    ``nu_lo == nu_hi`` the second measure is fixed.  Each total variation is
    linearised with positive/negative slack pairs and an epigraph variable
    for the max of the two sums.
    """
    n, m = len(mu), len(nu_lo)
    fixed = list(nu_lo) == list(nu_hi)
    A = n * m
    P1, N1 = A, A + n
    P2, N2 = A + 2 * n, A + 2 * n + m
    T1, T2 = A + 2 * n + 2 * m, A + 2 * n + 2 * m + 1
    V = T2 + 1               # first nu' variable when not fixed
    nvar = V + (0 if fixed else m)
    obj = [0] * nvar
    for i in range(n):
        for j in range(m):
            if not near[i][j]:
                obj[i * m + j] = 1
    obj[T1] = 1
    obj[T2] = 1
    lp = LpProblem(nvar, obj)
    for i in range(n):
        row = {i * m + j: 1 for j in range(m)}
        row[P1 + i] = -1
        row[N1 + i] = 1
        lp.add(row, "==", mu[i])
    for j in range(m):
        col = {i * m + j: 1 for i in range(n)}
        col[P2 + j] = -1
        col[N2 + j] = 1
        if fixed:
            lp.add(col, "==", nu_lo[j])
        else:
            col[V + j] = -1
            lp.add(col, "==", 0)
    lp.add({T1: 1, **{P1 + i: -1 for i in range(n)}}, ">=", 0)
    lp.add({T1: 1, **{N1 + i: -1 for i in range(n)}}, ">=", 0)
    lp.add({T2: 1, **{P2 + j: -1 for j in range(m)}}, ">=", 0)
    lp.add({T2: 1, **{N2 + j: -1 for j in range(m)}}, ">=", 0)
    if marginals != FREE:
        rel1 = "<=" if marginals == SUB else "=="
        rel2 = "==" if marginals == COUPLING else "<="
        for i in range(n):
            lp.add({i * m + j: 1 for j in range(m)}, rel1, mu[i])
        for j in range(m):
            col = {i * m + j: 1 for i in range(n)}
            if fixed:
                lp.add(col, rel2, nu_lo[j])
            else:
                col[V + j] = -1
                lp.add(col, rel2, 0)
    if not fixed:
        lp.lower = [0] * nvar
        lp.upper = [None] * nvar
        for j in range(m):
            lp.lower[V + j] = nu_lo[j]
            lp.upper[V + j] = nu_hi[j]
    res = lp_solve(lp, backend)
    if not res.optimal:
        raise ValidationError(f"plan LP {res.status}")
    x = res.x
    plan = TransportPlan(tuple(tuple(x[i * m + j] for j in range(m)) for i in range(n)))
    choice = tuple(nu_lo) if fixed else tuple(x[V + j] for j in range(m))
    return PlanSolution(res.value, plan, choice)


def _near(ground: GroundSpace, eps):
    return [[d <= eps for d in row] for row in ground.dist]


@dataclass(frozen=True)
class StrassenValue:
    g: object
    plan: TransportPlan


def strassen_value(mu: FiniteMeasure, nu: FiniteMeasure, eps, marginals: str = FREE) -> StrassenValue:
    """``g(eps)``: least discrepancy plus mass on pairs farther apart than ``eps`` (strictly).

    With ``marginals=LEFT_EXACT`` (requires ``||mu|| <= ||nu||``) the plan is
    constrained to ``pi_1 a = mu`` and ``pi_2 a <= nu``; the optimum value is
    unchanged in that case.
    """
    _same_ground(mu, nu)
    be = mu.ground.backend
    eps = num.to_number(eps, be)
    if marginals == LEFT_EXACT and not num.le(mu.total, nu.total, be):
        raise ValidationError("left-exact plans need ||mu|| <= ||nu||")
    sol = min_discrepancy_plan(mu.mass, nu.mass, nu.mass, _near(mu.ground, eps), be, marginals)
    return StrassenValue(sol.value, sol.plan)


def breakpoints(ground: GroundSpace) -> list:
    return sorted({x for row in ground.dist for x in row})


@dataclass(frozen=True)
class ProkhorovResult:
    p: object
    plan: TransportPlan


def scan_breakpoints(bps: Sequence, g_at) -> tuple:
    """Least ``eps >= 0`` with ``g(eps) <= eps`` for a non-increasing step function ``g``.

    ``g`` is constant on ``[bps[k], bps[k+1])`` and ``bps[0] == 0``.  Interval
    ``k`` contains a solution iff ``g(bps[k]) < bps[k+1]`` (always true for the
    last, unbounded interval), a condition monotone in ``k``, so the first
    such interval is found by bisection.  Returns ``(eps, k, payload)`` where
    ``g_at(b)`` returns ``(value, payload)``.
    """
    cache = {}

    def g(k):
        if k not in cache:
            cache[k] = g_at(bps[k])
        return cache[k]

    def ok(k):
        return k == len(bps) - 1 or g(k)[0] < bps[k + 1]

    lo, hi = 0, len(bps) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    val, payload = g(lo)
    return max(bps[lo], val), lo, payload


def prokhorov_distance(mu: FiniteMeasure, nu: FiniteMeasure) -> ProkhorovResult:
    """Prokhorov distance via the breakpoint scan of ``g``; the plan certifies ``g(p) <= p``."""
    _same_ground(mu, nu)

    def g_at(b):
        sv = strassen_value(mu, nu, b)
        return sv.g, sv.plan

    p, _, plan = scan_breakpoints(breakpoints(mu.ground), g_at)
    return ProkhorovResult(p, plan)


def prokhorov_sandwich(mu: Sequence, nu_lo: Sequence, nu_hi: Sequence, ground: GroundSpace):
    """``min`` of the Prokhorov distance from ``mu`` over ``nu_lo <= nu' <= nu_hi``.

    Returns ``(value, nu_choice)``.  Uses the same scan with the second
    marginal optimised jointly inside each plan LP.
    """
    be = ground.backend

    def g_at(b):
        sol = min_discrepancy_plan(mu, nu_lo, nu_hi, _near(ground, b), be)
        return sol.value, sol.nu_choice

    p, _, choice = scan_breakpoints(breakpoints(ground), g_at)
    return p, choice


def strassen_coupling(mu: FiniteMeasure, nu: FiniteMeasure) -> TransportPlan:
    """A coupling of ``mu`` and ``nu`` with at most ``p`` mass on pairs farther than ``p``."""
    _same_ground(mu, nu)
    be = mu.ground.backend
    if not num.eq(mu.total, nu.total, be):
        raise ValidationError("coupling needs equal total masses")
    p = prokhorov_distance(mu, nu).p
    sol = min_discrepancy_plan(mu.mass, nu.mass, nu.mass, _near(mu.ground, p), be, COUPLING)
    return sol.plan


@dataclass(frozen=True)
class HallResult:
    feasible: bool
    plan: TransportPlan | None = None
    violating: frozenset | None = None
    flow_value: object = None


def hall_transport(K, mu: Sequence, nu: Sequence) -> HallResult:
    """Transport ``mu`` into ``nu`` along the relation ``K`` (a set of ``(x, y)`` index pairs).

    Returns a plan with first marginal ``mu`` and second marginal at most
    ``nu`` supported on ``K``, or a set ``A`` with ``mu(A) > nu(K(A))`` read
    off the minimum cut.
    """
    n, m = len(mu), len(nu)
    s, t = n + m, n + m + 1
    arcs = [(s, i, mu[i]) for i in range(n)]
    pairs = sorted(set(K))
    arcs += [(i, n + j, None) for i, j in pairs]
    arcs += [(n + j, t, nu[j]) for j in range(m)]
    net = FlowNetwork(n + m + 2, s, t, arcs)
    res = max_flow(net)
    total = sum(mu, 0)
    if res.value == total:
        zero = total - total
        alpha = [[zero] * m for _ in range(n)]
        for (i, j), f in zip(pairs, res.flow[n:n + len(pairs)]):
            alpha[i][j] = alpha[i][j] + f
        return HallResult(True, TransportPlan(tuple(tuple(r) for r in alpha)), None, res.value)
    A = frozenset(i for i in range(n) if i in res.source_side)
    return HallResult(False, None, A, res.value)
