"""Localized GHP distance for pointed measured spaces that need not be compact.

``a(eps, r; X, Y)`` matches the ``r``-ball of ``X`` against subspaces of
``Y`` that contain the ``(r - eps)``-ball of ``Y``; the distance is the least
``eps`` in ``(0, 1]`` for which ``a(eps, 1/eps)`` is below ``eps / 2`` both
ways, and 1 if there is none.  The predicate is monotone in ``eps`` so it is
located by bisection; results are brackets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

from . import _numeric as num
from .cghp import (DEFAULT_BUDGET, EXACT, CghpCertificate, Correspondence, _mask_pairs, _same_backend,
                   cghp_distance, clique_search)
from .errors import BudgetExceeded, ValidationError
from .flatmetrics import (FiniteMeasure, GroundSpace, TransportPlan, min_discrepancy_plan, prokhorov_distance,
                          prokhorov_sandwich)
from .spaces import FiniteSpace, ball_indices, closed_ball, discontinuity_radii, triangle_violation

DEFAULT_TOL = 1e-6
# predicate evaluations only need a-values below 1/2 (eps <= 1)
_PRED_CAP = Fraction(1, 2)


@dataclass(frozen=True)
class LocalizationQuery:
    eps: object
    r: object
    direction: str = "XY"

    def __post_init__(self):
        if not self.eps > 0:
            raise ValidationError("eps must be positive", ())
        if self.r < self.eps:
            raise ValidationError("r must be at least eps", ())
        if self.direction not in ("XY", "YX"):
            raise ValidationError("direction must be XY or YX", ())


@dataclass(frozen=True)
class LocalizedA:
    """Value of ``a`` with the subspace that attains it.

    ``support`` indexes ``Y`` (the target); ``mass`` is full-length on ``Y``.
    ``certificate`` is the cGHP witness between the realised ball of ``X``
    and the realised subspace.  ``value`` is None when a cap was given and
    nothing beat it.
    """

    value: object
    support: tuple = ()
    mass: tuple = ()
    certificate: CghpCertificate | None = None
    ball: tuple = ()
    inner: tuple = ()


def _a_core(X: FiniteSpace, Y: FiniteSpace, xball: Sequence[int], inner: Sequence[int], cap, budget: int) -> LocalizedA:
    be = X.backend
    z = num.zero(be)
    Xr = X.restrict(xball)
    radX = Xr.radius()
    massX = Xr.total_mass
    rd = Y.root_distances()
    inner_set = set(inner)
    rest = [j for j in range(Y.n) if j not in inner_set]
    # points beyond radX + 2 * cap can never help (radius bound)
    if cap is not None:
        rest = [j for j in rest if rd[j] < radX + 2 * cap]
    lo_tot = sum((Y.mass[j] for j in inner), z)
    u = cap
    best = None
    for k in range(len(rest) + 1):
        for extra in combinations(rest, k):
            S = sorted(inner_set.union(extra))
            radS = max(rd[j] for j in S)
            hi_tot = lo_tot + sum((Y.mass[j] for j in extra), z)
            gap = max(z, lo_tot - massX, massX - hi_tot)
            if u is not None and (abs(radS - radX) >= 2 * u or gap >= u):
                continue
            if len(xball) * len(S) > budget:
                raise BudgetExceeded("localized a", len(xball) * len(S), budget)
            Ys = Y.restrict(S)
            lo = [Y.mass[j] if j in inner_set else z for j in S]
            hi = [Y.mass[j] for j in S]
            if all(v == 0 for v in hi) and all(v == 0 for v in Xr.mass):
                def cost(near, lo=lo):
                    return z, None, tuple(lo)
            else:
                def cost(near, lo=lo, hi=hi):
                    sol = min_discrepancy_plan(Xr.mass, lo, hi, near, be)
                    return sol.value, sol.plan, sol.nu_choice
            res = clique_search(Xr, Ys, cost, cap=u)
            if res is None:
                continue
            val, K, d, c = res
            u = val
            best = (val, S, K, d, c)
            if u == 0:
                break
        if u == 0:
            break
    if best is None:
        return LocalizedA(None, ball=tuple(xball), inner=tuple(inner))
    val, S, K, d, c = best
    choice = dict(zip(S, c[2]))
    mass = tuple(choice.get(j, z) for j in range(Y.n))
    Ys = Y.restrict(S, c[2])
    R = Correspondence(_mask_pairs(K, Ys.n), Xr.n, Ys.n)
    plan = c[1]
    if plan is None:
        plan = TransportPlan(tuple((z,) * Ys.n for _ in range(Xr.n)))
    cert = CghpCertificate(val, val, val, R, plan, d / 2, c[0], EXACT)
    return LocalizedA(val, tuple(S), mass, cert, tuple(xball), tuple(inner))


def localized_a(q: LocalizationQuery, X: FiniteSpace, Y: FiniteSpace, budget: int = DEFAULT_BUDGET) -> LocalizedA:
    """``a(eps, r)`` from ``X`` to ``Y`` (or the reverse), exactly, with its witness."""
    X, Y = _same_backend(X, Y)
    if q.direction == "YX":
        X, Y = Y, X
    eps = num.to_number(q.eps, X.backend)
    r = num.to_number(q.r, X.backend)
    return _a_core(X, Y, ball_indices(X, r), ball_indices(Y, r - eps), None, budget)


@dataclass(frozen=True)
class GhpResult:
    value: object
    lo: object
    hi: object
    witnesses: tuple = ()
    evaluations: int = 0
    stats: dict = field(default_factory=dict, compare=False, repr=False)


def _bisect(pred: Callable, tol, backend: str):
    """Least-``eps`` bracket for a predicate false on ``(0, e*]`` and true above.

    Returns ``(lo, hi)`` with ``pred(hi)`` true (or ``lo == hi == 1`` when
    ``pred(1)`` fails) and ``hi - lo <= tol``.
    """
    one = num.to_number(1, backend)
    lo = num.zero(backend)
    if not pred(one):
        return one, one
    hi = one
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


class _GhpPredicate:
    """``P(eps)`` with a-values cached by the ball sets they depend on."""

    def __init__(self, X: FiniteSpace, Y: FiniteSpace, budget: int):
        self.X, self.Y, self.budget = X, Y, budget
        self.cache = {}
        self.calls = 0

    def a(self, direction: str, eps) -> LocalizedA:
        A, B = (self.X, self.Y) if direction == "XY" else (self.Y, self.X)
        r = 1 / eps
        xb = tuple(ball_indices(A, r))
        inner = tuple(ball_indices(B, r - eps))
        key = (direction, xb, inner)
        if key not in self.cache:
            self.cache[key] = _a_core(A, B, xb, inner, num.to_number(_PRED_CAP, A.backend), self.budget)
        return self.cache[key]

    def __call__(self, eps) -> bool:
        self.calls += 1
        for d in ("XY", "YX"):
            v = self.a(d, eps).value
            if v is None or not v < eps / 2:
                return False
        return True


def ghp_predicate(X: FiniteSpace, Y: FiniteSpace, eps, budget: int = DEFAULT_BUDGET) -> bool:
    """``a(eps, 1/eps; X, Y)`` and ``a(eps, 1/eps; Y, X)`` both below ``eps / 2``."""
    X, Y = _same_backend(X, Y)
    return _GhpPredicate(X, Y, budget)(num.to_number(eps, X.backend))


def ghp_distance(X: FiniteSpace, Y: FiniteSpace, tol=DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> GhpResult:
    """Localized GHP distance as a bracket ``[lo, hi]`` of width at most ``tol``; ``value`` is ``hi``.

    Isometric inputs (cGHP zero) give exactly 0; when the predicate fails at
    ``eps = 1`` the result is exactly 1.
    """
    if not tol > 0:
        raise ValidationError("tol must be positive", ())
    X, Y = _same_backend(X, Y)
    be = X.backend
    z = num.zero(be)
    if X.n * Y.n <= budget:
        c = cghp_distance(X, Y, EXACT, budget)
        if c.value == 0:
            return GhpResult(z, z, z, (c,), 0)
    P = _GhpPredicate(X, Y, budget)
    lo, hi = _bisect(P, tol, be)
    wit = ()
    if P(hi):
        wit = (P.a("XY", hi), P.a("YX", hi))
    return GhpResult(hi, lo, hi, wit, P.calls, {"cached": len(P.cache)})


def joint_radii(X: FiniteSpace, Y: FiniteSpace) -> list:
    return sorted(set(X.root_distances()) | set(Y.root_distances()))


def integral_ghp(X: FiniteSpace, Y: FiniteSpace, budget: int = DEFAULT_BUDGET) -> float:
    """``int_0^inf e^{-r} (1 ^ cghp(ball_r X, ball_r Y)) dr``, summed piece by piece."""
    X, Y = _same_backend(X, Y)
    radii = joint_radii(X, Y)
    total = 0.0
    for k, r in enumerate(radii):
        c = cghp_distance(closed_ball(X, r), closed_ball(Y, r), EXACT, budget).value
        c = min(1.0, float(c))
        if c == 0:
            continue
        w = math.exp(-float(r))
        if k + 1 < len(radii):
            w -= math.exp(-float(radii[k + 1]))
        total += w * c
    return total


# ---------------------------------------------------------------------------
# localized Hausdorff / Prokhorov inside one pointed ambient


def _directed_local_hausdorff(A: Sequence[int], B: Sequence[int], X: FiniteSpace, eps):
    """min over ``B ^ ball_{r-eps} <= B' <= B`` of ``d_H(A ^ ball_r, B')``, ``r = 1/eps``.

    ``None`` stands for infinity (one side empty, the other not).
    """
    r = 1 / eps
    rd = X.root_distances()
    d = X.dist
    Ar = [a for a in A if rd[a] <= r]
    L = [b for b in B if rd[b] <= r - eps]
    if not Ar:
        return num.zero(X.backend) if not L else None
    near = {b: min(d[b][a] for a in Ar) for b in B}
    Lmax = max((near[b] for b in L), default=num.zero(X.backend))
    for t in sorted({num.zero(X.backend)} | set(near.values())):
        if t < Lmax:
            continue
        Bt = [b for b in B if near[b] <= t]
        if Bt and all(min(d[a][b] for b in Bt) <= t for a in Ar):
            return t
    return None


def localized_hausdorff(A: Sequence[int], B: Sequence[int], X: FiniteSpace, tol=DEFAULT_TOL):
    """Localized Hausdorff distance of two index sets of the pointed space ``X``; returns ``(value, lo, hi)``."""
    A, B = sorted(set(A)), sorted(set(B))
    if not A or not B:
        raise ValidationError("localized Hausdorff needs nonempty sets")
    z = num.zero(X.backend)
    if A == B:
        return z, z, z

    def pred(eps):
        for P, Q in ((A, B), (B, A)):
            v = _directed_local_hausdorff(P, Q, X, eps)
            if v is None or not v < eps / 2:
                return False
        return True

    lo, hi = _bisect(pred, tol, X.backend)
    return hi, lo, hi


def localized_prokhorov(mu, nu, X: FiniteSpace, tol=DEFAULT_TOL):
    """Localized Prokhorov distance of two measures on the pointed space ``X``; returns ``(value, lo, hi)``."""
    mu = tuple(num.to_number(v, X.backend) for v in getattr(mu, "mass", mu))
    nu = tuple(num.to_number(v, X.backend) for v in getattr(nu, "mass", nu))
    if len(mu) != X.n or len(nu) != X.n:
        raise ValidationError("measure length does not match the ambient", (len(mu), len(nu), X.n))
    z = num.zero(X.backend)
    if mu == nu:
        return z, z, z
    G = GroundSpace(X.dist, X.backend)
    rd = X.root_distances()
    cache = {}

    def directed(m1, m2, tag, eps):
        r = 1 / eps
        b1 = tuple(i for i in range(X.n) if rd[i] <= r)
        b2 = tuple(i for i in range(X.n) if rd[i] <= r - eps)
        key = (tag, b1, b2)
        if key not in cache:
            a = [m1[i] if i in b1 else z for i in range(X.n)]
            lo = [m2[i] if i in b2 else z for i in range(X.n)]
            cache[key] = prokhorov_sandwich(a, lo, m2, G)[0]
        return cache[key]

    def pred(eps):
        return directed(mu, nu, 0, eps) < eps / 2 and directed(nu, mu, 1, eps) < eps / 2

    lo, hi = _bisect(pred, tol, X.backend)
    return hi, lo, hi


# ---------------------------------------------------------------------------
# convergence and weak distance


@dataclass
class ConvergenceReport:
    ghp: list = field(default_factory=list)
    balls: dict = field(default_factory=dict)      # radius -> list of cghp values
    integral: list = field(default_factory=list)
    radii: list = field(default_factory=list)      # continuity radii actually used
    trends: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"ghp": self.ghp, "balls": {str(k): v for k, v in self.balls.items()},
                "integral": self.integral, "radii": self.radii, "trends": self.trends}


def _trend(xs: list) -> str:
    if not xs:
        return "empty"
    if all(b <= a for a, b in zip(xs, xs[1:])):
        return "non-increasing"
    return "not monotone"


def check_convergence(seq: Sequence[FiniteSpace], limit: FiniteSpace, criteria=("ghp", "balls", "integral"),
                      radii: Sequence | None = None, tol=DEFAULT_TOL, budget: int = DEFAULT_BUDGET) -> ConvergenceReport:
    """Numeric sequences for the requested convergence criteria.

    ``balls`` uses the radii from ``radii`` that are continuity radii of the
    limit.  The report only states whether each sequence is non-increasing;
    it does not claim convergence.
    """
    if not seq:
        raise ValidationError("empty sequence")
    rep = ConvergenceReport()
    unknown = set(criteria) - {"ghp", "balls", "integral"}
    if unknown:
        raise ValidationError("unknown criteria", tuple(sorted(unknown)))
    if "ghp" in criteria:
        rep.ghp = [ghp_distance(Xn, limit, tol, budget).value for Xn in seq]
        rep.trends["ghp"] = _trend(rep.ghp)
    if "balls" in criteria:
        bad = set(discontinuity_radii(limit))
        rep.radii = [r for r in (radii or []) if r > 0 and r not in bad]
        for r in rep.radii:
            vals = [cghp_distance(closed_ball(Xn, r), closed_ball(limit, r), EXACT, budget).value for Xn in seq]
            rep.balls[r] = vals
            rep.trends[f"balls@{num.fmt(r)}"] = _trend(vals)
    if "integral" in criteria:
        rep.integral = [integral_ghp(Xn, limit, budget) for Xn in seq]
        rep.trends["integral"] = _trend(rep.integral)
    return rep


@dataclass(frozen=True)
class WeakResult:
    value: object
    dist: tuple


def pairwise_ground(spaces: Sequence[FiniteSpace], metric: Callable, slack=0) -> GroundSpace:
    """Ground space on ``spaces`` with ``metric``; triangle checked up to ``slack``."""
    k = len(spaces)
    d = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            d[i][j] = d[j][i] = metric(spaces[i], spaces[j])
    be = num.infer_backend([x for row in d for x in row])
    d = [[num.to_number(x, be) for x in row] for row in d]
    w = triangle_violation(d, num.FLOAT if slack else be, float(slack) if slack else num.TAU)
    if w is not None:
        raise ValidationError("triangle inequality violated", w)
    return GroundSpace(tuple(tuple(r) for r in d), be)


def empirical_prokhorov(A: Sequence[FiniteSpace], B: Sequence[FiniteSpace], metric: Callable, slack=0) -> WeakResult:
    """Prokhorov distance of the uniform empirical measures of ``A`` and ``B`` under ``metric``."""
    if not A or not B:
        raise ValidationError("collections must be nonempty")
    G = pairwise_ground(list(A) + list(B), metric, slack)
    na, nb = len(A), len(B)
    one = num.to_number(1, G.backend)
    mu = [one / na] * na + [one - one] * nb
    nu = [one - one] * na + [one / nb] * nb
    p = prokhorov_distance(FiniteMeasure(G, mu), FiniteMeasure(G, nu)).p
    return WeakResult(p, G.dist)


def empirical_weak_distance(A: Sequence[FiniteSpace], B: Sequence[FiniteSpace], tol=DEFAULT_TOL,
                            budget: int = DEFAULT_BUDGET) -> WeakResult:
    """Prokhorov distance between empirical measures on spaces, with ghp as ground metric.

    Each ghp value is the upper end of a bracket of width ``tol``, so the
    triangle inequality of the ground metric is checked with slack ``3 * tol``.
    """
    def metric(P, Q):
        return ghp_distance(P, Q, tol, budget).value

    return empirical_prokhorov(A, B, metric, 3 * tol)
