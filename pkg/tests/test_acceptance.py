"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Inequalities involving ghp compare the upper end of its bracket, so they
allow the bracket width ``TOL`` on the ghp side.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction as F
from itertools import product

from ghpkit.cghp import cghp_distance, project_subspace
from ghpkit.flatmetrics import FiniteMeasure, GroundSpace, hall_transport, prokhorov_distance, strassen_coupling
from ghpkit.ghp import (LocalizationQuery, check_convergence, empirical_prokhorov, empirical_weak_distance,
                        ghp_distance, integral_ghp, localized_a)
from ghpkit.graphs import RootedGraph, bs_distance, bs_gh_consistency
from ghpkit.oracles import cghp_bruteforce, ghp_grid, prokhorov_bruteforce
from ghpkit.spaces import SubspaceSpec, ball_indices, closed_ball, from_points, validate_space
from spacegen import random_measures, random_space
from treegen import nx_rooted_isomorphic, random_tree, tree_classes

TOL = 1e-6
TAU = 1e-9


def corpus(seed=2024, pairs=300):
    """Criterion 4 corpus, reused by criteria 5 and 10."""
    rng = random.Random(seed)
    return [(random_space(rng, 4), random_space(rng, 4)) for _ in range(pairs)]


def test_strassen_equivalence(criterion):
    c = criterion(1, "Prokhorov via the Strassen LP equals brute force (1000 instances)")
    rng = random.Random(1)
    mismatches, spent = 0, 0.0
    for _ in range(1000):
        d, mu, nu = random_measures(rng, 5, top=4)
        G = GroundSpace.from_matrix(d)
        t0 = time.perf_counter()
        p = prokhorov_distance(FiniteMeasure(G, mu), FiniteMeasure(G, nu)).p
        spent += time.perf_counter() - t0
        if p != prokhorov_bruteforce(d, mu, nu):
            mismatches += 1
    c.check("exact agreement", mismatches == 0, f"{mismatches} mismatches")
    c.check("runtime < 60 s", spent < 60, f"{spent:.1f} s")
    c.finish()


def test_strassen_coupling_marginals(criterion):
    c = criterion(2, "Strassen coupling has exact marginals and far mass <= p (500 instances)")
    rng = random.Random(2)
    bad_marg = bad_far = 0
    done = 0
    while done < 500:
        d, mu, nu = random_measures(rng, 5, top=4)
        if sum(nu) == 0:
            continue
        nu = [v * sum(mu) / sum(nu) for v in nu]
        G = GroundSpace.from_matrix(d)
        m1, m2 = FiniteMeasure(G, mu), FiniteMeasure(G, nu)
        p = prokhorov_distance(m1, m2).p
        plan = strassen_coupling(m1, m2)
        if list(plan.first_marginal()) != mu or list(plan.second_marginal()) != nu:
            bad_marg += 1
        if plan.mass_off(lambda i, j: d[i][j] <= p) > p:
            bad_far += 1
        done += 1
    c.check("marginals exact", bad_marg == 0, f"{bad_marg} bad")
    c.check("far mass <= p", bad_far == 0, f"{bad_far} bad")
    c.finish()


def test_hall_dichotomy(criterion):
    c = criterion(3, "Hall transport: plan or violating set, never both (500 instances)")
    rng = random.Random(3)
    wrong = 0
    for _ in range(500):
        n, m = rng.randint(1, 5), rng.randint(1, 5)
        K = {(i, j) for i in range(n) for j in range(m) if rng.random() < 0.4}
        mu = [F(rng.randint(0, 8), 4) for _ in range(n)]
        nu = [F(rng.randint(0, 8), 4) for _ in range(m)]
        res = hall_transport(K, mu, nu)

        def image_mass(A):
            return sum(nu[j] for j in range(m) if any((i, j) in K for i in A))

        hall_holds = all(sum(mu[i] for i in A) <= image_mass(A)
                         for bits in range(1 << n) for A in [[i for i in range(n) if bits >> i & 1]])
        if res.feasible:
            a = res.plan.alpha
            ok = (list(res.plan.first_marginal()) == mu
                  and all(x <= y for x, y in zip(res.plan.second_marginal(), nu))
                  and all(a[i][j] == 0 for i in range(n) for j in range(m) if (i, j) not in K)
                  and res.violating is None and hall_holds)
        else:
            A = sorted(res.violating)
            ok = res.plan is None and sum(mu[i] for i in A) > image_mass(A) and not hall_holds
        wrong += not ok
    c.check("dichotomy", wrong == 0, f"{wrong} wrong")
    c.finish()


def test_cghp_oracle_and_axioms(criterion):
    c = criterion(4, "exact cGHP equals brute force (300 pairs); symmetric, triangle (200 triples)")
    t0 = time.perf_counter()
    bad = 0
    for X, Y in corpus():
        v = cghp_distance(X, Y).value
        if v != cghp_bruteforce(X.dist, X.root, X.mass, Y.dist, Y.root, Y.mass):
            bad += 1
    c.check("oracle agreement", bad == 0, f"{bad} mismatches")
    rng = random.Random(44)
    asym = tri = 0
    for _ in range(200):
        X, Y, Z = (random_space(rng, 4) for _ in range(3))
        xy, yx = cghp_distance(X, Y).value, cghp_distance(Y, X).value
        asym += xy != yx
        tri += cghp_distance(X, Z).value > xy + cghp_distance(Y, Z).value + 3 * TAU
    c.check("symmetry", asym == 0, f"{asym} asymmetric")
    c.check("triangle", tri == 0, f"{tri} violations")
    spent = time.perf_counter() - t0
    c.check("runtime < 5 min", spent < 300, f"{spent:.1f} s")
    c.finish()


def test_radius_bound(criterion):
    c = criterion(5, "rad(Y) <= rad(X) + 2 cghp(X, Y) on the criterion 4 corpus")
    bad = 0
    for X, Y in corpus():
        v = cghp_distance(X, Y).value
        bad += Y.radius() > X.radius() + 2 * v
    c.check("radius bound", bad == 0, f"{bad} violations")
    c.finish()


def _subspace(rng, X, r=None):
    inner = set(ball_indices(X, r)) if r is not None else set()
    supp = sorted({X.root} | inner | {i for i in range(X.n) if rng.random() < 0.6})
    mass = [X.mass[i] if i in inner else (X.mass[i] * F(rng.randint(0, 4), 4) if i in supp else 0)
            for i in range(X.n)]
    return SubspaceSpec.exact(X, supp, mass)


def test_subspace_monotonicity(criterion):
    c = criterion(6, "projected subspace is no farther than the parents (200 triples, with and without r)")
    rng = random.Random(6)
    worse = ball_miss = 0
    for _ in range(200):
        X, Y = random_space(rng, 4), random_space(rng, 4)
        cert = cghp_distance(X, Y)
        xsub = _subspace(rng, X)
        proj = project_subspace(X, Y, xsub, cert)
        worse += cghp_distance(xsub.realize(), proj.space).value > cert.value
        r = 2 * cert.value + F(rng.randint(0, 12), 4)
        xsub = _subspace(rng, X, r)
        proj = project_subspace(X, Y, xsub, cert, r=r)
        worse += cghp_distance(xsub.realize(), proj.space).value > cert.value
        for j in ball_indices(Y, r - 2 * cert.value):
            if j not in proj.subspace.support or proj.subspace.lower[j] != Y.mass[j]:
                ball_miss += 1
    c.check("cghp(Xsub, Y') <= cghp(X, Y)", worse == 0, f"{worse} violations")
    c.check("ball of radius r - 2 cghp kept", ball_miss == 0, f"{ball_miss} misses")
    c.finish()


def test_localization_closed_forms(criterion):
    c = criterion(7, "ghp far-atom closed forms; ghp(X, ball_r X) <= 1/r")
    atom = validate_space([[0]], 0, [1])
    for n in (2, 5, 10):
        v = ghp_distance(from_points([0, n], mass=[1, 1]), atom, TOL).value
        c.check(f"n={n}", abs(float(v) - 1 / n) <= TOL, f"got {float(v):.9f}")
    rng = random.Random(7)
    bad = 0
    for _ in range(50):
        X = random_space(rng, 5, top=6)
        for r in (1, 2, 5):
            bad += ghp_distance(X, closed_ball(X, r), TOL).value > F(1, r) + F(TOL)
    c.check("ball bound", bad == 0, f"{bad} violations")
    c.finish()


def _near_copy(rng, X):
    s = 1 + F(rng.randint(0, 4), 16)
    mass = [max(F(0), m + F(rng.randint(-1, 1), 16)) for m in X.mass]
    return validate_space([[d * s for d in row] for row in X.dist], X.root, mass)


def test_monotone_a_and_bisection(criterion):
    c = criterion(8, "a(eps, r) non-increasing in eps; predicate switches once and matches the bracket")
    rng = random.Random(8)
    grid = [F(1, 32), F(1, 16), F(1, 8), F(1, 4), F(3, 8), F(1, 2), F(3, 4), F(1)]
    not_mono = multi = disagree = 0
    for k in range(100):
        X = random_space(rng, 3)
        Y = random_space(rng, 3) if k % 2 else _near_copy(rng, X)
        r = F(rng.randint(4, 16), 4)
        vals = [localized_a(LocalizationQuery(e, r), X, Y).value for e in grid]
        not_mono += any(b > a for a, b in zip(vals, vals[1:]))
        table = ghp_grid(X, Y, grid)
        seq = [table[e] for e in grid]
        switches = sum(a != b for a, b in zip(seq, seq[1:]))
        multi += switches > 1 or (switches == 1 and seq[0])
        res = ghp_distance(X, Y, TOL)
        if not table[F(1)]:
            # no eps works: the distance is 1 by convention
            disagree += res.value != 1 or any(seq)
            continue
        for e in grid:
            if (e >= res.hi and not table[e]) or (e <= res.lo and res.lo > 0 and table[e]):
                disagree += 1
    c.check("a monotone", not_mono == 0, f"{not_mono} pairs")
    c.check("single false->true switch", multi == 0, f"{multi} pairs")
    c.check("grid agrees with bracket", disagree == 0, f"{disagree} points")
    c.finish()


def test_convergence_examples(criterion):
    c = criterion(9, "convergence examples")
    limit = from_points([0, 1, -1])

    def Xn(n):
        return from_points([0, 1 + F(1, n), -1 - F(2, n)])

    g = ghp_distance(Xn(50), limit, TOL).value
    c.check("ghp(X_50, X) < 0.05", g < F(1, 20), f"got {float(g):.6f}")
    i = integral_ghp(Xn(50), limit)
    c.check("integral_ghp(X_50, X) < 0.05", i < 0.05, f"got {i:.6f}")
    two = validate_space([[0]], 0, [2])
    g = ghp_distance(from_points([0, F(1, 100)], mass=[1, 1]), two, TOL).value
    c.check("ghp(pair_100, 2 delta) < 0.02", g < F(1, 50), f"got {float(g):.6f}")
    rep = check_convergence([Xn(n) for n in (5, 10, 20, 50)], limit, ("balls",), [F(1, 2), F(5, 2)])
    for r in (F(1, 2), F(5, 2)):
        vals = rep.balls.get(r, [])
        ok = len(vals) == 4 and all(b <= a for a, b in zip(vals, vals[1:]))
        c.check(f"ball criterion at r={r} decreasing", ok, f"values {[str(v) for v in vals]}")
    c.finish()


def test_ghp_vs_cghp(criterion):
    c = criterion(10, "ghp <= 1/r v 2 cghp(balls), ghp <= 2 cghp, 0 <= ghp <= 1")
    local = compact = rng_bad = 0
    for X, Y in corpus():
        g = ghp_distance(X, Y, TOL).value
        rng_bad += not (0 <= g <= 1)
        compact += g > min(F(1), 2 * cghp_distance(X, Y).value) + F(TOL)
        for r in (1, 2, 4):
            cb = cghp_distance(closed_ball(X, r), closed_ball(Y, r)).value
            local += g > max(F(1, r), min(F(1), 2 * cb)) + F(TOL)
    c.check("local bound", local == 0, f"{local} violations")
    c.check("compact bound", compact == 0, f"{compact} violations")
    c.check("range", rng_bad == 0, f"{rng_bad} out of [0, 1]")
    c.finish()


def test_benjamini_schramm(criterion):
    c = criterion(11, "BS distance zero iff rooted isomorphic; edge vs vertex; zero sets match ghp")
    reps = [T for bucket in tree_classes(6, 2, seed=11).values() for T in bucket]
    wrong = 0
    for a, b in product(reps, reps):
        wrong += (bs_distance(a, b).distance == 0) != nx_rooted_isomorphic(a, b)
    c.check(f"exhaustive trees <= 6 ({len(reps)} trees)", wrong == 0, f"{wrong} pairs")
    edge, vertex = RootedGraph(2, ((0, 1),), 0), RootedGraph(1, (), 0)
    v = bs_distance(edge, vertex).distance
    c.check("edge vs vertex = 1/2", v == F(1, 2), f"got {v}")
    rng = random.Random(12)
    incons = 0
    for k in range(100):
        a = random_tree(rng, 5)
        if k % 2:
            # a relabelled copy, so that isomorphic pairs occur
            perm = list(range(a.n))
            rng.shuffle(perm)
            b = RootedGraph(a.n, tuple((perm[u], perm[v]) for u, v in a.edges), perm[a.root])
        else:
            b = random_tree(rng, 5)
        incons += not bs_gh_consistency(a, b, TOL).consistent
    c.check("zero sets agree (100 pairs)", incons == 0, f"{incons} pairs")
    c.finish()


def test_weak_reduction(criterion):
    c = criterion(12, "empirical weak distance <= 1/r v 2 P^c(r-balls) (50 collections)")
    rng = random.Random(13)
    bad = 0

    def cghp_metric(P, Q):
        return cghp_distance(P, Q).value

    for _ in range(50):
        A = [random_space(rng, 3) for _ in range(rng.randint(1, 3))]
        B = [random_space(rng, 3) for _ in range(rng.randint(1, 3))]
        P = empirical_weak_distance(A, B, TOL).value
        for r in (1, 2):
            Pc = empirical_prokhorov([closed_ball(X, r) for X in A], [closed_ball(Y, r) for Y in B],
                                     cghp_metric).value
            bad += P > max(F(1, r), 2 * Pc) + F(TOL)
    c.check("weak bound", bad == 0, f"{bad} violations")
    c.finish()
