from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from ghpkit.lp import (INFEASIBLE, OPTIMAL, UNBOUNDED_STATUS, FlowNetwork, LpProblem, flow_conserved, lp_solve,
                       max_flow)


def test_lower_bound_only():
    p = LpProblem(1, [1])
    p.add({0: 1}, ">=", 3)
    r = lp_solve(p)
    assert r.status == OPTIMAL and r.value == 3


def test_simple_equality():
    p = LpProblem(2, [1, 1])
    p.add({0: 1, 1: 1}, "==", 1)
    assert lp_solve(p).value == 1


@pytest.mark.parametrize("backend", ["rational", "float"])
def test_max_of_two_sums(backend):
    # min t with t >= p, t >= n, p - n = 3/10
    p = LpProblem(3, [0, 0, 1])
    p.add({0: 1, 1: -1}, "==", F(3, 10))
    p.add({2: 1, 0: -1}, ">=", 0)
    p.add({2: 1, 1: -1}, ">=", 0)
    r = lp_solve(p, backend)
    assert r.value == pytest.approx(0.3, abs=1e-12)
    if backend == "rational":
        assert r.value == F(3, 10)


def test_infeasible_and_unbounded():
    p = LpProblem(1, [1])
    p.add({0: 1}, "<=", -1)
    assert lp_solve(p).status == INFEASIBLE
    q = LpProblem(1, [-1])
    assert lp_solve(q).status == UNBOUNDED_STATUS


def test_bounds_and_shift():
    p = LpProblem(2, [1, -1], lower=[F(1, 2), 0], upper=[None, 2])
    p.add({0: 1, 1: 1}, "<=", 5)
    r = lp_solve(p)
    assert r.value == F(1, 2) - 2
    assert r.x == (F(1, 2), 2)


def test_bad_index():
    p = LpProblem(1, [1])
    p.add({3: 1}, "<=", 1)
    with pytest.raises(ValueError):
        lp_solve(p)


def _random_lp(rng):
    n = rng.randint(1, 5)
    p = LpProblem(n, [rng.randint(0, 10) for _ in range(n)])
    for _ in range(rng.randint(1, 5)):
        coeffs = {k: rng.randint(0, 10) for k in range(n)}
        p.add(coeffs, rng.choice(["<=", ">=", "=="]), rng.randint(0, 10))
    return p


def test_backends_agree_and_resubstitute():
    rng = random.Random(5)
    seen = 0
    for _ in range(300):
        p = _random_lp(rng)
        a, b = lp_solve(p, "rational"), lp_solve(p, "float")
        assert a.status == b.status
        if a.status != OPTIMAL:
            continue
        seen += 1
        assert abs(float(a.value) - b.value) <= 1e-6
        assert sum(c * x for c, x in zip(p.objective, a.x)) == a.value
        for c in p.constraints:
            lhs = sum(v * a.x[k] for k, v in c.coeffs.items())
            assert {"<=": lhs <= c.rhs, ">=": lhs >= c.rhs, "==": lhs == c.rhs}[c.relation]
        assert all(x >= 0 for x in a.x)
    assert seen > 50


def test_deterministic():
    rng = random.Random(9)
    p = _random_lp(rng)
    assert lp_solve(p) == lp_solve(p)


def _check_flow(net, res):
    assert flow_conserved(net, res)
    assert res.value == res.cut_capacity(net)


def test_single_arc():
    net = FlowNetwork(2, 0, 1, [(0, 1, 5)])
    res = max_flow(net)
    assert res.value == 5
    _check_flow(net, res)


def test_two_paths():
    net = FlowNetwork(4, 0, 3, [(0, 1, 2), (1, 3, 2), (0, 2, 3), (2, 3, 3)])
    res = max_flow(net)
    assert res.value == 5
    _check_flow(net, res)


def test_bottleneck_cut():
    # s -> a, s -> b (cap 1 each), both into m (unbounded), m -> t cap 1
    net = FlowNetwork(4, 0, 3, [(0, 1, 1), (0, 2, 1), (1, 3, None), (2, 3, None)])
    assert max_flow(net).value == 2
    net = FlowNetwork(5, 0, 4, [(0, 1, 1), (0, 2, 1), (1, 3, None), (2, 3, None), (3, 4, 1)])
    res = max_flow(net)
    assert res.value == 1
    assert res.source_side == frozenset({0, 1, 2, 3})
    _check_flow(net, res)


def test_unbounded_flow():
    net = FlowNetwork(2, 0, 1, [(0, 1, None)])
    assert max_flow(net).value is None


def test_random_flows_certified():
    rng = random.Random(2)
    for _ in range(100):
        n = rng.randint(2, 7)
        arcs = [(rng.randrange(n), rng.randrange(n), F(rng.randint(0, 10), rng.randint(1, 3)))
                for _ in range(rng.randint(1, 14))]
        arcs = [a for a in arcs if a[0] != a[1] and a[1] != 0 and a[0] != n - 1]
        net = FlowNetwork(n, 0, n - 1, arcs)
        _check_flow(net, max_flow(net))
