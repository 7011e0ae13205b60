from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from ghpkit.errors import ValidationError
from ghpkit.graphs import (COUNTING, RootedGraph, bs_distance, bs_gh_consistency, graph_to_space,
                           rooted_isomorphic)
from treegen import canonical, nx_rooted_isomorphic, random_tree, tree_classes

EDGE = RootedGraph(2, ((0, 1),), 0)
VERTEX = RootedGraph(1, (), 0)


def path(n, root=0):
    return RootedGraph(n, tuple((i, i + 1) for i in range(n - 1)), root)


def test_graph_validation():
    with pytest.raises(ValidationError) as ei:
        RootedGraph(3, ((0, 1),), 0)
    assert ei.value.invariant == "graph is disconnected" and ei.value.witness == (2,)
    with pytest.raises(ValidationError):
        RootedGraph(2, ((0, 0),), 0)
    with pytest.raises(ValidationError):
        RootedGraph(2, ((0, 1), (1, 0)), 0)
    with pytest.raises(ValidationError):
        RootedGraph(2, ((0, 1),), 5)
    with pytest.raises(ValidationError):
        RootedGraph(0, (), 0)


def test_graph_to_space_cycle():
    C4 = RootedGraph(4, ((0, 1), (1, 2), (2, 3), (3, 0)), 0)
    X = graph_to_space(C4)
    assert X.dist[0] == (0, 1, 2, 1)
    assert X.mass == (0, 0, 0, 0)
    assert graph_to_space(C4, COUNTING).total_mass == 4
    with pytest.raises(ValidationError):
        graph_to_space(C4, "uniform")


def test_ball_and_eccentricity():
    P = path(5, root=2)
    assert P.eccentricity() == 2
    B = P.ball(1)
    assert B.n == 3 and len(B.edges) == 2 and B.eccentricity() == 1


def test_bs_examples():
    assert bs_distance(EDGE, VERTEX).distance == F(1, 2)
    assert bs_distance(path(3), path(4)).distance == F(1, 4)
    assert bs_distance(path(3), path(3)).distance == 0
    r = bs_distance(path(3), path(3, root=1))
    assert r.distance == F(1, 2) and r.alpha == 1 and r.agree_upto == 0


def test_bs_pseudometric_on_random_trees():
    rng = random.Random(3)
    Ts = [random_tree(rng, 6) for _ in range(12)]
    for a in Ts:
        assert bs_distance(a, a).distance == 0
        for b in Ts:
            dab = bs_distance(a, b).distance
            assert dab == bs_distance(b, a).distance
            for c in Ts[:4]:
                # ultrametric, hence also a triangle inequality
                assert bs_distance(a, c).distance <= max(dab, bs_distance(b, c).distance)


def test_isomorphism_matches_networkx():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 6)
        G = random_tree(rng, n, n)
        H = random_tree(rng, n, n)
        assert rooted_isomorphic(G, H) == nx_rooted_isomorphic(G, H)


def test_isomorphism_on_non_trees():
    C4 = RootedGraph(4, ((0, 1), (1, 2), (2, 3), (3, 0)), 0)
    K13 = RootedGraph(4, ((0, 1), (0, 2), (0, 3)), 0)
    C4b = RootedGraph(4, ((0, 2), (2, 1), (1, 3), (3, 0)), 1)
    assert rooted_isomorphic(C4, C4b)
    assert not rooted_isomorphic(C4, K13)


def test_bs_zero_iff_same_shape_small():
    reps = [T for bucket in tree_classes(5, 2).values() for T in bucket]
    for a in reps:
        for b in reps:
            assert (bs_distance(a, b).distance == 0) == (canonical(a) == canonical(b))


def test_bs_ghp_consistency():
    rep = bs_gh_consistency(EDGE, VERTEX)
    assert rep.bs == F(1, 2) and rep.consistent and rep.ghp > 0
    rep = bs_gh_consistency(path(3, root=1), RootedGraph(3, ((1, 0), (0, 2)), 0))
    assert rep.bs == 0 and rep.ghp == 0 and rep.consistent
