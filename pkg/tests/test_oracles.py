from __future__ import annotations

from fractions import Fraction as F

import pytest

from ghpkit.errors import BudgetExceeded
from ghpkit.oracles import bracket_from_grid, cghp_bruteforce, ghp_grid, prokhorov_bruteforce
from ghpkit.spaces import from_points, validate_space


def test_prokhorov_oracle_examples():
    d = [[0, 1], [1, 0]]
    assert prokhorov_bruteforce(d, [1, 0], [0, F(3, 2)]) == 1
    assert prokhorov_bruteforce(d, [F(1, 3), 2], [F(1, 3), 2]) == 0
    assert prokhorov_bruteforce(d, [1, 0], [1, F(1, 5)]) == F(1, 5)


def test_prokhorov_oracle_budget():
    n = 13
    with pytest.raises(BudgetExceeded):
        prokhorov_bruteforce([[0] * n for _ in range(n)], [0] * n, [0] * n)


def test_cghp_oracle_examples():
    assert cghp_bruteforce([[0, 3], [3, 0]], 0, [0, 0], [[0]], 0, [0]) == F(3, 2)
    d = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    assert cghp_bruteforce(d, 0, [1, 0, 2], d, 0, [1, 0, 2]) == 0
    assert cghp_bruteforce([[0]], 0, [1], [[0]], 0, [2]) == 1
    tri = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    assert cghp_bruteforce(tri, 0, [1, 1, 1], d, 0, [1, 1, 1]) == F(1, 2)


def test_cghp_oracle_budget():
    d = [[0] * 5 for _ in range(5)]
    with pytest.raises(BudgetExceeded):
        cghp_bruteforce(d, 0, [0] * 5, d[:4], 0, [0] * 4)


def test_grid_identity_all_true():
    X = from_points([0, 1, 3], mass=[1, 0, 2])
    assert all(ghp_grid(X, X, [F(1, 10), F(1, 2), 1]).values())


def test_grid_far_pair():
    X = from_points([0, 5], mass=[1, 1])
    Y = validate_space([[0]], 0, [1])
    table = ghp_grid(X, Y, [F(1, 10), F(1, 5), F(1, 4), F(1, 2), 1])
    assert [table[e] for e in sorted(table)] == [False, False, True, True, True]
    assert bracket_from_grid(table) == (F(1, 5), F(1, 4))


def test_grid_float_eps_is_read_exactly():
    X = from_points([0, 5], mass=[1, 1])
    Y = validate_space([[0]], 0, [1])
    assert ghp_grid(X, Y, [0.1, 0.25]) == {0.1: False, 0.25: True}
