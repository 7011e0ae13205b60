"""Small deterministic optimisation kernels.

``lp_solve`` is a dense two-phase tableau simplex with Bland's rule.  The
rational backend runs on exact rationals (``gmpy2.mpq`` internally, ``Fraction``
at the boundary); the float backend uses ``TAU``-style pivot tolerances.
``max_flow`` is Edmonds-Karp (shortest augmenting paths, fixed arc order).

Missing upper bounds and infinite capacities are written ``None``
(:data:`UNBOUNDED`), never as a large number.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2

from . import _numeric as num

UNBOUNDED = None

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED_STATUS = "unbounded"

_FLOAT_PIVOT_EPS = 1e-11
_FLOAT_FEAS_EPS = 1e-9

RELATIONS = ("<=", "==", ">=")


@dataclass(frozen=True)
class Constraint:
    """``sum(coeffs[k] * x[k]) relation rhs``; ``coeffs`` maps variable index to coefficient."""

    coeffs: dict
    relation: str
    rhs: object


@dataclass
class LpProblem:
    """Minimise ``objective . x`` subject to ``constraints`` and ``lower <= x <= upper``.

    ``lower`` defaults to 0 for every variable; ``upper`` entries may be
    ``None`` (no bound).
    """

    n_vars: int
    objective: list
    constraints: list = field(default_factory=list)
    lower: list | None = None
    upper: list | None = None

    def add(self, coeffs: dict, relation: str, rhs) -> None:
        self.constraints.append(Constraint(dict(coeffs), relation, rhs))

    def numbers(self):
        yield from self.objective
        for c in self.constraints:
            yield from c.coeffs.values()
            yield c.rhs
        for b in self.lower or ():
            yield b
        for b in self.upper or ():
            if b is not None:
                yield b

    def check(self) -> None:
        if len(self.objective) != self.n_vars:
            raise ValueError("objective length mismatch")
        for c in self.constraints:
            if c.relation not in RELATIONS:
                raise ValueError(f"unknown relation {c.relation!r}")
            for k in c.coeffs:
                if not 0 <= k < self.n_vars:
                    raise ValueError(f"variable index {k} out of range")
            if c.rhs is None:
                raise ValueError("rhs must be finite")
        for b in (self.lower, self.upper):
            if b is not None and len(b) != self.n_vars:
                raise ValueError("bound length mismatch")


@dataclass(frozen=True)
class LpResult:
    status: str
    value: object = None
    x: tuple | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Exact:
    backend = num.RATIONAL

    @staticmethod
    def conv(x):
        if isinstance(x, Fraction):
            return gmpy2.mpq(x.numerator, x.denominator)
        return gmpy2.mpq(x)

    @staticmethod
    def out(x):
        return Fraction(int(x.numerator), int(x.denominator))

    zero = gmpy2.mpq(0)
    one = gmpy2.mpq(1)
    pivot_eps = 0
    feas_eps = 0


class _Float:
    backend = num.FLOAT
    conv = staticmethod(float)
    out = staticmethod(float)
    zero = 0.0
    one = 1.0
    pivot_eps = _FLOAT_PIVOT_EPS
    feas_eps = _FLOAT_FEAS_EPS


def lp_solve(p: LpProblem, backend: str | None = None) -> LpResult:
    """Solve ``p``; returns an :class:`LpResult` with status optimal, infeasible or unbounded."""
    p.check()
    if backend is None:
        backend = num.infer_backend(p.numbers())
    ar = _Exact if backend == num.RATIONAL else _Float
    n = p.n_vars
    lower = [ar.conv(b) for b in p.lower] if p.lower is not None else [ar.zero] * n
    upper = [None if b is None else ar.conv(b) for b in p.upper] if p.upper is not None else [None] * n
    cost = [ar.conv(c) for c in p.objective]

    # rows in shifted variables x' = x - lower
    rows = []  # (coeff dict, relation, rhs)
    for c in p.constraints:
        coeffs = {k: ar.conv(v) for k, v in c.coeffs.items() if v != 0}
        rhs = ar.conv(c.rhs) - sum((v * lower[k] for k, v in coeffs.items()), ar.zero)
        rows.append((coeffs, c.relation, rhs))
    for k in range(n):
        if upper[k] is not None:
            rows.append(({k: ar.one}, "<=", upper[k] - lower[k]))

    xs = _simplex(n, cost, rows, ar)
    if isinstance(xs, str):
        return LpResult(xs)
    x = tuple(ar.out(lower[k] + xs[k]) for k in range(n))
    value = sum((num.to_number(c, backend) * xi for c, xi in zip(p.objective, x)), num.zero(backend))
    return LpResult(OPTIMAL, value, x)


def _pivot(T, obj, r, j):
    prow = T[r]
    piv = prow[j]
    if piv != 1:
        prow = [a / piv for a in prow]
        T[r] = prow
    for i, row in enumerate(T):
        if i != r:
            f = row[j]
            if f:
                T[i] = [a - f * b for a, b in zip(row, prow)]
    f = obj[j]
    if f:
        obj[:] = [a - f * b for a, b in zip(obj, prow)]


def _run(T, obj, basis, allowed, ar):
    """Bland's rule iterations; returns None on optimality or ``UNBOUNDED_STATUS``."""
    eps = ar.pivot_eps
    while True:
        enter = -1
        for j in allowed:
            if obj[j] < -eps:
                enter = j
                break
        if enter < 0:
            return None
        best = None
        leave = -1
        for i, row in enumerate(T):
            a = row[enter]
            if a > eps:
                ratio = row[-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED_STATUS
        _pivot(T, obj, leave, enter)
        basis[leave] = enter


def _simplex(n, cost, rows, ar):
    m = len(rows)
    # column layout: structural | slack/surplus | artificial
    n_slack = sum(1 for _, rel, _ in rows if rel != "==")
    width = n + n_slack
    T = []
    basis = []
    art_rows = []
    s = n
    for coeffs, rel, rhs in rows:
        if rhs < 0:
            coeffs = {k: -v for k, v in coeffs.items()}
            rhs = -rhs
            rel = {"<=": ">=", ">=": "<=", "==": "=="}[rel]
        row = [ar.zero] * (width + 1)
        for k, v in coeffs.items():
            row[k] = v
        row[-1] = rhs
        if rel == "<=":
            row[s] = ar.one
            basis.append(s)
            s += 1
        elif rel == ">=":
            row[s] = -ar.one
            basis.append(-1)
            s += 1
        else:
            basis.append(-1)
        T.append(row)
    # artificials only where no slack can start the basis
    n_art = sum(1 for b in basis if b < 0)
    full = width + n_art
    a = width
    for i in range(m):
        row = T[i]
        T[i] = row[:-1] + [ar.zero] * n_art + [row[-1]]
        if basis[i] < 0:
            T[i][a] = ar.one
            basis[i] = a
            art_rows.append(i)
            a += 1

    if n_art:
        obj = [ar.zero] * (full + 1)
        for j in range(width, full):
            obj[j] = ar.one
        for i in art_rows:
            row = T[i]
            obj = [o - v for o, v in zip(obj, row)]
        _run(T, obj, basis, range(width), ar)
        if -obj[-1] > ar.feas_eps:
            return INFEASIBLE
        # drive zero-level artificials out, dropping redundant rows
        i = 0
        while i < len(T):
            if basis[i] >= width:
                row = T[i]
                j = next((j for j in range(width) if abs(row[j]) > ar.pivot_eps), -1)
                if j < 0:
                    del T[i]
                    del basis[i]
                    continue
                _pivot(T, obj, i, j)
                basis[i] = j
            i += 1
        T = [row[:width] + [row[-1]] for row in T]

    obj = [ar.zero] * (width + 1)
    for j in range(n):
        obj[j] = cost[j]
    for i, b in enumerate(basis):
        cb = obj[b] if b < n else ar.zero
        if cb:
            row = T[i]
            obj = [o - cb * v for o, v in zip(obj, row)]
    status = _run(T, obj, basis, range(width), ar)
    if status is not None:
        return status
    x = [ar.zero] * width
    for i, b in enumerate(basis):
        x[b] = T[i][-1]
    if ar is _Float:
        x = [max(v, 0.0) for v in x]
    return x[:n]


# ---------------------------------------------------------------------------
# max flow


@dataclass(frozen=True)
class FlowNetwork:
    """Directed network; ``arcs`` are ``(tail, head, capacity)`` with capacity ``None`` = unbounded."""

    n_nodes: int
    source: int
    sink: int
    arcs: tuple

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(tuple(a) for a in self.arcs))
        for u, v, c in self.arcs:
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ValueError(f"arc ({u}, {v}) references a missing node")
            if c is not None and c < 0:
                raise ValueError("capacities must be nonnegative")


@dataclass(frozen=True)
class FlowResult:
    """``value`` is None when an unbounded path exists; ``source_side`` is the min-cut side of the source."""

    value: object
    flow: tuple
    source_side: frozenset

    def cut_capacity(self, net: FlowNetwork):
        total = 0
        for (u, v, c) in net.arcs:
            if u in self.source_side and v not in self.source_side:
                if c is None:
                    return None
                total = total + c
        return total


def max_flow(net: FlowNetwork) -> FlowResult:
    """Edmonds-Karp; arcs are scanned in input order so results are reproducible."""
    n = net.n_nodes
    s, t = net.source, net.sink
    # residual graph: edge list with paired reverse edges
    head, cap, adj = [], [], [[] for _ in range(n)]
    for (u, v, c) in net.arcs:
        adj[u].append(len(head))
        head.append(v)
        cap.append(c)
        adj[v].append(len(head))
        head.append(u)
        cap.append(0)
    flow_value = 0
    while True:
        prev = [-1] * n
        prev[s] = -2
        q = deque([s])
        while q and prev[t] == -1:
            u = q.popleft()
            for e in adj[u]:
                v = head[e]
                if prev[v] == -1 and (cap[e] is None or cap[e] > 0):
                    prev[v] = e
                    q.append(v)
        if prev[t] == -1:
            break
        bottleneck = None
        v = t
        while v != s:
            e = prev[v]
            if cap[e] is not None and (bottleneck is None or cap[e] < bottleneck):
                bottleneck = cap[e]
            v = head[e ^ 1]
        if bottleneck is None:
            side = _reachable(n, s, adj, head, cap)
            return FlowResult(None, (), frozenset(side))
        v = t
        while v != s:
            e = prev[v]
            if cap[e] is not None:
                cap[e] -= bottleneck
            if cap[e ^ 1] is not None:
                cap[e ^ 1] += bottleneck
            v = head[e ^ 1]
        flow_value = flow_value + bottleneck
    flows = []
    for k, (u, v, c) in enumerate(net.arcs):
        back = cap[2 * k + 1]
        flows.append(back)
    side = _reachable(n, s, adj, head, cap)
    return FlowResult(flow_value, tuple(flows), frozenset(side))


def _reachable(n, s, adj, head, cap):
    seen = {s}
    q = deque([s])
    while q:
        u = q.popleft()
        for e in adj[u]:
            v = head[e]
            if v not in seen and (cap[e] is None or cap[e] > 0):
                seen.add(v)
                q.append(v)
    return seen


def flow_conserved(net: FlowNetwork, res: FlowResult, backend: str = num.RATIONAL) -> bool:
    """Capacity and conservation check for a returned flow."""
    bal = [0] * net.n_nodes
    for (u, v, c), f in zip(net.arcs, res.flow):
        if f < 0 or (c is not None and not num.le(f, c, backend)):
            return False
        bal[u] -= f
        bal[v] += f
    return all(num.eq(bal[w], 0, backend) for w in range(net.n_nodes) if w not in (net.source, net.sink))


def solve_rows(n_vars: int, objective: Sequence, rows, upper=None, backend=None) -> LpResult:
    """Convenience wrapper: ``rows`` are ``(coeffs, relation, rhs)`` triples."""
    p = LpProblem(n_vars, list(objective), [Constraint(dict(c), r, b) for c, r, b in rows], None, upper)
    return lp_solve(p, backend)
