"""Rooted graphs: the Benjamini-Schramm distance and the graph-metric bridge."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import ValidationError
from .ghp import ghp_distance
from .spaces import FiniteSpace, validate_space

ZERO = "zero"
COUNTING = "counting"


@dataclass(frozen=True)
class RootedGraph:
    """Simple connected undirected graph on ``range(n)`` with a root."""

    n: int
    edges: tuple
    root: int = 0
    labels: tuple | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("graph needs at least one vertex")
        if not 0 <= self.root < self.n:
            raise ValidationError("root index out of range", (self.root,))
        seen = set()
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError("edge endpoint out of range", (u, v))
            if u == v:
                raise ValidationError("self-loop", (u,))
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValidationError("multi-edge", key)
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        dist = bfs(self.adjacency(), self.root)
        missing = [v for v in range(self.n) if dist[v] is None]
        if missing:
            raise ValidationError("graph is disconnected", tuple(missing))

    def adjacency(self) -> list:
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return [sorted(a) for a in adj]

    def distances(self) -> list:
        adj = self.adjacency()
        return [bfs(adj, s) for s in range(self.n)]

    def ball(self, k: int) -> "RootedGraph":
        """Induced subgraph on vertices within graph distance ``k`` of the root."""
        d = bfs(self.adjacency(), self.root)
        keep = [v for v in range(self.n) if d[v] <= k]
        idx = {v: i for i, v in enumerate(keep)}
        edges = tuple((idx[u], idx[v]) for u, v in self.edges if u in idx and v in idx)
        labels = tuple(self.labels[v] for v in keep) if self.labels else None
        return RootedGraph(len(keep), edges, idx[self.root], labels)

    def eccentricity(self) -> int:
        return max(bfs(self.adjacency(), self.root))


def bfs(adj: Sequence, s: int) -> list:
    dist = [None] * len(adj)
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if dist[v] is None:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def graph_to_space(G: RootedGraph, measure: str = ZERO) -> FiniteSpace:
    """Graph metric on the vertices; mass 0 everywhere or 1 per vertex."""
    if measure not in (ZERO, COUNTING):
        raise ValidationError("measure must be 'zero' or 'counting'", ())
    w = 1 if measure == COUNTING else 0
    return validate_space(G.distances(), G.root, [w] * G.n, G.labels)


def rooted_isomorphic(G: RootedGraph, H: RootedGraph) -> bool:
    """Root-preserving graph isomorphism by backtracking.

    Vertices are only matched within the same (root distance, degree) class,
    and each new match must agree on adjacency with all earlier ones.
    """
    if G.n != H.n or len(G.edges) != len(H.edges):
        return False
    ga, ha = G.adjacency(), H.adjacency()
    gd, hd = bfs(ga, G.root), bfs(ha, H.root)
    gsig = [(gd[v], len(ga[v])) for v in range(G.n)]
    hsig = [(hd[v], len(ha[v])) for v in range(H.n)]
    if sorted(gsig) != sorted(hsig):
        return False
    order = sorted(range(G.n), key=lambda v: (gd[v], -len(ga[v]), v))
    gset = [set(a) for a in ga]
    hset = [set(a) for a in ha]
    fmap = {}
    used = set()

    def extend(k):
        if k == len(order):
            return True
        v = order[k]
        for w in range(H.n):
            if w in used or hsig[w] != gsig[v]:
                continue
            if v == G.root and w != H.root:
                continue
            if any((u in gset[v]) != (fmap[u] in hset[w]) for u in fmap):
                continue
            fmap[v] = w
            used.add(w)
            if extend(k + 1):
                return True
            del fmap[v]
            used.discard(w)
        return False

    return extend(0)


@dataclass(frozen=True)
class BsResult:
    distance: Fraction
    alpha: object          # supremum radius, or None for "infinite" (isomorphic)
    agree_upto: int | None  # largest integer radius with isomorphic balls


def bs_distance(G1: RootedGraph, G2: RootedGraph) -> BsResult:
    """Benjamini-Schramm distance ``1 / (alpha + 1)``.

    Balls of a graph metric only change at integers, so if the balls agree
    for radii ``0..k`` and differ at ``k + 1`` the supremum of agreeing radii
    is ``alpha = k + 1``.  Agreement up to both eccentricities means the
    rooted graphs are isomorphic and the distance is 0.
    """
    top = max(G1.eccentricity(), G2.eccentricity())
    k = -1
    while k < top:
        if not rooted_isomorphic(G1.ball(k + 1), G2.ball(k + 1)):
            break
        k += 1
    if k >= top:
        return BsResult(Fraction(0), None, k)
    # k == -1 cannot happen: radius-0 balls are single points
    alpha = k + 1
    return BsResult(Fraction(1, alpha + 1), alpha, k)


@dataclass(frozen=True)
class BsGhReport:
    bs: Fraction
    ghp: object
    ghp_bracket: tuple
    consistent: bool


def bs_gh_consistency(G1: RootedGraph, G2: RootedGraph, tol=1e-6, budget: int = 25) -> BsGhReport:
    """Compare the BS distance with ghp of the zero-measure graph spaces.

    ``consistent`` means the two agree on whether the graphs are the same.
    """
    b = bs_distance(G1, G2).distance
    res = ghp_distance(graph_to_space(G1, ZERO), graph_to_space(G2, ZERO), tol, budget)
    return BsGhReport(b, res.value, (res.lo, res.hi), (b == 0) == (res.value <= tol))
