"""Finite pointed measured metric spaces, balls and subspaces."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Sequence

from . import _numeric as num
from .errors import ValidationError


@dataclass(frozen=True)
class FiniteSpace:
    """A finite pointed measured metric space.

    ``dist`` is an n-by-n tuple of tuples, ``mass`` an n-tuple, ``root`` an
    index.  All entries share one numeric backend (``Fraction`` or ``float``).
    Instances are produced by :func:`validate_space`; the constructor itself
    does not check the metric axioms.
    """

    dist: tuple
    root: int
    mass: tuple
    labels: tuple | None = None
    backend: str = num.RATIONAL

    @property
    def n(self) -> int:
        return len(self.mass)

    def __len__(self) -> int:
        return len(self.mass)

    @property
    def total_mass(self):
        return sum(self.mass, num.zero(self.backend))

    def root_distances(self) -> tuple:
        return self.dist[self.root]

    def radius(self):
        """Largest distance from the root."""
        return max(self.dist[self.root])

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def restrict(self, indices: Sequence[int], mass: Sequence | None = None) -> "FiniteSpace":
        """Subspace on ``indices`` (which must contain the root), re-indexed in the given order."""
        idx = list(indices)
        if self.root not in idx:
            raise ValidationError("support must contain the root", (self.root,))
        d = tuple(tuple(self.dist[i][j] for j in idx) for i in idx)
        m = tuple(self.mass[i] for i in idx) if mass is None else tuple(mass)
        labels = tuple(self.label(i) for i in idx) if self.labels else None
        return FiniteSpace(d, idx.index(self.root), m, labels, self.backend)

    def with_mass(self, mass: Sequence) -> "FiniteSpace":
        return FiniteSpace(self.dist, self.root, tuple(num.to_number(m, self.backend) for m in mass),
                           self.labels, self.backend)

    def to_backend(self, backend: str) -> "FiniteSpace":
        if backend == self.backend:
            return self
        conv = lambda x: num.to_number(x, backend)  # noqa: E731
        return FiniteSpace(tuple(tuple(conv(x) for x in row) for row in self.dist), self.root,
                           tuple(conv(x) for x in self.mass), self.labels, backend)


def validate_space(dist, root: int = 0, mass=None, labels=None, backend: str | None = None) -> FiniteSpace:
    """Check the metric axioms and build a :class:`FiniteSpace`.

    Raises :class:`ValidationError` naming the first violated invariant with
    witness indices.  The backend is rational unless some entry is a float.
    Triangle checks are exact for rationals and use ``TAU`` slack for floats.
    """
    rows = [list(r) for r in dist]
    n = len(rows)
    if n == 0:
        raise ValidationError("space must contain at least one point")
    for i, r in enumerate(rows):
        if len(r) != n:
            raise ValidationError("matrix not square", (i,))
    if mass is None:
        mass = [0] * n
    mass = list(mass)
    if len(mass) != n:
        raise ValidationError("mass vector length mismatch", (len(mass), n))
    if backend is None:
        backend = num.infer_backend([x for r in rows for x in r] + mass)
    try:
        d = [[num.to_number(x, backend) for x in r] for r in rows]
        m = [num.to_number(x, backend) for x in mass]
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ValidationError("non-numeric entry", (), str(exc)) from exc
    if backend == num.FLOAT:
        import math

        for i in range(n):
            for j in range(n):
                if not math.isfinite(d[i][j]):
                    raise ValidationError("non-finite distance", (i, j))
        for i in range(n):
            if not math.isfinite(m[i]):
                raise ValidationError("non-finite mass", (i,))
    if not (isinstance(root, int) and 0 <= root < n):
        raise ValidationError("root index out of range", (root,))
    for i in range(n):
        if not num.eq(d[i][i], 0, backend):
            raise ValidationError("nonzero diagonal", (i, i))
    for i in range(n):
        for j in range(i + 1, n):
            if not num.eq(d[i][j], d[j][i], backend):
                raise ValidationError("asymmetric matrix", (i, j))
            if d[i][j] < 0:
                raise ValidationError("negative distance", (i, j))
    for i in range(n):
        if m[i] < 0:
            raise ValidationError("negative mass", (i,))
    witness = triangle_violation(d, backend)
    if witness is not None:
        raise ValidationError("triangle inequality violated", witness)
    if backend == num.FLOAT:
        # symmetrise exactly so downstream code sees d[i][j] == d[j][i]
        for i in range(n):
            d[i][i] = 0.0
            for j in range(i + 1, n):
                d[j][i] = d[i][j]
    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise ValidationError("labels length mismatch", (len(labels), n))
    return FiniteSpace(tuple(tuple(r) for r in d), root, tuple(m), labels, backend)


def triangle_violation(d, backend: str, slack: float = num.TAU):
    """First ``(i, j, k)`` with ``d[i][k] > d[i][j] + d[j][k]``, or None."""
    n = len(d)
    for i in range(n):
        di = d[i]
        for j in range(n):
            dij = di[j]
            dj = d[j]
            for k in range(n):
                if not num.le(di[k], dij + dj[k], backend, slack):
                    return (i, j, k)
    return None


def from_points(points: Sequence[float], root: int = 0, mass=None, labels=None) -> FiniteSpace:
    """Points on the real line with the absolute-value metric."""
    dist = [[abs(a - b) for b in points] for a in points]
    return validate_space(dist, root, mass, labels)


def ball_indices(X: FiniteSpace, r) -> list[int]:
    """Indices within distance ``r`` of the root (closed ball), in index order."""
    rd = X.dist[X.root]
    return [i for i in range(X.n) if rd[i] <= r]


def closed_ball(X: FiniteSpace, r) -> FiniteSpace:
    """The closed ball of radius ``r`` around the root, with restricted mass."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return X.restrict(ball_indices(X, r))


def discontinuity_radii(X: FiniteSpace) -> list:
    """Radii ``r > 0`` at which the ball curve jumps.

    In a finite space the open ball is closed, so the closed ball differs from
    the closure of the open ball exactly when some point sits at distance
    ``r`` from the root; every atom at distance ``r`` is such a point too.
    """
    return sorted({x for x in X.dist[X.root] if x > 0})


def is_continuity_radius(X: FiniteSpace, r) -> bool:
    return r > 0 and r not in set(X.dist[X.root])


@dataclass(frozen=True)
class BallPiece:
    start: object
    end: object  # None means +infinity
    indices: tuple
    mass: object


@dataclass(frozen=True)
class BallDecomposition:
    """Step representation of ``t -> closed_ball(X, t)``.

    ``radii[k]`` starts piece ``k``; the ball is constant on
    ``[radii[k], radii[k+1])`` and the last piece extends to infinity.
    """

    space: FiniteSpace
    radii: tuple
    pieces: tuple = field(repr=False)

    def piece_at(self, r) -> BallPiece:
        if r < 0:
            raise ValueError("radius must be nonnegative")
        k = bisect.bisect_right(self.radii, r) - 1
        return self.pieces[k]

    def ball(self, r) -> FiniteSpace:
        return self.space.restrict(self.piece_at(r).indices)


def ball_decomposition(X: FiniteSpace) -> BallDecomposition:
    rd = X.dist[X.root]
    radii = sorted(set(rd))
    pieces = []
    for k, r in enumerate(radii):
        idx = tuple(i for i in range(X.n) if rd[i] <= r)
        end = radii[k + 1] if k + 1 < len(radii) else None
        pieces.append(BallPiece(r, end, idx, sum((X.mass[i] for i in idx), num.zero(X.backend))))
    return BallDecomposition(X, tuple(radii), tuple(pieces))


@dataclass(frozen=True)
class SubspaceSpec:
    """A family of pmm-subspaces of ``parent``: a support and per-point mass bounds.

    Bounds are full-length tuples indexed by parent points and are zero off
    the support.  A single subspace is the special case ``lower == upper``.
    """

    parent: FiniteSpace
    support: tuple
    lower: tuple
    upper: tuple

    def __post_init__(self):
        P = self.parent
        sup = tuple(sorted(set(self.support)))
        object.__setattr__(self, "support", sup)
        if P.root not in sup:
            raise ValidationError("support must contain the root", (P.root,))
        if any(not 0 <= i < P.n for i in sup):
            raise ValidationError("support index out of range", sup)
        if len(self.lower) != P.n or len(self.upper) != P.n:
            raise ValidationError("mass bound length mismatch", (len(self.lower), len(self.upper), P.n))
        be = P.backend
        lo = tuple(num.to_number(x, be) for x in self.lower)
        hi = tuple(num.to_number(x, be) for x in self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        inside = set(sup)
        for i in range(P.n):
            if i in inside:
                if not (0 <= lo[i] and num.le(lo[i], hi[i], be) and num.le(hi[i], P.mass[i], be)):
                    raise ValidationError("mass bounds must satisfy 0 <= lower <= upper <= mass", (i,))
            elif lo[i] != 0 or hi[i] != 0:
                raise ValidationError("mass bounds must vanish off the support", (i,))

    @classmethod
    def exact(cls, parent: FiniteSpace, support, mass) -> "SubspaceSpec":
        """The single subspace with the given support and full-length mass vector."""
        return cls(parent, tuple(support), tuple(mass), tuple(mass))

    @classmethod
    def whole(cls, parent: FiniteSpace) -> "SubspaceSpec":
        return cls.exact(parent, range(parent.n), parent.mass)

    @classmethod
    def sandwich(cls, parent: FiniteSpace, support, inner_radius) -> "SubspaceSpec":
        """Subspaces on ``support`` whose mass lies between the inner ball's mass and the full mass."""
        inner = set(ball_indices(parent, inner_radius))
        sup = set(support)
        if not inner <= sup:
            raise ValidationError("support must contain the inner ball", tuple(sorted(inner - sup)))
        z = num.zero(parent.backend)
        lo = tuple(parent.mass[i] if i in inner else z for i in range(parent.n))
        hi = tuple(parent.mass[i] if i in sup else z for i in range(parent.n))
        return cls(parent, tuple(sup), lo, hi)

    @property
    def is_exact(self) -> bool:
        return self.lower == self.upper

    def realize(self, choice=None) -> FiniteSpace:
        return realize_subspace(self, self.lower if choice is None else choice)

    def contains(self, other: "SubspaceSpec") -> bool:
        """``other`` (exact) is dominated by this exact subspace."""
        be = self.parent.backend
        return set(other.support) <= set(self.support) and all(
            num.le(a, b, be) for a, b in zip(other.upper, self.lower))


def realize_subspace(S: SubspaceSpec, choice) -> FiniteSpace:
    """The pmm-subspace on ``S.support`` carrying ``choice`` (full-length) as its measure."""
    P = S.parent
    be = P.backend
    c = [num.to_number(x, be) for x in choice]
    if len(c) != P.n:
        raise ValidationError("mass choice length mismatch", (len(c), P.n))
    for i in range(P.n):
        if not (num.le(S.lower[i], c[i], be) and num.le(c[i], S.upper[i], be)):
            raise ValidationError("mass choice out of bounds", (i,))
    return P.restrict(S.support, [c[i] for i in S.support])


def is_subspace(sub_support, sub_mass, X: FiniteSpace, sup_support=None, sup_mass=None) -> bool:
    """``(sub_support, sub_mass) ⪯ (sup_support, sup_mass)`` inside ``X`` (full-length masses)."""
    if sup_support is None:
        sup_support = range(X.n)
    if sup_mass is None:
        sup_mass = X.mass
    if X.root not in set(sub_support):
        return False
    if not set(sub_support) <= set(sup_support):
        return False
    return all(num.le(a, b, X.backend) for a, b in zip(sub_mass, sup_mass))
