"""Finite pseudometric spaces, max-metric products, and maps with moduli.

Distances are exact rationals (or INF in extended-nonneg mode).  Distinct
points may sit at distance 0.  Every map carries a declared modulus of
continuity; constructors default it to the tightest one, which on a finite
space is a right-continuous step function over the finitely many distance
values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .quantale import (
    INF,
    ONE,
    ZERO,
    E1,
    Modulus,
    Quantale,
    UNIT,
    _v_leq,
    _v_max,
    format_rational,
)


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteMetricSpace:
    id: str
    points: tuple
    dist_matrix: tuple  # tuple of tuples, indexed like points
    quantale: Quantale = UNIT
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_index", {p: i for i, p in enumerate(self.points)}
        )

    @staticmethod
    def build(id, points, dist, quantale=UNIT) -> "FiniteMetricSpace":
        """Construct and validate; `dist` is a matrix or a pair->value mapping."""
        points = tuple(points)
        if len(set(points)) != len(points):
            raise MetricError(f"space {id!r} has duplicate point labels")
        if isinstance(dist, dict):
            n = len(points)
            matrix = [[ZERO] * n for _ in range(n)]
            for (a, b), v in dist.items():
                i, j = points.index(a), points.index(b)
                matrix[i][j] = v
                matrix[j][i] = v
            dist = matrix
        matrix = tuple(
            tuple(v if v is INF else Fraction(v) for v in row) for row in dist
        )
        space = FiniteMetricSpace(id, points, matrix, quantale)
        report = validate_space(space)
        if report is not None:
            raise MetricError(f"space {id!r}: {report}")
        return space

    def d(self, x, y):
        return self.dist_matrix[self._index[x]][self._index[y]]

    def pairs(self):
        return itertools.product(self.points, repeat=2)

    @property
    def size(self):
        return len(self.points)

    def distance_values(self):
        """Sorted distinct distances, always including 0 and the carrier top."""
        vals = {ZERO, self.quantale.top}
        for row in self.dist_matrix:
            vals.update(row)
        return sorted(vals, key=lambda v: (v is INF, v))


def validate_space(space: FiniteMetricSpace):
    """None when every pseudometric axiom holds, else a witness message."""
    pts, q = space.points, space.quantale
    n = len(pts)
    if len(space.dist_matrix) != n or any(len(r) != n for r in space.dist_matrix):
        return "distance matrix shape does not match the point count"
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            v = space.dist_matrix[i][j]
            if not q.contains(v):
                return f"d({x},{y}) = {format_rational(v)} is outside the carrier"
            if i == j and v != 0:
                return f"d({x},{x}) = {format_rational(v)} != 0"
            if space.dist_matrix[j][i] != v:
                return f"asymmetry at ({x},{y})"
    for x, y, z in itertools.product(pts, repeat=3):
        bound = q.tensor(space.d(x, y), space.d(y, z))
        if not _v_leq(space.d(x, z), bound):
            return (
                f"triangle violation: d({x},{z}) = {format_rational(space.d(x, z))}"
                f" > d({x},{y}) + d({y},{z})"
            )
    return None


def product(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> FiniteMetricSpace:
    """Max-metric product; points are pairs in lexicographic factor order."""
    if X.quantale != Y.quantale:
        raise MetricError("product factors use different quantales")
    points = tuple((x, y) for x in X.points for y in Y.points)
    matrix = tuple(
        tuple(_v_max(X.d(x1, x2), Y.d(y1, y2)) for (x2, y2) in points)
        for (x1, y1) in points
    )
    return FiniteMetricSpace(f"({X.id}*{Y.id})", points, matrix, X.quantale)


@dataclass(frozen=True)
class MetricMap:
    source: FiniteMetricSpace
    target: FiniteMetricSpace
    assignment: tuple  # ordered (source point, target point) pairs
    modulus: Modulus

    @staticmethod
    def build(source, target, assignment, modulus=None) -> "MetricMap":
        if isinstance(assignment, dict):
            assignment = tuple((p, assignment[p]) for p in source.points)
        else:
            assignment = tuple(assignment)
        got = [p for p, _ in assignment]
        if got != list(source.points):
            raise MetricError("assignment is not total on the source points")
        for _, v in assignment:
            if v not in target._index:
                raise MetricError(f"assignment hits unknown target point {v!r}")
        if modulus is None:
            modulus = tightest_modulus(source, target, dict(assignment))
        m = MetricMap(source, target, assignment, modulus)
        if not check_modulus(m, modulus):
            raise MetricError("declared modulus is not valid for this map")
        return m

    def __call__(self, x):
        return dict(self.assignment)[x]

    @property
    def mapping(self):
        return dict(self.assignment)

    @staticmethod
    def identity(X: FiniteMetricSpace) -> "MetricMap":
        return MetricMap(
            X, X, tuple((p, p) for p in X.points), Modulus.identity(X.quantale.top)
        )

    @staticmethod
    def constant(X: FiniteMetricSpace, Y: FiniteMetricSpace, y) -> "MetricMap":
        return MetricMap.build(X, Y, {p: y for p in X.points})


def check_modulus(f, eps: Modulus) -> bool:
    """d_Y(fx, fx') <= eps(d_X(x, x')) over all pairs.

    On a finite space this pairwise check is equivalent to the indexed
    condition over all radii.
    """
    g = f.mapping
    for x, y in f.source.pairs():
        if not _v_leq(f.target.d(g[x], g[y]), eps(f.source.d(x, y))):
            return False
    return True


def tightest_modulus(source, target, mapping) -> Modulus:
    """Pointwise-least valid modulus: r -> max target distance over pairs
    at source distance <= r, as a right-continuous step function."""
    top = source.quantale.top
    jumps = {}
    for x, y in itertools.product(source.points, repeat=2):
        dx = source.d(x, y)
        dy = target.d(mapping[x], mapping[y])
        if dx == 0 and dy != 0:
            raise MetricError(
                f"not uniformly continuous: d({x},{y}) = 0 but images are "
                f"{format_rational(dy)} apart"
            )
        if dx is INF:
            continue
        jumps[dx] = _v_max(jumps.get(dx, ZERO), dy)
    levels = []
    running = ZERO
    for b in sorted(jumps):
        running = _v_max(running, jumps[b])
        levels.append((b, running))
    if not levels:
        return Modulus.zero(top)
    return Modulus.step(levels, top)


def compose_maps(g: MetricMap, f: MetricMap) -> MetricMap:
    """g after f, with modulus eps_g o eps_f."""
    if g.source is not f.target and g.source != f.target:
        raise MetricError("compose_maps: target of f differs from source of g")
    fm, gm = f.mapping, g.mapping
    assignment = tuple((p, gm[fm[p]]) for p in f.source.points)
    return MetricMap(f.source, g.target, assignment, g.modulus.compose(f.modulus))


def pair_maps(f: MetricMap, g: MetricMap) -> MetricMap:
    """x -> (f x, g x) into the max-metric product, modulus max(eps_f, eps_g)."""
    if f.source != g.source:
        raise MetricError("pair_maps: sources differ")
    P = product(f.target, g.target)
    fm, gm = f.mapping, g.mapping
    assignment = tuple((p, (fm[p], gm[p])) for p in f.source.points)
    return MetricMap(f.source, P, assignment, f.modulus.combine_max(g.modulus))


def projection_map(P: FiniteMetricSpace, factor: int) -> MetricMap:
    """Coordinate projection of a product space; 1-Lipschitz (modulus id)."""
    if not all(isinstance(p, tuple) and len(p) == 2 for p in P.points):
        raise MetricError("projection_map expects a binary product space")
    # rebuild the factor space from the product metric restricted to a slice
    reps = {}
    for p in P.points:
        reps.setdefault(p[factor], p)
    pts = tuple(dict.fromkeys(p[factor] for p in P.points))
    matrix = tuple(
        tuple(_factor_dist(P, reps, a, b, factor) for b in pts) for a in pts
    )
    F = FiniteMetricSpace(f"{P.id}[{factor}]", pts, matrix, P.quantale)
    assignment = tuple((p, p[factor]) for p in P.points)
    return MetricMap(P, F, assignment, Modulus.identity(P.quantale.top))


def _factor_dist(P, reps, a, b, factor):
    pa = list(reps[a])
    pb = list(reps[b])
    pb[1 - factor] = pa[1 - factor]
    return P.d(tuple(pa), tuple(pb))


def is_regular_mono(m: MetricMap, moduloid: str = E1) -> bool:
    """Equivalence to an isometric embedding, relative to a moduloid.

    E1: injective and distance-preserving.  EL/EuPL: injective and
    reflecting zero distances; on finite spaces the comparison bijection
    then has a finite tightest modulus both ways.
    """
    g = m.mapping
    images = list(g.values())
    if len(set(images)) != len(images):
        return False
    for x, y in m.source.pairs():
        ds = m.source.d(x, y)
        dt = m.target.d(g[x], g[y])
        if moduloid == E1:
            if ds != dt:
                return False
        else:
            if dt == 0 and ds != 0:
                return False
    return True


def subspace(X: FiniteMetricSpace, members) -> FiniteMetricSpace:
    """The subspace on `members` with the restricted matrix."""
    pts = tuple(p for p in X.points if p in set(members))
    matrix = tuple(tuple(X.d(a, b) for b in pts) for a in pts)
    return FiniteMetricSpace(f"{X.id}|sub", pts, matrix, X.quantale)


def make_grid(n: int, quantale=UNIT) -> FiniteMetricSpace:
    """Points {0, 1/n, ..., 1} with the absolute-difference metric."""
    if n < 1:
        raise MetricError("grid needs n >= 1")
    pts = tuple(ONE * k / n for k in range(n + 1))
    matrix = tuple(tuple(abs(a - b) for b in pts) for a in pts)
    return FiniteMetricSpace(f"grid({n})", pts, matrix, quantale)
