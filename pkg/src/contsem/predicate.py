"""Continuous predicates on finite spaces and the envelope adjoint.

A predicate is a carrier-valued function with a modulus; equivalently (the
classifier correspondence) an antitone, meet-closed family of sublevel
subobjects.  The envelope operator turns an arbitrary indexed family into
the least continuous predicate above it, computed by multi-source
shortest-path relaxation over the complete graph on the space.

Correctness of the envelope: edge costs are eps(d(u, v)) composed by the
quantale tensor, so the single-edge bound on the output is exactly
eps-continuity, while the path bound shows any eps-continuous minorant of
the thresholds stays below the output.  The definitional meet over all
dominating predicates is kept as a test oracle, not an algorithm.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .metric import FiniteMetricSpace, MetricMap, make_grid, product
from .quantale import INF, ONE, ZERO, Modulus, _v_leq, _v_min, format_rational
from .subobject import Subobject


class PredicateError(ValueError):
    pass


@dataclass(frozen=True)
class IndexedFamily:
    """An antitone family r -> R(r) of subsets, encoded per point.

    R(r) = {x | threshold(x) < r, or threshold(x) = r and attained(x)}.
    Meet-closure holds exactly when every attained flag is set.
    """

    space: FiniteMetricSpace
    threshold: tuple  # ordered (point, value) pairs
    attained: tuple  # ordered (point, bool) pairs

    @staticmethod
    def build(space, threshold, attained=None) -> "IndexedFamily":
        thr = _as_value_table(space, threshold)
        if attained is None:
            att = tuple((p, True) for p in space.points)
        else:
            att = tuple((p, bool(attained[p])) for p in space.points)
        for p, v in thr:
            if not space.quantale.contains(v):
                raise PredicateError(f"threshold at {p!r} outside the carrier")
        return IndexedFamily(space, thr, att)

    @property
    def thresholds(self):
        return dict(self.threshold)

    @property
    def attained_flags(self):
        return dict(self.attained)

    def is_meet_closed(self) -> bool:
        return all(flag for _, flag in self.attained)

    def level(self, r) -> Subobject:
        """R(r): the sublevel subobject at radius r."""
        att = self.attained_flags
        members = set()
        for p, v in self.threshold:
            if _v_lt(v, r) or (v == r and att[p]):
                members.add(p)
        return Subobject(self.space, frozenset(members))

    def close_infima(self) -> "IndexedFamily":
        """Set every attained flag (the meet-closure of the family)."""
        return IndexedFamily(
            self.space, self.threshold, tuple((p, True) for p, _ in self.attained)
        )


def _v_lt(a, b):
    return _v_leq(a, b) and a != b


def _as_value_table(space, values):
    if isinstance(values, dict):
        missing = set(space.points) - set(values)
        if missing:
            raise PredicateError(f"missing values for {sorted(map(repr, missing))}")
        return tuple((p, values[p]) for p in space.points)
    return tuple(values)


@dataclass(frozen=True)
class Predicate:
    """A carrier-valued function with a modulus of continuity."""

    space: FiniteMetricSpace
    value: tuple  # ordered (point, value) pairs
    modulus: Modulus

    @staticmethod
    def build(space, values, modulus, check=True) -> "Predicate":
        table = _as_value_table(space, values)
        for p, v in table:
            if not space.quantale.contains(v):
                raise PredicateError(f"value at {p!r} outside the carrier")
        P = Predicate(space, table, modulus)
        if check:
            witness = continuity_witness(P)
            if witness is not None:
                x, y = witness
                raise PredicateError(
                    f"not continuous at the declared modulus: "
                    f"value({y!r}) > value({x!r}) + eps(d({x!r},{y!r}))"
                )
        return P

    @property
    def values(self):
        return dict(self.value)

    def __call__(self, p):
        return dict(self.value)[p]


def continuity_witness(P: Predicate):
    """A pair violating value(y) <= value(x) (+) eps(d(x,y)), or None."""
    q = P.space.quantale
    vals = P.values
    for x, y in P.space.pairs():
        bound = q.tensor(vals[x], P.modulus(P.space.d(x, y)))
        if not _v_leq(vals[y], bound):
            return (x, y)
    return None


def is_epsilon_predicate(R: IndexedFamily, eps: Modulus) -> bool:
    """Meet-closure plus the sublevel continuity condition, pairwise."""
    if not R.is_meet_closed():
        return False
    q = R.space.quantale
    thr = R.thresholds
    for x, y in R.space.pairs():
        if not _v_leq(thr[y], q.tensor(thr[x], eps(R.space.d(x, y)))):
            return False
    return True


def to_predicate(R: IndexedFamily, eps: Modulus) -> Predicate:
    if not R.is_meet_closed():
        bad = next(p for p, f in R.attained if not f)
        raise PredicateError(f"family not meet-closed: unattained infimum at {bad!r}")
    P = Predicate.build(R.space, R.thresholds, eps, check=False)
    w = continuity_witness(P)
    if w is not None:
        raise PredicateError(f"family is not an eps-predicate; witness pair {w!r}")
    return P


def to_family(P: Predicate) -> IndexedFamily:
    return IndexedFamily.build(P.space, P.values)


def envelope(R: IndexedFamily, eps: Modulus) -> Predicate:
    """L_eps R: the least eps-predicate above R (greatest continuous minorant
    of the closed thresholds), by multi-source Dijkstra."""
    X = R.space
    q = X.quantale
    thr = R.close_infima().thresholds
    dist = dict(thr)
    counter = itertools.count()
    heap = [((v is INF, v), next(counter), p) for p, v in dist.items()]
    heapq.heapify(heap)
    done = set()
    while heap:
        (_, d0), _, u = heapq.heappop(heap)
        if u in done or dist[u] != d0:
            continue
        done.add(u)
        for v in X.points:
            if v in done:
                continue
            cand = q.tensor(d0, eps(X.d(u, v)))
            if _v_lt(cand, dist[v]):
                dist[v] = cand
                heapq.heappush(heap, ((cand is INF, cand), next(counter), v))
    return Predicate.build(X, dist, eps, check=False)


def restrict_envelope(P: Predicate, eps: Modulus) -> Predicate:
    """Re-envelope an existing predicate at another modulus."""
    return envelope(to_family(P), eps)


def predicate_pullback(f: MetricMap, P: Predicate) -> Predicate:
    """Precomposition; modulus eps_P o eps_f (continuity by construction)."""
    if P.space != f.target:
        raise PredicateError("predicate_pullback: predicate not on the target")
    vals = P.values
    g = f.mapping
    return Predicate.build(
        f.source,
        {x: vals[g[x]] for x in f.source.points},
        P.modulus.compose(f.modulus),
        check=False,
    )


def predicate_lattice(op: str, space, items) -> Predicate:
    """Family meet = pointwise max of values, join = pointwise min.

    The common modulus is the max-combination of the item moduli; both
    results stay continuous at it (checked as an invariant in tests).
    """
    items = list(items)
    for P in items:
        if P.space != space:
            raise PredicateError("predicates live on different spaces")
    top = space.quantale.top
    if not items:
        if op == "meet":
            return true_predicate_on(space)
        if op == "join":
            return Predicate.build(
                space, {p: top for p in space.points}, Modulus.zero(top), check=False
            )
        raise PredicateError(f"unknown lattice op: {op!r}")
    eps = items[0].modulus
    for P in items[1:]:
        eps = eps.combine_max(P.modulus)
    tables = [P.values for P in items]
    if op == "meet":
        vals = {p: _max_all(t[p] for t in tables) for p in space.points}
    elif op == "join":
        vals = {p: _min_all(t[p] for t in tables) for p in space.points}
    else:
        raise PredicateError(f"unknown lattice op: {op!r}")
    return Predicate.build(space, vals, eps, check=False)


def _max_all(vs):
    out = ZERO
    for v in vs:
        out = v if not _v_leq(v, out) else out
    return out


def _min_all(vs):
    out = None
    for v in vs:
        out = v if out is None else _v_min(out, v)
    return out


def true_predicate_on(space) -> Predicate:
    return Predicate.build(
        space,
        {p: ZERO for p in space.points},
        Modulus.zero(space.quantale.top),
        check=False,
    )


def distance_predicate(X: FiniteMetricSpace) -> Predicate:
    """d as a predicate on X x X, with modulus id + id."""
    P = product(X, X)
    ident = Modulus.identity(X.quantale.top)
    vals = {(x, y): X.d(x, y) for (x, y) in P.points}
    return Predicate.build(P, vals, ident.combine_add(ident), check=False)


def pair_distance_predicate(f: MetricMap, g: MetricMap) -> Predicate:
    """x -> d_Y(f x, g x), with modulus eps_f + eps_g."""
    if f.source != g.source or f.target != g.target:
        raise PredicateError("pair_distance_predicate needs parallel maps")
    fm, gm = f.mapping, g.mapping
    vals = {x: f.target.d(fm[x], gm[x]) for x in f.source.points}
    return Predicate.build(
        f.source, vals, f.modulus.combine_add(g.modulus), check=False
    )


def truth_predicate(grid: FiniteMetricSpace) -> Predicate:
    """The generic truth predicate p -> p on a grid space, modulus id."""
    return Predicate.build(
        grid,
        {p: p for p in grid.points},
        Modulus.identity(grid.quantale.top),
        check=False,
    )


def classify(P: Predicate, n: int) -> MetricMap:
    """Materialize P as a map into grid(n); every value must lie on the grid."""
    bad_denoms = [
        v.denominator
        for _, v in P.value
        if v is not INF and (v * n).denominator != 1
    ]
    if bad_denoms:
        least = _lcm_all(v.denominator for _, v in P.value if v is not INF)
        raise PredicateError(f"values off the 1/{n} grid; least compatible grid: {least}")
    grid = make_grid(n, P.space.quantale)
    return MetricMap.build(P.space, grid, P.values, modulus=P.modulus)


def _lcm_all(ns):
    from math import lcm

    return lcm(*ns)


def serialize_predicate(P: Predicate) -> dict:
    from .quantale import serialize_modulus

    return {
        "space": P.space.id,
        "values": {str(p): format_rational(v) for p, v in P.value},
        "modulus": serialize_modulus(P.modulus),
    }
