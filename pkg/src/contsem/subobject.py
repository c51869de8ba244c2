"""The classical subobject lattice on a finite space.

Subobjects of a finite pseudometric space are bare point sets (the lattice
is the full powerset; subspace metrics are reconstructed on demand).  This
layer carries pullback, image, universal image, and Heyting implication,
whose exactness laws (Frobenius, Beck-Chevalley, the adjunction chains)
are the test oracles for everything built on top.
"""

from __future__ import annotations

from dataclasses import dataclass

from .metric import FiniteMetricSpace, MetricMap, subspace


class SubobjectError(ValueError):
    pass


@dataclass(frozen=True)
class Subobject:
    space: FiniteMetricSpace
    members: frozenset

    @staticmethod
    def of(space, members) -> "Subobject":
        members = frozenset(members)
        unknown = members - set(space.points)
        if unknown:
            raise SubobjectError(f"points {sorted(map(repr, unknown))} not in {space.id}")
        return Subobject(space, members)

    @staticmethod
    def full(space) -> "Subobject":
        return Subobject(space, frozenset(space.points))

    @staticmethod
    def empty(space) -> "Subobject":
        return Subobject(space, frozenset())

    def __contains__(self, p):
        return p in self.members

    def __le__(self, other):
        _same_space(self, other)
        return self.members <= other.members

    def complement(self) -> "Subobject":
        return Subobject(self.space, frozenset(self.space.points) - self.members)


def _same_space(*subs):
    first = subs[0].space
    for s in subs[1:]:
        if s.space != first:
            raise SubobjectError("subobjects live on different spaces")


def sub_lattice(op: str, space, items) -> Subobject:
    """meet = intersection (empty meet is the full set), join = union."""
    items = list(items)
    for s in items:
        if s.space != space:
            raise SubobjectError("subobjects live on different spaces")
    if op == "meet":
        out = set(space.points)
        for s in items:
            out &= s.members
    elif op == "join":
        out = set()
        for s in items:
            out |= s.members
    else:
        raise SubobjectError(f"unknown lattice op: {op!r}")
    return Subobject(space, frozenset(out))


def pullback_sub(f: MetricMap, B: Subobject) -> Subobject:
    if B.space != f.target:
        raise SubobjectError("pullback_sub: subobject not on the target")
    g = f.mapping
    return Subobject(f.source, frozenset(x for x in f.source.points if g[x] in B))


def exists_sub(f: MetricMap, A: Subobject) -> Subobject:
    """Image; left adjoint to pullback_sub."""
    if A.space != f.source:
        raise SubobjectError("exists_sub: subobject not on the source")
    g = f.mapping
    return Subobject(f.target, frozenset(g[x] for x in A.members))


def forall_sub(f: MetricMap, A: Subobject) -> Subobject:
    """Universal image {y | fiber over y inside A}; right adjoint to pullback."""
    if A.space != f.source:
        raise SubobjectError("forall_sub: subobject not on the source")
    g = f.mapping
    out = set()
    for y in f.target.points:
        if all(x in A for x in f.source.points if g[x] == y):
            out.add(y)
    return Subobject(f.target, frozenset(out))


def heyting_implies(A: Subobject, B: Subobject) -> Subobject:
    """complement(A) | B; right adjoint to (- meet A)."""
    _same_space(A, B)
    return sub_lattice("join", A.space, [A.complement(), B])


def r_image_factorization(f: MetricMap):
    """(surjection onto the image subspace, isometric inclusion)."""
    img = exists_sub(f, Subobject.full(f.source))
    mid = subspace(f.target, img.members)
    e = MetricMap.build(f.source, mid, f.mapping)
    incl = MetricMap.build(mid, f.target, {p: p for p in mid.points})
    return e, incl


def set_pullback_square(f: MetricMap, g: MetricMap):
    """The pullback of f: X -> Z against g: Y -> Z, as a subspace of X x Y.

    Pullbacks of finite pseudometric spaces are computed on underlying
    sets, with the restricted max metric; returns (P, p_X, p_Y).
    """
    from .metric import product as _product

    if f.target != g.target:
        raise SubobjectError("pullback square needs a shared codomain")
    XY = _product(f.source, g.source)
    fm, gm = f.mapping, g.mapping
    members = [(x, y) for (x, y) in XY.points if fm[x] == gm[y]]
    P = subspace(XY, members)
    pX = MetricMap.build(P, f.source, {(x, y): x for (x, y) in P.points})
    pY = MetricMap.build(P, g.source, {(x, y): y for (x, y) in P.points})
    return P, pX, pY


def serialize_subobject(A: Subobject) -> list:
    return sorted(map(str, A.members))
