"""Quantification: adjoints to predicate pullback.

The existential quantifier along any map is the pointwise direct image
followed by the envelope at the target modulus; the universal quantifier
is only constructed along product projections (with an inhabited fiber
factor), again followed by the envelope.  On the sublevel side these are
the formal adjoints; on the value side they coincide with pointwise
inf/sup over the fiber, which is what `quantify_direct` computes and what
the agreement tests assert.
"""

from __future__ import annotations

from .metric import FiniteMetricSpace, MetricMap
from .predicate import (
    IndexedFamily,
    Predicate,
    PredicateError,
    envelope,
    to_family,
)
from .quantale import Modulus, _v_leq, _v_max, _v_min


class QuantifierError(ValueError):
    pass


def exists_along(f: MetricMap, R: Predicate, eps: Modulus = None) -> Predicate:
    """L_eps of the raw direct image min over fibers (top on empty fibers).

    `eps` is the target modulus; the caller owns the factorization
    eps_R = eps o eps_f.  Defaults to R's own modulus, which is the right
    choice whenever eps_f = id (projections).
    """
    if R.space != f.source:
        raise QuantifierError("exists_along: predicate not on the source")
    if eps is None:
        eps = R.modulus
    top = f.target.quantale.top
    vals = R.values
    g = f.mapping
    raw = {y: top for y in f.target.points}
    for x in f.source.points:
        raw[g[x]] = _v_min(raw[g[x]], vals[x])
    return envelope(IndexedFamily.build(f.target, raw), eps)


def forall_proj(pi: MetricMap, R: Predicate) -> Predicate:
    """Universal image along a projection Y x X -> X, then envelope.

    Requires every fiber nonempty (the inhabitedness hypothesis on Y).
    """
    if R.space != pi.source:
        raise QuantifierError("forall_proj: predicate not on the source")
    g = pi.mapping
    fibers = {y: [] for y in pi.target.points}
    for x in pi.source.points:
        fibers[g[x]].append(x)
    if any(not fib for fib in fibers.values()):
        raise QuantifierError("forall requires inhabited factor")
    vals = R.values
    raw = {}
    for y, fib in fibers.items():
        sup = vals[fib[0]]
        for x in fib[1:]:
            sup = _v_max(sup, vals[x])
        raw[y] = sup
    return envelope(IndexedFamily.build(pi.target, raw), R.modulus)


def quantify_direct(kind: str, pi: MetricMap, R: Predicate) -> Predicate:
    """Pointwise inf (existential) or sup (universal) over the fibers of a
    projection, modulus carried over; equals the adjoint pipeline."""
    if R.space != pi.source:
        raise QuantifierError("quantify_direct: predicate not on the source")
    g = pi.mapping
    fibers = {y: [] for y in pi.target.points}
    for x in pi.source.points:
        fibers[g[x]].append(x)
    if kind == "sup" and any(not fib for fib in fibers.values()):
        raise QuantifierError("forall requires inhabited factor")
    vals = R.values
    raw = {}
    for y, fib in fibers.items():
        if not fib:
            raw[y] = pi.target.quantale.top
            continue
        acc = vals[fib[0]]
        for x in fib[1:]:
            acc = _v_min(acc, vals[x]) if kind == "inf" else _v_max(acc, vals[x])
        raw[y] = acc
    if kind not in ("inf", "sup"):
        raise QuantifierError(f"unknown quantifier kind: {kind!r}")
    return Predicate.build(pi.target, raw, R.modulus, check=False)


def predicate_leq(P: Predicate, Q: Predicate) -> bool:
    """Order of the sublevel families: P <= Q iff Q.value <= P.value pointwise.

    Smaller values mean larger sublevel sets, so the subobject order is the
    reverse of the pointwise value order.
    """
    if P.space != Q.space:
        raise QuantifierError("predicates live on different spaces")
    pv, qv = P.values, Q.values
    return all(_v_leq(qv[p], pv[p]) for p in P.space.points)


def family_leq(R: IndexedFamily, S: IndexedFamily) -> bool:
    """R <= S in the indexed-subobject order: R(r) contained in S(r) for all r.

    Pointwise, x enters R at its threshold (inclusively when attained), so
    containment at every radius means x enters S no later than it enters R.
    """
    if R.space != S.space:
        raise QuantifierError("families live on different spaces")
    rt, st = R.thresholds, S.thresholds
    ra, sa = R.attained_flags, S.attained_flags
    for x in R.space.points:
        if st[x] == rt[x]:
            if ra[x] and not sa[x]:
                return False
        elif not _v_leq(st[x], rt[x]):
            return False
    return True
