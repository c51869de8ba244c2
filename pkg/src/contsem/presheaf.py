"""Presheaves of finite metric spaces and their predicate classifier.

A presheaf assigns a finite pseudometric space to each object of a finite
category and a 1-Lipschitz restriction function to each morphism,
contravariantly.  Predicates here are per-object 1-Lipschitz value
functions that shrink under restriction; their classifier lives in the
presheaf of threshold-graded sieves, which is never materialized as a
whole space: only the elements arising from classification (or supplied
by the user) are represented, as one threshold per morphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .metric import FiniteMetricSpace, product as metric_product
from .quantale import ZERO, _v_leq, _v_max, format_rational


class PresheafError(ValueError):
    pass


@dataclass(frozen=True)
class FinCategory:
    objects: tuple
    morphisms: tuple  # (id, source, target) triples
    composition: tuple  # ((g, f), gf) pairs: g after f
    identities: tuple  # (object, morphism id) pairs

    @staticmethod
    def build(objects, morphisms, composition, identities) -> "FinCategory":
        cat = FinCategory(
            tuple(objects),
            tuple(tuple(m) for m in morphisms),
            tuple(sorted((tuple(k), v) for k, v in dict(composition).items())),
            tuple(sorted(dict(identities).items())),
        )
        report = validate_category(cat)
        if report is not None:
            raise PresheafError(report)
        return cat

    @property
    def compose_table(self):
        return dict(self.composition)

    @property
    def identity_of(self):
        return dict(self.identities)

    def morphism(self, mid):
        for m in self.morphisms:
            if m[0] == mid:
                return m
        raise PresheafError(f"unknown morphism {mid!r}")

    def source(self, mid):
        return self.morphism(mid)[1]

    def target(self, mid):
        return self.morphism(mid)[2]

    def compose(self, g, f):
        """g after f (f first); sources and targets must chain."""
        return self.compose_table[(g, f)]

    def into(self, a):
        """All morphism ids with target a."""
        return [m[0] for m in self.morphisms if m[2] == a]

    @staticmethod
    def one_object(obj="*") -> "FinCategory":
        i = f"1_{obj}"
        return FinCategory.build([obj], [(i, obj, obj)], {(i, i): i}, {obj: i})

    @staticmethod
    def arrow(src="b", tgt="a", arrow_id="f") -> "FinCategory":
        """The walking arrow f: src -> tgt."""
        ia, ib = f"1_{tgt}", f"1_{src}"
        return FinCategory.build(
            [tgt, src],
            [(ia, tgt, tgt), (ib, src, src), (arrow_id, src, tgt)],
            {
                (ia, ia): ia,
                (ib, ib): ib,
                (ia, arrow_id): arrow_id,
                (arrow_id, ib): arrow_id,
            },
            {tgt: ia, src: ib},
        )


def validate_category(cat: FinCategory):
    """None when the data is a category, else a witness message."""
    ids = [m[0] for m in cat.morphisms]
    if len(set(ids)) != len(ids):
        return "duplicate morphism ids"
    table = cat.compose_table
    idents = cat.identity_of
    src = {m[0]: m[1] for m in cat.morphisms}
    tgt = {m[0]: m[2] for m in cat.morphisms}
    for a in cat.objects:
        if a not in idents:
            return f"missing identity for object {a!r}"
        i = idents[a]
        if i not in src or src[i] != a or tgt[i] != a:
            return f"identity of {a!r} is not an endomorphism of {a!r}"
    for g, f in itertools.product(ids, repeat=2):
        composable = src[g] == tgt[f]
        if composable != ((g, f) in table):
            word = "missing" if composable else "spurious"
            return f"{word} composite for ({g}, {f})"
        if composable:
            gf = table[(g, f)]
            if gf not in src or src[gf] != src[f] or tgt[gf] != tgt[g]:
                return f"composite {gf!r} of ({g}, {f}) has wrong endpoints"
    for f in ids:
        if table[(idents[tgt[f]], f)] != f or table[(f, idents[src[f]])] != f:
            return f"unit law fails at {f!r}"
    for h, g, f in itertools.product(ids, repeat=3):
        if src[g] == tgt[f] and src[h] == tgt[g]:
            if table[(h, table[(g, f)])] != table[(table[(h, g)], f)]:
                return f"associativity fails at ({h}, {g}, {f})"
    return None


@dataclass(frozen=True)
class MetricPresheaf:
    category: FinCategory
    at: tuple  # (object, FiniteMetricSpace) pairs
    restrict: tuple  # (morphism id, ((point, point), ...)) pairs

    @staticmethod
    def build(category, at, restrict) -> "MetricPresheaf":
        F = MetricPresheaf(
            category,
            tuple(sorted(dict(at).items(), key=lambda kv: repr(kv[0]))),
            tuple(
                sorted(
                    (mid, tuple(sorted(table.items(), key=lambda kv: repr(kv[0]))))
                    for mid, table in dict(
                        (m, dict(t)) for m, t in dict(restrict).items()
                    ).items()
                )
            ),
        )
        report = validate_presheaf(F)
        if report is not None:
            raise PresheafError(report)
        return F

    @property
    def spaces(self):
        return dict(self.at)

    def space(self, a) -> FiniteMetricSpace:
        return self.spaces[a]

    def action(self, mid):
        """The restriction function F(target) -> F(source) of morphism mid."""
        return dict(dict(self.restrict)[mid])


def validate_presheaf(F: MetricPresheaf):
    cat = F.category
    spaces = F.spaces
    for a in cat.objects:
        if a not in spaces:
            return f"no space at object {a!r}"
    tables = dict(F.restrict)
    for m in cat.morphisms:
        mid, b, a = m
        if mid not in tables:
            return f"no restriction for morphism {mid!r}"
        act = dict(tables[mid])
        Fa, Fb = spaces[a], spaces[b]
        for x in Fa.points:
            if x not in act:
                return f"restriction {mid!r} undefined at {x!r}"
            if act[x] not in Fb._index:
                return f"restriction {mid!r} maps {x!r} outside F{b!r}"
        for x, y in Fa.pairs():
            if not _v_leq(Fb.d(act[x], act[y]), Fa.d(x, y)):
                return f"1-Lipschitz violation along {mid!r} at ({x!r}, {y!r})"
    idents = cat.identity_of
    for a in cat.objects:
        act = dict(tables[idents[a]])
        if any(act[x] != x for x in spaces[a].points):
            return f"restriction along identity of {a!r} is not the identity"
    table = cat.compose_table
    for (g, f), gf in table.items():
        # f: b -> a, g: c -> b in C means F(g o f)?  Composition in C^op:
        # for composable g after f, restrict(g o f) = restrict(f) then restrict(g)
        act_g, act_f, act_gf = dict(tables[g]), dict(tables[f]), dict(tables[gf])
        a = cat.target(g)
        for x in spaces[a].points:
            if act_gf[x] != act_f[act_g[x]]:
                return f"functoriality fails for ({g}, {f}) at {x!r}"
    return None


@dataclass(frozen=True)
class PresheafSub:
    members: tuple  # (object, frozenset of points) pairs

    @staticmethod
    def of(F: MetricPresheaf, members) -> "PresheafSub":
        sub = PresheafSub(
            tuple(sorted(
                ((a, frozenset(pts)) for a, pts in dict(members).items()),
                key=lambda kv: repr(kv[0]),
            ))
        )
        if not is_presheaf_sub(F, sub):
            raise PresheafError("member sets are not closed under restriction")
        return sub

    @property
    def table(self):
        return dict(self.members)

    def __le__(self, other):
        mine, theirs = self.table, other.table
        return all(mine[a] <= theirs[a] for a in mine)


def is_presheaf_sub(F: MetricPresheaf, sub) -> bool:
    table = sub.table if isinstance(sub, PresheafSub) else {
        a: frozenset(pts) for a, pts in dict(sub).items()
    }
    cat = F.category
    if set(table) != set(cat.objects):
        return False
    spaces = F.spaces
    for a, pts in table.items():
        if not pts <= set(spaces[a].points):
            return False
    for mid, b, a in cat.morphisms:
        act = F.action(mid)
        if not {act[x] for x in table[a]} <= table[b]:
            return False
    return True


def full_sub(F: MetricPresheaf) -> PresheafSub:
    return PresheafSub.of(F, {a: set(S.points) for a, S in F.spaces.items()})


def presheaf_sub_lattice(op: str, F: MetricPresheaf, items) -> PresheafSub:
    """Objectwise intersection/union; closure under restriction is automatic."""
    items = list(items)
    out = {}
    for a, S in F.spaces.items():
        if op == "meet":
            acc = set(S.points)
            for it in items:
                acc &= it.table[a]
        elif op == "join":
            acc = set()
            for it in items:
                acc |= it.table[a]
        else:
            raise PresheafError(f"unknown lattice op: {op!r}")
        out[a] = acc
    return PresheafSub.of(F, out)


@dataclass(frozen=True)
class PresheafMap:
    """Natural transformation data F -> G: one point function per object."""

    source: MetricPresheaf
    target: MetricPresheaf
    components: tuple  # (object, ((point, point), ...)) pairs

    @staticmethod
    def build(F, G, components) -> "PresheafMap":
        phi = PresheafMap(
            F,
            G,
            tuple(sorted(
                ((a, tuple(sorted(dict(c).items(), key=lambda kv: repr(kv[0]))))
                 for a, c in dict(components).items()),
                key=lambda kv: repr(kv[0]),
            )),
        )
        report = phi.violation()
        if report is not None:
            raise PresheafError(report)
        return phi

    def component(self, a):
        return dict(dict(self.components)[a])

    def violation(self):
        cat = self.source.category
        for a in cat.objects:
            Fa, Ga = self.source.space(a), self.target.space(a)
            c = self.component(a)
            for x in Fa.points:
                if x not in c:
                    return f"component at {a!r} undefined at {x!r}"
            for x, y in Fa.pairs():
                if not _v_leq(Ga.d(c[x], c[y]), Fa.d(x, y)):
                    return f"component at {a!r} is not 1-Lipschitz at ({x!r},{y!r})"
        for mid, b, a in cat.morphisms:
            cF, cG = self.source.action(mid), self.target.action(mid)
            ca, cb = self.component(a), self.component(b)
            for x in self.source.space(a).points:
                if cG[ca[x]] != cb[cF[x]]:
                    return f"naturality fails along {mid!r} at {x!r}"
        return None


def is_regular_mono_presheaf(phi: PresheafMap) -> bool:
    """Componentwise isometric embedding (the E_1 criterion) plus naturality
    (already enforced by construction)."""
    for a in phi.source.category.objects:
        Fa, Ga = phi.source.space(a), phi.target.space(a)
        c = phi.component(a)
        if len({c[x] for x in Fa.points}) != len(Fa.points):
            return False
        for x, y in Fa.pairs():
            if Ga.d(c[x], c[y]) != Fa.d(x, y):
                return False
    return True


def presheaf_rimage(phi: PresheafMap) -> PresheafSub:
    """Objectwise image points; this pointwise construction is the r-image."""
    out = {}
    for a in phi.source.category.objects:
        c = phi.component(a)
        out[a] = {c[x] for x in phi.source.space(a).points}
    return PresheafSub.of(phi.target, out)


def presheaf_product(F: MetricPresheaf, G: MetricPresheaf) -> MetricPresheaf:
    """Objectwise max-metric products with the paired restriction action."""
    if F.category != G.category:
        raise PresheafError("presheaf_product needs a shared index category")
    cat = F.category
    at = {a: metric_product(F.space(a), G.space(a)) for a in cat.objects}
    restrict = {}
    for mid, b, a in cat.morphisms:
        aF, aG = F.action(mid), G.action(mid)
        restrict[mid] = {
            (x, y): (aF[x], aG[y]) for (x, y) in at[a].points
        }
    return MetricPresheaf.build(cat, at, restrict)


def presheaf_distance(F: MetricPresheaf, r) -> PresheafSub:
    """D_F(r): objectwise pairs at distance <= r, a sub of F x F."""
    FF = presheaf_product(F, F)
    out = {}
    for a in F.category.objects:
        S = F.space(a)
        out[a] = {(x, y) for (x, y) in FF.space(a).points if _v_leq(S.d(x, y), r)}
    return PresheafSub.of(FF, out)


@dataclass(frozen=True)
class PresheafPredicate:
    value: tuple  # (object, ((point, value), ...)) pairs

    @staticmethod
    def build(F: MetricPresheaf, value) -> "PresheafPredicate":
        R = PresheafPredicate(
            tuple(sorted(
                ((a, tuple(sorted(dict(t).items(), key=lambda kv: repr(kv[0]))))
                 for a, t in dict(value).items()),
                key=lambda kv: repr(kv[0]),
            ))
        )
        report = presheaf_predicate_violation(F, R.table)
        if report is not None:
            raise PresheafError(report)
        return R

    @property
    def table(self):
        return {a: dict(t) for a, t in self.value}

    def at(self, a):
        return dict(dict(self.value)[a])


def presheaf_predicate_violation(F: MetricPresheaf, table):
    cat = F.category
    if set(table) != set(cat.objects):
        return "value table does not cover every object"
    for a in cat.objects:
        S = F.space(a)
        vals = table[a]
        for x in S.points:
            if x not in vals:
                return f"no value at {x!r} in object {a!r}"
            if not S.quantale.contains(vals[x]):
                return f"value at {x!r} outside the carrier"
        for x, y in S.pairs():
            gap = vals[x] - vals[y] if _v_leq(vals[y], vals[x]) else vals[y] - vals[x]
            if not _v_leq(gap, S.d(x, y)):
                return f"per-object Lipschitz bound fails at ({x!r},{y!r}) in {a!r}"
    for mid, b, a in cat.morphisms:
        act = F.action(mid)
        for x in F.space(a).points:
            if not _v_leq(table[b][act[x]], table[a][x]):
                return f"value grows under restriction along {mid!r} at {x!r}"
    return None


def is_presheaf_predicate(F: MetricPresheaf, value) -> bool:
    table = value.table if isinstance(value, PresheafPredicate) else {
        a: dict(t) for a, t in dict(value).items()
    }
    return presheaf_predicate_violation(F, table) is None


def sublevel(R: PresheafPredicate, F: MetricPresheaf, r) -> PresheafSub:
    return PresheafSub.of(
        F,
        {
            a: {x for x, v in R.at(a).items() if _v_leq(v, r)}
            for a in F.category.objects
        },
    )


# -- the classifier ---------------------------------------------------


@dataclass(frozen=True)
class OmegaElement:
    """An element of the classifier at an object: a threshold per incoming
    morphism, monotone under precomposition (a threshold-graded sieve)."""

    category: FinCategory
    at_object: object
    theta: tuple  # (morphism id, value) pairs, one per morphism into at_object

    @staticmethod
    def build(category, at_object, theta) -> "OmegaElement":
        theta = dict(theta)
        into = category.into(at_object)
        if set(theta) != set(into):
            raise PresheafError(
                f"theta must cover exactly the morphisms into {at_object!r}"
            )
        el = OmegaElement(
            category, at_object, tuple(sorted(theta.items()))
        )
        report = el.violation()
        if report is not None:
            raise PresheafError(report)
        return el

    @property
    def table(self):
        return dict(self.theta)

    def violation(self):
        cat = self.category
        theta = self.table
        for f in cat.into(self.at_object):
            b = cat.source(f)
            for h in cat.morphisms:
                if h[2] != b:
                    continue
                fh = cat.compose(f, h[0])
                if not _v_leq(theta[fh], theta[f]):
                    return f"sieve monotonicity fails: theta({fh}) > theta({f})"
        return None


def omega_nu(S: OmegaElement):
    """The truth value of the element: its threshold at the identity."""
    return S.table[S.category.identity_of[S.at_object]]


def omega_restrict(f, S: OmegaElement) -> OmegaElement:
    """Pull the graded sieve back along f: b -> a; theta'(h) = theta(f o h)."""
    cat = S.category
    if cat.target(f) != S.at_object:
        raise PresheafError(f"{f!r} does not land in {S.at_object!r}")
    b = cat.source(f)
    theta = S.table
    return OmegaElement.build(
        cat, b, {h: theta[cat.compose(f, h)] for h in cat.into(b)}
    )


def omega_distance(S1: OmegaElement, S2: OmegaElement):
    """Max over incoming morphisms of the threshold gap; this equals the sup
    of nu-differences under pullback because nu(restrict along f) = theta(f)."""
    if S1.at_object != S2.at_object or S1.category != S2.category:
        raise PresheafError("omega_distance needs elements at the same object")
    t1, t2 = S1.table, S2.table
    out = ZERO
    for f in S1.category.into(S1.at_object):
        gap = t1[f] - t2[f] if _v_leq(t2[f], t1[f]) else t2[f] - t1[f]
        out = _v_max(out, gap)
    return out


def classify_presheaf(F: MetricPresheaf, R: PresheafPredicate):
    """The characteristic transformation into the classifier.

    phi_a(x) grades each f: b -> a by the value of R at the restriction of
    x along f; returns {object: {point: OmegaElement}}.
    """
    report = presheaf_predicate_violation(F, R.table)
    if report is not None:
        raise PresheafError(report)
    cat = F.category
    table = R.table
    out = {}
    for a in cat.objects:
        comp = {}
        for x in F.space(a).points:
            theta = {}
            for f in cat.into(a):
                b = cat.source(f)
                theta[f] = table[b][F.action(f)[x]]
            comp[x] = OmegaElement.build(cat, a, theta)
        out[a] = comp
    return out


def pullback_truth(F: MetricPresheaf, phi) -> PresheafPredicate:
    """Recover the predicate from characteristic data: value = nu o phi."""
    value = {
        a: {x: omega_nu(el) for x, el in comp.items()} for a, comp in phi.items()
    }
    return PresheafPredicate.build(F, value)
