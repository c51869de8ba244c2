"""Law-checking suites: randomized and exhaustive oracles for the
adjunction, lattice, classifier, and metrization laws.

These are first-class because the verifiable content of this package is
a body of exact equalities; every check here is zero-tolerance rational
arithmetic.  Suites are deterministic per (seed, size) and report a
minimal witness for any failure.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from .metric import (
    FiniteMetricSpace,
    MetricError,
    MetricMap,
    compose_maps,
    product,
    projection_map,
)
from .predicate import (
    IndexedFamily,
    Predicate,
    envelope,
    is_epsilon_predicate,
    predicate_pullback,
    to_family,
    to_predicate,
)
from .presheaf import (
    FinCategory,
    MetricPresheaf,
    OmegaElement,
    PresheafPredicate,
    classify_presheaf,
    omega_distance,
    omega_restrict,
    pullback_truth,
)
from .quantale import ONE, ZERO, Modulus, UNIT, _v_leq, _v_max
from .quantifier import (
    exists_along,
    family_leq,
    forall_proj,
    predicate_leq,
    quantify_direct,
)
from .subobject import (
    Subobject,
    exists_sub,
    forall_sub,
    heyting_implies,
    pullback_sub,
    set_pullback_square,
    sub_lattice,
)


class Suite:
    """Accumulates pass/fail tallies with minimal witnesses."""

    def __init__(self, name):
        self.name = name
        self.checks = 0
        self.failures = []

    def check(self, ok, law, witness):
        self.checks += 1
        if not ok:
            self.failures.append({"law": law, "witness": witness})

    @property
    def passed(self):
        return not self.failures

    def report(self):
        return {
            "suite": self.name,
            "checks": self.checks,
            "failures": self.failures[:10],
            "passed": self.passed,
        }


# -- generators -------------------------------------------------------


def random_space(rng, n_points, denom=8, name=None) -> FiniteMetricSpace:
    """A random pseudometric space with grid-1/denom distances, obtained by
    min-plus closure of a random symmetric matrix (closure stays on grid)."""
    pts = [f"p{i}" for i in range(n_points)]
    d = {}
    for i in range(n_points):
        for j in range(i + 1, n_points):
            d[(i, j)] = Fraction(rng.randint(0, denom), denom)

    def get(i, j):
        if i == j:
            return ZERO
        return d[(min(i, j), max(i, j))]

    # Floyd-Warshall with the truncated-sum tensor
    for k in range(n_points):
        for i in range(n_points):
            for j in range(i + 1, n_points):
                via = UNIT.tensor(get(i, k), get(k, j))
                if via < d[(i, j)]:
                    d[(i, j)] = via
    matrix = [[get(i, j) for j in range(n_points)] for i in range(n_points)]
    return FiniteMetricSpace.build(
        name or f"X{rng.randint(0, 10**6)}", pts, matrix
    )


def random_modulus(rng) -> Modulus:
    kind = rng.choice(["id", "linear", "step"])
    if kind == "id":
        return Modulus.identity()
    if kind == "linear":
        return Modulus.linear(Fraction(rng.randint(1, 4)))
    jumps = []
    b = Fraction(0)
    v = Fraction(0)
    for _ in range(rng.randint(1, 3)):
        b += Fraction(rng.randint(1, 3), 8)
        v = min(v + Fraction(rng.randint(1, 4), 8), ONE)
        if b > 1:
            break
        jumps.append((b, v))
    if not jumps:
        return Modulus.identity()
    return Modulus.step(jumps)


def random_family(rng, space, denom=8) -> IndexedFamily:
    thr = {p: Fraction(rng.randint(0, denom), denom) for p in space.points}
    return IndexedFamily.build(space, thr)


def random_predicate(rng, space, eps, denom=8) -> Predicate:
    """A random eps-predicate: envelope of random grid thresholds."""
    return envelope(random_family(rng, space, denom), eps)


def random_map(rng, source, target) -> MetricMap:
    for _ in range(50):
        assignment = {p: rng.choice(target.points) for p in source.points}
        try:
            return MetricMap.build(source, target, assignment)
        except MetricError:
            continue
    # fall back to a constant map, which always has a modulus
    return MetricMap.constant(source, target, target.points[0])


def all_maps(source, target):
    for images in itertools.product(target.points, repeat=source.size):
        assignment = dict(zip(source.points, images))
        try:
            yield MetricMap.build(source, target, assignment)
        except MetricError:
            continue


def grid_values(denom):
    return [Fraction(k, denom) for k in range(denom + 1)]


def enumerate_predicates(space, eps, denom):
    """All eps-predicates on `space` with grid-1/denom values."""
    out = []
    for vals in itertools.product(grid_values(denom), repeat=space.size):
        table = dict(zip(space.points, vals))
        if is_epsilon_predicate(IndexedFamily.build(space, table), eps):
            out.append(Predicate.build(space, table, eps, check=False))
    return out


def bellman_ford_envelope(R: IndexedFamily, eps: Modulus) -> Predicate:
    """Fixpoint oracle for the envelope: relax every edge until stable."""
    X = R.space
    q = X.quantale
    vals = dict(R.close_infima().thresholds)
    changed = True
    while changed:
        changed = False
        for x, y in X.pairs():
            cand = q.tensor(vals[x], eps(X.d(x, y)))
            if _v_leq(cand, vals[y]) and cand != vals[y]:
                vals[y] = cand
                changed = True
    return Predicate.build(X, vals, eps, check=False)


# -- suites -----------------------------------------------------------


def suite_frobenius(seed=0, size=3):
    """Frobenius reciprocity and the adjunction chains, exhaustively over
    all maps between spaces of <= `size` points and all subsets."""
    rng = random.Random(seed)
    s = Suite("frobenius")
    X = random_space(rng, size, denom=4, name="X")
    Y = random_space(rng, max(size - 1, 1), denom=4, name="Y")
    subsets_X = list(_all_subsets(X))
    subsets_Y = list(_all_subsets(Y))
    for f in all_maps(X, Y):
        for A in subsets_X:
            for B in subsets_Y:
                lhs = exists_sub(f, sub_lattice("meet", X, [A, pullback_sub(f, B)]))
                rhs = sub_lattice("meet", Y, [exists_sub(f, A), B])
                s.check(
                    lhs == rhs,
                    "frobenius",
                    {"f": dict(f.assignment), "A": sorted(map(str, A.members)),
                     "B": sorted(map(str, B.members))},
                )
                s.check(
                    (exists_sub(f, A) <= B) == (A <= pullback_sub(f, B)),
                    "exists-adjunction",
                    {"A": sorted(map(str, A.members)), "B": sorted(map(str, B.members))},
                )
                s.check(
                    (pullback_sub(f, B) <= A) == (B <= forall_sub(f, A)),
                    "forall-adjunction",
                    {"A": sorted(map(str, A.members)), "B": sorted(map(str, B.members))},
                )
    # Heyting adjunction on X, exhaustively
    for A in subsets_X:
        for B in subsets_X:
            impl = heyting_implies(A, B)
            for C in subsets_X:
                meets = sub_lattice("meet", X, [C, A])
                s.check(
                    (meets <= B) == (C <= impl),
                    "heyting-adjunction",
                    {"A": sorted(map(str, A.members)), "B": sorted(map(str, B.members)),
                     "C": sorted(map(str, C.members))},
                )
    return s


def _all_subsets(space):
    for r in range(space.size + 1):
        for combo in itertools.combinations(space.points, r):
            yield Subobject.of(space, combo)


def suite_beck_chevalley(seed=0, size=3):
    """Pullback-then-image equals image-then-pullback over constructed
    pullback squares at <= `size` points per space."""
    rng = random.Random(seed)
    s = Suite("beck-chevalley")
    X = random_space(rng, size, denom=4, name="X")
    Y = random_space(rng, size, denom=4, name="Y")
    Z = random_space(rng, max(size - 1, 1), denom=4, name="Z")
    for f in all_maps(X, Z):
        for g in all_maps(Y, Z):
            P, pX, pY = set_pullback_square(f, g)
            for A in _all_subsets(X):
                lhs = pullback_sub(g, exists_sub(f, A))
                rhs = exists_sub(pY, pullback_sub(pX, A))
                s.check(
                    lhs == rhs,
                    "beck-chevalley",
                    {"f": dict(f.assignment), "g": dict(g.assignment),
                     "A": sorted(map(str, A.members))},
                )
    return s


def suite_classifier(seed=0, size=200):
    """Round trips of the predicate/family correspondence plus naturality
    of pullback on random composable pairs."""
    rng = random.Random(seed)
    s = Suite("classifier")
    for _ in range(size):
        X = random_space(rng, rng.randint(1, 6), denom=8)
        eps = random_modulus(rng)
        P = random_predicate(rng, X, eps)
        R = to_family(P)
        s.check(
            to_predicate(R, eps).value == P.value,
            "to_predicate-after-to_family",
            {"space": X.id, "values": [str(v) for _, v in P.value]},
        )
        s.check(
            to_family(to_predicate(R, eps)) == R,
            "to_family-after-to_predicate",
            {"space": X.id},
        )
    for _ in range(size // 2):
        Z = random_space(rng, rng.randint(1, 4), denom=8)
        Y = random_space(rng, rng.randint(1, 4), denom=8)
        X = random_space(rng, rng.randint(1, 4), denom=8)
        g = random_map(rng, X, Y)
        f = random_map(rng, Y, Z)
        P = random_predicate(rng, Z, random_modulus(rng))
        lhs = predicate_pullback(compose_maps(f, g), P)
        rhs = predicate_pullback(g, predicate_pullback(f, P))
        s.check(
            lhs.value == rhs.value,
            "pullback-naturality",
            {"f": dict(f.assignment), "g": dict(g.assignment)},
        )
    return s


def suite_envelope(seed=0, size=500):
    """Exhaustive Galois biconditional at grid-1/4 on 3-point spaces, plus
    Dijkstra-vs-Bellman-Ford agreement on random instances."""
    rng = random.Random(seed)
    s = Suite("envelope")
    X = random_space(rng, 3, denom=4, name="E3")
    for eps in (Modulus.identity(), Modulus.linear(2)):
        preds = enumerate_predicates(X, eps, 4)
        fams = [
            IndexedFamily.build(X, dict(zip(X.points, vals)))
            for vals in itertools.product(grid_values(4), repeat=3)
        ]
        for R in fams:
            LR = envelope(R, eps)
            for P in preds:
                s.check(
                    predicate_leq(LR, P) == family_leq(R, to_family(P)),
                    "envelope-galois",
                    {"thresholds": [str(v) for _, v in R.threshold],
                     "P": [str(v) for _, v in P.value]},
                )
    for _ in range(size):
        X = random_space(rng, rng.randint(2, 30), denom=8)
        eps = random_modulus(rng)
        R = random_family(rng, X)
        s.check(
            envelope(R, eps).value == bellman_ford_envelope(R, eps).value,
            "dijkstra-equals-bellman-ford",
            {"space": X.id, "points": X.size},
        )
    return s


def suite_quantifier(seed=0, size=300):
    """Prop-level identification of the adjoints with pointwise inf/sup,
    plus both adjunction biconditionals exhaustively at 2x2 grid-1/4."""
    rng = random.Random(seed)
    s = Suite("quantifier")
    for _ in range(size):
        Y = random_space(rng, rng.randint(1, 4), denom=8)
        X = random_space(rng, rng.randint(1, 4), denom=8)
        YX = product(Y, X)
        pi = projection_map(YX, 1)
        eps = random_modulus(rng)
        R = random_predicate(rng, YX, eps)
        direct_inf = quantify_direct("inf", pi, R)
        direct_sup = quantify_direct("sup", pi, R)
        s.check(
            exists_along(pi, R).value == direct_inf.value,
            "exists-is-pointwise-inf",
            {"Y": Y.id, "X": X.id},
        )
        s.check(
            forall_proj(pi, R).value == direct_sup.value,
            "forall-is-pointwise-sup",
            {"Y": Y.id, "X": X.id},
        )
        s.check(
            is_epsilon_predicate(to_family(direct_inf), eps)
            and is_epsilon_predicate(to_family(direct_sup), eps),
            "quantifier-continuity",
            {"Y": Y.id, "X": X.id},
        )
    # exhaustive adjunction at 2x2, grid 1/4, eps = id
    Y = random_space(rng, 2, denom=4, name="Y2")
    X = random_space(rng, 2, denom=4, name="X2")
    YX = product(Y, X)
    pi = projection_map(YX, 1)
    ident = Modulus.identity()
    preds_X = enumerate_predicates(pi.target, ident, 4)
    preds_YX = enumerate_predicates(YX, ident, 4)
    for R in preds_YX:
        ex = exists_along(pi, R)
        fa = forall_proj(pi, R)
        for P in preds_X:
            pb = predicate_pullback(pi, P)
            s.check(
                predicate_leq(ex, P) == predicate_leq(R, pb),
                "exists-adjunction",
                {"R": [str(v) for _, v in R.value], "P": [str(v) for _, v in P.value]},
            )
            s.check(
                predicate_leq(pb, R) == predicate_leq(P, fa),
                "forall-adjunction",
                {"R": [str(v) for _, v in R.value], "P": [str(v) for _, v in P.value]},
            )
    return s


def check_metrization(space_x, space_y, suite: Suite):
    """The five axioms of the indexed metric on products, exhaustively over
    the distance values occurring in the spaces."""
    X, Y = space_x, space_y
    XX = product(X, X)
    radii = sorted(set(X.distance_values()) | set(Y.distance_values()))

    def D(space, r):
        return frozenset(
            (a, b) for (a, b) in product(space, space).points
            if _v_leq(space.d(a, b), r)
        )

    # (1) diagonal at 0
    suite.check(
        all((x, x) in D(X, ZERO) for x in X.points),
        "metrization-diagonal",
        {"space": X.id},
    )
    # (2) swap symmetry
    for r in radii:
        suite.check(
            all((y, x) in D(X, r) for (x, y) in D(X, r)),
            "metrization-symmetry",
            {"space": X.id, "r": str(r)},
        )
    # (3) composition inequality over all triples and occurring radii
    for r, t in itertools.product(radii, repeat=2):
        bound = UNIT.tensor(r, t)
        ok = all(
            _v_leq(X.d(a, c), bound)
            for a, b, c in itertools.product(X.points, repeat=3)
            if _v_leq(X.d(a, b), r) and _v_leq(X.d(b, c), t)
        )
        suite.check(ok, "metrization-composition", {"space": X.id, "r": str(r), "t": str(t)})
    # (4) meet closure at infima of finite radius sets
    for rs in itertools.combinations(radii, 2):
        inf_r = min(rs)
        meet = D(X, rs[0]) & D(X, rs[1])
        suite.check(
            D(X, inf_r) == meet,
            "metrization-meets",
            {"space": X.id, "radii": [str(r) for r in rs]},
        )
    # (5) product factorization
    XY = product(X, Y)
    for r in radii:
        lhs = frozenset(
            (p, q) for (p, q) in product(XY, XY).points if _v_leq(XY.d(p, q), r)
        )
        rhs = frozenset(
            ((x1, y1), (x2, y2))
            for ((x1, y1), (x2, y2)) in product(XY, XY).points
            if _v_leq(X.d(x1, x2), r) and _v_leq(Y.d(y1, y2), r)
        )
        suite.check(lhs == rhs, "metrization-product", {"r": str(r)})
    return suite


# -- presheaf generators and suite -----------------------------------


def _template_categories():
    one = FinCategory.one_object("a")
    arrow = FinCategory.arrow("b", "a", "f")
    pair = FinCategory.build(
        ["a", "b"],
        [("1_a", "a", "a"), ("1_b", "b", "b"), ("f", "b", "a"), ("g", "b", "a")],
        {
            ("1_a", "1_a"): "1_a", ("1_b", "1_b"): "1_b",
            ("1_a", "f"): "f", ("f", "1_b"): "f",
            ("1_a", "g"): "g", ("g", "1_b"): "g",
        },
        {"a": "1_a", "b": "1_b"},
    )
    chain = FinCategory.build(
        ["a", "b", "c"],
        [
            ("1_a", "a", "a"), ("1_b", "b", "b"), ("1_c", "c", "c"),
            ("f", "b", "a"), ("h", "c", "b"), ("fh", "c", "a"),
        ],
        {
            ("1_a", "1_a"): "1_a", ("1_b", "1_b"): "1_b", ("1_c", "1_c"): "1_c",
            ("1_a", "f"): "f", ("f", "1_b"): "f",
            ("1_b", "h"): "h", ("h", "1_c"): "h",
            ("1_a", "fh"): "fh", ("fh", "1_c"): "fh",
            ("f", "h"): "fh",
        },
        {"a": "1_a", "b": "1_b", "c": "1_c"},
    )
    cospan = FinCategory.build(
        ["a", "b", "c"],
        [
            ("1_a", "a", "a"), ("1_b", "b", "b"), ("1_c", "c", "c"),
            ("f", "b", "a"), ("g", "c", "a"),
        ],
        {
            ("1_a", "1_a"): "1_a", ("1_b", "1_b"): "1_b", ("1_c", "1_c"): "1_c",
            ("1_a", "f"): "f", ("f", "1_b"): "f",
            ("1_a", "g"): "g", ("g", "1_c"): "g",
        },
        {"a": "1_a", "b": "1_b", "c": "1_c"},
    )
    # generators per template and an order in which to repair metrics:
    # each entry is (category, generators, object order from leaves upward)
    return [
        (one, [], ["a"]),
        (arrow, ["f"], ["b", "a"]),
        (pair, ["f", "g"], ["b", "a"]),
        (chain, ["f", "h"], ["c", "b", "a"]),
        (cospan, ["f", "g"], ["b", "c", "a"]),
    ]


def random_presheaf(rng, max_points=4, denom=4) -> MetricPresheaf:
    """A random presheaf over a random template category.

    Restrictions for the free generators are arbitrary functions; the
    source-object metrics are then enlarged (max with the pulled-back
    metric, re-closed) so that every restriction is 1-Lipschitz.
    Composite restrictions are derived, so functoriality is automatic.
    """
    cat, generators, order = rng.choice(_template_categories())
    spaces = {
        a: random_space(rng, rng.randint(1, max_points), denom=denom, name=f"F({a})")
        for a in cat.objects
    }
    actions = {}
    for gname in generators:
        b, a = cat.source(gname), cat.target(gname)
        actions[gname] = {
            x: rng.choice(spaces[b].points) for x in spaces[a].points
        }
    # enlarge metrics from the leaves up so each generator is 1-Lipschitz
    for a in order:
        for gname in generators:
            if cat.target(gname) != a:
                continue
            b = cat.source(gname)
            act = actions[gname]
            S, T = spaces[a], spaces[b]
            matrix = [
                [_v_max(S.d(x, y), T.d(act[x], act[y])) for y in S.points]
                for x in S.points
            ]
            spaces[a] = FiniteMetricSpace.build(S.id, S.points, matrix, S.quantale)
    # derive every restriction from the generators
    tables = {}
    for a in cat.objects:
        tables[cat.identity_of[a]] = {x: x for x in spaces[a].points}
    for gname in generators:
        tables[gname] = actions[gname]
    for (g, f), gf in cat.compose_table.items():
        if gf in tables or g not in tables or f not in tables:
            continue
        tables[gf] = {
            x: tables[f][tables[g][x]] for x in spaces[cat.target(g)].points
        }
    return MetricPresheaf.build(cat, spaces, tables)


def random_presheaf_predicate(rng, F: MetricPresheaf, denom=4) -> PresheafPredicate:
    """Greatest presheaf-predicate minorant of random grid values."""
    cat = F.category
    vals = {
        a: {x: Fraction(rng.randint(0, denom), denom) for x in F.space(a).points}
        for a in cat.objects
    }
    ident = Modulus.identity()
    changed = True
    while changed:
        changed = False
        for a in cat.objects:
            env = envelope(IndexedFamily.build(F.space(a), vals[a]), ident).values
            if env != vals[a]:
                vals[a] = env
                changed = True
        for mid, b, a in cat.morphisms:
            act = F.action(mid)
            for x in F.space(a).points:
                if vals[b][act[x]] > vals[a][x]:
                    vals[b][act[x]] = vals[a][x]
                    changed = True
    return PresheafPredicate.build(F, vals)


def suite_presheaf(seed=0, size=100):
    """Classifier round trip, uniqueness probe, and the metric laws of the
    classifier object, on random presheaves."""
    rng = random.Random(seed)
    s = Suite("presheaf")
    for _ in range(size):
        F = random_presheaf(rng)
        cat = F.category
        R = random_presheaf_predicate(rng, F)
        phi = classify_presheaf(F, R)
        back = pullback_truth(F, phi)
        s.check(back.value == R.value, "classifier-round-trip", {"category": cat.objects})
        s.check(
            _reclassify_equal(F, R, phi),
            "classifier-reclassify",
            {"category": cat.objects},
        )
        # componentwise 1-Lipschitz into (Omega_a, d_a)
        for a in cat.objects:
            S = F.space(a)
            for x, y in S.pairs():
                s.check(
                    _v_leq(omega_distance(phi[a][x], phi[a][y]), S.d(x, y)),
                    "characteristic-1-lipschitz",
                    {"object": a, "pair": (str(x), str(y))},
                )
        # naturality: Omega f after phi_a equals phi_b after F f
        for mid, b, a in cat.morphisms:
            act = F.action(mid)
            for x in F.space(a).points:
                s.check(
                    omega_restrict(mid, phi[a][x]).theta == phi[b][act[x]].theta,
                    "characteristic-naturality",
                    {"morphism": mid, "point": str(x)},
                )
        # triangle inequality and 1-Lipschitz restriction for omega elements
        for a in cat.objects:
            els = [phi[a][x] for x in F.space(a).points]
            for s1, s2, s3 in itertools.product(els, repeat=3):
                s.check(
                    _v_leq(
                        omega_distance(s1, s3),
                        UNIT.tensor(omega_distance(s1, s2), omega_distance(s2, s3)),
                    ),
                    "omega-triangle",
                    {"object": a},
                )
            for mid in cat.into(a):
                b = cat.source(mid)
                for s1, s2 in itertools.product(els, repeat=2):
                    s.check(
                        _v_leq(
                            omega_distance(
                                omega_restrict(mid, s1), omega_restrict(mid, s2)
                            ),
                            omega_distance(s1, s2),
                        ),
                        "omega-restrict-1-lipschitz",
                        {"morphism": mid},
                    )
    return s


def _reclassify_equal(F, R, phi):
    again = classify_presheaf(F, pullback_truth(F, phi))
    for a, comp in phi.items():
        for x, el in comp.items():
            if again[a][x].theta != el.theta:
                return False
    return True


def uniqueness_probe(F, R, phi, denom=4):
    """Perturbing any single theta value breaks naturality, the Lipschitz
    bound, or the round trip; returns the first counterexample found or
    None when every perturbation breaks something (the expected outcome)."""
    cat = F.category
    for a, comp in phi.items():
        for x, el in comp.items():
            for f in cat.into(a):
                current = el.table[f]
                for k in range(denom + 1):
                    new_val = Fraction(k, denom)
                    if new_val == current:
                        continue
                    theta = el.table
                    theta[f] = new_val
                    try:
                        cand = OmegaElement.build(cat, a, theta)
                    except Exception:
                        continue  # not even a graded sieve
                    if not _perturbed_still_classifies(F, R, phi, a, x, cand):
                        continue
                    return {"object": a, "point": str(x), "morphism": f, "value": str(new_val)}
    return None


def _perturbed_still_classifies(F, R, phi, a0, x0, cand):
    """True if swapping in `cand` keeps naturality, the 1-Lipschitz bound,
    and the truth pullback; the probe expects this to be False always."""
    cat = F.category
    table = {a: dict(comp) for a, comp in phi.items()}
    table[a0][x0] = cand
    # truth pullback
    for a, comp in table.items():
        for x, el in comp.items():
            nu = el.table[cat.identity_of[a]]
            if nu != R.at(a)[x]:
                return False
    # naturality
    for mid, b, a in cat.morphisms:
        act = F.action(mid)
        for x in F.space(a).points:
            if omega_restrict(mid, table[a][x]).theta != table[b][act[x]].theta:
                return False
    # componentwise 1-Lipschitz
    for a, comp in table.items():
        S = F.space(a)
        for x, y in S.pairs():
            if not _v_leq(omega_distance(comp[x], comp[y]), S.d(x, y)):
                return False
    return True


SUITES = {
    "frobenius": suite_frobenius,
    "beck-chevalley": suite_beck_chevalley,
    "classifier": suite_classifier,
    "envelope": suite_envelope,
    "quantifier": suite_quantifier,
    "presheaf": suite_presheaf,
}
