import itertools
import random
from fractions import Fraction

import pytest

from contsem.laws import (
    SUITES,
    random_presheaf,
    random_presheaf_predicate,
    uniqueness_probe,
)
from contsem.metric import FiniteMetricSpace
from contsem.presheaf import (
    FinCategory,
    MetricPresheaf,
    OmegaElement,
    PresheafError,
    PresheafMap,
    PresheafPredicate,
    PresheafSub,
    classify_presheaf,
    full_sub,
    is_presheaf_predicate,
    is_presheaf_sub,
    is_regular_mono_presheaf,
    omega_distance,
    omega_nu,
    omega_restrict,
    presheaf_distance,
    presheaf_product,
    presheaf_rimage,
    presheaf_sub_lattice,
    pullback_truth,
    sublevel,
    validate_category,
    validate_presheaf,
)
from contsem.quantale import _v_leq

F = Fraction


def arrow_presheaf():
    """The worked example: f: b -> a, Fa = {p,q} at distance 0.5, Fb = {u}."""
    cat = FinCategory.arrow("b", "a", "f")
    Fa = FiniteMetricSpace.build("Fa", ["p", "q"], [[0, F("0.5")], [F("0.5"), 0]])
    Fb = FiniteMetricSpace.build("Fb", ["u"], [[0]])
    return MetricPresheaf.build(
        cat,
        {"a": Fa, "b": Fb},
        {
            "1_a": {"p": "p", "q": "q"},
            "1_b": {"u": "u"},
            "f": {"p": "u", "q": "u"},
        },
    )


def test_category_validation():
    cat = FinCategory.one_object("a")
    assert validate_category(cat) is None
    with pytest.raises(PresheafError, match="missing composite"):
        FinCategory.build(
            ["a", "b"],
            [("1_a", "a", "a"), ("1_b", "b", "b"), ("f", "b", "a")],
            {("1_a", "1_a"): "1_a", ("1_b", "1_b"): "1_b", ("f", "1_b"): "f"},
            {"a": "1_a", "b": "1_b"},
        )
    with pytest.raises(PresheafError, match="unit law"):
        FinCategory.build(
            ["a"],
            [("1_a", "a", "a"), ("e", "a", "a")],
            {
                ("1_a", "1_a"): "1_a",
                ("1_a", "e"): "1_a",  # should be e
                ("e", "1_a"): "e",
                ("e", "e"): "e",
            },
            {"a": "1_a"},
        )


def test_presheaf_validation():
    F0 = arrow_presheaf()
    assert validate_presheaf(F0) is None
    # restriction stretching a distance fails the 1-Lipschitz bound
    cat = FinCategory.arrow("b", "a", "f")
    Fa = FiniteMetricSpace.build("Fa", ["p", "q"], [[0, F("0.1")], [F("0.1"), 0]])
    Fb = FiniteMetricSpace.build("Fb", ["u", "v"], [[0, F("0.9")], [F("0.9"), 0]])
    with pytest.raises(PresheafError, match="1-Lipschitz"):
        MetricPresheaf.build(
            cat,
            {"a": Fa, "b": Fb},
            {
                "1_a": {"p": "p", "q": "q"},
                "1_b": {"u": "u", "v": "v"},
                "f": {"p": "u", "q": "v"},
            },
        )


def test_presheaf_functoriality_violation():
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
    one = FiniteMetricSpace.build("P", ["s", "t"], [[0, 0], [0, 0]])
    with pytest.raises(PresheafError, match="functoriality"):
        MetricPresheaf.build(
            chain,
            {"a": one, "b": one, "c": one},
            {
                "1_a": {"s": "s", "t": "t"},
                "1_b": {"s": "s", "t": "t"},
                "1_c": {"s": "s", "t": "t"},
                "f": {"s": "s", "t": "t"},
                "h": {"s": "s", "t": "t"},
                "fh": {"s": "t", "t": "s"},  # disagrees with h after f
            },
        )


def test_constant_presheaf_ok():
    cat = FinCategory.one_object("a")
    one = FiniteMetricSpace.build("pt", ["x"], [[0]])
    F0 = MetricPresheaf.build(cat, {"a": one}, {"1_a": {"x": "x"}})
    assert validate_presheaf(F0) is None


def test_presheaf_sub():
    F0 = arrow_presheaf()
    assert is_presheaf_sub(F0, {"a": {"p"}, "b": {"u"}})
    # image of p under f is u, missing from the b side
    assert not is_presheaf_sub(F0, {"a": {"p"}, "b": set()})
    full = full_sub(F0)
    sub = PresheafSub.of(F0, {"a": {"p"}, "b": {"u"}})
    assert sub <= full
    assert presheaf_sub_lattice("meet", F0, [sub, full]) == sub
    assert presheaf_sub_lattice("join", F0, [sub, full]) == full


def test_presheaf_rimage():
    F0 = arrow_presheaf()
    phi = PresheafMap.build(
        F0, F0, {"a": {"p": "p", "q": "p"}, "b": {"u": "u"}}
    )
    img = presheaf_rimage(phi)
    assert img.table == {"a": frozenset({"p"}), "b": frozenset({"u"})}
    assert is_presheaf_sub(F0, img)


def test_regular_mono_presheaf():
    F0 = arrow_presheaf()
    ident = PresheafMap.build(
        F0, F0, {"a": {"p": "p", "q": "q"}, "b": {"u": "u"}}
    )
    assert is_regular_mono_presheaf(ident)
    collapse = PresheafMap.build(
        F0, F0, {"a": {"p": "p", "q": "p"}, "b": {"u": "u"}}
    )
    assert not is_regular_mono_presheaf(collapse)


def test_presheaf_product_and_distance():
    F0 = arrow_presheaf()
    FF = presheaf_product(F0, F0)
    assert validate_presheaf(FF) is None
    D0 = presheaf_distance(F0, F(0))
    for a in F0.category.objects:
        for x in F0.space(a).points:
            assert (x, x) in D0.table[a]
    for r in (F(0), F("1/4"), F("1/2"), F(1)):
        Dr = presheaf_distance(F0, r)
        assert is_presheaf_sub(FF, Dr)


def test_is_presheaf_predicate_worked_example():
    F0 = arrow_presheaf()
    good = {"a": {"p": F("0.2"), "q": F("0.6")}, "b": {"u": F("0.1")}}
    assert is_presheaf_predicate(F0, good)
    # growth under restriction
    bad = {"a": {"p": F("0.2"), "q": F("0.6")}, "b": {"u": F("0.3")}}
    assert not is_presheaf_predicate(F0, bad)
    # objectwise constant zero
    zero = {"a": {"p": F(0), "q": F(0)}, "b": {"u": F(0)}}
    assert is_presheaf_predicate(F0, zero)
    # per-object Lipschitz failure
    steep = {"a": {"p": F(0), "q": F("0.9")}, "b": {"u": F(0)}}
    assert not is_presheaf_predicate(F0, steep)


def test_classify_worked_example():
    F0 = arrow_presheaf()
    R = PresheafPredicate.build(
        F0, {"a": {"p": F("0.2"), "q": F("0.6")}, "b": {"u": F("0.1")}}
    )
    phi = classify_presheaf(F0, R)
    assert phi["a"]["p"].table == {"1_a": F("0.2"), "f": F("0.1")}
    assert phi["a"]["q"].table == {"1_a": F("0.6"), "f": F("0.1")}
    assert phi["b"]["u"].table == {"1_b": F("0.1")}
    d = omega_distance(phi["a"]["p"], phi["a"]["q"])
    assert d == F("0.4")
    assert _v_leq(d, F0.space("a").d("p", "q"))
    back = pullback_truth(F0, phi)
    assert back.table == R.table


def test_classify_zero():
    F0 = arrow_presheaf()
    R = PresheafPredicate.build(
        F0, {"a": {"p": F(0), "q": F(0)}, "b": {"u": F(0)}}
    )
    phi = classify_presheaf(F0, R)
    for comp in phi.values():
        for el in comp.values():
            assert all(v == 0 for v in el.table.values())


def test_one_object_omega_is_interval():
    cat = FinCategory.one_object("a")
    s1 = OmegaElement.build(cat, "a", {"1_a": F("0.3")})
    s2 = OmegaElement.build(cat, "a", {"1_a": F("0.8")})
    assert omega_nu(s1) == F("0.3")
    assert omega_distance(s1, s2) == F("0.5")
    assert omega_restrict("1_a", s1).table == s1.table


def test_omega_sieve_monotonicity():
    cat = FinCategory.arrow("b", "a", "f")
    OmegaElement.build(cat, "a", {"1_a": F("0.5"), "f": F("0.2")})
    with pytest.raises(PresheafError, match="monotonicity"):
        OmegaElement.build(cat, "a", {"1_a": F("0.2"), "f": F("0.5")})


def test_omega_metric_laws_arrow_category():
    cat = FinCategory.arrow("b", "a", "f")
    grid = [F(k, 4) for k in range(5)]
    els = [
        OmegaElement.build(cat, "a", {"1_a": n, "f": t})
        for n in grid
        for t in grid
        if t <= n
    ]
    for s1, s2, s3 in itertools.product(els, repeat=3):
        assert omega_distance(s1, s3) <= min(
            omega_distance(s1, s2) + omega_distance(s2, s3), F(1)
        )
    for s1, s2 in itertools.product(els, repeat=2):
        assert omega_distance(s1, s2) == omega_distance(s2, s1)
        r1, r2 = omega_restrict("f", s1), omega_restrict("f", s2)
        assert omega_distance(r1, r2) <= omega_distance(s1, s2)
    for s in els:
        assert omega_distance(s, s) == 0


def test_sublevel_is_sub():
    F0 = arrow_presheaf()
    R = PresheafPredicate.build(
        F0, {"a": {"p": F("0.2"), "q": F("0.6")}, "b": {"u": F("0.1")}}
    )
    for r in (F(0), F("0.2"), F("0.5"), F(1)):
        S = sublevel(R, F0, r)
        assert is_presheaf_sub(F0, S)


def test_random_round_trip_and_uniqueness():
    rng = random.Random(21)
    for _ in range(15):
        G = random_presheaf(rng)
        R = random_presheaf_predicate(rng, G)
        phi = classify_presheaf(G, R)
        assert pullback_truth(G, phi).value == R.value
        assert uniqueness_probe(G, R, phi) is None


def test_presheaf_suite():
    s = SUITES["presheaf"](seed=2, size=15)
    assert s.passed, s.failures[:3]
