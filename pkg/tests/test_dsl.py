import random
from fractions import Fraction

import pytest

from contsem.dsl import (
    Apply,
    ConstVal,
    Dist,
    DslError,
    MaxMin,
    Plus,
    PredApp,
    Quant,
    Signature,
    evaluate,
    free_variables,
    infer_modulus,
    parse,
)
from contsem.laws import random_modulus, random_predicate, random_space
from contsem.metric import (
    FiniteMetricSpace,
    MetricMap,
    check_modulus,
    make_grid,
    pair_maps,
    product,
)
from contsem.predicate import predicate_pullback, to_family, is_epsilon_predicate
from contsem.quantale import Modulus
from contsem.quantifier import quantify_direct

F = Fraction


def basic_signature():
    sig = Signature()
    Y = make_grid(2)
    sig.spaces["Y"] = Y
    sig.points["c"] = ("Y", F(0))
    return sig


def rich_signature():
    sig = Signature()
    X = FiniteMetricSpace.build(
        "X",
        ["a", "b", "c"],
        [
            [0, F("1/4"), F("1/2")],
            [F("1/4"), 0, F("1/4")],
            [F("1/2"), F("1/4"), 0],
        ],
    )
    g8 = make_grid(8)
    sig.spaces["X"] = X
    sig.spaces["G"] = g8
    sig.points["a0"] = ("X", "a")
    sig.maps["g"] = MetricMap.build(
        X, g8, {"a": F(0), "b": F("1/4"), "c": F("1/2")}, Modulus.linear(2)
    )
    sig.predicates["P"] = random_predicate(
        random.Random(0), g8, Modulus.identity()
    )
    return sig


# -- parsing ----------------------------------------------------------


def test_parse_quantified_distance():
    ast = parse("inf y:Y. d(c, y)")
    assert isinstance(ast, Quant)
    assert ast.kind == "inf" and ast.var == "y" and ast.space_name == "Y"
    assert isinstance(ast.body, Dist)


def test_parse_connective_tree():
    ast = parse("max(P(x), Q(x)) + const(1/4)")
    assert isinstance(ast, Plus)
    assert isinstance(ast.parts[0], MaxMin)
    assert isinstance(ast.parts[1], ConstVal)
    assert ast.parts[1].value == F("1/4")


def test_parse_syntax_error_at_end():
    with pytest.raises(DslError, match="end of input"):
        parse("d(x, y")


def test_parse_trailing_input():
    with pytest.raises(DslError, match="trailing"):
        parse("const(1) const(2)")


def test_parse_reserved_words():
    with pytest.raises(DslError, match="reserved"):
        parse("inf d:Y. const(0)")


def test_quantifier_body_extends_right():
    ast = parse("inf y:Y. d(c, y) + d(c, y)")
    assert isinstance(ast, Quant)
    assert isinstance(ast.body, Plus)


def test_parse_nested_terms():
    ast = parse("P(g(g(x)))")
    assert isinstance(ast, PredApp)
    inner = ast.args[0]
    assert isinstance(inner, Apply) and isinstance(inner.arg, Apply)


# -- typechecking errors ----------------------------------------------


def test_unbound_identifier():
    with pytest.raises(DslError, match="unbound"):
        evaluate("d(nope, nope)", basic_signature())


def test_sort_mismatch():
    sig = rich_signature()
    sig.spaces["Y"] = make_grid(2)
    sig.points["c"] = ("Y", F(0))
    with pytest.raises(DslError, match="different spaces"):
        evaluate("d(a0, c)", sig)


def test_free_variable_needs_space():
    with pytest.raises(DslError, match="unbound identifier"):
        evaluate("d(x, x)", basic_signature())


# -- modulus inference ------------------------------------------------


def test_infer_distance_atom():
    sig = rich_signature()
    P = evaluate("d(x, y)", sig, {"x": sig.spaces["X"], "y": sig.spaces["X"]})
    assert P.modulus == Modulus.linear(2)  # add(id, id)


def test_infer_pred_of_map():
    sig = rich_signature()
    P = evaluate("P(g(x))", sig, {"x": sig.spaces["X"]})
    assert P.modulus == Modulus.linear(2)  # id composed with eps_2


def test_infer_quantified_sound_not_tight():
    sig = rich_signature()
    P = evaluate("inf y:X. d(x, y)", sig, {"x": sig.spaces["X"]})
    assert P.modulus == Modulus.linear(2)
    assert check_modulus_on_values(P)
    # tightest modulus of the values is below the inferred one
    from contsem.metric import tightest_modulus

    g = make_grid(8)
    tight = tightest_modulus(
        P.space, g, {p: v for p, v in P.value}
    )
    assert tight.leq(P.modulus)


def check_modulus_on_values(P):
    return is_epsilon_predicate(to_family(P), P.modulus)


# -- evaluation -------------------------------------------------------


def test_eval_closed_const():
    assert evaluate("const(1/3)", basic_signature()) == F("1/3")


def test_eval_inf_attained():
    assert evaluate("inf y:Y. d(c, y)", basic_signature()) == 0


def test_eval_sup_farthest():
    assert evaluate("sup y:Y. d(c, y)", basic_signature()) == 1


def test_eval_sup_empty_space_errors():
    sig = basic_signature()
    sig.spaces["E"] = FiniteMetricSpace.build("E", [], [])
    with pytest.raises(DslError, match="empty space"):
        evaluate("sup y:E. const(0)", sig)
    # inf over the empty space is the top of the carrier
    assert evaluate("inf y:E. const(0)", sig) == 1


def test_eval_tensor_truncates():
    assert evaluate("const(0.7) + const(0.7)", basic_signature()) == 1


def test_eval_max_min():
    sig = basic_signature()
    assert evaluate("max(const(1/4), const(1/2))", sig) == F("1/2")
    assert evaluate("min(const(1/4), const(1/2))", sig) == F("1/4")


def test_eval_open_formula_is_predicate():
    sig = rich_signature()
    X = sig.spaces["X"]
    P = evaluate("d(a0, x)", sig, {"x": X})
    assert P.space.points == X.points
    assert P.values == {p: X.d("a", p) for p in X.points}


def test_quantifier_matches_adjoint_pipeline():
    sig = rich_signature()
    X = sig.spaces["X"]
    body = evaluate("d(x, y)", sig, {"x": X, "y": X})
    # body lives on X x X; project away y (the second coordinate)
    from contsem.metric import projection_map

    pi = projection_map(body.space, 0)
    for kind, text in (("inf", "inf y:X. d(x, y)"), ("sup", "sup y:X. d(x, y)")):
        via_dsl = evaluate(text, sig, {"x": X})
        via_adjoint = quantify_direct(kind, pi, body)
        assert [v for _, v in via_dsl.value] == [
            via_adjoint.values[p] for p in pi.target.points
        ]


def test_substitution_lemma_sampled():
    # evaluate(phi[c/x]) equals the pullback of evaluate(phi) along the
    # pairing that inserts the constant
    sig = rich_signature()
    X = sig.spaces["X"]
    open_pred = evaluate("P(g(x)) + d(x, y)", sig, {"x": X, "y": X})
    closed = evaluate("P(g(a0)) + d(a0, y)", sig, {"y": X})
    insert = MetricMap.build(
        X, open_pred.space, {y: ("a", y) for y in X.points}
    )
    pulled = predicate_pullback(insert, open_pred)
    assert pulled.values == closed.values


def test_reassociation_invariance():
    sig = rich_signature()
    X = sig.spaces["X"]
    for env in ({"x": X},):
        a = evaluate("(P(g(x)) + const(1/8)) + d(x, x)", sig, env)
        b = evaluate("P(g(x)) + (const(1/8) + d(x, x))", sig, env)
        assert a.values == b.values


def test_free_variables_order():
    from contsem.dsl import TypeChecker

    sig = rich_signature()
    X = sig.spaces["X"]
    ast = parse("d(x, y) + (inf z:X. d(z, x))")
    checked = TypeChecker(sig, {"x": X, "y": X}).check_formula(ast)
    assert free_variables(checked) == ["x", "y"]


def test_predicate_two_arguments():
    sig = rich_signature()
    X = sig.spaces["X"]
    import contsem.laws as laws

    sig.predicates["D"] = random_predicate(
        random.Random(3), product(X, X), Modulus.identity()
    )
    P = evaluate("D(x, y)", sig, {"x": X, "y": X})
    assert P.values == sig.predicates["D"].values


def test_soundness_random_formulas():
    rng = random.Random(42)
    for _ in range(40):
        sig, env, text = _random_formula(rng)
        out = evaluate(text, sig, env)
        if hasattr(out, "value"):
            assert check_modulus_on_values(out)


def _random_formula(rng, depth=3):
    sig = Signature()
    X = random_space(rng, rng.randint(2, 3), denom=4, name="X")
    sig.spaces["X"] = X
    sig.points["c"] = ("X", X.points[0])
    sig.predicates["P"] = random_predicate(rng, X, random_modulus(rng), denom=4)
    env = {"x": X}

    def term(d):
        return rng.choice(["x", "c"])

    def formula(d):
        if d == 0:
            return rng.choice(
                [f"P({term(d)})", f"d({term(d)}, {term(d)})", "const(1/4)"]
            )
        k = rng.random()
        if k < 0.3:
            return f"{formula(d - 1)} + {formula(d - 1)}"
        if k < 0.5:
            op = rng.choice(["max", "min"])
            return f"{op}({formula(d - 1)}, {formula(d - 1)})"
        if k < 0.7:
            q = rng.choice(["inf", "sup"])
            return f"({q} y:X. d({term(d)}, y) + ({formula(d - 1)}))"
        return formula(d - 1)

    return sig, env, formula(depth)
