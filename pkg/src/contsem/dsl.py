"""A small formula language for continuous logic over finite spaces.

Grammar (quantifier bodies extend maximally to the right):

    formula := quant | sum
    quant   := ("inf" | "sup") ident ":" ident "." formula
    sum     := atom { "+" atom }
    atom    := "d" "(" term "," term ")"
             | "max" "(" formula "," formula ")"
             | "min" "(" formula "," formula ")"
             | "const" "(" rational ")"
             | ident "(" term { "," term } ")"
             | "(" formula ")"
    term    := ident | ident "(" term ")"

Connectives: "+" is the quantale tensor (truncated addition), max/min are
the lattice meet/join of sublevel families on the value side, and inf/sup
quantify over a named space.  The evaluator produces a predicate over the
max-metric product of the free-variable spaces, with a modulus inferred
compositionally: composition for map application, truncated addition for
distance atoms and "+", pointwise max for max/min and pairing, the zero
modulus for constants, and the body's modulus for quantifiers (sound,
not always tight).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .metric import FiniteMetricSpace, MetricMap, product
from .predicate import Predicate, true_predicate_on
from .quantale import (
    EU,
    Modulus,
    _v_max,
    _v_min,
    moduloid_clamp,
    parse_rational,
)


class DslError(ValueError):
    def __init__(self, message, line=None, col=None):
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)
        self.line = line
        self.col = col


KEYWORDS = {"inf", "sup", "d", "max", "min", "const"}

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|\d+\.\d+|\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[().,:+]))"
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            line = text.count("\n", 0, pos) + 1
            col = pos - text.rfind("\n", 0, pos)
            raise DslError(f"unexpected character {rest[0]!r}", line, col)
        pos = m.end()
        for kind in ("num", "ident", "punct"):
            if m.group(kind) is not None:
                start = m.start(kind)
                line = text.count("\n", 0, start) + 1
                col = start - text.rfind("\n", 0, start)
                tokens.append(Token(kind, m.group(kind), line, col))
                break
    tokens.append(Token("eof", "", text.count("\n") + 1, len(text) + 1))
    return tokens


# -- AST --------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Apply:
    map_name: str
    arg: object


@dataclass(frozen=True)
class Dist:
    left: object
    right: object


@dataclass(frozen=True)
class PredApp:
    pred_name: str
    args: tuple


@dataclass(frozen=True)
class ConstVal:
    value: Fraction


@dataclass(frozen=True)
class Plus:
    parts: tuple


@dataclass(frozen=True)
class MaxMin:
    op: str  # "max" | "min"
    left: object
    right: object


@dataclass(frozen=True)
class Quant:
    kind: str  # "inf" | "sup"
    var: str
    space_name: str
    body: object


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self):
        return self.tokens[self.i]

    def error(self, message):
        tok = self.cur
        what = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise DslError(f"{message}, found {what}", tok.line, tok.col)

    def eat(self, text=None, kind=None):
        tok = self.cur
        if text is not None and tok.text != text:
            self.error(f"expected {text!r}")
        if kind is not None and tok.kind != kind:
            self.error(f"expected {kind}")
        self.i += 1
        return tok

    def formula(self):
        if self.cur.text in ("inf", "sup"):
            kind = self.eat().text
            var = self.ident()
            self.eat(text=":")
            space = self.ident()
            self.eat(text=".")
            return Quant(kind, var, space, self.formula())
        parts = [self.atom()]
        while self.cur.text == "+":
            self.eat()
            parts.append(self.atom())
        if len(parts) == 1:
            return parts[0]
        return Plus(tuple(parts))

    def ident(self):
        tok = self.cur
        if tok.kind != "ident":
            self.error("expected an identifier")
        if tok.text in KEYWORDS:
            self.error(f"{tok.text!r} is reserved")
        self.i += 1
        return tok.text

    def atom(self):
        tok = self.cur
        if tok.text == "(":
            self.eat()
            inner = self.formula()
            self.eat(text=")")
            return inner
        if tok.text == "d":
            self.eat()
            self.eat(text="(")
            t1 = self.term()
            self.eat(text=",")
            t2 = self.term()
            self.eat(text=")")
            return Dist(t1, t2)
        if tok.text in ("max", "min"):
            op = self.eat().text
            self.eat(text="(")
            left = self.formula()
            self.eat(text=",")
            right = self.formula()
            self.eat(text=")")
            return MaxMin(op, left, right)
        if tok.text == "const":
            self.eat()
            self.eat(text="(")
            num = self.eat(kind="num")
            self.eat(text=")")
            return ConstVal(parse_rational(num.text))
        if tok.kind == "ident":
            name = self.ident()
            if self.cur.text != "(":
                self.error("expected '(' after a predicate name")
            self.eat()
            args = [self.term()]
            while self.cur.text == ",":
                self.eat()
                args.append(self.term())
            self.eat(text=")")
            return PredApp(name, tuple(args))
        self.error("expected a formula")

    def term(self):
        name = self.ident()
        if self.cur.text == "(":
            self.eat()
            arg = self.term()
            self.eat(text=")")
            return Apply(name, arg)
        return name  # resolved to Var or Const during typechecking

    def parse(self):
        out = self.formula()
        if self.cur.kind != "eof":
            self.error("trailing input after the formula")
        return out


def parse(text):
    return _Parser(tokenize(text)).parse()


# -- signature and typechecking --------------------------------------


@dataclass
class Signature:
    spaces: dict = field(default_factory=dict)
    points: dict = field(default_factory=dict)  # name -> (space name, point label)
    maps: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)
    moduloid: str = EU

    def space(self, name) -> FiniteMetricSpace:
        if name not in self.spaces:
            raise DslError(f"unbound space name {name!r}")
        return self.spaces[name]


def _spaces_agree(A: FiniteMetricSpace, B: FiniteMetricSpace) -> bool:
    return (
        A.points == B.points
        and A.dist_matrix == B.dist_matrix
        and A.quantale == B.quantale
    )


@dataclass
class _Typed:
    node: object
    space: FiniteMetricSpace  # for terms: the space of the value


class TypeChecker:
    """Resolves identifiers and checks sorts; returns the resolved AST."""

    def __init__(self, sig: Signature, env):
        self.sig = sig
        self.env = dict(env)  # variable -> FiniteMetricSpace

    def check_formula(self, node):
        if isinstance(node, Quant):
            S = self.sig.space(node.space_name)
            saved = self.env.get(node.var)
            self.env[node.var] = S
            body = self.check_formula(node.body)
            if saved is None:
                del self.env[node.var]
            else:
                self.env[node.var] = saved
            return Quant(node.kind, node.var, node.space_name, body)
        if isinstance(node, Plus):
            return Plus(tuple(self.check_formula(p) for p in node.parts))
        if isinstance(node, MaxMin):
            return MaxMin(
                node.op, self.check_formula(node.left), self.check_formula(node.right)
            )
        if isinstance(node, ConstVal):
            if not self._carrier().contains(node.value):
                raise DslError(f"constant {node.value} outside the carrier")
            return node
        if isinstance(node, Dist):
            left, ls = self.check_term(node.left)
            right, rs = self.check_term(node.right)
            if not _spaces_agree(ls, rs):
                raise DslError(
                    f"d applied across different spaces ({ls.id} vs {rs.id})"
                )
            return Dist(left, right)
        if isinstance(node, PredApp):
            if node.pred_name not in self.sig.predicates:
                raise DslError(f"unbound predicate name {node.pred_name!r}")
            P = self.sig.predicates[node.pred_name]
            args = []
            spaces = []
            for a in node.args:
                ta, sa = self.check_term(a)
                args.append(ta)
                spaces.append(sa)
            if len(args) == 1:
                arg_space = spaces[0]
            elif len(args) == 2:
                arg_space = product(spaces[0], spaces[1])
            else:
                raise DslError("predicates take one or two arguments")
            if not _spaces_agree(arg_space, P.space):
                raise DslError(
                    f"predicate {node.pred_name!r} expects points of "
                    f"{P.space.id}, got {arg_space.id}"
                )
            return PredApp(node.pred_name, tuple(args))
        raise DslError(f"malformed formula node: {node!r}")

    def check_term(self, node):
        if isinstance(node, str):
            if node in self.env:
                return Var(node), self.env[node]
            if node in self.sig.points:
                space_name, _ = self.sig.points[node]
                return Const(node), self.sig.space(space_name)
            raise DslError(f"unbound identifier {node!r}")
        if isinstance(node, Apply):
            if node.map_name not in self.sig.maps:
                raise DslError(f"unbound map name {node.map_name!r}")
            f = self.sig.maps[node.map_name]
            arg, arg_space = self.check_term(node.arg)
            if not _spaces_agree(arg_space, f.source):
                raise DslError(
                    f"map {node.map_name!r} expects points of {f.source.id}, "
                    f"got {arg_space.id}"
                )
            return Apply(node.map_name, arg), f.target
        raise DslError(f"malformed term node: {node!r}")

    def _carrier(self):
        for S in self.sig.spaces.values():
            return S.quantale
        from .quantale import UNIT

        return UNIT


# -- modulus inference ------------------------------------------------


def infer_modulus(node, sig: Signature, top) -> Modulus:
    """Structural modulus of the evaluated predicate over the max-metric
    product of its free variables (clamped into the signature moduloid)."""
    eps = _infer(node, sig, top)
    return moduloid_clamp(sig.moduloid, eps)


def _infer(node, sig, top) -> Modulus:
    if isinstance(node, Var):
        return Modulus.identity(top)
    if isinstance(node, Const):
        return Modulus.zero(top)
    if isinstance(node, Apply):
        return sig.maps[node.map_name].modulus.compose(_infer(node.arg, sig, top))
    if isinstance(node, Dist):
        return _infer(node.left, sig, top).combine_add(_infer(node.right, sig, top))
    if isinstance(node, PredApp):
        parts = [_infer(a, sig, top) for a in node.args]
        arg_eps = parts[0]
        for p in parts[1:]:
            arg_eps = arg_eps.combine_max(p)
        return sig.predicates[node.pred_name].modulus.compose(arg_eps)
    if isinstance(node, ConstVal):
        return Modulus.zero(top)
    if isinstance(node, Plus):
        out = _infer(node.parts[0], sig, top)
        for p in node.parts[1:]:
            out = out.combine_add(_infer(p, sig, top))
        return out
    if isinstance(node, MaxMin):
        return _infer(node.left, sig, top).combine_max(
            _infer(node.right, sig, top)
        )
    if isinstance(node, Quant):
        return _infer(node.body, sig, top)
    raise DslError(f"malformed node: {node!r}")


# -- evaluation -------------------------------------------------------


def free_variables(node, bound=()):
    """Free variables in order of first occurrence."""
    out = []

    def walk(n, bound):
        if isinstance(n, Var):
            if n.name not in bound and n.name not in out:
                out.append(n.name)
        elif isinstance(n, Apply):
            walk(n.arg, bound)
        elif isinstance(n, Dist):
            walk(n.left, bound)
            walk(n.right, bound)
        elif isinstance(n, PredApp):
            for a in n.args:
                walk(a, bound)
        elif isinstance(n, Plus):
            for p in n.parts:
                walk(p, bound)
        elif isinstance(n, MaxMin):
            walk(n.left, bound)
            walk(n.right, bound)
        elif isinstance(n, Quant):
            walk(n.body, bound | {n.var})

    walk(node, set(bound))
    return out


def _eval_value(node, sig, assign):
    """The truth value of a formula under a total point assignment."""
    q = None
    if isinstance(node, ConstVal):
        return node.value
    if isinstance(node, Plus):
        vals = [_eval_value(p, sig, assign) for p in node.parts]
        q = _any_quantale(sig)
        out = vals[0]
        for v in vals[1:]:
            out = q.tensor(out, v)
        return out
    if isinstance(node, MaxMin):
        l = _eval_value(node.left, sig, assign)
        r = _eval_value(node.right, sig, assign)
        return _v_max(l, r) if node.op == "max" else _v_min(l, r)
    if isinstance(node, Dist):
        p1, s1 = _eval_term(node.left, sig, assign)
        p2, _ = _eval_term(node.right, sig, assign)
        return s1.d(p1, p2)
    if isinstance(node, PredApp):
        P = sig.predicates[node.pred_name]
        pts = [_eval_term(a, sig, assign)[0] for a in node.args]
        key = pts[0] if len(pts) == 1 else tuple(pts)
        return P.values[key]
    if isinstance(node, Quant):
        S = sig.space(node.space_name)
        if node.kind == "sup" and not S.points:
            raise DslError("sup over an empty space (inhabitedness required)")
        if not S.points:
            return S.quantale.top
        acc = None
        for p in S.points:
            v = _eval_value(node.body, sig, {**assign, node.var: (p, S)})
            if acc is None:
                acc = v
            else:
                acc = _v_min(acc, v) if node.kind == "inf" else _v_max(acc, v)
        return acc
    raise DslError(f"malformed node: {node!r}")


def _eval_term(node, sig, assign):
    if isinstance(node, Var):
        return assign[node.name]
    if isinstance(node, Const):
        space_name, label = sig.points[node.name]
        return label, sig.space(space_name)
    if isinstance(node, Apply):
        f = sig.maps[node.map_name]
        p, _ = _eval_term(node.arg, sig, assign)
        return f.mapping[p], f.target
    raise DslError(f"malformed term node: {node!r}")


def _any_quantale(sig):
    for S in sig.spaces.values():
        return S.quantale
    from .quantale import UNIT

    return UNIT


def evaluate(text_or_ast, sig: Signature, env=None):
    """Evaluate a formula; returns a Predicate over the product of the free
    variable spaces (first-occurrence order), or a bare truth value when
    the formula is closed.  `env` maps free variables to their spaces."""
    env = dict(env or {})
    ast = parse(text_or_ast) if isinstance(text_or_ast, str) else text_or_ast
    checked = TypeChecker(sig, env).check_formula(ast)
    fv = free_variables(checked)
    missing = [v for v in fv if v not in env]
    if missing:
        raise DslError(f"free variables without a declared space: {missing}")
    top = _any_quantale(sig).top
    eps = infer_modulus(checked, sig, top)
    if not fv:
        return _eval_value(checked, sig, {})
    domain = env[fv[0]]
    for v in fv[1:]:
        domain = product(domain, env[v])
    vals = {}
    for pt in domain.points:
        coords = _unfold(pt, len(fv))
        assign = {v: (coords[i], env[v]) for i, v in enumerate(fv)}
        vals[pt] = _eval_value(checked, sig, assign)
    return Predicate.build(domain, vals, eps)


def _unfold(pt, n):
    """Flatten a left-nested product point into its n coordinates."""
    if n == 1:
        return [pt]
    return _unfold(pt[0], n - 1) + [pt[1]]
