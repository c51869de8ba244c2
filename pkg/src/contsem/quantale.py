"""Exact truth-value arithmetic and the algebra of moduli of continuity.

Truth values live in one of two quantales: the unit interval [0, 1] with
truncated addition, or the extended nonnegative reals [0, inf] with plain
addition.  0 is "true", the top of the carrier is "false", and "truer"
means smaller.  All arithmetic is exact rational; there is no floating
point anywhere in this package.

Moduli of continuity are represented as monotone, right-continuous,
piecewise-affine self-maps of the carrier fixing 0.  This class is closed
under composition, pointwise max, and truncated addition, and contains the
tightest modulus of any map between finite spaces (a right-continuous step
function), so nothing is lost by restricting to it.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering


@total_ordering
class _Infinity:
    """The top of the extended-nonneg carrier; compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("contsem-inf")

    def __repr__(self):
        return "INF"


INF = _Infinity()

ZERO = Fraction(0)
ONE = Fraction(1)

#: A truth value: an exact rational, or INF in extended-nonneg mode.
Value = "Fraction | _Infinity"


def parse_rational(text):
    """Parse "p/q" or a terminating decimal (or "inf") into a value."""
    text = text.strip()
    if text in ("inf", "INF", "Infinity"):
        return INF
    return Fraction(text)


def format_rational(v) -> str:
    if v is INF:
        return "inf"
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


class QuantaleError(ValueError):
    pass


@dataclass(frozen=True)
class Quantale:
    """Carrier configuration: unit-interval (default) or extended-nonneg."""

    mode: str = "unit-interval"

    def __post_init__(self):
        if self.mode not in ("unit-interval", "extended-nonneg"):
            raise QuantaleError(f"unknown quantale mode: {self.mode!r}")

    @property
    def top(self):
        return ONE if self.mode == "unit-interval" else INF

    def contains(self, v) -> bool:
        if v is INF:
            return self.mode == "extended-nonneg"
        return isinstance(v, Fraction) and ZERO <= v and (
            self.mode == "extended-nonneg" or v <= ONE
        )

    def check(self, v):
        if not self.contains(v):
            raise QuantaleError(f"{v!r} is not in the carrier of {self.mode}")
        return v

    def tensor(self, a, b):
        """Truncated sum (unit-interval) or sum with absorbing top."""
        if a is INF or b is INF:
            return self.check(INF)
        s = a + b
        if self.mode == "unit-interval" and s > ONE:
            return ONE
        return s


UNIT = Quantale("unit-interval")
EXTENDED = Quantale("extended-nonneg")


def _v_add(a, b, top):
    """Sum truncated at `top` (top may be INF)."""
    if a is INF or b is INF:
        return INF
    s = a + b
    if top is not INF and s > top:
        return top
    return s


def _v_min(a, b):
    if a is INF:
        return b
    if b is INF:
        return a
    return min(a, b)


def _v_max(a, b):
    if a is INF or b is INF:
        return INF
    return max(a, b)


def _v_leq(a, b):
    if b is INF:
        return True
    if a is INF:
        return False
    return a <= b


@dataclass(frozen=True)
class Modulus:
    """A modulus of uniform continuity on [0, top].

    `pieces` is an ordered tuple of (breakpoint, value, slope); each piece
    governs the half-open interval from its breakpoint to the next (the
    last piece extends to the end of the carrier, inclusive).  The value
    stored is the value *at* the breakpoint, so right-continuity is built
    into the representation; upward jumps between pieces are allowed.
    """

    pieces: tuple
    top: object = ONE

    # -- construction -------------------------------------------------

    @staticmethod
    def from_pieces(pieces, top=ONE) -> "Modulus":
        """Validate, truncate at `top`, and merge collinear pieces."""
        if not pieces:
            raise QuantaleError("a modulus needs at least one piece")
        pieces = [
            (Fraction(b), v if v is INF else Fraction(v), Fraction(m))
            for (b, v, m) in pieces
        ]
        if pieces[0][0] != 0 or pieces[0][1] != 0:
            raise QuantaleError("a modulus must fix 0 (first piece (0, 0, m))")
        prev_b = None
        for b, v, m in pieces:
            if prev_b is not None and b <= prev_b:
                raise QuantaleError("breakpoints must be strictly increasing")
            if m < 0:
                raise QuantaleError("slopes must be nonnegative")
            if v is INF and (top is not INF or m != 0):
                raise QuantaleError("INF values need extended mode and slope 0")
            prev_b = b
        if top is not INF:
            pieces = [p for p in pieces if p[0] <= top]
        # monotonicity across joints: no downward jumps
        for (b1, v1, m1), (b2, v2, m2) in zip(pieces, pieces[1:]):
            left = v1 if v1 is INF else v1 + m1 * (b2 - b1)
            if not _v_leq(left, v2):
                raise QuantaleError(f"not monotone at breakpoint {b2}")
        pieces = _truncate(pieces, top)
        return Modulus(tuple(_merge(pieces)), top)

    @staticmethod
    def identity(top=ONE) -> "Modulus":
        return Modulus(((ZERO, ZERO, ONE),), top)

    @staticmethod
    def zero(top=ONE) -> "Modulus":
        return Modulus(((ZERO, ZERO, ZERO),), top)

    @staticmethod
    def linear(k, top=ONE) -> "Modulus":
        """The modulus r -> min(k*r, top)."""
        k = Fraction(k)
        if k < 0:
            raise QuantaleError("linear modulus needs k >= 0")
        return Modulus.from_pieces([(ZERO, ZERO, k)], top)

    @staticmethod
    def step(jumps, top=ONE) -> "Modulus":
        """Right-continuous step function: value jumps[i][1] on [jumps[i][0], next).

        `jumps` need not start at 0; a leading zero segment is implied.
        """
        pieces = []
        if not jumps or Fraction(jumps[0][0]) != 0:
            pieces.append((ZERO, ZERO, ZERO))
        for b, v in jumps:
            pieces.append((Fraction(b), v if v is INF else Fraction(v), ZERO))
        return Modulus.from_pieces(pieces, top)

    # -- evaluation ---------------------------------------------------

    def _piece_at(self, r):
        idx = bisect_right([b for b, _, _ in self.pieces], r) - 1
        return self.pieces[max(idx, 0)]

    def __call__(self, r):
        """Evaluate at a carrier point (INF allowed in extended mode)."""
        if r is INF:
            b, v, m = self.pieces[-1]
            return INF if (v is INF or m > 0) else v
        b, v, m = self._piece_at(r)
        if v is INF:
            return INF
        out = v + m * (r - b)
        if self.top is not INF and out > self.top:
            return self.top
        return out

    def _left_limit(self, r):
        """sup of values on [0, r); r must exceed 0."""
        idx = bisect_right([b for b, _, _ in self.pieces], r) - 1
        b, v, m = self.pieces[idx]
        if b == r and idx > 0:
            b, v, m = self.pieces[idx - 1]
        if v is INF:
            return INF
        out = v + m * (r - b)
        if self.top is not INF and out > self.top:
            return self.top
        return out

    # -- algebra ------------------------------------------------------

    def compose(self, inner: "Modulus") -> "Modulus":
        """self after inner, in canonical piecewise form."""
        _same_top(self, inner)
        bps = {b for b, _, _ in inner.pieces}
        for ob, _, _ in self.pieces:
            for i, (b, v, m) in enumerate(inner.pieces):
                if v is INF or m == 0:
                    continue
                r = b + (ob - v) / m
                if r < b:
                    continue
                end = inner.pieces[i + 1][0] if i + 1 < len(inner.pieces) else None
                if end is not None and r >= end:
                    continue
                if self.top is INF or r <= self.top:
                    bps.add(r)
        pieces = []
        for p in sorted(bps):
            inner_val = inner(p)
            val = self(inner_val)
            if inner_val is INF or val is INF:
                slope = ZERO if val is not INF else ZERO
                pieces.append((p, val, ZERO))
                continue
            _, _, m_in = inner._piece_at(p)
            _, ov, m_out = self._piece_at(inner_val)
            slope = ZERO if ov is INF else m_out * m_in
            pieces.append((p, val, slope))
        return Modulus.from_pieces(pieces, self.top)

    def combine_max(self, other: "Modulus") -> "Modulus":
        _same_top(self, other)
        bps = _joint_breakpoints(self, other, crossings=True)
        pieces = []
        for p in bps:
            v1, v2 = self(p), other(p)
            m1 = self._slope_from(p)
            m2 = other._slope_from(p)
            if v1 is INF or v2 is INF:
                pieces.append((p, INF, ZERO))
            elif v1 > v2:
                pieces.append((p, v1, m1))
            elif v2 > v1:
                pieces.append((p, v2, m2))
            else:
                pieces.append((p, v1, max(m1, m2)))
        return Modulus.from_pieces(pieces, self.top)

    def combine_add(self, other: "Modulus") -> "Modulus":
        """Pointwise tensor: sum truncated at top."""
        _same_top(self, other)
        bps = _joint_breakpoints(self, other, crossings=False)
        pieces = []
        for p in bps:
            v1, v2 = self(p), other(p)
            if v1 is INF or v2 is INF:
                pieces.append((p, INF, ZERO))
            else:
                pieces.append((p, v1 + v2, self._slope_from(p) + other._slope_from(p)))
        return Modulus.from_pieces(pieces, self.top)

    def _slope_from(self, r):
        b, v, m = self._piece_at(r)
        return ZERO if v is INF else m

    def leq(self, other: "Modulus") -> bool:
        """self(r) <= other(r) for every carrier r (exact, piecewise)."""
        _same_top(self, other)
        bps = _joint_breakpoints(self, other, crossings=False)
        for i, p in enumerate(bps):
            if not _v_leq(self(p), other(p)):
                return False
            if i + 1 < len(bps):
                q = bps[i + 1]
                if not _v_leq(self._left_limit(q), other._left_limit(q)):
                    return False
            else:
                # last interval: compare slopes past the final breakpoint
                if self.top is INF:
                    if self._slope_from(p) > other._slope_from(p) and other(p) is not INF:
                        return False
                elif not _v_leq(self._left_limit(self.top), other._left_limit(self.top)):
                    return False
                if not _v_leq(self(self.top), other(self.top)):
                    return False
        return True

    def is_identity(self) -> bool:
        return self == Modulus.identity(self.top)

    def linear_constant(self):
        """The K with self = r -> min(Kr, top), or None if not of that shape."""
        k = self.pieces[0][2]
        if self == Modulus.linear(k, self.top):
            return k
        return None


def _same_top(a: Modulus, b: Modulus):
    if a.top != b.top:
        raise QuantaleError("moduli live over different carriers")


def _joint_breakpoints(a: Modulus, b: Modulus, crossings: bool):
    bps = {p for p, _, _ in a.pieces} | {p for p, _, _ in b.pieces}
    if crossings:
        for p in sorted(bps):
            nxt = min((q for q in bps if q > p), default=None)
            v1, v2 = a(p), b(p)
            if v1 is INF or v2 is INF:
                continue
            m1, m2 = a._slope_from(p), b._slope_from(p)
            if m1 == m2:
                continue
            r = p + (v2 - v1) / (m1 - m2)
            if r > p and (nxt is None or r < nxt) and (a.top is INF or r <= a.top):
                bps.add(r)
    return sorted(bps)


def _truncate(pieces, top):
    """Clamp values at `top`, splitting pieces that cross it."""
    if top is INF:
        return pieces
    out = []
    clamped = False
    for i, (b, v, m) in enumerate(pieces):
        if clamped:
            break
        if v >= top:
            out.append((b, top, ZERO))
            clamped = True
            continue
        end = pieces[i + 1][0] if i + 1 < len(pieces) else top
        if m > 0 and v + m * (end - b) > top:
            cross = b + (top - v) / m
            out.append((b, v, m))
            if cross <= top:
                out.append((cross, top, ZERO))
                clamped = True
        else:
            out.append((b, v, m))
    return out


def _merge(pieces):
    out = [pieces[0]]
    for b, v, m in pieces[1:]:
        pb, pv, pm = out[-1]
        cont = pv if pv is INF else pv + pm * (b - pb)
        if v == cont and m == pm:
            continue
        out.append((b, v, m))
    return out


# -- moduloids --------------------------------------------------------

E1 = "E1"
EL = "EL"
EU = "EuPL"

MODULOIDS = (E1, EL, EU)


def moduloid_contains(kind: str, eps: Modulus) -> bool:
    """Membership in the trivial, Lipschitz, or unrestricted moduloid."""
    if kind == E1:
        return eps.is_identity()
    if kind == EL:
        k = eps.linear_constant()
        return k is not None and k >= 1
    if kind == EU:
        return True
    raise QuantaleError(f"unknown moduloid: {kind!r}")


def moduloid_clamp(kind: str, eps: Modulus) -> Modulus:
    """Least member of the moduloid that dominates `eps` (identity for E1/EL
    when eps is below it; otherwise the least linear dominator for EL)."""
    if kind == EU or moduloid_contains(kind, eps):
        return eps
    ident = Modulus.identity(eps.top)
    if kind == E1:
        if not eps.leq(ident):
            raise QuantaleError("modulus exceeds the only member of E1")
        return ident
    # EL: smallest K >= 1 with eps <= linear(K); K is the max of v/b over
    # piece corners (slopes give the needed K inside pieces)
    k = ONE
    for i, (b, v, m) in enumerate(eps.pieces):
        if v is INF:
            raise QuantaleError("no linear modulus dominates an INF step")
        if b > 0:
            k = max(k, v / b)
        end = eps.pieces[i + 1][0] if i + 1 < len(eps.pieces) else eps.top
        if end is INF:
            k = max(k, m)
        else:
            left = v + m * (end - b)
            if end > 0:
                k = max(k, left / end)
    cand = Modulus.linear(k, eps.top)
    if not eps.leq(cand):
        raise QuantaleError("no linear modulus dominates this modulus")
    return cand


def serialize_modulus(eps: Modulus) -> list:
    return [
        {
            "breakpoint": format_rational(b),
            "intercept": format_rational(v),
            "slope": format_rational(m),
        }
        for b, v, m in eps.pieces
    ]


def parse_modulus(data, top=ONE) -> Modulus:
    """Parse a modulus from the JSON record list, or from a shorthand string.

    Shorthands: "id", "zero", "linear:K", "step:b1=v1,b2=v2,...".
    """
    if isinstance(data, str):
        text = data.strip()
        if text == "id":
            return Modulus.identity(top)
        if text == "zero":
            return Modulus.zero(top)
        if text.startswith("linear:"):
            return Modulus.linear(parse_rational(text[len("linear:"):]), top)
        if text.startswith("step:"):
            jumps = []
            for part in text[len("step:"):].split(","):
                b, v = part.split("=")
                jumps.append((parse_rational(b), parse_rational(v)))
            return Modulus.step(jumps, top)
        raise QuantaleError(f"unknown modulus shorthand: {text!r}")
    pieces = [
        (
            parse_rational(rec["breakpoint"]),
            parse_rational(rec["intercept"]),
            parse_rational(rec["slope"]),
        )
        for rec in data
    ]
    return Modulus.from_pieces(pieces, top)
