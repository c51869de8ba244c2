"""JSON schemas for structure files and presheaf files.

Structure file:

    {
      "mode": "unit-interval" | "extended-nonneg",        # optional
      "spaces": [{"id", "points", "dist": [["0", ...]]}   # rational strings
                 or {"id", "grid": n}],
      "maps": [{"id", "source", "target", "assignment", "modulus"?}],
      "constants": [{"id", "space", "point"}],
      "predicates": [{"id", "space", "values", "modulus"}],
      "families": [{"id", "space", "thresholds", "attained"?}]
    }

Presheaf file:

    {
      "category": {"objects", "morphisms": [{"id","source","target"}],
                   "composition": [[g, f, gf]]},
      "spaces": {object: {"points", "dist"}},
      "restrictions": {morphism: {point: point}},
      "predicates": {name: {object: {point: rational}}}
    }

Rationals serialize as "p/q" or terminating decimals; moduli as ordered
arrays of {breakpoint, intercept, slope} records (or the shorthand
strings understood by parse_modulus).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .dsl import Signature
from .metric import FiniteMetricSpace, MetricMap, make_grid
from .predicate import IndexedFamily, Predicate
from .presheaf import FinCategory, MetricPresheaf, PresheafPredicate
from .quantale import Quantale, parse_modulus, parse_rational


class SchemaError(ValueError):
    pass


@dataclass
class Structure:
    quantale: Quantale
    signature: Signature
    families: dict = field(default_factory=dict)


def load_structure(path=None, data=None, mode=None) -> Structure:
    if data is None:
        with open(path) as fh:
            data = json.load(fh)
    q = Quantale(mode or data.get("mode", "unit-interval"))
    sig = Signature()
    for rec in data.get("spaces", []):
        sid = rec["id"]
        if "grid" in rec:
            space = make_grid(int(rec["grid"]), q)
            # keep the declared id for lookups, points stay Fractions
            space = FiniteMetricSpace(sid, space.points, space.dist_matrix, q)
        else:
            points = [str(p) for p in rec["points"]]
            dist = [[parse_rational(v) for v in row] for row in rec["dist"]]
            space = FiniteMetricSpace.build(sid, points, dist, q)
        if sid in sig.spaces:
            raise SchemaError(f"duplicate space id {sid!r}")
        sig.spaces[sid] = space
    for rec in data.get("maps", []):
        source = _space(sig, rec["source"])
        target = _space(sig, rec["target"])
        assignment = {
            _point(source, k): _point(target, v)
            for k, v in rec["assignment"].items()
        }
        modulus = None
        if "modulus" in rec:
            modulus = parse_modulus(rec["modulus"], q.top)
        sig.maps[rec["id"]] = MetricMap.build(source, target, assignment, modulus)
    for rec in data.get("constants", []):
        space = _space(sig, rec["space"])
        sig.points[rec["id"]] = (rec["space"], _point(space, rec["point"]))
    for rec in data.get("predicates", []):
        space = _space(sig, rec["space"])
        values = {_point(space, k): parse_rational(v) for k, v in rec["values"].items()}
        modulus = parse_modulus(rec["modulus"], q.top)
        sig.predicates[rec["id"]] = Predicate.build(space, values, modulus)
    families = {}
    for rec in data.get("families", []):
        space = _space(sig, rec["space"])
        thresholds = {
            _point(space, k): parse_rational(v) for k, v in rec["thresholds"].items()
        }
        attained = None
        if "attained" in rec:
            attained = {_point(space, k): v for k, v in rec["attained"].items()}
        families[rec["id"]] = IndexedFamily.build(space, thresholds, attained)
    return Structure(q, sig, families)


def _space(sig, name):
    if name not in sig.spaces:
        raise SchemaError(f"unknown space {name!r}")
    return sig.spaces[name]


def _point(space, label):
    for p in space.points:
        if p == label or str(p) == str(label):
            return p
    raise SchemaError(f"unknown point {label!r} in space {space.id!r}")


def load_presheaf(path=None, data=None, mode=None):
    if data is None:
        with open(path) as fh:
            data = json.load(fh)
    q = Quantale(mode or data.get("mode", "unit-interval"))
    cdata = data["category"]
    cat = FinCategory.build(
        [str(o) for o in cdata["objects"]],
        [(m["id"], m["source"], m["target"]) for m in cdata["morphisms"]],
        {(g, f): gf for g, f, gf in cdata.get("composition", [])},
        _identities(cdata),
    )
    spaces = {}
    for obj, rec in data["spaces"].items():
        points = [str(p) for p in rec["points"]]
        dist = [[parse_rational(v) for v in row] for row in rec["dist"]]
        spaces[obj] = FiniteMetricSpace.build(f"F({obj})", points, dist, q)
    restrictions = {
        mid: {str(k): str(v) for k, v in table.items()}
        for mid, table in data["restrictions"].items()
    }
    F = MetricPresheaf.build(cat, spaces, restrictions)
    predicates = {}
    for name, table in data.get("predicates", {}).items():
        values = {
            obj: {str(p): parse_rational(v) for p, v in vals.items()}
            for obj, vals in table.items()
        }
        predicates[name] = PresheafPredicate.build(F, values)
    return F, predicates


def _identities(cdata):
    if "identities" in cdata:
        return dict(cdata["identities"])
    # infer: a morphism a -> a named "1_a" or "id_a", else error
    out = {}
    for obj in cdata["objects"]:
        for m in cdata["morphisms"]:
            if m["source"] == obj == m["target"] and m["id"] in (
                f"1_{obj}",
                f"id_{obj}",
            ):
                out[obj] = m["id"]
    missing = [o for o in cdata["objects"] if o not in out]
    if missing:
        raise SchemaError(f"cannot infer identities for objects {missing}")
    return out
