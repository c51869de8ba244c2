"""Exact executable semantics for continuous [0,1]-valued predicates on
finite pseudometric spaces, and for presheaves of such spaces."""

from .quantale import (
    EXTENDED,
    INF,
    Modulus,
    Quantale,
    QuantaleError,
    UNIT,
    format_rational,
    moduloid_clamp,
    moduloid_contains,
    parse_modulus,
    parse_rational,
    serialize_modulus,
)
from .metric import (
    FiniteMetricSpace,
    MetricError,
    MetricMap,
    check_modulus,
    compose_maps,
    is_regular_mono,
    make_grid,
    pair_maps,
    product,
    projection_map,
    subspace,
    tightest_modulus,
    validate_space,
)
from .subobject import (
    Subobject,
    SubobjectError,
    exists_sub,
    forall_sub,
    heyting_implies,
    pullback_sub,
    r_image_factorization,
    set_pullback_square,
    sub_lattice,
)
from .predicate import (
    IndexedFamily,
    Predicate,
    PredicateError,
    classify,
    continuity_witness,
    distance_predicate,
    envelope,
    is_epsilon_predicate,
    pair_distance_predicate,
    predicate_lattice,
    predicate_pullback,
    restrict_envelope,
    serialize_predicate,
    to_family,
    to_predicate,
    true_predicate_on,
    truth_predicate,
)
from .quantifier import (
    QuantifierError,
    exists_along,
    family_leq,
    forall_proj,
    predicate_leq,
    quantify_direct,
)
from .presheaf import (
    FinCategory,
    MetricPresheaf,
    OmegaElement,
    PresheafError,
    PresheafMap,
    PresheafPredicate,
    PresheafSub,
    classify_presheaf,
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
from .dsl import DslError, Signature, evaluate, free_variables, infer_modulus, parse
from .structures import SchemaError, Structure, load_presheaf, load_structure

__version__ = "0.1.0"
