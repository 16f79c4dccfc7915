"""Truncated Iwasawa algebras over cyclotomic p-adic rings."""

from ._kernels import backend_name
from .characters import FiniteCharacter, FiniteIndexSubgroup, chi_map, descent_ideals, norm_descent, twist
from .errors import (
    CharTooSmall,
    DaggerVanishes,
    DenominatorNotCleared,
    HypothesisFailed,
    InconsistentFlags,
    Indeterminate,
    IntegralityViolation,
    IwalgError,
    NotAUnit,
    NotDivisibleBy12,
    NotOrdinary,
    PrecisionExhausted,
    SearchExhausted,
)
from .euler import (
    GroupRingElement,
    LPolynomial,
    PlaceData,
    TowerConfig,
    c_chi,
    dagger,
    diamond,
    rho,
    rho_unit_check,
    star_factor,
    theta,
    theta_factor,
    unit_root,
    varrho,
    xi_factor,
)
from .harness import (
    ElementaryModule,
    RootLemmaVerdict,
    char_ideal,
    divisibility_by_kernel,
    functional_equation_check,
    monsky_counts,
    monsky_sampler,
    root_lemma_run,
    specialization_shape_check,
)
from .moduli import WeierstrassPair, classify_fibers, construct_semistable, membership
from .prepare import DistinguishedPoly, Preparation, associates, weierstrass_prepare
from .scalar import INFINITY, PRECISION_EXHAUSTED, PadicFraction, PadicScalar, Prime
from .series import (
    IwasawaSeries,
    SeriesRing,
    SubgroupMap,
    agree,
    evaluate_at_character,
    evaluate_integral_part,
    partial_evaluate,
    sharp,
    specialize,
)

__version__ = "0.1.0"
