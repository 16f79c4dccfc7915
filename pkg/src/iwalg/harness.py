"""Scenario engine: elementary modules, the two-variable root check, value
counts at characters, and shape checks for the specialization identity.

Nothing here proves anything about Selmer groups.  Each check verifies an
identity between explicitly supplied or constructed series, so a failure
means the scenario data is inconsistent (or the library is wrong).
"""

from dataclasses import dataclass, field
from fractions import Fraction

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .characters import FiniteCharacter
from .errors import Indeterminate, PrecisionExhausted
from .euler import theta, varrho
from .prepare import associates, axis_restriction
from .scalar import INFINITY, PRECISION_EXHAUSTED, PadicScalar, totient_pp
from .series import SubgroupMap, evaluate_integral_part, partial_evaluate, sharp, specialize

DEFAULT_ZETA_LEVELS = (1, 2, 3)


@dataclass(frozen=True)
class ElementaryModule:
    """Lambda/(f_1^n_1) + ... + Lambda/(p^m_1) + ...; ``non_torsion`` adds a free summand."""

    factors: tuple = ()
    p_part: tuple = ()
    non_torsion: bool = False

    def __post_init__(self):
        for f, n in self.factors:
            if n < 1:
                raise ValueError("multiplicities must be positive")
            if f.literal_zero or f.is_zero():
                raise ValueError("elementary factors must be nonzero")
            if f.is_unit():
                raise ValueError("elementary factors must be non-units")
        if any(m < 1 for m in self.p_part):
            raise ValueError("p-part exponents must be positive")

    def direct_sum(self, other):
        return ElementaryModule(self.factors + other.factors, self.p_part + other.p_part, self.non_torsion or other.non_torsion)


def char_ideal(M, ring):
    """Generator of the characteristic ideal of M in ``ring``."""
    if M.non_torsion:
        return ring.zero()
    out = ring.one().times_p_power(sum(M.p_part))
    for f, n in M.factors:
        out = out * f**n
    return out


def functional_equation_check(f):
    """Whether (f) is stable under the involution sigma -> sigma^-1."""
    return associates(f, sharp(f))


def specialization_shape_check(M, Mp, tower, places, target):
    """varrho * specialize(CH(M)) and theta * CH(M') generate the same ideal."""
    m = target if isinstance(target, SubgroupMap) else SubgroupMap(target)
    ring = _ring_of(M)
    sub = ring.with_vars(m.target_dim)
    lhs = specialize(char_ideal(M, ring), m) * varrho(tower, m.target_dim, sub)
    th = theta(places, tower, m.matrix, ring.N).to_series(sub, normalize=True)
    rhs = th * char_ideal(Mp, sub)
    return associates(lhs, rhs)


def _ring_of(M):
    if not M.factors:
        raise ValueError("module has no series factor to fix the ring; pass one explicitly")
    return M.factors[0][0].ring


# ---------------------------------------------------------------- root lemma


@dataclass(frozen=True)
class RootLemmaVerdict:
    hypothesis_ok: bool
    mu: dict
    per_zeta: dict = field(default_factory=dict)
    associates: bool | None = None

    @property
    def conclusion(self):
        if self.associates is None:
            return "indeterminate"
        return "associates" if self.associates else "not-associates"

    @property
    def lemma_applies(self):
        return self.hypothesis_ok and all(self.per_zeta.values())

    def to_json(self):
        return {
            "hypothesis_ok": self.hypothesis_ok,
            "mu": {k: _fmt(v) for k, v in self.mu.items()},
            "per_zeta": [{"level": k, "power": j, "associates": r} for (k, j), r in sorted(self.per_zeta.items())],
            "all_zeta_associates": all(self.per_zeta.values()),
            "associates": self.associates,
            "conclusion": self.conclusion,
        }


def _fmt(v):
    if v is INFINITY:
        return "inf"
    if v is PRECISION_EXHAUSTED:
        return "exhausted"
    return str(v)


def _mu_certified(v):
    if v is PRECISION_EXHAUSTED:
        raise PrecisionExhausted("mu is not certified at this precision")
    return v


def root_lemma_run(f, g, levels=DEFAULT_ZETA_LEVELS, conjugates=True):
    """Compare (f(t_0, zeta - 1)) and (g(t_0, zeta - 1)) for zeta of the given levels.

    With ``conjugates`` every primitive zeta of each level is tried, otherwise
    only zeta_{p^k} itself.
    """
    if f.d != 2 or g.d != 2:
        raise ValueError("root_lemma_run needs two-variable series")
    p = f.ring.p
    mu = {
        "f": _mu_certified(f.mu()),
        "f_axis": _mu_certified(axis_restriction(f, 0).mu()),
        "g": _mu_certified(g.mu()),
        "g_axis": _mu_certified(axis_restriction(g, 0).mu()),
    }
    ok = len(set(mu.values())) == 1
    per = {}
    for k in levels:
        powers = [j for j in range(1, p**k) if j % p] if conjugates else [1]
        for j in powers:
            z = PadicScalar.zeta(p, f.ring.N, k, j) - 1
            per[(k, j)] = associates(partial_evaluate(f, 1, z), partial_evaluate(g, 1, z))
    try:
        both = associates(f, g)
    except Indeterminate:
        both = None
    return RootLemmaVerdict(ok, mu, per, both)


# ---------------------------------------------------------------- values at characters


def _characters_of_level(p, k):
    if k == 0:
        return [FiniteCharacter(0, (0,))]
    return [FiniteCharacter(k, (c,)) for c in range(1, p**k) if c % p]


def _reaches(v, threshold):
    return v is PRECISION_EXHAUSTED or v >= threshold


def monsky_counts(f, max_level, threshold):
    """Cumulative counts of characters of level <= k with ord omega(f) >= threshold, k = 0..max_level."""
    if f.d != 1:
        raise ValueError("the sampler works in one variable")
    mu = f.mu()
    if mu is PRECISION_EXHAUSTED or mu != 0:
        raise ValueError("the sampler needs a certified mu = 0")
    threshold = Fraction(threshold)
    out, total = [], 0
    for k in range(max_level + 1):
        for chi in _characters_of_level(f.ring.p, k):
            value, e = evaluate_integral_part(f, chi)
            v = value.valuation()
            if v is not PRECISION_EXHAUSTED:
                v -= e
            elif Fraction(value.N) - e < threshold:
                raise PrecisionExhausted(f"level {k} value is not resolved below the threshold")
            total += _reaches(v, threshold)
        out.append(total)
    return out


def monsky_sampler(f, max_level, threshold):
    """Number of characters omega of level <= max_level with ord_p omega(f) >= threshold."""
    return monsky_counts(f, max_level, threshold)[-1]


def level_precision(p, k):
    """Valuation of zeta_{p^k} - 1."""
    return Fraction(1, totient_pp(p, k)) if k else INFINITY


# ---------------------------------------------------------------- kernels


def kernel_quotient(a):
    """SubgroupMap Gamma -> Gamma / <a> for a primitive exponent vector a."""
    a = [int(x) for x in a]
    d = len(a)
    if d < 2:
        raise ValueError("need at least two variables")
    S, U, _ = smith_normal_decomp(Matrix([a]).T)
    if abs(int(S[0, 0])) != 1:
        raise ValueError(f"exponent vector {a} is not primitive")
    # U a = +-e_0, so the remaining rows of U cut out Gamma / <a>
    return SubgroupMap([[int(x) for x in U.row(i)] for i in range(1, d)])


def divisibility_by_kernel(f, forms):
    """Whether f vanishes on every quotient Gamma / <a>, i.e. is divisible by sigma^a - 1."""
    if f.literal_zero or f.is_zero():
        return True
    for a in forms:
        if not specialize(f, kernel_quotient(a), check=False).is_zero():
            return False
    return True
