"""Local data of a semistable elliptic curve and the explicit factor tables.

Galois groups are modelled concretely: Gamma = Z_p^d, an intermediate
extension L' is a surjection M: Gamma -> Gamma' = Z_p^e, and a place v carries
integer vectors for its inertia group, a Frobenius lift and (split
multiplicative places) the image of its Tate period.  Every flag used by the
case tables (Psi_v, Gamma'_v, membership in S', residue-field conditions) is
derived from these vectors, so composing towers is a real check.

Factors are built as ``GroupRingElement``s: finite sums of group elements
with scalar coefficients.  They specialize exactly, evaluate exactly at
characters, and expand to truncated series only at the end.
"""

from dataclasses import dataclass, field
from functools import reduce

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from .errors import DaggerVanishes, InconsistentFlags, NotDivisibleBy12, NotOrdinary
from .scalar import PRECISION_EXHAUSTED, PadicFraction, PadicScalar, is_prime
from .series import binomial_power

REDUCTIONS = ("good-ordinary", "split-mult", "nonsplit-mult")


# ---------------------------------------------------------------- lattices


def _vec(v):
    return tuple(int(x) for x in v)


def _apply(M, v):
    return tuple(sum(M[j][i] * v[i] for i in range(len(v))) for j in range(len(M)))


def _rank(vecs):
    vecs = [v for v in vecs if any(v)]
    return Matrix(vecs).rank() if vecs else 0


def _vp(n, p):
    if n == 0:
        return None
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def _in_span(x, vecs, p):
    """x in the Z_p-span of ``vecs``."""
    vecs = [v for v in vecs if any(v)]
    if not any(x):
        return True
    if not vecs:
        return False
    A = Matrix(vecs).T
    S, U, _ = smith_normal_decomp(A)
    y = U * Matrix(x)
    for i in range(A.rows):
        s = int(S[i, i]) if i < min(S.shape) else 0
        yi = int(y[i])
        if s == 0:
            if yi != 0:
                return False
        elif yi != 0 and _vp(yi, p) < _vp(s, p):
            return False
    return True


def _rank_one_generator(vecs, p):
    """Generator of the Z_p-span of vectors spanning a rank-one lattice."""
    vecs = [v for v in vecs if any(v)]
    base = vecs[0]
    g = reduce(_gcd, base)
    prim = tuple(x // g for x in base)
    k = next(i for i, x in enumerate(prim) if x)
    best = None
    for v in vecs:
        c = v[k] // prim[k]
        e = _vp(c, p)
        best = e if best is None else min(best, e)
    return tuple(x * p**best for x in prim)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


# ---------------------------------------------------------------- group ring


class GroupRingElement:
    """sum_a c_a sigma^a over O_chi, with a in Z^rank."""

    __slots__ = ("rank", "p", "N", "terms")

    def __init__(self, rank, p, N, terms=None):
        self.rank, self.p, self.N = rank, p, N
        out = {}
        for a, c in (terms or {}).items():
            a = _vec(a)
            if len(a) != rank:
                raise ValueError("exponent of wrong length")
            c = _scalar(p, N, c)
            out[a] = out[a] + c if a in out else c
        self.terms = {a: c for a, c in out.items() if not c.is_zero()}

    @classmethod
    def constant(cls, rank, p, N, c):
        return cls(rank, p, N, {(0,) * rank: c})

    @classmethod
    def one(cls, rank, p, N):
        return cls.constant(rank, p, N, 1)

    @classmethod
    def group(cls, rank, p, N, vec, c=1):
        return cls(rank, p, N, {_vec(vec): c})

    def __repr__(self):
        return f"GroupRingElement({self.terms})"

    def is_zero(self):
        return not self.terms

    def _lift(self, other):
        if isinstance(other, GroupRingElement):
            return other
        return GroupRingElement.constant(self.rank, self.p, self.N, other)

    def __add__(self, other):
        other = self._lift(other)
        t = dict(self.terms)
        for a, c in other.terms.items():
            t[a] = t[a] + c if a in t else c
        return GroupRingElement(self.rank, self.p, self.N, t)

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement(self.rank, self.p, self.N, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        t = {}
        for a, c in self.terms.items():
            for b, e in other.terms.items():
                k = tuple(x + y for x, y in zip(a, b))
                t[k] = t[k] + c * e if k in t else c * e
        return GroupRingElement(self.rank, self.p, self.N, t)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, GroupRingElement):
            return NotImplemented
        return self.rank == other.rank and (self - other).is_zero()

    def __hash__(self):
        return hash((self.rank, frozenset(self.terms)))

    def specialize(self, M):
        """Push exponents through the integer matrix M (rows = target coordinates)."""
        M = M.matrix if hasattr(M, "matrix") else M
        out = GroupRingElement(len(M), self.p, self.N)
        for a, c in self.terms.items():
            out = out + GroupRingElement.group(len(M), self.p, self.N, _apply(M, a), c)
        return out

    def evaluate(self, chi):
        """chi(self) in O_chi."""
        out = PadicScalar.from_int(self.p, self.N, 0, chi.level)
        for a, c in self.terms.items():
            s = sum(x * y for x, y in zip(chi.images, a))
            out = out + c * PadicScalar.zeta(self.p, self.N, chi.level, s)
        return out

    def to_series(self, ring, normalize=False):
        """Expansion in ``ring``; ``normalize`` first multiplies by the group
        element making every exponent non-negative (a unit), so the result is
        an exact polynomial generating the same ideal."""
        if ring.d != self.rank:
            raise ValueError("ring and group ring have different ranks")
        if self.is_zero():
            return ring.zero()
        shift = [0] * self.rank
        if normalize:
            shift = [-min(a[i] for a in self.terms) for i in range(self.rank)]
        lvl = max([ring.level] + [c.level for c in self.terms.values()])
        ring = ring.with_level(lvl)
        out = ring.zero()
        for a, c in sorted(self.terms.items()):
            b = [x + s for x, s in zip(a, shift)]
            out = out + ring.group_element(b).scale(c)
        return out


def _scalar(p, N, c):
    if isinstance(c, PadicScalar):
        return c
    return PadicScalar.from_int(p, N, int(c))


# ---------------------------------------------------------------- places


@dataclass(frozen=True)
class PlaceData:
    """One place of K: reduction type and its group-theoretic footprint in Gamma."""

    id: str
    q: int
    reduction: str
    frobenius: tuple
    a: int | None = None
    m: int = 1
    inertia: tuple = ()
    tate_period: tuple | None = None
    sigma: tuple | None = None
    in_S: bool | None = None

    def __post_init__(self):
        if self.reduction not in REDUCTIONS:
            raise ValueError(f"unknown reduction type {self.reduction!r}")
        if self.m < 1:
            raise ValueError("m_v must be positive")
        if self.reduction == "good-ordinary" and self.a is None:
            raise ValueError("good ordinary place needs a_v")
        object.__setattr__(self, "frobenius", _vec(self.frobenius))
        object.__setattr__(self, "inertia", tuple(_vec(v) for v in self.inertia))
        if self.tate_period is not None:
            object.__setattr__(self, "tate_period", _vec(self.tate_period))
        if self.sigma is not None:
            object.__setattr__(self, "sigma", _vec(self.sigma))
        for v in self.inertia + ((self.tate_period,) if self.tate_period else ()):
            if len(v) != len(self.frobenius):
                raise ValueError("place vectors have inconsistent lengths")
        derived = _rank(self.inertia) > 0
        if self.in_S is not None and self.in_S != derived:
            raise InconsistentFlags(f"place {self.id}: in_S={self.in_S} but inertia says {derived}")

    @property
    def d(self):
        return len(self.frobenius)

    @property
    def lam(self):
        if self.reduction == "split-mult":
            return 1
        if self.reduction == "nonsplit-mult":
            return -1
        raise ValueError("lambda_v is only defined at multiplicative places")

    @property
    def ramified(self):
        return _rank(self.inertia) > 0

    def decomposition(self):
        return [v for v in self.inertia + (self.frobenius,) if any(v)]

    def pushforward(self, M):
        """The same place seen in the quotient Gamma -> Gamma' given by M."""
        M = M.matrix if hasattr(M, "matrix") else M
        return PlaceData(
            self.id,
            self.q,
            self.reduction,
            _apply(M, self.frobenius),
            self.a,
            self.m,
            tuple(_apply(M, v) for v in self.inertia),
            _apply(M, self.tate_period) if self.tate_period else None,
            _apply(M, self.sigma) if self.sigma else None,
        )

    def to_json(self):
        out = {"id": self.id, "q": self.q, "reduction": self.reduction, "frobenius": list(self.frobenius), "m": self.m}
        if self.a is not None:
            out["a"] = self.a
        if self.inertia:
            out["inertia"] = [list(v) for v in self.inertia]
        if self.tate_period is not None:
            out["tate_period"] = list(self.tate_period)
        if self.sigma is not None:
            out["sigma"] = list(self.sigma)
        return out

    @classmethod
    def from_json(cls, obj):
        return cls(
            obj["id"],
            obj["q"],
            obj["reduction"],
            obj["frobenius"],
            obj.get("a"),
            obj.get("m", 1),
            tuple(obj.get("inertia", ())),
            obj.get("tate_period"),
            obj.get("sigma"),
            obj.get("in_S"),
        )


@dataclass(frozen=True)
class TowerConfig:
    """Gamma = Z_p^d with t_{unramified} the constant-field direction Gamma_0."""

    p: int
    d: int
    unramified: int = 0
    torsion_order: int = 1
    maps: tuple = field(default=())

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if not 0 <= self.unramified < self.d:
            raise ValueError("unramified direction out of range")

    def check(self, places):
        """Standing hypotheses: Gamma_0 is unramified everywhere and Frobenius moves along it."""
        for v in places:
            if v.d != self.d:
                raise InconsistentFlags(f"place {v.id} lives in rank {v.d}, tower has rank {self.d}")
            if any(w[self.unramified] for w in v.inertia):
                raise InconsistentFlags(f"place {v.id} ramifies in the unramified direction")
            if not v.frobenius[self.unramified]:
                raise InconsistentFlags(f"Frobenius at {v.id} is trivial on the unramified direction")
        return True

    def frobenius_degree(self, v):
        """k with [v] restricted to Gamma_0 equal to F_q^k."""
        return v.frobenius[self.unramified]

    def to_gamma0(self):
        return [[int(i == self.unramified) for i in range(self.d)]]

    def to_json(self):
        return {"p": self.p, "d": self.d, "unramified": self.unramified, "torsion_order": self.torsion_order}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["p"], obj["d"], obj.get("unramified", 0), obj.get("torsion_order", 1))


@dataclass(frozen=True)
class LPolynomial:
    """P(T) = sum coeffs[k] T^k over O_chi with P(0) = 1."""

    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs or not (self.coeffs[0] == 1):
            raise ValueError("an L-polynomial has constant term 1")

    def __call__(self, x):
        out = x * 0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def to_json(self):
        return {"coeffs": [c.to_json() for c in self.coeffs]}


# ---------------------------------------------------------------- unit root


def _prime_of(q):
    for p in range(2, q + 1):
        if q % p == 0:
            return p
    raise ValueError("q must be at least 2")


def unit_root(v, N=16):
    """The root of X^2 - a_v X + q_v congruent to a_v mod p, to precision p^N."""
    if v.reduction != "good-ordinary":
        raise NotOrdinary(f"place {v.id} is not good ordinary")
    p = _prime_of(v.q)
    if p**_vp(v.q, p) != v.q:
        raise ValueError("q_v must be a power of p")
    if v.a % p == 0:
        raise NotOrdinary(f"a_v = {v.a} is divisible by p = {p}")
    m = p**N
    x = v.a % m
    # Newton; 2x - a_v is a unit at the unit root for every p
    for _ in range(2 * N.bit_length() + 4):
        fx = (x * x - v.a * x + v.q) % m
        if fx == 0:
            break
        x = (x - fx * pow((2 * x - v.a) % m, -1, m)) % m
    return PadicScalar.from_int(p, N, x)


# ---------------------------------------------------------------- varrho and theta


def varrho(tower, e, ring):
    """1 when the target has rank e >= 1, |A_{p^infty}(K)|^2 when e = 0."""
    return ring.one() if e >= 1 else ring.constant(tower.torsion_order**2)


@dataclass(frozen=True)
class _Local:
    rank: int
    psi: int
    image: int
    in_S: bool
    in_S_target: bool
    frob: tuple
    gen: tuple | None
    quad_top: bool
    quad_target: bool
    w: int | None


def _local(v, M, p):
    G = v.decomposition()
    img = [_apply(M, g) for g in G]
    rank, image = _rank(G), _rank(img)
    I = [w for w in v.inertia if any(w)]
    MI = [_apply(M, w) for w in I]
    frob = _apply(M, v.frobenius)
    gen = _rank_one_generator(img, p) if image == 1 else None
    w = None
    if rank == 1 and v.tate_period is not None:
        w = _period_index(v.tate_period, _rank_one_generator(G, p), p, v.id)
    return _Local(
        rank=rank,
        psi=rank - image,
        image=image,
        in_S=_rank(I) > 0,
        in_S_target=_rank(MI) > 0,
        frob=frob,
        gen=gen,
        quad_top=p == 2 and not _in_span(v.frobenius, I, p),
        quad_target=p == 2 and not _in_span(frob, MI, p),
        w=w,
    )


def _period_index(r, g, p, name):
    """p^{v_p(c)} for r = c g in Z_p, or 0 when r = 0."""
    if not any(r):
        return 0
    k = next(i for i, x in enumerate(g) if x)
    if any(x * g[k] != r[k] * y for x, y in zip(r, g)):
        raise InconsistentFlags(f"Tate period of {name} is not in its decomposition group")
    gcd = reduce(_gcd, g)
    prim = [x // gcd for x in g]
    c = r[k] // prim[k]
    e = _vp(c, p) - _vp(gcd, p)
    if e < 0:
        raise InconsistentFlags(f"Tate period of {name} is not in its decomposition group")
    return p**e


def theta_element(v, tower, target, N=16):
    """Generator of the local factor at v for L -> L' (``target`` = M, e x d)."""
    M = target.matrix if hasattr(target, "matrix") else target
    p = tower.p
    e = len(M)
    loc = _local(v, M, p)
    one = GroupRingElement.one(e, p, N)

    def group(vec, c=1):
        return GroupRingElement.group(e, p, N, vec, c)

    if not loc.in_S:
        return one * v.m if loc.psi > 0 else one
    if v.reduction == "good-ordinary":
        if loc.in_S_target:
            return one
        ainv = unit_root(v, N).invert()
        neg = tuple(-x for x in loc.frob)
        return (one - group(loc.frob, ainv)) * (one - group(neg, ainv))
    if v.reduction == "split-mult":
        if loc.psi > 0 and loc.image == 0:
            if loc.rank >= 2:
                return GroupRingElement(e, p, N)
            if loc.w is None:
                raise InconsistentFlags(f"place {v.id} needs its Tate period image")
            return one * loc.w
        if loc.psi > 0 and loc.image == 1:
            return group(loc.gen) - one
        return one
    # non-split multiplicative
    if loc.image == 0 and loc.psi >= 2:
        return one * (2 * v.m)
    if loc.image == 0 and loc.psi == 1:
        return one * (v.m if loc.quad_top else 2 * v.m)
    if loc.psi > 0 and loc.image == 1 and not loc.in_S_target:
        return one + group(loc.frob)
    if loc.psi > 0 and loc.image == 1 and loc.in_S_target and loc.quad_target:
        return one + group(loc.gen)
    return one


def theta(places, tower, target, N=16):
    M = target.matrix if hasattr(target, "matrix") else target
    out = GroupRingElement.one(len(M), tower.p, N)
    for v in places:
        out = out * theta_element(v, tower, M, N)
    return out


def theta_factor(v, tower, target, ring):
    """The local factor at v as a series in ``ring`` (an exact polynomial generator)."""
    return theta_element(v, tower, target, ring.N).to_series(ring, normalize=True)


# ---------------------------------------------------------------- dagger and diamond


def dagger_element(tower, places, N=16):
    """prod_v dagger_v in the group ring of Gamma."""
    p = tower.p
    out = GroupRingElement.one(tower.d, p, N)
    for v in places:
        rank = _rank(v.decomposition())
        one = GroupRingElement.one(tower.d, p, N)
        if not v.ramified:
            if rank == 0:
                out = out * v.m
            continue
        if rank != 1 or v.reduction == "good-ordinary":
            continue
        sigma = v.sigma if v.sigma is not None else _rank_one_generator(v.decomposition(), p)
        quad = p == 2 and not _in_span(v.frobenius, list(v.inertia), p)
        if v.reduction == "split-mult" or quad:
            out = out * (one * v.lam - GroupRingElement.group(tower.d, p, N, sigma))
    return out


def dagger(tower, places, ring):
    return dagger_element(tower, places, ring.N).to_series(ring, normalize=True)


def _chi_at(chi, v):
    """Exponent c with chi([v]) = zeta^c."""
    return sum(x * y for x, y in zip(chi.images, v.frobenius))


def _ramified_for(chi, v, p):
    return any(sum(x * y for x, y in zip(chi.images, w)) % p**chi.level for w in v.inertia) if chi.level else False


def diamond_element(v, chi, tower, N=16):
    """The local term at v in S over Lambda_{Gamma_0} (rank one group ring)."""
    p = tower.p
    one = GroupRingElement.one(1, p, N)
    if _ramified_for(chi, v, p):
        return one
    k = tower.frobenius_degree(v)
    c = _chi_at(chi, v)
    z = PadicScalar.zeta(p, N, chi.level, c)
    zinv = PadicScalar.zeta(p, N, chi.level, -c)
    if v.reduction == "good-ordinary":
        ainv = unit_root(v, N).invert()
        return (one - GroupRingElement.group(1, p, N, (-k,), ainv * zinv)) * (one - GroupRingElement.group(1, p, N, (k,), ainv * z))
    if v.reduction == "split-mult":
        return one - GroupRingElement.group(1, p, N, (-k,), zinv)
    if p != 2:
        return one
    return -one - GroupRingElement.group(1, p, N, (-k,), zinv)


def diamond(v, chi, tower, ring):
    return diamond_element(v, chi, tower, ring.N).to_series(ring)


# ---------------------------------------------------------------- values at characters


def alpha_conductor(places, conductor, N=16):
    """alpha_{D}: prod alpha_v^{ord_v D} (ordinary) * lambda_v^{ord_v D - 1} (multiplicative, in Supp D)."""
    p = None
    out = None
    for v in places:
        k = conductor.get(v.id, 0)
        p = p or _prime_of(v.q)
        if v.reduction == "good-ordinary":
            term = unit_root(v, N) ** k
        elif k > 0:
            term = PadicScalar.from_int(p, N, v.lam ** (k - 1))
        else:
            continue
        out = term if out is None else out * term
    if out is None:
        return None
    return out


def xi_factor(places, omega, support, p, N=16):
    """Xi_{S, omega} over the places outside the conductor support."""
    out = PadicScalar.from_int(p, N, 1, omega.level)
    for v in places:
        if v.id in support:
            continue
        c = _chi_at(omega, v)
        w = PadicScalar.zeta(p, N, omega.level, c)
        winv = PadicScalar.zeta(p, N, omega.level, -c)
        if v.reduction == "good-ordinary":
            ainv = unit_root(v, N).invert()
            out = out * (1 - ainv * w) * (1 - ainv * winv)
        else:
            out = out * (v.lam - winv)
    return out


def star_factor(omega, tower, places, tau, deg_delta, kappa, q, conductor=None, N=16):
    """The interpolation constant for omega, as an element of Q_chi."""
    if deg_delta % 12:
        raise NotDivisibleBy12(f"deg(Delta) = {deg_delta} is not divisible by 12")
    p = tower.p
    conductor = conductor or {}
    dag = dagger_element(tower, places, N).evaluate(omega)
    if dag.valuation() is PRECISION_EXHAUSTED:
        raise DaggerVanishes("omega(dagger) vanishes")
    S = [v for v in places if v.ramified]
    support = {k for k, o in conductor.items() if o > 0}
    out = PadicFraction.of(dag).inverse() * PadicFraction.of(tau)
    aD = alpha_conductor(S, conductor, N)
    if aD is not None:
        out = out * PadicFraction.of(aD).inverse()
    out = out * _q_power(q, deg_delta // 12 + kappa - 1, p, N)
    return out * PadicFraction.of(xi_factor(S, omega, support, p, N))


def _q_power(q, k, p, N):
    f = _vp(q, p)
    if p**f != q:
        raise ValueError("q must be a power of p")
    if k >= 0:
        return PadicFraction(PadicScalar.from_int(p, N, q**k))
    return PadicFraction(PadicScalar.from_int(p, N, 1), -k * f)


# ---------------------------------------------------------------- Gamma_0 series


def c_chi(P, q, ring):
    """P(q^-1 F_q^-1) in Q_chi Lambda_{Gamma_0}, with F_q = 1 + t_0."""
    if ring.d != 1:
        raise ValueError("c_chi lives in one variable")
    p = ring.p
    f = _vp(q, p)
    if f is None or p**f != q:
        raise ValueError("q must be a power of p")
    n = len(P.coeffs) - 1
    # q^n * c_chi = sum_k P_k q^(n-k) F_q^-k
    out = ring.zero()
    for k, c in enumerate(P.coeffs):
        term = binomial_power(ring, 0, -k).scale(c) * q ** (n - k)
        out = out + term
    return out.times_p_power(-n * f)


def rho(v, chi, tower, ring):
    """(1 - lambda_v chi([v])^-1 [v]_{L_0/K} q_v^-1)^sharp, as q_v^-1 (q_v - lambda_v chi([v])^-1 F_q^-k)."""
    p = ring.p
    k = tower.frobenius_degree(v)
    zinv = PadicScalar.zeta(p, ring.N, chi.level, -_chi_at(chi, v))
    f = _vp(v.q, p)
    r = ring.with_level(chi.level)
    inner = r.constant(v.q) - binomial_power(r, 0, -k).scale(zinv * v.lam)
    return inner.times_p_power(-f)


def rho_unit_check(v, chi, tower, ring):
    return rho(v, chi, tower, ring).is_unit(rational=True)


def dagger_chi(chi, tower, places, tau, deg_delta, kappa, q, ring, conductor=None):
    """alpha_{D_chi} tau q^(deg Delta/12 + kappa - 1) F_q^(-2 + 2 kappa + deg D_chi) prod epsilon_v."""
    if deg_delta % 12:
        raise NotDivisibleBy12(f"deg(Delta) = {deg_delta} is not divisible by 12")
    p = ring.p
    conductor = conductor or {}
    S = [v for v in places if v.ramified]
    lvl = max(chi.level, tau.level)
    r = ring.with_level(lvl)
    deg_D = sum(conductor.values())
    out = binomial_power(r, 0, -2 + 2 * kappa + deg_D).scale(tau)
    aD = alpha_conductor(S, conductor, ring.N)
    if aD is not None:
        out = out.scale(aD)
    qk = _q_power(q, deg_delta // 12 + kappa - 1, p, ring.N)
    out = out.scale(qk.num).times_p_power(-qk.k)
    if p != 2:
        for v in S:
            if v.reduction == "nonsplit-mult":
                k = tower.frobenius_degree(v)
                z = PadicScalar.zeta(p, ring.N, chi.level, _chi_at(chi, v))
                eps = -r.one() - binomial_power(r, 0, k).scale(z)
                out = out * eps
    return out


def dagger_chi_is_unit(*args, **kwargs):
    return dagger_chi(*args, **kwargs).is_unit(rational=True)
