"""Weierstrass data y^2 = 4x^3 - g2 x - g3 over P^1_{F_q} with its fibers.

g2 and g3 are sections of O(4n) and O(6n): polynomials of degree at most 4n
and 6n, with orders at infinity read off from the degree deficit.  Closed
points are monic irreducible polynomials plus the symbol ``"inf"``.
"""

import random
from dataclasses import dataclass
from functools import lru_cache

import galois

from .errors import CharTooSmall, SearchExhausted
from .scalar import INFINITY

INF = "inf"
DEFAULT_RETRIES = 10_000


@lru_cache(maxsize=None)
def field(q):
    primes, _ = galois.factors(q)
    if q < 2 or len(primes) != 1:
        raise ValueError(f"{q} is not a prime power")
    char = primes[0]
    if char <= 3:
        raise CharTooSmall(f"characteristic {char} is at most 3")
    return galois.GF(q, compile="python-calculate")


def _poly(coeffs, F):
    """Poly from a constant-first coefficient list."""
    return galois.Poly(list(reversed([int(c) for c in coeffs])) or [0], field=F)


def _coeffs(f):
    if f == 0:
        return []
    return [int(c) for c in reversed(f.coeffs)]


@dataclass(frozen=True)
class WeierstrassPair:
    q: int
    n: int
    g2: tuple
    g3: tuple

    def __post_init__(self):
        F = field(self.q)
        object.__setattr__(self, "g2", tuple(_coeffs(_poly(self.g2, F))))
        object.__setattr__(self, "g3", tuple(_coeffs(_poly(self.g3, F))))
        if self.n < 0:
            raise ValueError("twist degree must be non-negative")
        if len(self.g2) - 1 > 4 * self.n or len(self.g3) - 1 > 6 * self.n:
            raise ValueError("g2, g3 exceed degrees 4n, 6n")

    @property
    def F(self):
        return field(self.q)

    @property
    def p(self):
        return self.F.characteristic

    def polys(self):
        F = self.F
        g2, g3 = _poly(self.g2, F), _poly(self.g3, F)
        delta = (g2**3 - g3**2) * (F(1) / F(1728 % F.characteristic))
        return g2, g3, delta

    def discriminant(self):
        return tuple(_coeffs(self.polys()[2]))

    def normalized(self):
        """Canonical representative of the orbit (u^4 g2, u^6 g3), u in F_q^*."""
        F = self.F
        g2, g3 = _poly(self.g2, F), _poly(self.g3, F)
        best = None
        for u in F.elements[1:]:
            cand = (tuple(_coeffs(g2 * u**4)), tuple(_coeffs(g3 * u**6)))
            best = cand if best is None or cand < best else best
        return WeierstrassPair(self.q, self.n, *best)

    def to_json(self):
        return {"q": self.q, "n": self.n, "g2": [str(c) for c in self.g2], "g3": [str(c) for c in self.g3]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["q"], obj["n"], tuple(int(c) for c in obj["g2"]), tuple(int(c) for c in obj["g3"]))


@dataclass(frozen=True)
class Fiber:
    point: object
    degree: int
    ord_g2: object
    ord_g3: object
    ord_delta: object
    kind: str
    member: bool

    @property
    def at_infinity(self):
        # points are galois Polys, which refuse comparison with strings
        return isinstance(self.point, str)

    def to_json(self):
        pt = INF if self.at_infinity else [str(c) for c in _coeffs(self.point)]
        return {
            "point": pt,
            "degree": self.degree,
            "ord_g2": _ord_json(self.ord_g2),
            "ord_g3": _ord_json(self.ord_g3),
            "ord_delta": _ord_json(self.ord_delta),
            "kind": self.kind,
            "member": self.member,
        }


def _ord_json(v):
    return "inf" if v is INFINITY else v


@dataclass(frozen=True)
class FiberReport:
    fibers: tuple
    delta_zero: bool = False

    @property
    def member(self):
        return not self.delta_zero and all(f.member for f in self.fibers)

    @property
    def semistable(self):
        return self.member and not any(f.kind == "additive" for f in self.fibers)

    def kinds(self):
        return [f.kind for f in self.fibers]

    def to_json(self):
        return {"member": self.member, "delta_zero": self.delta_zero, "fibers": [f.to_json() for f in self.fibers]}


def _ord(f, pi):
    if f == 0:
        return INFINITY
    k = 0
    while f % pi == 0:
        f //= pi
        k += 1
    return k


def _ord_inf(f, bound):
    return INFINITY if f == 0 else bound - f.degree


def _classify(o2, o3, od):
    member = any(o is not INFINITY and k * o < 12 for o, k in ((o2, 3), (o3, 2)))
    if od == 0:
        return "good", member
    if o2 == 0:
        return "multiplicative", member
    return "additive", member


def _points(*polys):
    out = {}
    for f in polys:
        if f != 0 and f.degree > 0:
            monic = f * galois.Poly([f.field(1) / f.coeffs[0]], field=f.field)
            for pi in monic.factors()[0]:
                out[tuple(_coeffs(pi))] = pi
    return [out[k] for k in sorted(out, key=lambda c: (len(c), c[::-1]))]


def classify_fibers(W):
    """Orders of g2, g3, Delta at every point where one of them vanishes, and the fiber type."""
    g2, g3, delta = W.polys()
    if delta == 0:
        return FiberReport((), delta_zero=True)
    fibers = []
    for pi in _points(g2, g3, delta):
        o2, o3, od = _ord(g2, pi), _ord(g3, pi), _ord(delta, pi)
        kind, member = _classify(o2, o3, od)
        fibers.append(Fiber(pi, pi.degree, o2, o3, od, kind, member))
    n = W.n
    o2, o3, od = _ord_inf(g2, 4 * n), _ord_inf(g3, 6 * n), _ord_inf(delta, 12 * n)
    kind, member = _classify(o2, o3, od)
    fibers.append(Fiber(INF, 1, o2, o3, od, kind, member))
    return FiberReport(tuple(fibers))


def membership(W):
    """(min(3 ord g2, 2 ord g3) < 12 everywhere and Delta != 0, report)."""
    report = classify_fibers(W)
    return report.member, report


# ---------------------------------------------------------------- construction


def _squarefree(f):
    return f != 0 and (f.degree == 0 or f.is_square_free())


def _random_poly(F, deg, rng):
    return galois.Poly(list(reversed([rng.randrange(F.order) for _ in range(deg + 1)])), field=F)


def _coprime(f, g):
    return f.degree == 0 or galois.gcd(f, g).degree == 0


def construct_semistable(q, n, seed=0, retries=DEFAULT_RETRIES):
    """Random pair with reduced div(g2), g3 a unit on it, and reduced div(g3), div(Delta).

    Every bad fiber of the result is multiplicative.
    """
    F = field(q)
    if n < 1:
        raise ValueError("twist degree must be at least 1")
    rng = random.Random(seed)
    inv = F(1) / F(1728 % F.characteristic)
    for _ in range(retries):
        g2 = _random_poly(F, 4 * n, rng)
        if g2 == 0 or 4 * n - g2.degree > 1 or not _squarefree(g2):
            continue
        g3 = _random_poly(F, 6 * n, rng)
        if g3 == 0 or 6 * n - g3.degree > 1 or not _squarefree(g3) or not _coprime(g2, g3):
            continue
        if g2.degree < 4 * n and g3.degree < 6 * n:
            continue
        delta = (g2**3 - g3**2) * inv
        if delta == 0 or 12 * n - delta.degree > 1 or not _squarefree(delta):
            continue
        W = WeierstrassPair(q, n, tuple(_coeffs(g2)), tuple(_coeffs(g3)))
        report = classify_fibers(W)
        if report.semistable:
            return W
    raise SearchExhausted(f"no semistable pair for q={q}, n={n} in {retries} tries")
