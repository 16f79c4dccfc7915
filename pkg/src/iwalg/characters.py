"""Finite characters of Z_p^d, twists, and the norm to a finite-index subgroup."""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import comb

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp

from . import _kernels as K
from .errors import IntegralityViolation
from .scalar import to_pi_basis, vp_array
from .series import IwasawaSeries, SeriesRing, SubgroupMap, layout, specialize


@dataclass(frozen=True)
class FiniteCharacter:
    """omega(sigma_i) = zeta_{p^level}^{images[i]}."""

    level: int
    images: tuple

    def __init__(self, level, images):
        if level < 0:
            raise ValueError("character level must be non-negative")
        object.__setattr__(self, "level", int(level))
        object.__setattr__(self, "images", tuple(int(c) for c in images))

    @classmethod
    def trivial(cls, d):
        return cls(0, (0,) * d)

    @property
    def d(self):
        return len(self.images)

    def normalized(self, p):
        """Same character with images reduced mod p^level and the level minimal."""
        level = self.level
        imgs = [c % p**level for c in self.images]
        while level > 0 and all(c % p == 0 for c in imgs):
            imgs = [c // p for c in imgs]
            level -= 1
        return FiniteCharacter(level, imgs)

    def is_trivial(self, p):
        return self.normalized(p).level == 0

    def conj(self):
        return FiniteCharacter(self.level, [-c for c in self.images])

    def times(self, other, p):
        if self.d != other.d:
            raise ValueError("characters on different numbers of generators")
        L = max(self.level, other.level)
        a = [c * p ** (L - self.level) for c in self.images]
        b = [c * p ** (L - other.level) for c in other.images]
        return FiniteCharacter(L, [x + y for x, y in zip(a, b)]).normalized(p)

    def pullback(self, m):
        """omega composed with the specialization map ``m`` (on m's source)."""
        if m.target_dim != self.d:
            raise ValueError("map target does not match the character")
        M = m.matrix
        return FiniteCharacter(self.level, [sum(M[j][i] * self.images[j] for j in range(self.d)) for i in range(m.source_dim)])

    def to_json(self):
        return {"level": self.level, "images": list(self.images)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["level"], obj["images"])


# ---------------------------------------------------------------- twists


@lru_cache(maxsize=None)
def _binomial_bases(d, D):
    """Integer matrices between the t^a basis and the (1 + t)^j basis."""
    lay = layout(d, D)
    ex = lay.ex
    to_b = np.ones((lay.n, lay.n), dtype=object)
    from_b = np.ones((lay.n, lay.n), dtype=object)
    table = np.array([[comb(a, j) for j in range(D + 1)] for a in range(D + 1)], dtype=object)
    sign = np.array([[(-1) ** (a - j) for j in range(D + 1)] for a in range(D + 1)], dtype=object)
    for i in range(d):
        a = ex[:, i]
        # to_b[j, a]: coefficient of (1+t)^j in t^a
        to_b = to_b * (table[a][:, a] * sign[a][:, a]).T
        from_b = from_b * table[a][:, a].T
    return to_b, from_b


@lru_cache(maxsize=None)
def _binomial_bases_mod(d, D, m, dtype):
    to_b, from_b = _binomial_bases(d, D)
    return (to_b % m).astype(dtype), (from_b % m).astype(dtype)


def _rotate(rows, shifts, ctx):
    """Multiply row r by zeta^shifts[r]."""
    P = ctx.p**ctx.level
    n = rows.shape[0]
    wide = np.zeros((n, P), dtype=rows.dtype)
    cols = (np.arange(ctx.e)[None, :] + shifts[:, None]) % P
    wide[np.arange(n)[:, None], cols] = rows
    return K.reduce_rows(wide, ctx.e, ctx.p, ctx.step, ctx.m)


def twist(f, chi):
    """Image of f under sigma_i -> chi(sigma_i) sigma_i, i.e. (1+t_i) -> zeta^c_i (1+t_i)."""
    if chi.d != f.d:
        raise ValueError("character and series have different numbers of generators")
    p = f.ring.p
    chi = chi.normalized(p)
    if chi.level == 0:
        return f
    level = max(f.level, chi.level)
    f = f.at_level(level)
    ring = f.ring
    ctx = ring.ctx
    lay = ring.layout
    to_b, from_b = _binomial_bases_mod(ring.d, ring.D, ctx.m, ctx.dtype)
    B = K.matmul_mod(to_b, f.coeffs, ctx.m)
    scale = p ** (level - chi.level)
    shifts = (lay.ex @ np.array([c * scale for c in chi.images], dtype=np.int64)) % p**level
    B = _rotate(B, shifts, ctx)
    rows = K.matmul_mod(from_b, B, ctx.m)
    return IwasawaSeries(ring, rows, f.denom_exp, f.exact, f.literal_zero)


def chi_map(f, chi, m):
    """specialize(twist(f, chi), m)."""
    return specialize(twist(f, chi), m)


# ---------------------------------------------------------------- subgroups


@dataclass(frozen=True)
class FiniteIndexSubgroup:
    """Subgroup of Gamma = Z_p^d spanned by the columns of H."""

    H: tuple

    def __init__(self, H):
        rows = tuple(tuple(int(x) for x in r) for r in H)
        if not rows or any(len(r) != len(rows) for r in rows):
            raise ValueError("H must be a square integer matrix")
        if Matrix(rows).det() == 0:
            raise ValueError("H must have non-zero determinant")
        object.__setattr__(self, "H", rows)

    @classmethod
    def whole(cls, d):
        return cls([[int(i == j) for j in range(d)] for i in range(d)])

    @property
    def d(self):
        return len(self.H)

    def smith(self):
        """(q, U, V) with U H V = diag(q), q_i >= 1, U and V unimodular."""
        return _smith(self.H)

    def exponents(self, p):
        """a_i with q_i = p^a_i; other invariant factors are rejected."""
        q, _, _ = self.smith()
        out = []
        for x in q:
            a = 0
            while x % p == 0:
                x //= p
                a += 1
            if x != 1:
                raise ValueError("Smith invariants of H must be powers of p")
            out.append(a)
        return out

    def index(self, p):
        return p ** sum(self.exponents(p))

    def characters(self, p):
        """All characters of Gamma / Phi, in lexicographic order of the dual coordinates."""
        a = self.exponents(p)
        _, U, _ = self.smith()
        n = max(a) if a else 0
        out = []
        for k in iproduct(*[range(p**ai) for ai in a]):
            imgs = [sum(k[i] * U[i][j] * p ** (n - a[i]) for i in range(self.d)) for j in range(self.d)]
            out.append(FiniteCharacter(n, imgs))
        return out

    def to_json(self):
        return {"H": [list(r) for r in self.H]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["H"])


@lru_cache(maxsize=None)
def _smith(H):
    S, U, V = smith_normal_decomp(Matrix(H))
    U = [list(map(int, U.row(i))) for i in range(U.rows)]
    V = [list(map(int, V.row(i))) for i in range(V.rows)]
    q = [int(S[i, i]) for i in range(S.rows)]
    for i, x in enumerate(q):
        if x < 0:
            q[i] = -x
            U[i] = [-c for c in U[i]]
    return tuple(q), tuple(map(tuple, U)), tuple(map(tuple, V))


def _power_table(q, D, Dout, m):
    """C[k][j] = coefficient of u^k in ((1 + u)^q - 1)^j."""
    w = [comb(q, k) for k in range(D + 1)]
    w[0] = 0
    C = np.zeros((D + 1, Dout + 1), dtype=object)
    cur = [1] + [0] * D
    for j in range(Dout + 1):
        C[:, j] = cur
        nxt = [0] * (D + 1)
        for a, x in enumerate(cur):
            if x:
                for b in range(1, D + 1 - a):
                    if w[b]:
                        nxt[a + b] += x * w[b]
        cur = [x % m for x in nxt]
    return C


def descent_ideals(f, sub):
    """Ideals (weight, order) modulo which norm_descent(f, sub) is certified."""
    p = f.ring.p
    a = sub.exponents(p)
    qmax = p ** max(a) if a else 1
    D = f.ring.D
    Dout = D // qmax
    out = []
    if qmax > 1:
        out.append((Fraction(1), Fraction(Dout + 1)))
    # the product of twists is truncated when its degree passes D, even for exact f
    overflow = sub.index(p) * max(f.degree(), 0) > D
    if (overflow or not f.exact) and max(a, default=0) > 0:
        e = (p - 1) * p ** (max(a) - 1)
        out.append((Fraction(qmax, e), Fraction(D + 1, e)))
    return out


def norm_descent(f, sub):
    """prod over characters chi of Gamma/Phi of twist(f, chi), in Phi coordinates.

    The output lives in the ring with degree bound D // q_max, where q_max is
    the largest invariant factor of Phi; ``descent_ideals`` states what of it
    is certified.
    """
    if f.denom_exp:
        raise ValueError("norm_descent needs an integral series")
    ring = f.ring
    p, m = ring.p, ring.ctx.m
    if sub.d != f.d:
        raise ValueError("subgroup and series have different ranks")
    a = sub.exponents(p)
    q, U, V = sub.smith()
    chars = sub.characters(p)
    level = max(a, default=0)

    prod = ring.with_level(max(level, ring.level)).one()
    for chi in chars:
        prod = prod * twist(f, chi)
    g = _descend_level(prod, f.exact)

    gu = specialize(g, SubgroupMap(U), check=False)
    qmax = max(q)
    Dout = ring.D // qmax
    out_ring = SeriesRing(p, ring.N, ring.d, Dout, 0)
    G = _solve_powers(gu, q, out_ring)
    Gs = IwasawaSeries(out_ring, G, exact=gu.exact and len(set(q)) == 1)
    return specialize(Gs, SubgroupMap(V), check=False)


def _descend_level(s, exact):
    """Read a level-n series whose coefficients lie in Z_p as a level-0 series."""
    ring = s.ring
    ctx = ring.ctx
    out_ring = ring.with_level(0)
    if ctx.level == 0:
        return s
    b = to_pi_basis(s.coeffs, ctx.m)
    v = vp_array(b[:, 1:], ctx.p, ctx.N)
    weight = ctx.e * v + np.arange(1, ctx.e)[None, :]
    if exact:
        ok = v == ctx.N
    else:
        need = (ring.D + 1 - ring.layout.deg)[:, None]
        ok = (v == ctx.N) | (weight >= need)
    if not ok.all():
        bad = ring.layout.exps[int(np.flatnonzero(~ok.all(axis=1))[0])]
        raise IntegralityViolation(f"coefficient of t^{bad} does not descend to Z_p")
    rows = out_ring._rows()
    rows[:, 0] = b[:, 0]
    return IwasawaSeries(out_ring, rows, s.denom_exp, s.exact, s.literal_zero)


def _solve_powers(g, q, out_ring):
    """Coefficients G with g(u) = G((1+u)^q - 1), by triangular back-substitution."""
    m = out_ring.ctx.m
    D = g.ring.D
    lay_in = g.ring.layout
    lay = out_ring.layout
    ex = lay.ex
    d = out_ring.d
    rhs_idx = [lay_in.index[tuple(int(qi * b) for qi, b in zip(q, beta))] for beta in lay.exps]
    rhs = np.array([int(x) for x in g.coeffs[rhs_idx, 0]], dtype=object)
    if all(qi == 1 for qi in q):
        G = rhs % m
    else:
        A = np.ones((lay.n, lay.n), dtype=object)
        for i in range(d):
            C = _power_table(q[i], D, out_ring.D, m)
            A = A * C[q[i] * ex[:, i]][:, ex[:, i]]
        A %= m
        G = np.zeros(lay.n, dtype=object)
        for r in range(lay.n - 1, -1, -1):
            G[r] = (rhs[r] - (A[r, r + 1:] @ G[r + 1:] if r + 1 < lay.n else 0)) % m
    rows = out_ring._rows()
    rows[:, 0] = np.array([int(x) for x in G], dtype=rows.dtype)
    return rows
