"""Truncated power series in t_0..t_{d-1} over O_chi, with a p-power denominator.

Coefficients live in a dense ``(n_monomials, e)`` residue array; monomials of
total degree <= D are laid out degree by degree.  A series also remembers
whether it is still an exact polynomial (nothing has been cut off by
truncation), which decides how much precision survives substitutions that do
not preserve the truncation ideal, such as evaluation at a character.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, floor

import numpy as np

from . import _kernels as K
from .errors import DenominatorNotCleared, PrecisionExhausted
from .scalar import (
    INFINITY,
    PRECISION_EXHAUSTED,
    PadicScalar,
    Prime,
    cyclo,
    embed_rows,
    min_valuation_keys,
    totient_pp,
)


def monomials(d, D):
    out = []
    for deg in range(D + 1):
        out.extend(_compositions(deg, d))
    return out


def _compositions(n, k):
    if k == 0:
        return [()] if n == 0 else []
    if k == 1:
        return [(n,)]
    out = []
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, k - 1):
            out.append((first,) + rest)
    return out


@dataclass(frozen=True)
class PairTable:
    pi: np.ndarray
    pj: np.ndarray
    pk: np.ndarray
    starts: np.ndarray
    nout: int


class Layout:
    """Monomial order and product table for (d, D)."""

    def __init__(self, d, D):
        self.d, self.D = d, D
        self.exps = monomials(d, D)
        self.index = {a: i for i, a in enumerate(self.exps)}
        self.n = len(self.exps)
        self.ex = np.array(self.exps, dtype=np.int64).reshape(self.n, d)
        self.deg = self.ex.sum(axis=1) if d else np.zeros(1, np.int64)
        self._table = None

    @property
    def table(self):
        if self._table is None:
            self._table = self._build()
        return self._table

    def _build(self):
        base = self.D + 1
        weights = base ** np.arange(self.d, dtype=np.int64)
        keys = self.ex @ weights if self.d else np.zeros(1, np.int64)
        lookup = np.full(base**self.d, -1, dtype=np.int64)
        lookup[keys] = np.arange(self.n)
        i, j = np.nonzero(self.deg[:, None] + self.deg[None, :] <= self.D)
        k = lookup[keys[i] + keys[j]]
        order = np.lexsort((j, i, k))
        i, j, k = i[order], j[order], k[order]
        starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
        return PairTable(i.astype(np.int64), j.astype(np.int64), k.astype(np.int64), starts, self.n)


@lru_cache(maxsize=None)
def layout(d, D):
    return Layout(d, D)


@dataclass(frozen=True)
class SeriesRing:
    """Truncated power series ring O_chi[[t_0..t_{d-1}]] / (p^N, degree > D)."""

    p: int
    N: int
    d: int
    D: int
    level: int = 0

    def __post_init__(self):
        Prime(self.p, self.N)
        if self.d < 0 or self.D < 0 or self.level < 0:
            raise ValueError("ring parameters must be non-negative")

    @property
    def prime(self):
        return Prime(self.p, self.N)

    @property
    def ctx(self):
        return cyclo(self.p, self.N, self.level)

    @property
    def layout(self):
        return layout(self.d, self.D)

    def with_level(self, level):
        return SeriesRing(self.p, self.N, self.d, self.D, level)

    def with_vars(self, d):
        return SeriesRing(self.p, self.N, d, self.D, self.level)

    def to_json(self):
        return {"p": self.p, "N": self.N, "d": self.d, "D": self.D, "level": self.level}

    # -- constructors
    def _rows(self):
        return self.ctx.zeros(self.layout.n)

    def zero(self):
        return IwasawaSeries(self, self._rows(), literal_zero=True)

    def constant(self, c):
        rows = self._rows()
        if isinstance(c, PadicScalar):
            level = max(self.level, c.level)
            ring = self.with_level(level)
            rows = ring._rows()
            rows[0] = np.array([int(x) for x in c.at_level(level).coeffs], dtype=ring.ctx.dtype) % ring.ctx.m
            return IwasawaSeries(ring, rows, literal_zero=c.is_zero())
        rows[0, 0] = int(c) % self.ctx.m
        return IwasawaSeries(self, rows, literal_zero=int(c) == 0)

    def one(self):
        return self.constant(1)

    def gen(self, i):
        """The variable t_i."""
        rows = self._rows()
        exp = tuple(1 if j == i else 0 for j in range(self.d))
        rows[self.layout.index[exp], 0] = 1
        return IwasawaSeries(self, rows)

    def monomial(self, exp, c=1):
        return self.from_terms({tuple(exp): c})

    def from_terms(self, terms, denom_exp=0):
        """Build from ``{exponent tuple: int or PadicScalar}``."""
        level = self.level
        for c in terms.values():
            if isinstance(c, PadicScalar):
                level = max(level, c.level)
        ring = self.with_level(level)
        rows = ring._rows()
        idx = ring.layout.index
        literal = True
        exact = True
        for exp, c in terms.items():
            exp = tuple(int(x) for x in exp)
            if len(exp) != self.d:
                raise ValueError(f"exponent {exp} has wrong length for d={self.d}")
            if isinstance(c, PadicScalar):
                vec = c.at_level(level).coeffs
                nonzero = not c.is_zero()
            else:
                vec = np.zeros(ring.ctx.e, dtype=object)
                vec[0] = int(c)
                nonzero = int(c) != 0
            if sum(exp) > self.D:
                if nonzero:
                    exact = False
                continue
            literal = literal and not nonzero
            rows[idx[exp]] = (rows[idx[exp]] + np.array([int(v) for v in vec], dtype=object)) % ring.ctx.m
        return IwasawaSeries(ring, rows, denom_exp, exact=exact, literal_zero=literal)

    def group_element(self, vec):
        """prod (1 + t_i)^vec_i with integer exponents, truncated."""
        out = self.one()
        for i, a in enumerate(vec):
            if a:
                out = out * binomial_power(self, i, a)
        return out


@lru_cache(maxsize=None)
def _binomial_row(ring, i, a):
    rows = ring._rows()
    idx = ring.layout.index
    top = ring.D if a < 0 else min(a, ring.D)
    for k in range(top + 1):
        exp = tuple(k if j == i else 0 for j in range(ring.d))
        rows[idx[exp], 0] = _gbinom(a, k) % ring.ctx.m
    rows.setflags(write=False)
    return rows, (a >= 0 and a <= ring.D)


def _gbinom(a, k):
    if a >= 0:
        return comb(a, k)
    # (1+t)^a for negative a: C(a, k) = (-1)^k C(k - a - 1, k)
    return (-1) ** k * comb(k - a - 1, k)


def binomial_power(ring, i, a):
    """(1 + t_i)^a for an integer a, truncated at degree D."""
    rows, exact = _binomial_row(ring, i, int(a))
    return IwasawaSeries(ring, np.array(rows), exact=exact)


class IwasawaSeries:
    """p^-denom_exp * (integral truncated series)."""

    __slots__ = ("ring", "coeffs", "denom_exp", "exact", "literal_zero")

    def __init__(self, ring, coeffs, denom_exp=0, exact=True, literal_zero=False):
        coeffs = np.asarray(coeffs)
        ctx = ring.ctx
        if coeffs.shape != (ring.layout.n, ctx.e):
            raise ValueError(f"coefficient array has shape {coeffs.shape}")
        if coeffs.dtype != ctx.dtype:
            coeffs = np.array([[int(x) % ctx.m for x in row] for row in coeffs], dtype=ctx.dtype).reshape(coeffs.shape)
        if denom_exp < 0:
            raise ValueError("denom_exp must be non-negative")
        while denom_exp > 0 and coeffs.any() and not (coeffs % ring.p).any():
            coeffs = coeffs // ring.p
            denom_exp -= 1
        if not coeffs.any():
            denom_exp = 0
        coeffs.setflags(write=False)
        self.ring = ring
        self.coeffs = coeffs
        self.denom_exp = int(denom_exp)
        self.exact = bool(exact)
        self.literal_zero = bool(literal_zero)

    # -- basics
    @property
    def d(self):
        return self.ring.d

    @property
    def level(self):
        return self.ring.level

    def __repr__(self):
        body = " + ".join(f"{_fmt_coeff(c)}*{_fmt_mono(e)}" for e, c in sorted(self.terms().items())) or "0"
        den = f"p^-{self.denom_exp}*" if self.denom_exp else ""
        return f"IwasawaSeries({den}({body}), {self.ring})"

    def terms(self):
        """Nonzero integral coefficients keyed by exponent."""
        out = {}
        r = self.ring
        for i in np.flatnonzero(self.coeffs.any(axis=1)):
            out[r.layout.exps[i]] = PadicScalar._raw(r.p, r.N, r.level, self.coeffs[i])
        return out

    def __getitem__(self, exp):
        r = self.ring
        i = r.layout.index[tuple(exp)]
        return PadicScalar._raw(r.p, r.N, r.level, self.coeffs[i])

    def constant_term(self):
        return self[(0,) * self.d]

    def degree(self):
        nz = np.flatnonzero(self.coeffs.any(axis=1))
        return int(self.ring.layout.deg[nz].max()) if nz.size else -1

    def is_zero(self):
        return not self.coeffs.any()

    def at_level(self, level):
        if level == self.level:
            return self
        ring = self.ring.with_level(level)
        rows = embed_rows(np.array(self.coeffs), self.ring.p, self.level, level)
        return IwasawaSeries(ring, rows, self.denom_exp, self.exact, self.literal_zero)

    def _unify(self, other):
        if isinstance(other, (int, PadicScalar)):
            other = self.ring.constant(other)
        if not isinstance(other, IwasawaSeries):
            return None, None
        a, b = self, other
        ra, rb = a.ring, b.ring
        if (ra.p, ra.N, ra.d, ra.D) != (rb.p, rb.N, rb.d, rb.D):
            raise ValueError(f"series live in different rings: {ra} vs {rb}")
        lv = max(ra.level, rb.level)
        return a.at_level(lv), b.at_level(lv)

    def _scaled_rows(self, k):
        """Integral rows multiplied by p^(k - denom_exp); k >= denom_exp."""
        shift = k - self.denom_exp
        if shift == 0:
            return self.coeffs
        return (self.coeffs * (self.ring.p**shift)) % self.ring.ctx.m

    # -- arithmetic
    def __add__(self, other):
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        k = max(a.denom_exp, b.denom_exp)
        rows = (a._scaled_rows(k) + b._scaled_rows(k)) % a.ring.ctx.m
        return IwasawaSeries(a.ring, rows, k, a.exact and b.exact, a.literal_zero and b.literal_zero)

    __radd__ = __add__

    def __neg__(self):
        return IwasawaSeries(self.ring, (-self.coeffs) % self.ring.ctx.m, self.denom_exp, self.exact, self.literal_zero)

    def __sub__(self, other):
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PadicScalar) or isinstance(other, int):
            return self.scale(other)
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        r = a.ring
        ctx = r.ctx
        rows = K.series_mul(a.coeffs, b.coeffs, r.layout.table, ctx.e, ctx.p, ctx.step, ctx.m)
        literal = a.literal_zero or b.literal_zero
        da, db = a.degree(), b.degree()
        fits = da < 0 or db < 0 or da + db <= r.D
        return IwasawaSeries(r, rows, a.denom_exp + b.denom_exp, literal or (a.exact and b.exact and fits), literal)

    __rmul__ = __mul__

    def scale(self, c):
        """Multiply by a scalar (int or PadicScalar)."""
        if isinstance(c, int):
            # p^N * f is not the literal zero, only 0 * f is
            killed = c == 0
            c = PadicScalar.from_int(self.ring.p, self.ring.N, c)
        else:
            killed = c.is_zero()
        lv = max(self.level, c.level)
        f = self.at_level(lv)
        ctx = f.ring.ctx
        rows = ctx.scale_rows(np.array(c.at_level(lv).coeffs, dtype=ctx.dtype), f.coeffs)
        return IwasawaSeries(f.ring, rows, f.denom_exp, f.exact, f.literal_zero or killed)

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not defined for series")
        out = self.ring.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def times_p_power(self, k):
        """Multiply by p^k for any integer k (negative k adds denominators)."""
        if k >= 0:
            return IwasawaSeries(self.ring, (self.coeffs * self.ring.p**k) % self.ring.ctx.m, self.denom_exp, self.exact, self.literal_zero)
        return IwasawaSeries(self.ring, self.coeffs, self.denom_exp - k, self.exact, self.literal_zero)

    def __eq__(self, other):
        a, b = self._unify(other)
        if a is None:
            return NotImplemented
        return a.denom_exp == b.denom_exp and bool(np.array_equal(a.coeffs, b.coeffs))

    def __hash__(self):
        return hash((self.ring, self.denom_exp, self.coeffs.tobytes()))

    def truncate(self, D):
        """Image in the ring with a smaller degree bound."""
        if D > self.ring.D:
            raise ValueError("cannot raise the truncation degree")
        ring = SeriesRing(self.ring.p, self.ring.N, self.d, D, self.level)
        keep = [self.ring.layout.index[e] for e in ring.layout.exps]
        rows = np.array(self.coeffs[keep])
        dropped = self.coeffs[[i for i in range(self.ring.layout.n) if self.ring.layout.deg[i] > D]]
        return IwasawaSeries(ring, rows, self.denom_exp, self.exact and not dropped.any(), self.literal_zero)

    def integral_part(self):
        """p^denom_exp * self, as an integral series."""
        return IwasawaSeries(self.ring, self.coeffs, 0, self.exact, self.literal_zero)

    # -- invariants
    def mu(self):
        """min coefficient valuation minus denom_exp."""
        if self.literal_zero:
            return INFINITY
        keys = min_valuation_keys(self.coeffs, self.ring.ctx)
        keys = keys[keys >= 0]
        if keys.size == 0:
            return PRECISION_EXHAUSTED
        return Fraction(int(keys.min()), self.ring.ctx.e) - self.denom_exp

    def is_unit(self, rational=False):
        """Unit of O_chi[[t]] (or of Q_chi (x) O_chi[[t]] when ``rational``)."""
        c = self.constant_term()
        if not rational:
            return self.denom_exp == 0 and c.is_unit()
        v = c.valuation()
        if v is PRECISION_EXHAUSTED:
            return False
        return v == self.mu() + self.denom_exp


def _fmt_coeff(c):
    if c.level == 0:
        return str(int(c.coeffs[0]))
    return "[" + ",".join(str(int(x)) for x in c.coeffs) + "]"


def _fmt_mono(e):
    parts = [f"t{i}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a]
    return "*".join(parts) or "1"


# ---------------------------------------------------------------- substitution


def lincomb(coeff_rows, series_rows, ctx):
    return K.lincomb(coeff_rows, series_rows, ctx.e, ctx.p, ctx.step, ctx.m)


def substitute(f, images, target):
    """Evaluate the polynomial representative of ``f`` at ``t_i -> images[i]``.

    ``images`` are series in ``target`` (any level).  The result is exact at
    truncation when every image has zero constant term; otherwise it is the
    image of the representative and carries the precision caveats of the caller.
    """
    if len(images) != f.d:
        raise ValueError("need one image per variable")
    level = max([f.level, target.level] + [g.level for g in images])
    target = target.with_level(level)
    imgs = [g.at_level(level) for g in images]
    f = f.at_level(level)
    ctx = target.ctx
    lay = f.ring.layout
    live = np.flatnonzero(f.coeffs.any(axis=1))
    if live.size == 0 or f.d == 0:
        rows = target._rows()
        if f.d == 0:
            rows[0] = f.coeffs[0]
        return IwasawaSeries(target, rows, f.denom_exp, f.exact, f.literal_zero)
    support = lay.ex[live]
    # powers of each image up to the largest exponent that occurs
    powers = []
    for i, g in enumerate(imgs):
        top = int(support[:, i].max())
        pw = [target.one()]
        for _ in range(top):
            pw.append(pw[-1] * g)
        powers.append(pw)
    # innermost variable via scalar linear combinations, outer ones via products
    last = f.d - 1
    groups = {}
    for row, exp in zip(live, support):
        groups.setdefault(tuple(int(x) for x in exp[:last]), []).append((int(exp[last]), row))
    partial = {}
    exact = f.exact
    for prefix, items in groups.items():
        C = np.stack([f.coeffs[row] for _, row in items])
        S = np.stack([powers[last][b].coeffs for b, _ in items])
        rows = lincomb(C, S, ctx)
        exact = exact and all(powers[last][b].exact for b, _ in items)
        partial[prefix] = IwasawaSeries(target, rows, 0, exact)
    for var in range(last - 1, -1, -1):
        merged = {}
        for prefix, s in partial.items():
            term = powers[var][prefix[var]] * s if prefix[var] else s
            key = prefix[:var]
            merged[key] = merged[key] + term if key in merged else term
        partial = merged
    out = partial[()]
    return IwasawaSeries(target, out.coeffs, f.denom_exp, out.exact and exact, f.literal_zero)


@lru_cache(maxsize=None)
def _inverse_minus_one(ring, i):
    # (1 + t_i)^-1 - 1
    return binomial_power(ring, i, -1) - ring.one()


def sharp(f):
    """Image under (1 + t_i) -> (1 + t_i)^-1."""
    imgs = [_inverse_minus_one(f.ring.with_level(0), i) for i in range(f.d)]
    return substitute(f, imgs, f.ring)


@dataclass(frozen=True)
class SubgroupMap:
    """Integer matrix M (e x d): sigma_i -> prod_j sigma'_j^{M[j][i]}."""

    matrix: tuple

    def __init__(self, matrix):
        rows = tuple(tuple(int(x) for x in r) for r in matrix)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("matrix must be a non-empty rectangle")
        object.__setattr__(self, "matrix", rows)

    @property
    def source_dim(self):
        return len(self.matrix[0])

    @property
    def target_dim(self):
        return len(self.matrix)

    def column(self, i):
        return [r[i] for r in self.matrix]

    def is_surjective_mod(self, p):
        return _rank_mod_p([list(r) for r in self.matrix], p) == self.target_dim

    @classmethod
    def identity(cls, d):
        return cls([[int(i == j) for j in range(d)] for i in range(d)])

    def compose(self, other):
        """self after other: first ``other`` (d -> e), then ``self`` (e -> f)."""
        A, B = self.matrix, other.matrix
        return SubgroupMap([[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))])

    def to_json(self):
        return {"M": [list(r) for r in self.matrix]}


def _rank_mod_p(rows, p):
    rows = [[x % p for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                c = rows[i][col]
                rows[i] = [(x - c * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def specialize(f, m, check=True):
    """(1 + t_i) -> prod_j (1 + s_j)^{M[j][i]}."""
    if m.source_dim != f.d:
        raise ValueError(f"map expects {m.source_dim} variables, series has {f.d}")
    if check and not m.is_surjective_mod(f.ring.p):
        raise ValueError("subgroup map is not surjective")
    target = f.ring.with_vars(m.target_dim).with_level(0)
    imgs = [target.group_element(m.column(i)) - target.one() for i in range(f.d)]
    return substitute(f, imgs, f.ring.with_vars(m.target_dim))


# ---------------------------------------------------------------- evaluation


def character_values(chi, p, N):
    """omega(sigma_i) as scalars at the character's level."""
    return [PadicScalar.zeta(p, N, chi.level, c) for c in chi.images]


def evaluation_precision(f, chi):
    """Number of p-adic digits of omega(f) certified by the truncated data."""
    N = f.ring.N
    if f.exact:
        return N
    worst = None
    for c in chi.images:
        c %= p_power(f.ring.p, chi.level)
        if c == 0:
            continue
        # zeta^c has exact order p^(level - v_p(c))
        k = chi.level
        while c % f.ring.p == 0:
            c //= f.ring.p
            k -= 1
        v = Fraction(1, totient_pp(f.ring.p, k))
        worst = v if worst is None else min(worst, v)
    if worst is None:
        return N
    return min(N, int((f.ring.D + 1) * worst))


def p_power(p, k):
    return p**k


def evaluate_integral_part(f, chi):
    """omega(p^k f) and k, with the value reported to its certified precision."""
    if len(chi.images) != f.d:
        raise ValueError("character and series have different numbers of generators")
    ring = f.ring
    level = max(ring.level, chi.level)
    f = f.at_level(level)
    ctx = cyclo(ring.p, ring.N, level)
    vals = [z.at_level(level) for z in character_values(chi, ring.p, ring.N)]
    lay = f.ring.layout
    live = np.flatnonzero(f.coeffs.any(axis=1))
    if live.size == 0:
        acc = ctx.zeros()
    else:
        # monomial values by one multiplication each, in layout order
        mono = {(0,) * f.d: PadicScalar.from_int(ring.p, ring.N, 1, level)}
        z_minus = [v - 1 for v in vals]
        need = set()
        for r in live:
            need.add(lay.exps[r])
        for exp in lay.exps[1:]:
            if sum(exp) > max(sum(x) for x in need):
                break
            i = next(j for j, a in enumerate(exp) if a)
            prev = tuple(a - (j == i) for j, a in enumerate(exp))
            mono[exp] = mono[prev] * z_minus[i]
        C = np.stack([f.coeffs[r] for r in live])
        S = np.stack([mono[lay.exps[r]].coeffs for r in live])[:, None, :]
        acc = lincomb(C, S, ctx)[0]
    prec = evaluation_precision(f, chi)
    if prec < 1:
        raise PrecisionExhausted(f"evaluation keeps no digits at D={ring.D}; raise the degree bound")
    value = PadicScalar._raw(ring.p, ring.N, level, acc).at_precision(prec)
    return value, f.denom_exp


def evaluate_at_character(f, chi):
    """omega(f) for a finite character omega given by root-of-unity images."""
    value, k = evaluate_integral_part(f, chi)
    if k == 0:
        return value
    if value.N - k < 1:
        raise DenominatorNotCleared(f"denominator p^{k} leaves no certified digits")
    v = value.valuation()
    if v is not PRECISION_EXHAUSTED and v < k:
        raise DenominatorNotCleared(f"value has valuation {v} < {k}")
    p = value.p
    out = np.array([int(c) // p**k for c in value.coeffs], dtype=object) % p ** (value.N - k)
    return PadicScalar._raw(p, value.N - k, value.level, out)


def partial_evaluate(f, var, value):
    """Substitute t_var -> value (a scalar), keeping the other variables."""
    target = f.ring.with_vars(f.d - 1)
    level = max(target.level, value.level)
    target = target.with_level(level)
    imgs = []
    j = 0
    for i in range(f.d):
        if i == var:
            imgs.append(target.constant(value))
        else:
            imgs.append(target.gen(j))
            j += 1
    return substitute(f, imgs, target)


def agree(f, g, *, drop=0, weight=None, order=None, ideals=()):
    """Equality of f and g up to their certified precision.

    ``drop`` removes that many p-adic digits from the comparison.  A
    coefficient c of t^beta is also ignored when v(c) + w * |beta| >= o for
    some (w, o) in ``ideals`` (the shape of (p^a, t)^K); ``weight`` and
    ``order`` add one such pair.
    """
    a, b = f._unify(g)
    k = max(a.denom_exp, b.denom_exp)
    diff = (a._scaled_rows(k) - b._scaled_rows(k)) % a.ring.ctx.m
    ctx = a.ring.ctx
    keys = min_valuation_keys(diff, ctx)
    bad = keys >= 0
    limit = floor((ctx.N - Fraction(drop)) * ctx.e)
    bad &= keys < limit
    ideals = list(ideals)
    if weight is not None:
        ideals.append((weight, order))
    if ideals:
        deg = a.ring.layout.deg
        for i in np.flatnonzero(bad):
            v = Fraction(int(keys[i]), ctx.e)
            if any(v + Fraction(w) * int(deg[i]) >= Fraction(o) for w, o in ideals):
                bad[i] = False
    return not bad.any()
