"""Weierstrass preparation in one distinguished variable, and associates.

A series in d variables is viewed as a polynomial in ``t_var`` (degree <= D)
whose coefficients live in the ring A of series in the other d - 1
variables.  Preparation lifts ``P = t_var^lambda`` by Newton's method on
``f = P * Q + R`` until the remainder vanishes; every step is exact in
A[t_var], so the product ``content * unit * P`` reproduces ``f`` bit for bit.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .errors import HypothesisFailed, Indeterminate, PrecisionExhausted
from .scalar import INFINITY, PRECISION_EXHAUSTED, PadicScalar, min_valuation_keys, strip_content
from .series import IwasawaSeries, SeriesRing, agree, layout

MAX_NEWTON_STEPS = 64


@lru_cache(maxsize=None)
def _split(d, D, var):
    """Row -> (degree in t_var, row index in the (d-1)-variable layout)."""
    lay = layout(d, D)
    sub = layout(d - 1, D)
    tdeg = lay.ex[:, var].copy()
    rest = np.delete(lay.ex, var, axis=1)
    arow = np.array([sub.index[tuple(int(x) for x in r)] for r in rest], dtype=np.int64)
    return tdeg, arow


def axis_restriction(f, var=0):
    """f with every variable except ``t_var`` set to 0, as a one-variable series."""
    ring = f.ring.with_vars(1)
    tdeg, arow = _split(f.d, f.ring.D, var)
    keep = arow == 0
    rows = ring._rows()
    rows[tdeg[keep]] = f.coeffs[keep]
    return IwasawaSeries(ring, rows, f.denom_exp, f.exact)


def satisfies_hypothesis(f, var=0):
    """mu(f restricted to the t_var axis) == mu(f), with mu(f) certified."""
    mu = f.mu()
    if mu is PRECISION_EXHAUSTED or mu is INFINITY:
        raise PrecisionExhausted("mu(f) is not certified at this precision")
    mu0 = axis_restriction(f, var).mu()
    return mu0 is not PRECISION_EXHAUSTED and mu0 is not INFINITY and mu0 == mu


class _Over:
    """Polynomials in one variable over A, as (length, nA, e) residue stacks."""

    def __init__(self, ringA):
        self.ring = ringA
        self.ctx = ringA.ctx
        self.table = ringA.layout.table
        self.n = ringA.layout.n

    def zeros(self, length):
        return self.ctx.zeros(length, self.n)

    def one(self):
        c = self.ctx.zeros(self.n)
        c[0, 0] = 1
        return c

    def mul_many(self, c, B):
        x = self.ctx
        return K.series_mul_many(c, B, self.table, x.e, x.p, x.step, x.m)

    def divmod(self, F, P, lam):
        """Quotient and remainder of F by the monic P of degree lam."""
        m = self.ctx.m
        R = np.array(F)
        top = R.shape[0] - 1
        Q = self.zeros(max(top - lam + 1, 1))
        for k in range(top, lam - 1, -1):
            c = R[k]
            if not c.any():
                continue
            Q[k - lam] = c
            R[k - lam:k + 1] = (R[k - lam:k + 1] - self.mul_many(c, P[: lam + 1])) % m
        return Q, R[:lam]

    def mul(self, X, Y):
        m = self.ctx.m
        out = self.zeros(X.shape[0] + Y.shape[0] - 1)
        for i in range(X.shape[0]):
            if X[i].any():
                out[i:i + Y.shape[0]] = (out[i:i + Y.shape[0]] + self.mul_many(X[i], Y)) % m
        return out

    def mulmod(self, X, Y, P, lam):
        return self.divmod(self.mul(X, Y), P, lam)[1]

    def inverse_mod(self, X, P, lam):
        """Inverse of X modulo P, X having a unit constant coefficient."""
        ctx = self.ctx
        b0 = int(np.sum(X[0, 0].astype(object))) % ctx.p
        x = self.zeros(lam)
        x[0, 0, 0] = pow(b0, -1, ctx.p)
        one = self.zeros(lam)
        one[0] = self.one()
        two = (2 * one) % ctx.m
        for _ in range(2 * (ctx.N * ctx.e + self.ring.D + lam).bit_length() + 8):
            r = self.mulmod(X, x, P, lam)
            if np.array_equal(r, one):
                return x
            x = self.mulmod(x, (two - r) % ctx.m, P, lam)
        raise PrecisionExhausted("inverse modulo the distinguished polynomial did not settle")


@dataclass(frozen=True)
class DistinguishedPoly:
    """t_var^lam + sum_i tail[i] * t_var^i with tail in the other variables."""

    lam: int
    tail: tuple
    var: int = 0

    def as_series(self, ring):
        """Image in ``ring`` (truncated at its degree bound)."""
        lvl = max([ring.level] + [a.level for a in self.tail])
        ring = ring.with_level(lvl)
        tdeg, arow = _split(ring.d, ring.D, self.var)
        rows = ring._rows()
        live = tdeg < self.lam
        for r in np.flatnonzero(live):
            rows[r] = self.tail[tdeg[r]].at_level(lvl).coeffs[arow[r]]
        if self.lam <= ring.D:
            top = np.flatnonzero((tdeg == self.lam) & (arow == 0))[0]
            rows[top, 0] = 1
        return IwasawaSeries(ring, rows, exact=self.lam <= ring.D)

    def to_json(self):
        return {"lambda": self.lam, "var": self.var, "tail": [a for a in self.tail]}


@dataclass(frozen=True)
class Preparation:
    """p^-mu f = unit * P, plus what is needed to compare results honestly."""

    mu: Fraction
    unit: IwasawaSeries
    P: DistinguishedPoly
    content: PadicScalar = field(repr=False)
    denom_exp: int = 0
    drop: Fraction = Fraction(0)
    order: Fraction | None = None

    def __iter__(self):
        return iter((self.mu, self.unit, self.P))

    @property
    def lam(self):
        return self.P.lam

    def reconstruct(self):
        """content * unit * P * p^-denom_exp, which equals the input series."""
        s = (self.unit * self.P.as_series(self.unit.ring)).scale(self.content)
        return s.times_p_power(-self.denom_exp)


def _content_scalar(p, N, level, mu):
    whole = mu.numerator // mu.denominator
    rest = mu - whole
    c = PadicScalar.from_int(p, N, p**whole, level)
    if rest:
        pi = PadicScalar.zeta(p, N, level) - 1
        c = c * pi ** int(rest * c.ctx.e)
    return c


def weierstrass_prepare(f, var=0):
    """Split f = p^mu * unit * P with P distinguished in ``t_var``.

    Raises HypothesisFailed when the content of f is not seen on the t_var
    axis, and PrecisionExhausted when mu or lambda cannot be certified.
    """
    if f.literal_zero:
        raise ValueError("cannot prepare the zero series")
    if not 0 <= var < f.d:
        raise ValueError(f"variable index {var} out of range for d={f.d}")
    if not satisfies_hypothesis(f, var):
        raise HypothesisFailed(f"mu(f) is not attained on the t_{var} axis")
    ring = f.ring
    ctx = ring.ctx
    mu = f.mu()
    mu_int = mu + f.denom_exp
    F = strip_content(f.coeffs, mu_int, ctx)

    tdeg, arow = _split(f.d, ring.D, var)
    axis = np.flatnonzero(arow == 0)
    keys = min_valuation_keys(F[axis], ctx)
    units = [int(tdeg[i]) for i, k in zip(axis, keys) if k == 0]
    if not units:
        raise PrecisionExhausted("no certified unit coefficient on the distinguished axis")
    lam = min(units)

    ringA = ring.with_vars(f.d - 1)
    ops = _Over(ringA)
    Fp = ops.zeros(ring.D + 1)
    Fp[tdeg, arow] = F

    P = ops.zeros(lam + 1)
    P[lam] = ops.one()
    for _ in range(MAX_NEWTON_STEPS):
        Q, R = ops.divmod(Fp, P, lam)
        if not R.any():
            break
        Qr = ops.divmod(Q, P, lam)[1] if Q.shape[0] > lam else _pad(Q, lam, ops)
        delta = ops.mulmod(R, ops.inverse_mod(Qr, P, lam), P, lam)
        P[:lam] = (P[:lam] + delta) % ctx.m
    else:
        raise PrecisionExhausted("Newton lifting of the distinguished polynomial did not settle")

    urows = ring._rows()
    fits = tdeg <= ring.D - lam
    urows[fits] = Q[tdeg[fits], arow[fits]]
    unit = IwasawaSeries(ring, urows, exact=f.exact and ring.d == 1)
    exact_tail = f.exact and f.d == 1
    tail = tuple(IwasawaSeries(ringA, P[i], exact=exact_tail) for i in range(lam))
    dp = DistinguishedPoly(lam, tail, var)
    order = None
    if not f.exact and lam:
        order = Fraction((ring.D + 1) // lam, ctx.e)
    content = _content_scalar(ring.p, ring.N, ring.level, Fraction(mu_int))
    return Preparation(mu, unit, dp, content, f.denom_exp, Fraction(mu_int), order)


def _pad(Q, lam, ops):
    out = ops.zeros(lam)
    out[: Q.shape[0]] = Q[:lam]
    return out


def _same_poly(a, b):
    """Compare two distinguished polynomials to their certified precision."""
    if a.lam != b.lam:
        return False
    drop = max(a.drop, b.drop)
    orders = [o for o in (a.order, b.order) if o is not None]
    extra = {}
    if orders:
        extra = {"weight": Fraction(1, a.unit.ring.ctx.e), "order": min(orders)}
    return all(agree(x, y, drop=drop, **extra) for x, y in zip(a.P.tail, b.P.tail))


def associates(f, g):
    """Whether f = unit * g, decided through distinguished polynomials.

    Tries each variable as the distinguished one.  Returns False as soon as
    the invariants differ; raises Indeterminate when neither series satisfies
    the preparation hypothesis in any variable.
    """
    if f.literal_zero or g.literal_zero:
        return f.literal_zero and g.literal_zero
    if f.d != g.d:
        raise ValueError("series have different numbers of variables")
    mf, mg = f.mu(), g.mu()
    if mf is PRECISION_EXHAUSTED or mg is PRECISION_EXHAUSTED:
        raise PrecisionExhausted("mu is not certified at this precision")
    if mf != mg:
        return False
    lvl = max(f.level, g.level)
    f, g = f.at_level(lvl), g.at_level(lvl)
    for var in range(f.d):
        hf, hg = satisfies_hypothesis(f, var), satisfies_hypothesis(g, var)
        if hf != hg:
            return False
        if hf:
            return _same_poly(weierstrass_prepare(f, var), weierstrass_prepare(g, var))
    raise Indeterminate("preparation hypothesis fails for every variable")
