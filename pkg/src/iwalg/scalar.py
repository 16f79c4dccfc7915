"""Elements of Z_p[zeta_{p^n}] held modulo p^N.

An element is a residue vector ``c`` of length ``e = phi(p^n)`` (``e = 1`` for
level 0) standing for ``sum c_j x^j`` in Z[x]/Phi_{p^n}(x).  Valuations are
read off in the basis of powers of the uniformiser ``pi = x - 1``, where the
terms ``b_k pi^k`` have pairwise distinct valuations ``v_p(b_k) + k/e``.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from . import _kernels as K
from .errors import NotAUnit


def is_prime(n):
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def totient_pp(p, n):
    """phi(p^n), with phi(1) = 1."""
    return 1 if n == 0 else (p - 1) * p ** (n - 1)


@dataclass(frozen=True)
class Prime:
    p: int
    N: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.N < 1:
            raise ValueError("precision N must be >= 1")

    @property
    def modulus(self):
        return self.p**self.N


# ------------------------------------------------------------------ valuations


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "inf"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("iwalg-inf")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __add__(self, other):
        return self

    __radd__ = __add__


class _Exhausted:
    __slots__ = ()

    def __repr__(self):
        return "precision-exhausted"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("iwalg-exhausted")

    def _refuse(self, other):
        raise TypeError("precision-exhausted valuation is not comparable")

    __lt__ = __le__ = __gt__ = __ge__ = __add__ = __radd__ = _refuse


INFINITY = _Infinity()
PRECISION_EXHAUSTED = _Exhausted()


def is_finite(v):
    return v is not INFINITY and v is not PRECISION_EXHAUSTED


def format_valuation(v):
    if v is INFINITY:
        return "inf"
    if v is PRECISION_EXHAUSTED:
        return "precision-exhausted"
    return str(Fraction(v))


# ------------------------------------------------------------------ contexts


@dataclass(frozen=True)
class Cyclo:
    """Arithmetic constants for one (p, N, level)."""

    p: int
    N: int
    level: int

    @property
    def e(self):
        return totient_pp(self.p, self.level)

    @property
    def m(self):
        return self.p**self.N

    @property
    def step(self):
        return self.p ** (self.level - 1) if self.level >= 1 else 1

    @property
    def dtype(self):
        return K.dtype_for(self.m)

    def zeros(self, *shape):
        return np.zeros(shape + (self.e,), dtype=self.dtype)

    def mul(self, a, b):
        return K.cmul(a, b, self.e, self.p, self.step, self.m)

    def scale_rows(self, c, rows):
        return K.scale_rows(c, rows, self.e, self.p, self.step, self.m)


@lru_cache(maxsize=None)
def cyclo(p, N, level):
    return Cyclo(p, N, level)


def cyclotomic_coeffs(p, level):
    """Integer coefficients of Phi_{p^n}, constant term first."""
    if level == 0:
        raise ValueError("level 0 has no cyclotomic modulus")
    step = p ** (level - 1)
    out = [0] * ((p - 1) * step + 1)
    for i in range(p):
        out[i * step] = 1
    return out


@lru_cache(maxsize=None)
def _shift_matrix(e, m, sign, dtype):
    # B[j, i] = C(j, i) sign^(j - i): coefficient of x^i in (x + sign)^j
    B = np.zeros((e, e), dtype=object)
    for j in range(e):
        for i in range(j + 1):
            B[j, i] = comb(j, i) * sign ** (j - i) % m
    B = B.astype(dtype)
    B.setflags(write=False)
    return B


def taylor_shift(rows, m, sign=1):
    """Replace c(x) by c(x + sign) along the last axis, mod m."""
    a = np.asarray(rows)
    e = a.shape[-1]
    if e == 1:
        return np.array(a, copy=True) % m
    flat = np.ascontiguousarray(a.reshape(-1, e)) % m
    out = K.matmul_mod(flat, _shift_matrix(e, m, sign, flat.dtype), m)
    return out.reshape(a.shape)


def to_pi_basis(rows, m):
    return taylor_shift(rows, m, 1)


def from_pi_basis(rows, m):
    return taylor_shift(rows, m, -1)


def vp_array(a, p, cap):
    """p-adic valuation of each residue; ``cap`` marks zero residues."""
    a = np.array(a, copy=True)
    out = np.zeros(a.shape, dtype=np.int64)
    zero = a == 0
    out[zero] = cap
    live = ~zero
    while live.any():
        div = live & (a % p == 0)
        if not div.any():
            break
        out[div] += 1
        a[div] //= p
        live = div
    return out


def min_valuation_keys(rows, ctx):
    """Valuation of each row as an integer in units of 1/e, or -1 if the row is zero."""
    rows = np.asarray(rows)
    b = to_pi_basis(rows, ctx.m) if ctx.e > 1 else rows
    cap = ctx.N + 1
    v = vp_array(b, ctx.p, cap)
    keys = v * ctx.e + np.arange(ctx.e)
    keys[v == cap] = np.iinfo(np.int64).max
    best = keys.min(axis=-1)
    best[best == np.iinfo(np.int64).max] = -1
    return best


@lru_cache(maxsize=None)
def _p_over_pi(p, N, level):
    ctx = cyclo(p, N, level)
    m, e = ctx.m, ctx.e
    phi = cyclotomic_coeffs(p, level)
    # coefficients of Phi(y + 1): Eisenstein, constant term p
    shifted = [sum(comb(j, k) * phi[j] for j in range(k, len(phi))) for k in range(len(phi))]
    u_pi = np.array([1] + [shifted[i] // p % m for i in range(1, e)], dtype=ctx.dtype)
    u = PadicScalar(p, N, level, from_pi_basis(u_pi, m))
    pi_pow = np.zeros(e, dtype=ctx.dtype)
    pi_pow[e - 1] = 1
    pi_pow = from_pi_basis(pi_pow, m)
    w = -(PadicScalar(p, N, level, pi_pow) * u.invert())
    return w.coeffs


def divide_rows_by_pi(rows, ctx):
    """Divide each row (valuation >= 1/e assumed) by pi; pi * result == rows."""
    rows = np.asarray(rows)
    p, m = ctx.p, ctx.m
    if ctx.level == 0:
        return rows // p
    b0 = rows.sum(axis=-1) % m
    q = np.zeros_like(rows)
    e = ctx.e
    acc = np.zeros(rows.shape[:-1], dtype=rows.dtype)
    for j in range(e - 1, 0, -1):
        acc = (acc + rows[..., j]) % m
        q[..., j - 1] = acc
    w = _p_over_pi(p, ctx.N, ctx.level)
    lift = b0 // p
    flat = lift.reshape(-1)
    extra = np.stack([K._mulmod_np(c, w, m) for c in flat]) if flat.size else np.zeros((0, e), rows.dtype)
    return (q + extra.reshape(rows.shape)) % m


def strip_content(rows, mu, ctx):
    """Divide rows by p^floor(mu) * pi^(frac(mu) e)."""
    mu = Fraction(mu)
    whole = mu.numerator // mu.denominator
    rest = int((mu - whole) * ctx.e)
    out = np.asarray(rows)
    if whole:
        out = out // (ctx.p**whole)
    for _ in range(rest):
        out = divide_rows_by_pi(out, ctx)
    return out


def embed_rows(rows, p, src, dst):
    """Raise the cyclotomic level of coefficient rows via x -> x^(p^(dst-src))."""
    if dst == src:
        return rows
    if dst < src:
        raise ValueError("cannot lower a cyclotomic level")
    e_dst = totient_pp(p, dst)
    out = np.zeros(rows.shape[:-1] + (e_dst,), dtype=rows.dtype)
    if src == 0:
        out[..., 0] = rows[..., 0]
    else:
        stride = p ** (dst - src)
        out[..., ::stride][..., : rows.shape[-1]] = rows
    return out


# ------------------------------------------------------------------ scalars


class PadicScalar:
    """An element of O_chi = Z_p[zeta_{p^n}] modulo p^N."""

    __slots__ = ("p", "N", "level", "coeffs")

    def __init__(self, p, N, level, coeffs):
        ctx = cyclo(p, N, level)
        vals = [int(c) for c in np.ravel(np.asarray(coeffs, dtype=object))]
        if len(vals) != ctx.e:
            raise ValueError(f"level {level} needs {ctx.e} coefficients, got {len(vals)}")
        arr = np.array([c % ctx.m for c in vals], dtype=ctx.dtype)
        arr.setflags(write=False)
        self.p = p
        self.N = N
        self.level = level
        self.coeffs = arr

    @classmethod
    def _raw(cls, p, N, level, arr):
        obj = cls.__new__(cls)
        obj.p, obj.N, obj.level = p, N, level
        arr = np.array(arr, dtype=cyclo(p, N, level).dtype)
        arr.setflags(write=False)
        obj.coeffs = arr
        return obj

    @classmethod
    def from_int(cls, p, N, value, level=0):
        ctx = cyclo(p, N, level)
        arr = np.zeros(ctx.e, dtype=ctx.dtype)
        arr[0] = int(value) % ctx.m
        return cls._raw(p, N, level, arr)

    @classmethod
    def zeta(cls, p, N, level, power=1):
        """zeta_{p^level}^power."""
        ctx = cyclo(p, N, level)
        if level == 0:
            return cls.from_int(p, N, 1)
        arr = np.zeros(p**level, dtype=ctx.dtype)
        arr[power % (p**level)] = 1
        red = K.reduce_rows(arr, ctx.e, p, ctx.step, ctx.m)
        return cls._raw(p, N, level, red)

    @property
    def prime(self):
        return Prime(self.p, self.N)

    @property
    def ctx(self):
        return cyclo(self.p, self.N, self.level)

    def __repr__(self):
        if self.level == 0:
            return f"PadicScalar({int(self.coeffs[0])} mod {self.p}^{self.N})"
        return f"PadicScalar(level={self.level}, {[int(c) for c in self.coeffs]} mod {self.p}^{self.N})"

    # -- coercion
    def at_level(self, level):
        return PadicScalar._raw(self.p, self.N, level, embed_rows(self.coeffs, self.p, self.level, level))

    def at_precision(self, N):
        if N > self.N:
            raise ValueError("cannot raise precision")
        return PadicScalar._raw(self.p, N, self.level, np.array(self.coeffs, dtype=object) % self.p**N)

    def _coerce(self, other):
        if isinstance(other, int):
            other = PadicScalar.from_int(self.p, self.N, other)
        if not isinstance(other, PadicScalar):
            return None, None
        if other.p != self.p:
            raise ValueError("mismatched primes")
        a, b = self, other
        N = min(a.N, b.N)
        if a.N != N:
            a = a.at_precision(N)
        if b.N != N:
            b = b.at_precision(N)
        lv = max(a.level, b.level)
        return a.at_level(lv), b.at_level(lv)

    # -- arithmetic
    def __add__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return PadicScalar._raw(a.p, a.N, a.level, (a.coeffs + b.coeffs) % a.ctx.m)

    __radd__ = __add__

    def __neg__(self):
        return PadicScalar._raw(self.p, self.N, self.level, (-self.coeffs) % self.ctx.m)

    def __sub__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return PadicScalar._raw(a.p, a.N, a.level, (a.coeffs - b.coeffs) % a.ctx.m)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return PadicScalar._raw(a.p, a.N, a.level, a.ctx.mul(a.coeffs, b.coeffs))

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            return self.invert() ** (-k)
        result = PadicScalar.from_int(self.p, self.N, 1, self.level)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a * b.invert()

    def __eq__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return bool(np.array_equal(a.coeffs, b.coeffs))

    def __hash__(self):
        return hash((self.p, self.N, self.level, tuple(int(c) for c in self.coeffs)))

    def is_zero(self):
        return not self.coeffs.any()

    # -- p-adic structure
    def pi_coordinates(self):
        """Coefficients in the basis pi^k, pi = zeta - 1."""
        if self.level == 0:
            return np.array(self.coeffs)
        return to_pi_basis(self.coeffs, self.ctx.m)

    def valuation(self):
        key = int(min_valuation_keys(self.coeffs[None, :], self.ctx)[0])
        if key < 0:
            return PRECISION_EXHAUSTED
        return Fraction(key, self.ctx.e)

    def is_unit(self):
        return int(self.pi_coordinates()[0]) % self.p != 0

    def invert(self):
        b0 = int(self.pi_coordinates()[0])
        if b0 % self.p == 0:
            raise NotAUnit(f"{self!r} has positive valuation")
        ctx = self.ctx
        x = PadicScalar.from_int(self.p, self.N, pow(b0, -1, ctx.m), self.level)
        one = PadicScalar.from_int(self.p, self.N, 1, self.level)
        for _ in range(4 * (ctx.N * ctx.e).bit_length() + 4):
            r = self * x
            if r == one:
                return x
            x = x * (2 - r)
        raise AssertionError("Newton inversion failed to converge")

    def divide_by_pi(self, times=1):
        """Exact division by pi (or by p at level 0); requires enough valuation."""
        rows = self.coeffs[None, :]
        for _ in range(times):
            rows = divide_rows_by_pi(rows, self.ctx)
        return PadicScalar._raw(self.p, self.N, self.level, rows[0])

    def to_json(self):
        return {
            "p": self.p,
            "N": self.N,
            "level": self.level,
            "coeffs": [str(int(c)) for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["p"], obj["N"], obj["level"], [int(c) for c in obj["coeffs"]])

    def reciprocal(self):
        """(y, k) with self * y = p^k and k = ceil(valuation)."""
        v = self.valuation()
        if v is PRECISION_EXHAUSTED:
            raise NotAUnit("zero has no reciprocal at this precision")
        e = self.ctx.e
        a = int(v * e)
        k = -(-a // e)
        u = self.divide_by_pi(a) if a else self
        if self.level == 0:
            return u.invert(), k
        pi = PadicScalar.zeta(self.p, self.N, self.level) - 1
        W = PadicScalar.from_int(self.p, self.N, self.p, self.level).divide_by_pi(e)
        return pi ** (k * e - a) * W**k * u.invert(), k


class PadicFraction:
    """p^-k * num with num a PadicScalar; elements of Q_chi at finite precision."""

    __slots__ = ("num", "k")

    def __init__(self, num, k=0):
        while k > 0 and not num.is_zero() and all(int(c) % num.p == 0 for c in num.coeffs):
            num = PadicScalar._raw(num.p, num.N, num.level, np.array([int(c) // num.p for c in num.coeffs], dtype=object))
            k -= 1
        if num.is_zero():
            k = 0
        self.num = num
        self.k = k

    @classmethod
    def of(cls, x):
        return x if isinstance(x, PadicFraction) else cls(x, 0)

    def __repr__(self):
        return f"PadicFraction(p^-{self.k} * {self.num!r})" if self.k else f"PadicFraction({self.num!r})"

    def __mul__(self, other):
        other = PadicFraction.of(other) if not isinstance(other, int) else PadicFraction(PadicScalar.from_int(self.num.p, self.num.N, other))
        return PadicFraction(self.num * other.num, self.k + other.k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * PadicFraction.of(other).inverse()

    def inverse(self):
        y, k = self.num.reciprocal()
        # (p^-a n)^-1 = p^a / n = p^(a - k) y
        j = self.k - k
        if j >= 0:
            return PadicFraction(y * self.num.p**j, 0)
        return PadicFraction(y, -j)

    def valuation(self):
        v = self.num.valuation()
        return v if v is PRECISION_EXHAUSTED else v - self.k

    def is_unit(self):
        """Unit of O_chi (valuation 0)."""
        return self.valuation() == 0

    def __eq__(self, other):
        if isinstance(other, (int, PadicScalar)):
            other = PadicFraction.of(other if isinstance(other, PadicScalar) else PadicScalar.from_int(self.num.p, self.num.N, other))
        if not isinstance(other, PadicFraction):
            return NotImplemented
        k = max(self.k, other.k)
        return self.num * self.num.p ** (k - self.k) == other.num * other.num.p ** (k - other.k)

    def __hash__(self):
        return hash((self.num, self.k))

    def to_json(self):
        return {"num": self.num.to_json(), "denom_exp": self.k}
