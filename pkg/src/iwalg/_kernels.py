"""Residue kernels for cyclotomic coefficient vectors.

Every coefficient is a length-``e`` vector of residues mod ``m = p**N`` that
represents an element of Z[x]/(m, Phi_{p^n}(x)).  Two implementations exist:
numba-compiled loops and a vectorised numpy fallback.  Set
``IWALG_DISABLE_NUMBA=1`` to force the fallback.  Moduli of 2**50 or more
switch to object arrays of Python ints, which only the numpy path handles.
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


INT64_LIMIT = 1 << 50


def _env_disabled():
    return os.environ.get("IWALG_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAS_NUMBA and not _env_disabled()


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def dtype_for(m):
    return np.int64 if m < INT64_LIMIT else object


# ---------------------------------------------------------------- numba path


@njit(cache=True)
def _mulmod_nb(a, b, m):
    q = np.int64(float(a) * float(b) / float(m))
    r = a * b - q * m
    r = r % m
    return r


@njit(cache=True)
def _reduce_row_nb(row, e, p, step, m):
    # row has length >= e; fold x^t for t >= e using x^e = -sum x^(i*step)
    for t in range(row.shape[0] - 1, e - 1, -1):
        c = row[t]
        if c == 0:
            continue
        row[t] = 0
        base = t - e
        for i in range(p - 1):
            pos = base + i * step
            v = row[pos] - c
            if v < 0:
                v += m
            row[pos] = v


@njit(cache=True)
def _cmul_nb(a, b, e, p, step, m):
    acc = np.zeros(2 * e - 1, np.int64)
    for u in range(e):
        au = a[u]
        if au == 0:
            continue
        for v in range(e):
            bv = b[v]
            if bv == 0:
                continue
            x = acc[u + v] + _mulmod_nb(au, bv, m)
            if x >= m:
                x -= m
            acc[u + v] = x
    if e > 1:
        _reduce_row_nb(acc, e, p, step, m)
    return acc[:e].copy()


@njit(cache=True)
def _series_mul_nb(A, B, pi, pj, pk, nout, e, p, step, m):
    nzA = np.zeros(A.shape[0], np.bool_)
    nzB = np.zeros(B.shape[0], np.bool_)
    for i in range(A.shape[0]):
        for u in range(e):
            if A[i, u] != 0:
                nzA[i] = True
                break
    for j in range(B.shape[0]):
        for u in range(e):
            if B[j, u] != 0:
                nzB[j] = True
                break
    L = 2 * e - 1
    acc = np.zeros((nout, L), np.int64)
    for t in range(pi.shape[0]):
        i = pi[t]
        j = pj[t]
        if not nzA[i] or not nzB[j]:
            continue
        k = pk[t]
        for u in range(e):
            au = A[i, u]
            if au == 0:
                continue
            for v in range(e):
                bv = B[j, v]
                if bv == 0:
                    continue
                x = acc[k, u + v] + _mulmod_nb(au, bv, m)
                if x >= m:
                    x -= m
                acc[k, u + v] = x
    if e > 1:
        for k in range(nout):
            _reduce_row_nb(acc[k], e, p, step, m)
    return acc[:, :e].copy()


@njit(cache=True)
def _scale_rows_nb(c, A, e, p, step, m):
    out = np.zeros_like(A)
    for i in range(A.shape[0]):
        out[i] = _cmul_nb(c, A[i], e, p, step, m)
    return out


@njit(cache=True)
def _lincomb_nb(C, S, e, p, step, m):
    # sum_r C[r] * S[r], C: (R, e) scalars, S: (R, n, e) series
    n = S.shape[1]
    acc = np.zeros((n, 2 * e - 1), np.int64)
    for r in range(C.shape[0]):
        nz = False
        for u in range(e):
            if C[r, u] != 0:
                nz = True
                break
        if not nz:
            continue
        for i in range(n):
            for u in range(e):
                cu = C[r, u]
                if cu == 0:
                    continue
                for v in range(e):
                    sv = S[r, i, v]
                    if sv == 0:
                        continue
                    x = acc[i, u + v] + _mulmod_nb(cu, sv, m)
                    if x >= m:
                        x -= m
                    acc[i, u + v] = x
    if e > 1:
        for i in range(n):
            _reduce_row_nb(acc[i], e, p, step, m)
    return acc[:, :e].copy()


# ---------------------------------------------------------------- numpy path


def _mulmod_np(a, b, m):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype == object or b.dtype == object:
        return (a * b) % m
    with np.errstate(over="ignore"):
        q = (a.astype(np.float64) * b.astype(np.float64) / float(m)).astype(np.int64)
        r = a * b - q * m
    return r % m


def _reduce_rows_np(acc, e, p, step, m):
    # acc: (..., L) with L >= e, reduced in place top-down
    for t in range(acc.shape[-1] - 1, e - 1, -1):
        c = acc[..., t].copy()
        acc[..., t] = 0
        base = t - e
        for i in range(p - 1):
            acc[..., base + i * step] = (acc[..., base + i * step] - c) % m
    return acc[..., :e]


def _cmul_np(a, b, e, p, step, m):
    acc = np.zeros(2 * e - 1, dtype=a.dtype)
    for u in range(e):
        if a[u] == 0:
            continue
        acc[u:u + e] = (acc[u:u + e] + _mulmod_np(a[u], b, m)) % m
    if e > 1:
        return _reduce_rows_np(acc, e, p, step, m).copy()
    return acc


def _series_mul_np(A, B, pi, pj, starts, nout, e, p, step, m):
    acc = np.zeros((nout, 2 * e - 1), dtype=A.dtype)
    Ai = A[pi]
    Bj = B[pj]
    for u in range(e):
        col = Ai[:, u]
        if not col.any():
            continue
        prod = _mulmod_np(col[:, None], Bj, m)
        block = np.add.reduceat(prod, starts, axis=0) % m
        acc[:, u:u + e] = (acc[:, u:u + e] + block) % m
    if e > 1:
        return _reduce_rows_np(acc, e, p, step, m).copy()
    return acc


def _scale_rows_np(c, A, e, p, step, m):
    acc = np.zeros((A.shape[0], 2 * e - 1), dtype=A.dtype)
    for u in range(e):
        if c[u] == 0:
            continue
        acc[:, u:u + e] = (acc[:, u:u + e] + _mulmod_np(c[u], A, m)) % m
    if e > 1:
        return _reduce_rows_np(acc, e, p, step, m).copy()
    return acc


def _lincomb_np(C, S, e, p, step, m):
    n = S.shape[1]
    acc = np.zeros((n, 2 * e - 1), dtype=S.dtype)
    for u in range(e):
        cu = C[:, u]
        if not cu.any():
            continue
        prod = _mulmod_np(cu[:, None, None], S, m)
        acc[:, u:u + e] = (acc[:, u:u + e] + prod.sum(axis=0) % m) % m
    if e > 1:
        return _reduce_rows_np(acc, e, p, step, m).copy()
    return acc


# ---------------------------------------------------------------- dispatch


def _fast(*arrays):
    return USE_NUMBA and all(a.dtype == np.int64 for a in arrays)


def cmul(a, b, e, p, step, m):
    """Product of two coefficient vectors."""
    if _fast(a, b):
        return _cmul_nb(a, b, e, p, step, m)
    return _cmul_np(a, b, e, p, step, m)


def reduce_rows(acc, e, p, step, m):
    """Fold rows of length >= e back to length e (modifies ``acc``)."""
    if acc.shape[-1] <= e:
        return acc[..., :e] % m
    if _fast(acc) and acc.ndim == 1:
        _reduce_row_nb(acc, e, p, step, m)
        return acc[:e].copy()
    return _reduce_rows_np(acc, e, p, step, m).copy()


def series_mul(A, B, table, e, p, step, m):
    """Truncated product through a precomputed pair table."""
    if _fast(A, B):
        return _series_mul_nb(A, B, table.pi, table.pj, table.pk, table.nout, e, p, step, m)
    return _series_mul_np(A, B, table.pi, table.pj, table.starts, table.nout, e, p, step, m)


def scale_rows(c, A, e, p, step, m):
    """Multiply every row of ``A`` by the scalar vector ``c``."""
    if _fast(c, A):
        return _scale_rows_nb(c, A, e, p, step, m)
    return _scale_rows_np(c, A, e, p, step, m)


def lincomb(C, S, e, p, step, m):
    """Sum of scalar multiples ``sum_r C[r] * S[r]``."""
    if C.shape[0] == 0:
        return np.zeros(S.shape[1:], dtype=S.dtype)
    if _fast(C, S):
        return _lincomb_nb(C, S, e, p, step, m)
    return _lincomb_np(C, S, e, p, step, m)


@njit(cache=True)
def _series_mul_many_nb(c, B, pi, pj, pk, nout, e, p, step, m):
    out = np.zeros((B.shape[0], nout, e), np.int64)
    for r in range(B.shape[0]):
        out[r] = _series_mul_nb(c, B[r], pi, pj, pk, nout, e, p, step, m)
    return out


def series_mul_many(c, B, table, e, p, step, m):
    """Products ``c * B[r]`` for a stack of series ``B``."""
    if _fast(c, B):
        return _series_mul_many_nb(c, B, table.pi, table.pj, table.pk, table.nout, e, p, step, m)
    return np.stack([series_mul(c, b, table, e, p, step, m) for b in B]) if len(B) else np.zeros(B.shape, B.dtype)


@njit(cache=True)
def _matmul_nb(T, F, m):
    n, e = T.shape[0], F.shape[1]
    out = np.zeros((n, e), np.int64)
    for i in range(n):
        for k in range(T.shape[1]):
            t = T[i, k]
            if t == 0:
                continue
            for u in range(e):
                x = out[i, u] + _mulmod_nb(t, F[k, u], m)
                if x >= m:
                    x -= m
                out[i, u] = x
    return out


def matmul_mod(T, F, m):
    """Integer matrix ``T`` (entries in [0, m)) times residue rows ``F``."""
    if _fast(T, F):
        return _matmul_nb(T, F, m)
    if T.dtype == object or F.dtype == object:
        return (T.astype(object) @ F.astype(object)) % m
    out = np.zeros((T.shape[0], F.shape[1]), dtype=np.int64)
    for k in np.flatnonzero(T.any(axis=0)):
        out = (out + _mulmod_np(T[:, k:k + 1], F[k:k + 1, :], m)) % m
    return out
