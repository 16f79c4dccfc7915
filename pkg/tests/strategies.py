"""Hypothesis strategies for the truncated rings."""

from hypothesis import strategies as st

from iwalg import FiniteCharacter, PadicScalar, SeriesRing

small_primes = st.sampled_from([2, 3, 5])
odd_primes = st.sampled_from([3, 5])


@st.composite
def scalars(draw, p, N, level, bound=None):
    e = (p - 1) * p ** (level - 1) if level else 1
    hi = bound if bound is not None else p**N - 1
    return PadicScalar(p, N, level, [draw(st.integers(0, hi)) for _ in range(e)])


@st.composite
def integer_polys(draw, d, D, bound=50, max_terms=6):
    """Sparse {exp: int} with total degree <= D."""
    n = draw(st.integers(1, max_terms))
    out = {}
    for _ in range(n):
        exp = []
        left = D
        for _ in range(d):
            a = draw(st.integers(0, left))
            exp.append(a)
            left -= a
        out[tuple(exp)] = draw(st.integers(-bound, bound))
    return {k: v for k, v in out.items() if v}


@st.composite
def series(draw, ring, max_terms=6, bound=None):
    terms = draw(integer_polys(ring.d, ring.D, bound or ring.p**ring.N, max_terms))
    return ring.from_terms(terms)


@st.composite
def rings(draw, d=None, D=(4, 8), N=(6, 12), level=0, primes=small_primes):
    p = draw(primes)
    return SeriesRing(p, draw(st.integers(*N)), draw(st.integers(1, 2)) if d is None else d, draw(st.integers(*D)), level)


@st.composite
def characters(draw, p, d, max_level=2):
    level = draw(st.integers(0, max_level))
    return FiniteCharacter(level, [draw(st.integers(0, p**level - 1)) if level else 0 for _ in range(d)])
