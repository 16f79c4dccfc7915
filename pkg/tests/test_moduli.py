import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iwalg import INFINITY, CharTooSmall, WeierstrassPair, classify_fibers, construct_semistable, membership

import oracles


def _o(v):
    return "inf" if v is INFINITY else v


def test_simple_zeros_are_members():
    # g2 = t (t - 1), g3 = 1: Delta = (t^3 (t-1)^3 - 1) / 1728
    W = WeierstrassPair(5, 1, (0, 4, 1), (1,))
    ok, report = membership(W)
    assert ok
    assert all(f.kind != "additive" for f in report.fibers if not f.at_infinity)


def test_fourth_and_sixth_powers_are_rejected():
    # g2 = 2 t^4, g3 = t^6: orders (4, 6) at t = 0 give min(12, 12) = 12
    W = WeierstrassPair(5, 1, (0, 0, 0, 0, 2), (0, 0, 0, 0, 0, 0, 1))
    ok, report = membership(W)
    assert not ok
    bad = [f for f in report.fibers if not f.member]
    assert bad and not bad[0].at_infinity


def test_vanishing_discriminant():
    ok, report = membership(WeierstrassPair(5, 1, (1,), (1,)))
    assert not ok and report.delta_zero


def test_constant_discriminant_piles_up_at_infinity():
    report = classify_fibers(WeierstrassPair(7, 1, (), (1,)))
    assert not report.member
    *finite, inf = report.fibers
    assert all(f.kind == "good" for f in finite)
    assert inf.ord_delta == 12 and inf.kind == "additive"


def test_common_zero_is_additive():
    # g2 and g3 both vanish at t = 2
    W = WeierstrassPair(7, 1, (5, 1), (5, 1))
    kinds = {tuple(f.point.coeffs.tolist()) if not f.at_infinity else "inf": f.kind for f in classify_fibers(W).fibers}
    assert "additive" in kinds.values()


def test_characteristic_three_is_refused():
    with pytest.raises(CharTooSmall):
        WeierstrassPair(3, 1, (1,), (1,))


def test_degree_bounds():
    with pytest.raises(ValueError):
        WeierstrassPair(5, 1, (1, 1, 1, 1, 1, 1), (1,))


@pytest.mark.parametrize("seed", range(4))
def test_construction_is_semistable(seed):
    W = construct_semistable(5, 1, seed=seed)
    ok, report = membership(W)
    assert ok and report.semistable
    assert construct_semistable(5, 1, seed=seed) == W


def test_degenerate_degree():
    with pytest.raises(ValueError):
        construct_semistable(5, 0)


def test_json_roundtrip():
    W = construct_semistable(7, 1, seed=3)
    assert WeierstrassPair.from_json(W.to_json()) == W
    report = classify_fibers(W).to_json()
    assert report["fibers"][-1]["point"] == "inf"


def test_normalized_keeps_fiber_types():
    W = WeierstrassPair(5, 1, (1, 2, 0, 3), (4, 0, 1))
    N = W.normalized()
    assert N.normalized() == N
    assert classify_fibers(N).kinds() == classify_fibers(W).kinds()


@st.composite
def pairs(draw):
    q = draw(st.sampled_from([5, 7]))
    n = draw(st.integers(1, 2))
    g2 = draw(st.lists(st.integers(0, q - 1), max_size=4 * n + 1))
    g3 = draw(st.lists(st.integers(0, q - 1), max_size=6 * n + 1))
    return WeierstrassPair(q, n, tuple(g2), tuple(g3))


@settings(max_examples=25)
@given(pairs())
def test_fibers_match_point_evaluation(W):
    report = classify_fibers(W)
    if report.delta_zero:
        return
    want = oracles.fiber_oracle(W.q, W.n, list(W.g2), list(W.g3), max_degree=2)
    got = {1: [], 2: []}
    for f in report.fibers:
        if not f.at_infinity and f.degree <= 2:
            got[f.degree].append((_o(f.ord_g2), _o(f.ord_g3), _o(f.ord_delta), f.kind))
    assert {k: sorted(v) for k, v in got.items()} == want
    inf = report.fibers[-1]
    assert sum(f.degree * f.ord_delta for f in report.fibers) == 12 * W.n
    assert (_o(inf.ord_g2), _o(inf.ord_g3), _o(inf.ord_delta), inf.kind) == oracles.infinity_oracle(W.n, list(W.g2), list(W.g3), W.q)
