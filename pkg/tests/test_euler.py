import pytest
from hypothesis import given
from hypothesis import strategies as st

from iwalg import (
    FiniteCharacter,
    InconsistentFlags,
    LPolynomial,
    NotDivisibleBy12,
    NotOrdinary,
    PadicScalar,
    PlaceData,
    SeriesRing,
    TowerConfig,
    associates,
    c_chi,
    dagger,
    diamond,
    rho_unit_check,
    star_factor,
    theta,
    theta_factor,
    unit_root,
    varrho,
    xi_factor,
)
from iwalg.errors import DaggerVanishes
from iwalg.euler import GroupRingElement, dagger_chi_is_unit
from iwalg.series import binomial_power

import oracles

TOWER = TowerConfig(3, 2)
KILL_T1 = [[1, 0]]


def ring1(p=3, N=10, D=8):
    return SeriesRing(p, N, 1, D)


def test_unit_root_worked_value():
    v = PlaceData("v", 5, "good-ordinary", (1,), a=1)
    assert int(unit_root(v, 2).coeffs[0]) == 21
    assert oracles.unit_root_digits(1, 5, 5, 2) == 21


def test_unit_root_rejects_supersingular():
    with pytest.raises(NotOrdinary):
        unit_root(PlaceData("v", 5, "good-ordinary", (1,), a=5))
    with pytest.raises(NotOrdinary):
        unit_root(PlaceData("v", 5, "split-mult", (1,)))


@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 3), st.integers(-60, 60))
def test_unit_root_matches_digit_oracle(p, f, a):
    q = p**f
    if a % p == 0:
        return
    v = PlaceData("v", q, "good-ordinary", (1,), a=a)
    alpha = int(unit_root(v, 12).coeffs[0])
    assert alpha == oracles.unit_root_digits(a, q, p, 12)
    m = p**12
    beta = q * pow(alpha, -1, m) % m
    assert (alpha + beta - a) % m == 0


def test_varrho_values():
    R = ring1()
    assert varrho(TOWER, 1, R) == R.one()
    assert varrho(TOWER, 0, R) == R.one()
    assert varrho(TowerConfig(3, 2, torsion_order=3), 0, R) == R.constant(9)


def test_theta_case_a_outside_s():
    v = PlaceData("a", 3, "split-mult", (0, 1), m=3)
    assert theta_factor(v, TOWER, KILL_T1, ring1()) == ring1().constant(3)


def test_theta_case_c_split_in_s():
    v = PlaceData("c", 3, "split-mult", (1, 0), inertia=((0, 1),))
    R = ring1()
    assert theta_factor(v, TOWER, KILL_T1, R) == R.gen(0)


def test_theta_case_d_nonsplit():
    v = PlaceData("d", 3, "nonsplit-mult", (0, 1), inertia=((0, 1),), m=3)
    assert theta_factor(v, TOWER, KILL_T1, ring1()) == ring1().constant(6)


def test_theta_case_b_ordinary_product():
    v = PlaceData("g", 3, "good-ordinary", (1, 0), a=1, inertia=((0, 1),))
    R = ring1()
    ainv = unit_root(v, R.N).invert()
    sigma = binomial_power(R, 0, 1)
    want = (R.one() - sigma.scale(ainv)) * (R.one() - binomial_power(R, 0, -1).scale(ainv))
    assert associates(theta_factor(v, TOWER, KILL_T1, R), want)


def test_inconsistent_flags():
    with pytest.raises(InconsistentFlags):
        PlaceData("x", 3, "split-mult", (1, 0), in_S=True)
    with pytest.raises(InconsistentFlags):
        # inertia may not touch the unramified coordinate
        TOWER.check([PlaceData("y", 3, "split-mult", (1, 0), inertia=((1, 0),))])


def test_dagger_table():
    R = SeriesRing(3, 10, 2, 8)
    wide = PlaceData("x", 3, "split-mult", (1, 1), inertia=((0, 1),))
    assert dagger(TOWER, [wide], R) == R.one()
    inert = PlaceData("y", 3, "good-ordinary", (0, 0), a=1, m=3)
    assert dagger(TOWER, [inert], R) == R.constant(3)
    s1 = PlaceData("z", 3, "split-mult", (0, 1), inertia=((0, 1),))
    # 1 - sigma_v with sigma_v = 1 + t_1
    assert dagger(TOWER, [s1], R) == -R.gen(1)


def test_diamond_table():
    R = ring1()
    ns = PlaceData("n", 3, "nonsplit-mult", (1, 0), inertia=((0, 1),))
    assert diamond(ns, FiniteCharacter(1, (1, 0)), TOWER, R) == R.one()
    sp = PlaceData("s", 3, "split-mult", (1, 0), inertia=((0, 1),))
    assert diamond(sp, FiniteCharacter(1, (0, 1)), TOWER, R) == R.one()
    assert diamond(sp, FiniteCharacter.trivial(2), TOWER, R) == R.one() - binomial_power(R, 0, -1)


def test_diamond_ordinary_trivial_character():
    R = ring1(5, 8, 6)
    tw = TowerConfig(5, 2)
    v = PlaceData("o", 5, "good-ordinary", (1, 0), a=2, inertia=((0, 1),))
    ainv = unit_root(v, R.N).invert()
    want = (R.one() - binomial_power(R, 0, -1).scale(ainv)) * (R.one() - binomial_power(R, 0, 1).scale(ainv))
    assert diamond(v, FiniteCharacter.trivial(2), tw, R) == want


def test_xi_examples():
    trivial = FiniteCharacter.trivial(1)
    assert xi_factor([], trivial, set(), 5, 8) == PadicScalar.from_int(5, 8, 1)
    assert xi_factor([PlaceData("s", 5, "split-mult", (1,))], trivial, set(), 5, 8).is_zero()
    v = PlaceData("o", 5, "good-ordinary", (1,), a=1)
    alpha = unit_root(v, 8)
    assert xi_factor([v], trivial, set(), 5, 8) == (1 - alpha.invert()) ** 2


def test_star_collapses_to_q():
    tw = TowerConfig(5, 1)
    one = PadicScalar.from_int(5, 8, 1)
    assert star_factor(FiniteCharacter.trivial(1), tw, [], one, 12, 1, 5, N=8) == 5
    with pytest.raises(NotDivisibleBy12):
        star_factor(FiniteCharacter.trivial(1), tw, [], one, 10, 1, 5, N=8)


def test_star_guard_on_vanishing_dagger():
    # split place in S_1: dagger = 1 - sigma_v, which the trivial character kills
    tw2 = TowerConfig(5, 2)
    v = PlaceData("s", 5, "split-mult", (0, 1), inertia=((0, 1),))
    one = PadicScalar.from_int(5, 8, 1)
    with pytest.raises(DaggerVanishes):
        star_factor(FiniteCharacter.trivial(2), tw2, [v], one, 12, 1, 5, N=8)


def test_c_chi_examples():
    R = SeriesRing(5, 10, 1, 8)
    one = PadicScalar.from_int(5, 10, 1)
    assert c_chi(LPolynomial((one,)), 5, R) == R.one()
    got = c_chi(LPolynomial((one, -one)), 5, R)
    want = R.one() - binomial_power(R, 0, -1).times_p_power(-1)
    assert got == want
    assert got.denom_exp == 1


@pytest.mark.parametrize("lam_red", ["split-mult", "nonsplit-mult"])
@pytest.mark.parametrize("level", [0, 1, 2])
def test_rho_is_a_unit(lam_red, level):
    R = ring1(3, 10, 8)
    v = PlaceData("r", 3, lam_red, (1, 0))
    for c in range(3**level):
        assert rho_unit_check(v, FiniteCharacter(level, (c, 0)), TOWER, R)


def test_dagger_chi_unit():
    R = ring1(3, 10, 8)
    S = [PlaceData("n", 3, "nonsplit-mult", (1, 0), inertia=((0, 1),))]
    tau = PadicScalar.from_int(3, 10, 2)
    for level in (0, 1, 2):
        chi = FiniteCharacter(level, (1 if level else 0, 0))
        assert dagger_chi_is_unit(chi, TOWER, S, tau, 12, 1, 3, R)


def test_group_ring_specialize_accumulates():
    # sigma_0 and sigma_1 both map to sigma, so the coefficients must add
    x = GroupRingElement.group(2, 3, 8, (1, 0)) + GroupRingElement.group(2, 3, 8, (0, 1))
    y = x.specialize([[1, 1]])
    assert y == GroupRingElement.group(1, 3, 8, (1,), 2)


def test_theta_toward_unramified_direction_has_no_p():
    tw = TowerConfig(3, 2)
    places = [
        PlaceData("a", 3, "split-mult", (1, 0), inertia=((0, 1),), tate_period=(0, 3)),
        PlaceData("b", 9, "nonsplit-mult", (2, 1), inertia=((0, 3),)),
        PlaceData("c", 3, "good-ordinary", (1, 2), a=2, inertia=((0, 1),)),
    ]
    th = theta(places, tw, tw.to_gamma0(), 10).to_series(ring1(), normalize=True)
    assert th.mu() == 0
