"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[criterion k] PASS|FAIL`` line (visible with -s
or in the captured output) before asserting.
"""

import random
import time
from fractions import Fraction

from iwalg import (
    INFINITY,
    PRECISION_EXHAUSTED,
    FiniteCharacter,
    FiniteIndexSubgroup,
    LPolynomial,
    PadicScalar,
    PlaceData,
    SeriesRing,
    SubgroupMap,
    TowerConfig,
    WeierstrassPair,
    agree,
    associates,
    c_chi,
    classify_fibers,
    construct_semistable,
    descent_ideals,
    evaluate_at_character,
    membership,
    norm_descent,
    rho_unit_check,
    root_lemma_run,
    sharp,
    specialize,
    theta,
    twist,
    unit_root,
    varrho,
    weierstrass_prepare,
)
from iwalg.cli import RunConfig, main, run_suite, shipped_scenarios
from iwalg.errors import Indeterminate
from iwalg.harness import monsky_counts
from iwalg.euler import REDUCTIONS, dagger_chi_is_unit
from iwalg.prepare import satisfies_hypothesis
from iwalg.series import evaluate_integral_part

import oracles


def report(capsys, k, ok, detail, elapsed=None, limit=None):
    if limit is not None:
        ok = ok and elapsed < limit
    timing = "" if elapsed is None else f" ({elapsed:.1f}s" + (f", limit {limit}s)" if limit else ")")
    with capsys.disabled():
        print(f"\n[criterion {k}] {'PASS' if ok else 'FAIL'}: {detail}{timing}")
    assert ok, detail


def phi(p, k):
    return (p - 1) * p ** (k - 1)


# ---------------------------------------------------------------- 1


def test_counterexample_regression(capsys):
    start = time.perf_counter()
    problems = []
    for p in (3, 5):
        R = SeriesRing(p, 16, 2, 24)
        t0, t1 = R.gen(0), R.gen(1)
        f = t1 * t1 + t0 * t1 * p**3 + (t0 + p) * p**3
        g = t1 * t1 + (t0 + p) * p**3
        v = root_lemma_run(f, g, levels=(1, 2, 3))
        if len(v.per_zeta) != sum(phi(p, k) for k in (1, 2, 3)):
            problems.append(f"p={p}: tried {len(v.per_zeta)} roots of unity")
        if not all(v.per_zeta.values()):
            problems.append(f"p={p}: some specialization not associate")
        if v.associates is not False:
            problems.append(f"p={p}: two-variable associates = {v.associates}")
        if v.mu != {"f": 0, "f_axis": 3, "g": 0, "g_axis": 3}:
            problems.append(f"p={p}: mu {v.mu}")
    elapsed = time.perf_counter() - start
    report(capsys, 1, not problems, "; ".join(problems) or "p=3,5 over all zeta of order p, p^2, p^3", elapsed, 10)


# ---------------------------------------------------------------- 2


def random_preparable(rng):
    p = rng.choice([2, 3, 5])
    d = rng.choice([1, 2])
    level = rng.choice([0, 0, 1])
    R = SeriesRing(p, 16, d, 24, level)
    e = phi(p, level) if level else 1
    terms = {}
    for _ in range(rng.randint(1, 8)):
        exp = [rng.randint(0, 6) for _ in range(d)]
        terms[tuple(exp)] = PadicScalar(p, 16, level, [rng.randrange(p**16) for _ in range(e)])
    f = R.from_terms(terms)
    if rng.random() < 0.3:
        f = sharp(f)
    return f.times_p_power(rng.randint(0, 2))


def test_preparation_reconstruction(capsys):
    rng = random.Random(2)
    start = time.perf_counter()
    done = bad = 0
    while done < 500:
        f = random_preparable(rng)
        if not satisfies_hypothesis(f, 0):
            continue
        done += 1
        prep = weierstrass_prepare(f)
        g = prep.unit * prep.P.as_series(prep.unit.ring)
        again = weierstrass_prepare(g)
        ok = prep.reconstruct() == f and again.mu == 0 and again.unit == prep.unit and again.P == prep.P
        bad += not ok
    elapsed = time.perf_counter() - start
    report(capsys, 2, bad == 0, f"{done - bad}/{done} series reconstruct and re-prepare", elapsed, 60)


# ---------------------------------------------------------------- 3


def random_poly(rng, R, degree, terms=5, bound=None):
    bound = bound or R.p**R.N
    out = {}
    for _ in range(rng.randint(1, terms)):
        exp = [0] * R.d
        for _ in range(rng.randint(0, degree)):
            exp[rng.randrange(R.d)] += 1
        out[tuple(exp)] = rng.randint(-bound, bound)
    return R.from_terms(out)


def random_character(rng, p, d, max_level=2):
    level = rng.randint(0, max_level)
    return FiniteCharacter(level, [rng.randrange(p**level) if level else 0 for _ in range(d)])


def operator_identities(rng):
    """Every identity for one random (f, g, chi, Phi, m); returns the names that failed."""
    p = rng.choice([3, 5])
    d = rng.choice([1, 2])
    # room for degree 3 * p after sigma -> sigma^p keeps every side exact
    R = SeriesRing(p, 10, d, 16)
    f, g = random_poly(rng, R, 3), random_poly(rng, R, 3)
    a, b = random_character(rng, p, d), random_character(rng, p, d)
    if d == 1:
        Phi = FiniteIndexSubgroup([[p]])
        m = SubgroupMap([[p]])
    else:
        Phi = FiniteIndexSubgroup(rng.choice([[[p, 0], [0, 1]], [[1, 1], [0, p]], [[1, 0], [0, p]]]))
        m = SubgroupMap([[1, rng.randint(0, 3)]])
    failed = []

    if not (sharp(sharp(f)) == f and sharp(f * g) == sharp(f) * sharp(g) and sharp(f + g) == sharp(f) + sharp(g)):
        failed.append("sharp")

    lhs, rhs = twist(twist(f, a), b), twist(f, a.times(b, p))
    lv = max(lhs.level, rhs.level)
    if lhs.at_level(lv) != rhs.at_level(lv):
        failed.append("twist")

    nf, ng, nfg = norm_descent(f, Phi), norm_descent(g, Phi), norm_descent(f * g, Phi)
    if nfg.level != 0 or nfg.denom_exp != 0:
        failed.append("norm integrality")
    if not agree(nfg, nf * ng, ideals=descent_ideals(f * g, Phi)):
        failed.append("norm multiplicativity")

    check = d == 2
    mu, nu = f.mu(), specialize(f, m, check=check).mu()
    if PRECISION_EXHAUSTED not in (mu, nu) and not (mu is INFINITY and nu is INFINITY) and nu < mu:
        failed.append("mu monotone")

    omega = random_character(rng, p, 1)
    if evaluate_at_character(specialize(f, m, check=check), omega) != evaluate_at_character(f, omega.pullback(m)):
        failed.append("evaluate-specialize")
    return failed


def test_operator_identities(capsys):
    rng = random.Random(3)
    start = time.perf_counter()
    failures = [name for _ in range(300) for name in operator_identities(rng)]
    elapsed = time.perf_counter() - start
    report(capsys, 3, not failures, f"300 tuples, failures: {sorted(set(failures)) or 'none'}", elapsed, 120)


# ---------------------------------------------------------------- 4


def _mat(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def random_place(rng, p, d, i):
    red = rng.choice(REDUCTIONS)
    # the unramified coordinate of Frobenius is the degree of v, never 0
    frob = (rng.randint(1, 3),) + tuple(rng.randint(-2, 2) for _ in range(d - 1))
    # inertia never touches the unramified coordinate
    inertia = tuple((0,) + tuple(rng.randint(-2, 2) for _ in range(d - 1)) for _ in range(rng.randint(0, 2)))
    tate = None
    if red == "split-mult":
        tate = tuple(p * x for x in frob) if rng.random() < 0.5 else frob
    a = (rng.choice([1, 2, 4, 5, 7, 8]) % p or 1) if red == "good-ordinary" else None
    return PlaceData(f"v{i}", p ** rng.randint(1, 2), red, frob, a=a, m=rng.choice([1, 1, p]), inertia=inertia, tate_period=tate)


def test_factor_compositionality(capsys):
    rng = random.Random(4)
    start = time.perf_counter()
    good = bad = undecided = 0
    gamma0_mu = []
    for _ in range(200):
        p = rng.choice([2, 3, 5])
        tower = TowerConfig(p, 3, torsion_order=rng.choice([1, p]))
        places = [random_place(rng, p, 3, i) for i in range(rng.randint(1, 3))]
        tower.check(places)
        # L' (rank 1) inside L'' (rank 2) inside L (rank 3)
        M2 = [[1, 0, 0], [0, 1, rng.randint(-2, 2)]]
        M1 = [[1, rng.randint(-2, 2)]]
        R = SeriesRing(p, 8, 1, 10)
        rho_ok = varrho(tower, 1, R) == varrho(tower, 2, R) * varrho(tower, 1, R)
        rho_ok = rho_ok and varrho(tower, 0, R) == varrho(tower, 1, R) * varrho(tower, 0, R)
        lhs = theta(places, tower, _mat(M1, M2), 8).to_series(R, normalize=True)
        pushed = [v.pushforward(M2) for v in places]
        middle = TowerConfig(p, 2, torsion_order=tower.torsion_order)
        rhs = (theta(places, tower, M2, 8).specialize(M1) * theta(pushed, middle, M1, 8)).to_series(R, normalize=True)
        try:
            ok = rho_ok and associates(lhs, rhs)
        except Indeterminate:
            undecided += 1
            continue
        good += ok
        bad += not ok
        gamma0_mu.append(theta(places, tower, tower.to_gamma0(), 8).to_series(R, normalize=True).mu())
    elapsed = time.perf_counter() - start
    mu_ok = all(m == 0 for m in gamma0_mu)
    detail = f"{good} chains hold, {bad} fail, {undecided} undecided; theta to Gamma_0 mu=0 in {sum(m == 0 for m in gamma0_mu)}/{len(gamma0_mu)}"
    report(capsys, 4, bad == 0 and undecided == 0 and mu_ok, detail, elapsed, 60)


# ---------------------------------------------------------------- 5


def test_unit_roots(capsys):
    rng = random.Random(5)
    N = 16
    bad = []
    done = 0
    while done < 50:
        p = rng.choice([2, 3, 5, 7, 11])
        q = p ** rng.randint(1, 3)
        a = rng.randint(-int(2 * q**0.5), int(2 * q**0.5))
        if a % p == 0:
            continue
        done += 1
        m = p**N
        alpha = int(unit_root(PlaceData("v", q, "good-ordinary", (1,), a=a), N).coeffs[0])
        beta = (a - alpha) % m
        if (alpha * alpha - a * alpha + q) % m or (alpha - a) % p or (alpha * beta - q) % m:
            bad.append((p, q, a))
        if alpha != oracles.unit_root_digits(a, q, p, N):
            bad.append((p, q, a, "digits"))
    worked = int(unit_root(PlaceData("v", 5, "good-ordinary", (1,), a=1), 2).coeffs[0])
    ok = not bad and worked == 21
    report(capsys, 5, ok, f"{done} pairs, mismatches {bad or 'none'}; p=q=5, a=1 gives {worked} mod 25")


# ---------------------------------------------------------------- 6


def _embed(coeffs, p, src, dst):
    """Cyclotomic coefficients at level src, written at level dst >= src."""
    if src == dst:
        return list(coeffs)
    step = p ** (dst - max(src, 1)) if src else 0
    out = [0] * phi(p, dst)
    for k, c in enumerate(coeffs):
        out[k * step] += int(c)
    return out


def direct_cchi(P, q, omega, p, N, level):
    """p^(n f) * P(q^-1 omega(F_q)^-1) = sum P_k q^(n-k) zeta^(-a k), in sympy."""
    n = len(P) - 1
    e_root = -omega.images[0] % p**level if level else 0
    total = oracles.as_poly([0])
    for k, c in enumerate(P):
        x_pow = oracles.as_poly([0] * (e_root * k % p**level if level else 0) + [1])
        total = total + oracles.as_poly(c) * x_pow * q ** (n - k)
    return oracles.reduce_cyclo(total, p, N, level)


def test_cchi_interpolation(capsys):
    rng = random.Random(6)
    N, D = 12, 24
    bad = 0
    digits = N
    for _ in range(100):
        p = rng.choice([3, 5])
        f = rng.randint(1, 2)
        q = p**f
        chi_level = rng.randint(0, 1)
        omega = random_character(rng, p, 1, max_level=2)
        level = max(chi_level, omega.level)
        e = phi(p, chi_level) if chi_level else 1
        P = [[1] + [0] * (e - 1)] + [[rng.randrange(p**N) for _ in range(e)] for _ in range(rng.randint(1, 2))]
        lp = LPolynomial(tuple(PadicScalar(p, N, chi_level, c) for c in P))
        ring = SeriesRing(p, N, 1, D, chi_level)
        value, k = evaluate_integral_part(c_chi(lp, q, ring), omega)
        n = len(P) - 1
        want = direct_cchi([_embed(c, p, chi_level, level) for c in P], q, omega, p, N, level)
        shift = n * f - k
        keep = min(value.N, N - shift)
        got = [int(x) % p**keep for x in value.at_level(level).coeffs]
        digits = min(digits, keep)
        if keep < 1 or any(w % p**shift for w in want) or got != [w // p**shift % p**keep for w in want]:
            bad += 1
    report(capsys, 6, bad == 0, f"100 (P, chi, omega) triples, {bad} mismatches, at least {digits} digits compared")


# ---------------------------------------------------------------- 7


def test_unit_checks(capsys):
    rng = random.Random(7)
    failures = []
    count = 0
    for p in (3, 5):
        tower = TowerConfig(p, 2)
        R = SeriesRing(p, 10, 1, 8)
        for lam_red in ("split-mult", "nonsplit-mult"):
            for f in (1, 2):
                v = PlaceData("r", p**f, lam_red, (rng.randint(1, 3), 0))
                for level in (0, 1, 2):
                    for c in range(p**level):
                        chi = FiniteCharacter(level, (c, rng.randrange(p**level) if level else 0))
                        count += 1
                        if not rho_unit_check(v, chi, tower, R):
                            failures.append(("rho", p, lam_red, f, chi))
        S = [PlaceData("n", p, "nonsplit-mult", (1, 0), inertia=((0, 1),))]
        for level in (0, 1, 2):
            for c in range(1 if level == 0 else p):
                tau = PadicScalar.from_int(p, 10, rng.choice([u for u in range(1, 3 * p) if u % p]))
                chi = FiniteCharacter(level, (c, 0))
                count += 1
                if not dagger_chi_is_unit(chi, tower, S, tau, 12, 1, p, R):
                    failures.append(("dagger", p, chi))
    report(capsys, 7, not failures, f"{count} configurations, failures: {failures or 'none'}")


# ---------------------------------------------------------------- 8


def monsky_fixtures():
    """Twenty mu = 0 polynomials in one variable over Z_3, as {exponent: int}."""
    rng = random.Random(8)
    p = 3
    factors = [
        {(1,): 1},
        {(0,): -p, (1,): 1},
        {(0,): -(p**2), (1,): 1},
        {(0,): -p, (2,): 1},
        {(0,): p, (1,): 3, (2,): 1},  # Phi_3(1 + t)
        {(0,): 1, (1,): 1},
        {(0,): 2, (1,): p},
    ]
    out = []
    while len(out) < 20:
        poly = {(0,): 1}
        for _ in range(rng.randint(1, 3)):
            poly = oracles.dict_mul(poly, rng.choice(factors), 24, p**40)
        if max(k[0] for k in poly) <= 8 and poly not in out:
            out.append(poly)
    return out


def enumerate_counts(poly, p, N, max_level):
    counts, total = [], 0
    for level in range(max_level + 1):
        images = [0] if level == 0 else [a for a in range(p**level) if a % p]
        for a in images:
            val = oracles.evaluate_dict(poly, [a], p, N, level)
            v = oracles.norm_valuation(val, p, level)
            total += v is None or v >= 1
        counts.append(total)
    return counts


def test_monsky_finiteness(capsys):
    start = time.perf_counter()
    p, N = 3, 16
    R = SeriesRing(p, N, 1, 24)
    mismatched, unstable = [], []
    fixtures = monsky_fixtures()
    for poly in fixtures:
        f = R.from_terms(poly)
        counts = monsky_counts(f, 4, Fraction(1))
        if counts[3] != counts[4]:
            unstable.append(poly)
        if counts != enumerate_counts(poly, p, N, 4):
            mismatched.append(poly)
    elapsed = time.perf_counter() - start
    ok = not mismatched and not unstable
    report(capsys, 8, ok, f"{len(fixtures)} fixtures, {len(unstable)} unstable, {len(mismatched)} differ from enumeration", elapsed, 120)


# ---------------------------------------------------------------- 9


def random_pair(rng, q, n):
    g2 = tuple(rng.randrange(q) for _ in range(rng.randint(0, 4 * n + 1)))
    g3 = tuple(rng.randrange(q) for _ in range(rng.randint(0, 6 * n + 1)))
    return WeierstrassPair(q, n, g2, g3)


def _ord(v):
    return "inf" if v is INFINITY else v


def test_moduli_suite(capsys):
    start = time.perf_counter()
    problems = []
    for seed in range(10):
        W = construct_semistable(5, 1, seed=seed, retries=10**4)
        ok, rep = membership(W)
        if not ok or any(fb.kind == "additive" for fb in rep.fibers):
            problems.append(f"seed {seed}: not semistable")
    rng = random.Random(9)
    checked = 0
    while checked < 50:
        W = random_pair(rng, rng.choice([5, 7]), rng.choice([1, 2]))
        rep = classify_fibers(W)
        if rep.delta_zero:
            continue
        checked += 1
        want = oracles.fiber_oracle(W.q, W.n, list(W.g2), list(W.g3), max_degree=2)
        got = {1: [], 2: []}
        for fb in rep.fibers:
            if not fb.at_infinity and fb.degree <= 2:
                got[fb.degree].append((_ord(fb.ord_g2), _ord(fb.ord_g3), _ord(fb.ord_delta), fb.kind))
        inf = rep.fibers[-1]
        inf_want = oracles.infinity_oracle(W.n, list(W.g2), list(W.g3), W.q)
        if {k: sorted(v) for k, v in got.items()} != want or (_ord(inf.ord_g2), _ord(inf.ord_g3), _ord(inf.ord_delta), inf.kind) != inf_want:
            problems.append(f"classify mismatch on {W}")
        if sum(fb.degree * fb.ord_delta for fb in rep.fibers) != 12 * W.n:
            problems.append(f"discriminant degree on {W}")
    elapsed = time.perf_counter() - start
    report(capsys, 9, not problems, "; ".join(problems) or f"10 constructions, {checked} pairs vs point evaluation", elapsed, 60)


# ---------------------------------------------------------------- 10


def test_cli_determinism(capsys, tmp_path):
    outs = []
    for jobs in ("1", "1", "4"):
        path = tmp_path / f"suite_{len(outs)}.tap"
        code = main(["suite", "-j", jobs, "-o", str(path)])
        outs.append((code, path.read_bytes()))
    same = len({o for o in outs}) == 1
    ok = same and outs[0][0] == 0
    direct, _ = run_suite(shipped_scenarios(), RunConfig("suite", None, jobs=2))
    ok = ok and direct.encode() == outs[0][1]
    n = outs[0][1].count(b"\nok ")
    report(capsys, 10, ok, f"{n} scenarios, identical across runs and 1/2/4 threads: {same}")
