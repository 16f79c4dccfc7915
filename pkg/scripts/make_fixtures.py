"""Regenerate the shipped fixtures and scenarios (deterministic)."""

import random
import sys
from pathlib import Path

from iwalg import PlaceData, SeriesRing, SubgroupMap, TowerConfig, specialize
from iwalg.io import dumps, series_to_json

SEED = 20240611
OUT = Path(__file__).resolve().parents[1] / "src" / "iwalg" / "fixtures"
N, D = 16, 24


def counterexample_pair(p, N=N, D=D):
    R = SeriesRing(p, N, 2, D)
    t0, t1 = R.gen(0), R.gen(1)
    f = t1 * t1 + t0 * t1 * p**3 + (t0 + p) * p**3
    g = t1 * t1 + (t0 + p) * p**3
    return f, g


def write(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))


def scenario(kind, inputs, expect, name):
    return {"version": 1, "kind": kind, "name": name, "inputs": inputs, "expect": expect}


def main():
    for p in (3, 5):
        f, g = counterexample_pair(p)
        write(OUT / f"counterexample_p{p}.json", {"version": 1, "f": series_to_json(f), "g": series_to_json(g), "levels": [1, 2, 3]})
        write(OUT / f"counterexample_series_p{p}.json", {"version": 1, "series": series_to_json(f)})

    S = OUT / "scenarios"
    rng = random.Random(SEED)

    f, g = counterexample_pair(3, 16, 12)
    expect = {"hypothesis_ok": False, "all_zeta_associates": True, "associates": False, "conclusion": "not-associates"}
    write(S / "root_lemma" / "counterexample_p3.json", scenario("root_lemma", {"f": series_to_json(f), "g": series_to_json(g)}, expect, "counterexample pair"))
    for k in range(3):
        p = rng.choice([3, 5])
        R = SeriesRing(p, 12, 2, 10)
        t0, t1 = R.gen(0), R.gen(1)
        base = t0 * t0 + t1 * p + p * rng.randrange(1, p)
        u = R.one() + t0 * t1 * p
        inputs = {"f": series_to_json(base * u), "g": series_to_json(base), "levels": [1, 2]}
        expect = {"hypothesis_ok": True, "all_zeta_associates": True, "associates": True}
        write(S / "root_lemma" / f"unit_multiple_{k}.json", scenario("root_lemma", inputs, expect, "unit multiple"))

    R = SeriesRing(3, N, 1, D)
    t = R.gen(0)
    sym = R.group_element((1,)) + R.group_element((-1,)) - R.constant(2)
    for name, s, exp in [("t0", t, True), ("symmetric", sym, True), ("t0_plus_p", t + 3, False)]:
        write(S / "functional_equation" / f"{name}.json", scenario("functional_equation", {"series": series_to_json(s)}, exp, name))

    for name, s in [("t0", t), ("t0_minus_p", (t - 3) * (R.one() + t))]:
        write(S / "monsky" / f"{name}.json", scenario("monsky", {"series": series_to_json(s), "max_level": 4, "threshold": "1"}, [1] * 5, name))
    write(S / "monsky" / "unit.json", scenario("monsky", {"series": series_to_json(R.one() + t), "max_level": 3, "threshold": "1"}, [0] * 4, "unit"))

    f1 = t + 3
    M = {"factors": [{"series": series_to_json(f1), "n": 1}], "p_part": [2]}
    write(S / "char_ideal" / "f_plus_p2.json", scenario("char_ideal", {"module": M, "series": series_to_json(f1 * 9)}, True, "f and p^2"))
    write(S / "char_ideal" / "wrong_mu.json", scenario("char_ideal", {"module": M, "series": series_to_json(f1 * 3)}, False, "mu off by one"))
    Mz = {"factors": [{"series": series_to_json(f1), "n": 1}], "non_torsion": True}
    write(S / "char_ideal" / "non_torsion.json", scenario("char_ideal", {"module": Mz, "series": series_to_json(R.zero())}, True, "zero ideal"))

    R2 = SeriesRing(3, 12, 2, 10)
    s = R2.group_element((1, 2)) - R2.one()
    h = R2.gen(0) + R2.gen(1) * 3 + 3
    write(S / "divisibility" / "multiple.json", scenario("divisibility", {"series": series_to_json(s * h), "forms": [[1, 2]]}, True, "constructed multiple"))
    write(S / "divisibility" / "one.json", scenario("divisibility", {"series": series_to_json(R2.one()), "forms": [[1, 2]]}, False, "unit"))

    # f on Gamma = Z_3^2, a place outside S with m_v = 3 and decomposition
    # group killed by the projection, so theta = (3) and M' = Lambda'/(f')
    tower = TowerConfig(3, 2)
    places = [PlaceData("w", 3, "split-mult", (0, 1), m=3), PlaceData("v", 9, "good-ordinary", (1, 1), a=1)]
    target = [[1, 0]]
    fM = R2.gen(0) * R2.gen(0) + R2.gen(1) + 3
    sub = R2.with_vars(1)
    fp = specialize(fM, SubgroupMap(target))
    module = {"factors": [{"series": series_to_json(fM), "n": 1}], "p_part": [1]}
    for name, rhs, exp in [("consistent", fp, True), ("perturbed", fp * (sub.gen(0) + 3), False)]:
        inputs = {
            "module": module,
            "module_target": {"factors": [{"series": series_to_json(rhs), "n": 1}]},
            "tower": tower.to_json(),
            "places": [v.to_json() for v in places],
            "target": target,
        }
        write(S / "specialization_shape" / f"{name}.json", scenario("specialization_shape", inputs, exp, name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
