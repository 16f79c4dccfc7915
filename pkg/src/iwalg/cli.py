"""Command-line entry point: ``iwalg <command> INPUT.json [options]``.

Exit status: 0 success, 1 domain error, 2 bad input (schema or usage),
3 precision exhausted.  Output is canonical JSON (or TAP for ``suite``).
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import io
from .characters import chi_map, descent_ideals, norm_descent, twist
from .errors import IwalgError, PrecisionExhausted
from .euler import c_chi, dagger, diamond, star_factor, theta
from .harness import (
    char_ideal,
    divisibility_by_kernel,
    functional_equation_check,
    monsky_counts,
    root_lemma_run,
    specialization_shape_check,
)
from .moduli import DEFAULT_RETRIES, classify_fibers, construct_semistable, membership
from .prepare import associates, weierstrass_prepare
from .series import SeriesRing, sharp, specialize

ENV_PREFIX = "IWALG_"
MIN_N = 4
MIN_D = 4


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None
    N: int | None = None
    D: int | None = None
    seed: int = 0
    out: str | None = None
    jobs: int = 1

    @property
    def n_or_default(self):
        return self.N or io.DEFAULT_N

    @property
    def d_or_default(self):
        return self.D or io.DEFAULT_D


# ---------------------------------------------------------------- commands


def _series(obj, cfg, key="series"):
    return io.series_from_json(obj[key], cfg.N, cfg.D)


def _places(obj):
    return [io.place_from_json(v) for v in obj["places"]]


def cmd_mu(obj, cfg):
    return {"mu": io.valuation_json(_series(obj, cfg).mu())}


def cmd_sharp(obj, cfg):
    return {"series": io.series_to_json(sharp(_series(obj, cfg)))}


def cmd_prepare(obj, cfg):
    return io.preparation_to_json(weierstrass_prepare(_series(obj, cfg), obj.get("var", 0)))


def cmd_specialize(obj, cfg):
    return {"series": io.series_to_json(specialize(_series(obj, cfg), io.map_from_json(obj["map"])))}


def cmd_twist(obj, cfg):
    return {"series": io.series_to_json(twist(_series(obj, cfg), io.character_from_json(obj["character"])))}


def cmd_chimap(obj, cfg):
    f = _series(obj, cfg)
    return {"series": io.series_to_json(chi_map(f, io.character_from_json(obj["character"]), io.map_from_json(obj["map"])))}


def cmd_norm(obj, cfg):
    f = _series(obj, cfg)
    sub = io.subgroup_from_json(obj["subgroup"])
    ideals = [{"weight": str(w), "order": str(o)} for w, o in descent_ideals(f, sub)]
    return {"series": io.series_to_json(norm_descent(f, sub)), "certified_modulo": ideals}


def cmd_theta(obj, cfg):
    tower = io.tower_from_json(obj["tower"])
    places = _places(obj)
    tower.check(places)
    M = io.map_from_json(obj["target"])
    x = theta(places, tower, M.matrix, cfg.n_or_default)
    ring = SeriesRing(tower.p, cfg.n_or_default, M.target_dim, cfg.d_or_default)
    return {"zero": x.is_zero(), "group_ring": io.group_ring_to_json(x), "generator": io.series_to_json(x.to_series(ring, normalize=True))}


def cmd_dagger(obj, cfg):
    tower = io.tower_from_json(obj["tower"])
    places = _places(obj)
    ring = SeriesRing(tower.p, cfg.n_or_default, tower.d, cfg.d_or_default)
    return {"series": io.series_to_json(dagger(tower, places, ring))}


def cmd_diamond(obj, cfg):
    tower = io.tower_from_json(obj["tower"])
    chi = io.character_from_json(obj["character"])
    ring = SeriesRing(tower.p, cfg.n_or_default, 1, cfg.d_or_default, chi.level)
    return {"series": io.series_to_json(diamond(io.place_from_json(obj["place"]), chi, tower, ring))}


def cmd_star(obj, cfg):
    tower = io.tower_from_json(obj["tower"])
    omega = io.character_from_json(obj["character"])
    N = cfg.n_or_default
    tau = io.scalar_from_json(obj["tau"], tower.p, N, omega.level)
    x = star_factor(omega, tower, _places(obj), tau, obj["deg_delta"], obj["kappa"], obj["q"], obj.get("conductor"), N)
    return {"star": x.to_json(), "valuation": io.valuation_json(x.valuation())}


def cmd_cchi(obj, cfg):
    level = obj.get("level", 0)
    ring = SeriesRing(obj["p"], cfg.n_or_default, 1, cfg.d_or_default, level)
    P = io.lpoly_from_json(obj["lpoly"], obj["p"], ring.N, level)
    return {"series": io.series_to_json(c_chi(P, obj["q"], ring))}


def cmd_charideal(obj, cfg):
    M = io.module_from_json(obj["module"], cfg.N, cfg.D)
    if not M.factors:
        raise ValueError("module needs at least one series factor to fix the ring")
    return {"series": io.series_to_json(char_ideal(M, M.factors[0][0].ring))}


def cmd_fe_check(obj, cfg):
    return {"functional_equation": functional_equation_check(_series(obj, cfg))}


def cmd_root_lemma(obj, cfg):
    f, g = _series(obj, cfg, "f"), _series(obj, cfg, "g")
    v = root_lemma_run(f, g, tuple(obj.get("levels", (1, 2, 3))), obj.get("conjugates", True))
    return v.to_json()


def cmd_monsky(obj, cfg):
    counts = monsky_counts(_series(obj, cfg), obj["max_level"], Fraction(obj["threshold"]))
    return {"counts": counts, "count": counts[-1]}


def cmd_moduli_member(obj, cfg):
    ok, report = membership(io.pair_from_json(obj["pair"]))
    return {"member": ok, "report": report.to_json()}


def cmd_moduli_classify(obj, cfg):
    return classify_fibers(io.pair_from_json(obj["pair"])).to_json()


def cmd_moduli_construct(obj, cfg):
    W = construct_semistable(obj["q"], obj["n"], cfg.seed, obj.get("retries", DEFAULT_RETRIES))
    return {"pair": W.to_json(), "report": classify_fibers(W).to_json(), "seed": cfg.seed}


COMMANDS = {
    "mu": cmd_mu,
    "sharp": cmd_sharp,
    "prepare": cmd_prepare,
    "specialize": cmd_specialize,
    "twist": cmd_twist,
    "norm": cmd_norm,
    "chimap": cmd_chimap,
    "theta": cmd_theta,
    "dagger": cmd_dagger,
    "diamond": cmd_diamond,
    "star": cmd_star,
    "cchi": cmd_cchi,
    "charideal": cmd_charideal,
    "fe-check": cmd_fe_check,
    "root-lemma": cmd_root_lemma,
    "monsky": cmd_monsky,
    "moduli-member": cmd_moduli_member,
    "moduli-classify": cmd_moduli_classify,
    "moduli-construct": cmd_moduli_construct,
}


# ---------------------------------------------------------------- scenarios


def _scn_char_ideal(x, cfg):
    M = io.module_from_json(x["module"], cfg.N, cfg.D)
    f = io.series_from_json(x["series"], cfg.N, cfg.D)
    return associates(char_ideal(M, f.ring), f)


def _scn_functional_equation(x, cfg):
    return functional_equation_check(io.series_from_json(x["series"], cfg.N, cfg.D))


def _scn_specialization_shape(x, cfg):
    return specialization_shape_check(
        io.module_from_json(x["module"], cfg.N, cfg.D),
        io.module_from_json(x["module_target"], cfg.N, cfg.D),
        io.tower_from_json(x["tower"]),
        [io.place_from_json(v) for v in x["places"]],
        io.map_from_json(x["target"]),
    )


def _scn_root_lemma(x, cfg):
    return cmd_root_lemma(x, cfg)


def _scn_monsky(x, cfg):
    return cmd_monsky(x, cfg)["counts"]


def _scn_divisibility(x, cfg):
    return divisibility_by_kernel(io.series_from_json(x["series"], cfg.N, cfg.D), x["forms"])


SCENARIOS = {
    "char_ideal": _scn_char_ideal,
    "functional_equation": _scn_functional_equation,
    "specialization_shape": _scn_specialization_shape,
    "root_lemma": _scn_root_lemma,
    "monsky": _scn_monsky,
    "divisibility": _scn_divisibility,
}


def _matches(actual, expect):
    """Dict expectations match when every listed key matches; everything else by equality."""
    if isinstance(expect, dict) and isinstance(actual, dict):
        return all(k in actual and _matches(actual[k], v) for k, v in expect.items())
    return actual == expect


def run_scenario(path, cfg):
    """(ok, note) for one scenario file."""
    try:
        obj = io.validate(json.loads(Path(path).read_text()), "scenario")
        actual = SCENARIOS[obj["kind"]](obj["inputs"], cfg)
    except (io.SchemaError, json.JSONDecodeError) as exc:
        return False, f"bad scenario: {exc}"
    except IwalgError as exc:
        return False, f"error {exc.name}"
    except (ValueError, KeyError) as exc:
        return False, f"error {type(exc).__name__}: {exc}"
    if _matches(actual, obj["expect"]):
        return True, ""
    return False, "got " + json.dumps(actual, sort_keys=True)


def shipped_scenarios():
    return Path(str(resources.files("iwalg").joinpath("fixtures", "scenarios")))


def run_suite(directory, cfg):
    """TAP report over every *.json below ``directory``, ordered by relative path."""
    root = Path(directory)
    if not root.is_dir():
        raise UsageError(f"{directory} is not a directory")
    paths = sorted(root.rglob("*.json"), key=lambda p: p.relative_to(root).as_posix())
    with ThreadPoolExecutor(max_workers=max(1, cfg.jobs)) as pool:
        results = list(pool.map(lambda p: run_scenario(p, cfg), paths))
    lines = ["TAP version 13", f"1..{len(paths)}"]
    for i, (path, (ok, note)) in enumerate(zip(paths, results), 1):
        name = path.relative_to(root).as_posix()
        lines.append(f"{'ok' if ok else 'not ok'} {i} - {name}" + (f" # {note}" if note else ""))
    passed = sum(ok for ok, _ in results)
    lines.append(f"# pass {passed}")
    lines.append(f"# fail {len(results) - passed}")
    return "\n".join(lines) + "\n", passed == len(results)


# ---------------------------------------------------------------- driver


def _env_int(name):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{ENV_PREFIX}{name} must be an integer, got {raw!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", "-N", type=int, help="p-adic precision N (env IWALG_PRECISION)")
    common.add_argument("--degree", "-D", type=int, help="total degree bound D (env IWALG_DEGREE)")
    common.add_argument("--seed", type=int, help="random seed (env IWALG_SEED)")
    common.add_argument("--out", "-o", help="write output here instead of stdout")
    parser = argparse.ArgumentParser(prog="iwalg", description="Iwasawa algebra toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        p.add_argument("input", help="input JSON file, or - for stdin")
    p = sub.add_parser("suite", parents=[common], help="run a directory of scenarios")
    p.add_argument("directory", nargs="?", help="scenario directory (default: shipped fixtures)")
    p.add_argument("--jobs", "-j", type=int, help="worker threads (env IWALG_JOBS)")
    return parser


def config_from_args(args):
    def pick(flag, env):
        return flag if flag is not None else _env_int(env)

    N, D = pick(args.precision, "PRECISION"), pick(args.degree, "DEGREE")
    if N is not None and N < MIN_N:
        raise UsageError(f"precision must be at least {MIN_N}")
    if D is not None and D < MIN_D:
        raise UsageError(f"degree must be at least {MIN_D}")
    jobs = pick(getattr(args, "jobs", None), "JOBS") or 1
    return RunConfig(
        args.command,
        getattr(args, "input", None) or getattr(args, "directory", None),
        N,
        D,
        pick(args.seed, "SEED") or 0,
        args.out,
        jobs,
    )


def _read(path):
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return json.loads(text)


def _emit(text, cfg):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def run(cfg):
    """Execute ``cfg``; returns the exit status."""
    try:
        if cfg.command == "suite":
            report, ok = run_suite(cfg.input or shipped_scenarios(), cfg)
            _emit(report, cfg)
            return 0 if ok else 1
        obj = io.validate(_read(cfg.input), "cmd_" + cfg.command)
        result = COMMANDS[cfg.command](obj, cfg)
        _emit(io.dumps(io.to_plain(result)), cfg)
        return 0
    except (io.SchemaError, json.JSONDecodeError, OSError, UsageError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except PrecisionExhausted as exc:
        more = 2 * cfg.n_or_default
        print(f"PrecisionExhausted: {exc}; try --precision {more}", file=sys.stderr)
        return 3
    except IwalgError as exc:
        print(f"{exc.name}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
