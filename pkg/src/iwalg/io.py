"""JSON encoding of every domain object, schema validation and canonical dumps.

All numbers that can outgrow a double travel as decimal strings.  Canonical
output is ``json.dumps(sort_keys=True, indent=2)`` plus a trailing newline,
so equal objects serialize to equal bytes.
"""

import json
from functools import lru_cache
from importlib import resources

import jsonschema
import numpy as np

from .characters import FiniteCharacter, FiniteIndexSubgroup
from .euler import LPolynomial, PlaceData, TowerConfig
from .harness import ElementaryModule
from .moduli import WeierstrassPair
from .prepare import DistinguishedPoly
from .scalar import INFINITY, PRECISION_EXHAUSTED, PadicFraction, PadicScalar
from .series import IwasawaSeries, SeriesRing, SubgroupMap

SCHEMA_FILE = "iwalg-v1.json"
SCHEMA_VERSION = 1
DEFAULT_N = 16
DEFAULT_D = 24


class SchemaError(ValueError):
    """Input does not match the shipped schema; ``pointer`` locates the offence."""

    def __init__(self, pointer, message):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"


@lru_cache(maxsize=None)
def schema():
    text = resources.files("iwalg").joinpath("schemas", SCHEMA_FILE).read_text()
    return json.loads(text)


def validate(obj, name):
    """Check ``obj`` against the definition ``name``; raise SchemaError with a JSON pointer."""
    root = schema()
    if name not in root["$defs"]:
        raise KeyError(f"no schema named {name!r}")
    sub = {"$defs": root["$defs"], "$ref": f"#/$defs/{name}"}
    validator = jsonschema.Draft202012Validator(sub)
    err = jsonschema.exceptions.best_match(validator.iter_errors(obj))
    if err is not None:
        pointer = "".join(f"/{str(p).replace('~', '~0').replace('/', '~1')}" for p in err.absolute_path)
        raise SchemaError(pointer, err.message)
    return obj


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------- scalars


def valuation_json(v):
    if v is INFINITY:
        return "inf"
    if v is PRECISION_EXHAUSTED:
        return "exhausted"
    return str(v)


def scalar_from_json(obj, p, N, level=0):
    """PadicScalar from a decimal string or {"level", "coeffs"} (p, N from context)."""
    if isinstance(obj, (str, int)):
        return PadicScalar.from_int(p, N, int(obj), level)
    lvl = obj.get("level", level)
    s = PadicScalar(obj.get("p", p), obj.get("N", N), lvl, [int(c) for c in obj["coeffs"]])
    return s.at_level(max(lvl, level))


# ---------------------------------------------------------------- series


def ring_from_json(obj, N=None, D=None):
    return SeriesRing(obj["p"], N or obj.get("N", DEFAULT_N), obj["d"], D or obj.get("D", DEFAULT_D), obj.get("level", 0))


def _coeff_json(c):
    if c.level == 0:
        return str(int(c.coeffs[0]))
    return [str(int(x)) for x in c.coeffs]


def series_to_json(f):
    return {
        "ring": f.ring.to_json(),
        "denom_exp": f.denom_exp,
        "exact": f.exact,
        "zero": f.literal_zero,
        "terms": [{"exp": list(e), "coeff": _coeff_json(c)} for e, c in sorted(f.terms().items(), key=lambda t: (sum(t[0]), t[0]))],
    }


def series_from_json(obj, N=None, D=None):
    """IwasawaSeries from JSON; ``N``/``D`` re-ring the terms (only lowering is allowed for inexact data)."""
    ring = ring_from_json(obj["ring"], N, D)
    src = obj["ring"]
    exact = obj.get("exact", True)
    if not exact and (ring.N > src.get("N", ring.N) or ring.D > src.get("D", ring.D)):
        raise ValueError("cannot raise the precision of a truncated series")
    terms = {}
    for t in obj.get("terms", []):
        c = t["coeff"]
        if isinstance(c, list):
            c = {"level": ring.level, "coeffs": c}
        terms[tuple(t["exp"])] = scalar_from_json(c, ring.p, ring.N, ring.level)
    f = ring.from_terms(terms, obj.get("denom_exp", 0))
    literal = obj.get("zero", f.literal_zero) and not f.coeffs.any()
    return IwasawaSeries(f.ring, f.coeffs, f.denom_exp, f.exact and exact, literal)


def distinguished_to_json(P):
    return {"lambda": P.lam, "var": P.var, "tail": [series_to_json(a) for a in P.tail]}


def distinguished_from_json(obj):
    return DistinguishedPoly(obj["lambda"], tuple(series_from_json(a) for a in obj["tail"]), obj.get("var", 0))


def preparation_to_json(prep):
    return {
        "mu": valuation_json(prep.mu),
        "lambda": prep.lam,
        "unit": series_to_json(prep.unit),
        "P": distinguished_to_json(prep.P),
        "certified_drop": str(prep.drop),
    }


# ---------------------------------------------------------------- other objects


def character_from_json(obj):
    return FiniteCharacter.from_json(obj)


def subgroup_from_json(obj):
    return FiniteIndexSubgroup.from_json(obj)


def map_from_json(obj):
    return SubgroupMap(obj["M"] if isinstance(obj, dict) else obj)


def place_from_json(obj):
    return PlaceData.from_json(obj)


def tower_from_json(obj):
    return TowerConfig.from_json(obj)


def lpoly_from_json(obj, p, N, level=0):
    return LPolynomial(tuple(scalar_from_json(c, p, N, level) for c in obj["coeffs"]))


def module_from_json(obj, N=None, D=None):
    factors = tuple((series_from_json(f["series"], N, D), f.get("n", 1)) for f in obj.get("factors", []))
    return ElementaryModule(factors, tuple(obj.get("p_part", [])), obj.get("non_torsion", False))


def pair_from_json(obj):
    return WeierstrassPair.from_json(obj)


def group_ring_to_json(x):
    return {"terms": [{"exp": list(a), "coeff": c.to_json()} for a, c in sorted(x.terms.items())]}


def fraction_json(x):
    if isinstance(x, PadicFraction):
        return x.to_json()
    return PadicFraction.of(x).to_json()


def to_plain(obj):
    """Recursively turn numpy scalars into Python ints for dumping."""
    if isinstance(obj, dict):
        return {k: to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    return obj
