"""Dispatch of queries and rule instances, and per-instance verification."""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

from pydantic import TypeAdapter

from . import calculus_rules as cr
from . import normal_cones as nc
from .mappings import PolyMapping, clarke_coderivative, coderivative
from .oracle import (
    SamplingConfig,
    clarke_dirderiv_estimate,
    frechet_normal_reject,
    limiting_normal_sample,
    subgradient_membership_exact,
)
from .pl_functions import (
    INF,
    CellPL,
    ConvexPL,
    directional_derivative_convex,
    eval_pl,
    singular_subdifferential_convex,
    subdifferential_convex,
    to_cells,
)
from .polyhedra import (
    PolyUnion,
    Polyhedron,
    UnboundedError,
    as_union,
    normal_cone_convex,
    union_equal,
)
from .schema import (
    FunctionModel,
    InstanceFile,
    MappingModel,
    PolyModel,
    QueryModel,
    SetModel,
    enc_report,
    enc_scalar,
    enc_set,
    expected_set,
    to_function,
    to_mapping,
    to_polyhedron,
    to_set,
    vec_of,
)


class UndefinedError(ValueError):
    """The requested object is not defined at the given data (outside a domain, wrong class)."""


# ---------------------------------------------------------------------------
# rule registry

_ARG_DECODERS: dict[str, Callable[[Any], Any]] = {
    "function": lambda v: to_function(TypeAdapter(FunctionModel).validate_python(v)),
    "functions": lambda v: [to_function(TypeAdapter(FunctionModel).validate_python(x)) for x in v],
    "mapping": lambda v: to_mapping(TypeAdapter(MappingModel).validate_python(v)),
    "set": lambda v: to_set(TypeAdapter(SetModel).validate_python(v)),
    "polyhedron": lambda v: to_polyhedron(PolyModel.model_validate(v)),
    "vec": lambda v: vec_of([_scalar_text(x) for x in v]),
    "matrix": lambda v: [vec_of([_scalar_text(x) for x in row]) for row in v],
}


def _scalar_text(x) -> str:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ValueError("scalars must be strings 'p/q' or integers")
    return str(x)


def _optimal_value(F, phi, x, y):
    return cr.optimal_value_subdifferential(cr.OptValueInstance(F, phi, x, y))


@dataclass(frozen=True)
class RuleSpec:
    fn: Callable
    args: dict
    isc: bool = False  # accepts the inner-semicontinuity override
    extra: tuple = ()  # fixed keyword arguments


RULES: dict[str, RuleSpec] = {
    "optimal-value": RuleSpec(_optimal_value, {"F": "mapping", "phi": "function", "x": "vec", "y": "vec"}),
    "chain-scalar": RuleSpec(cr.chain_rule_scalar, {"f": "function", "outer": "function", "x": "vec"}),
    "chain-vector": RuleSpec(cr.chain_rule_vector, {"fs": "functions", "g": "function", "x": "vec"}),
    "sum": RuleSpec(cr.convex_sum_rule, {"fs": "functions", "x": "vec"}),
    "max": RuleSpec(cr.convex_max_rule, {"fs": "functions", "x": "vec"}),
    "constrained-marginal": RuleSpec(
        cr.constrained_marginal_rule, {"phi": "function", "K": "polyhedron", "x": "vec", "y": "vec"}
    ),
    "affine-preimage": RuleSpec(
        cr.affine_preimage_rule, {"phi": "function", "A": "matrix", "b": "vec", "x": "vec", "y": "vec"}
    ),
    "inf-convolution": RuleSpec(cr.inf_convolution_rule, {"f1": "function", "f2": "function", "x": "vec"}),
    "coderivative-sum": RuleSpec(
        cr.clarke_coderivative_sum_rule,
        {"F1": "mapping", "F2": "mapping", "x": "vec", "y": "vec", "y1": "vec", "y2": "vec", "ystar": "vec"},
        isc=True,
    ),
    "restriction": RuleSpec(
        cr.clarke_restriction_rule, {"F": "mapping", "omega": "set", "x": "vec", "y": "vec", "ystar": "vec"}
    ),
    "intersection": RuleSpec(cr.clarke_intersection_rule, {"omega1": "set", "omega2": "set", "x": "vec"}),
    "subdifferential-sum": RuleSpec(cr.clarke_subdifferential_sum_rule, {"phis": "functions", "x": "vec"}),
    "subdifferential-sum-singular": RuleSpec(
        cr.clarke_subdifferential_sum_rule, {"phis": "functions", "x": "vec"}, extra=(("singular", True),)
    ),
    "coderivative-chain": RuleSpec(
        cr.clarke_chain_rule,
        {"G": "mapping", "F": "mapping", "x": "vec", "y": "vec", "z": "vec", "zstar": "vec"},
        isc=True,
    ),
    "preimage": RuleSpec(cr.clarke_preimage_rule, {"F": "mapping", "omega": "set", "x": "vec", "y": "vec"}, isc=True),
    "affine-chain": RuleSpec(cr.clarke_smooth_chain_rule, {"g": "function", "A": "matrix", "b": "vec", "x": "vec"}),
    "affine-chain-singular": RuleSpec(
        cr.clarke_smooth_chain_rule,
        {"g": "function", "A": "matrix", "b": "vec", "x": "vec"},
        extra=(("singular", True),),
    ),
}


class ArgumentError(ValueError):
    """A rule instance has missing, unknown or malformed arguments; carries a location."""

    def __init__(self, loc: str, msg: str):
        super().__init__(f"{loc}: {msg}")
        self.loc = loc
        self.msg = msg


def decode_rule_args(rule: str, args: dict) -> dict:
    if rule not in RULES:
        raise ArgumentError("payload.rule", f"unknown rule {rule!r}; known: {', '.join(sorted(RULES))}")
    spec = RULES[rule]
    missing = sorted(set(spec.args) - set(args))
    unknown = sorted(set(args) - set(spec.args))
    if missing:
        raise ArgumentError("payload.args", f"missing arguments {missing}")
    if unknown:
        raise ArgumentError("payload.args", f"unknown arguments {unknown}")
    out = {}
    for name, kind in spec.args.items():
        try:
            out[name] = _ARG_DECODERS[kind](args[name])
        except (ValueError, TypeError, KeyError) as exc:
            raise ArgumentError(f"payload.args.{name}", str(exc).splitlines()[0]) from exc
    return out


def run_rule(rule: str, args: dict, *, assume_inner_semicontinuous: bool = False) -> cr.RuleReport:
    spec = RULES[rule]
    decoded = decode_rule_args(rule, args)
    kwargs = dict(spec.extra)
    if spec.isc:
        kwargs["assume_inner_semicontinuous"] = assume_inner_semicontinuous
    return spec.fn(*decoded.values(), **kwargs)


# ---------------------------------------------------------------------------
# queries

SUBDIFF_VARIANTS = ("convex", "frechet", "limiting", "clarke", "singular", "clarke-singular")
NORMAL_VARIANTS = ("convex", "frechet", "limiting", "clarke", "tangent")
CODERIV_VARIANTS = ("limiting", "clarke")


def _need_convex(f) -> ConvexPL:
    if not isinstance(f, ConvexPL):
        raise UndefinedError("the convex variant needs a convex-pl function")
    return f


def _check_dim(v, dim, what):
    if len(v) != dim:
        raise UndefinedError(f"{what} has dimension {len(v)}, expected {dim}")


def evaluate(f, x):
    _check_dim(x, f.dim, "point")
    return eval_pl(f, x)


def subdiff(f, x, variant: str = "convex"):
    _check_dim(x, f.dim, "point")
    if variant == "convex":
        g = _need_convex(f)
        return subdifferential_convex(g, x) if eval_pl(g, x) != INF else Polyhedron.empty(f.dim)
    if variant == "singular":
        if isinstance(f, ConvexPL):
            if eval_pl(f, x) == INF:
                return Polyhedron.empty(f.dim)
            return singular_subdifferential_convex(f, x)
        return nc.limiting_singular_subdifferential(f, x)
    table = {
        "frechet": nc.frechet_subdifferential,
        "limiting": nc.limiting_subdifferential,
        "clarke": nc.clarke_subdifferential,
        "clarke-singular": nc.clarke_singular_subdifferential,
    }
    if variant not in table:
        raise UndefinedError(f"unknown subdifferential variant {variant!r}")
    return table[variant](f, x)


def normal_cone(omega, x, variant: str = "limiting"):
    omega = as_union(omega)
    _check_dim(x, omega.dim, "point")
    if variant == "convex":
        if len(omega.parts) != 1:
            raise UndefinedError("the convex variant needs a single polyhedron")
        p = omega.parts[0]
        return normal_cone_convex(p, x) if p.contains(x) else Polyhedron.empty(omega.dim)
    table = {
        "frechet": nc.frechet_normal_union,
        "limiting": nc.limiting_normal_union,
        "clarke": nc.clarke_normal_union,
        "tangent": nc.clarke_tangent_cone,
    }
    if variant not in table:
        raise UndefinedError(f"unknown normal-cone variant {variant!r}")
    return table[variant](omega, x)


def coderiv(F: PolyMapping, x, y, ystar, variant: str = "limiting"):
    _check_dim(x, F.dim_in, "x")
    _check_dim(y, F.dim_out, "y")
    _check_dim(ystar, F.dim_out, "y*")
    if variant == "limiting":
        return coderivative(F, x, y, ystar)
    if variant == "clarke":
        return clarke_coderivative(F, x, y, ystar)
    raise UndefinedError(f"unknown coderivative variant {variant!r}")


def dirderiv(f, x, v, variant: str = "clarke"):
    _check_dim(x, f.dim, "point")
    _check_dim(v, f.dim, "direction")
    if variant == "convex":
        g = _need_convex(f)
        if eval_pl(g, x) == INF:
            raise UndefinedError("x̄ is outside the domain")
        return directional_derivative_convex(g, x, v)
    if variant == "clarke":
        try:
            return nc.clarke_directional_derivative(f, x, v)
        except ValueError as exc:
            raise UndefinedError(str(exc)) from exc
    raise UndefinedError(f"unknown directional-derivative variant {variant!r}")


def _require(q: QueryModel, *names):
    for n in names:
        if getattr(q, n) is None:
            raise ArgumentError(f"query.{n}", "field required for this operation")


def run_query(obj, kind: str, q: QueryModel):
    """Returns the raw result (Fraction/INF, Polyhedron or PolyUnion)."""
    op = q.op
    if op in ("eval", "subdiff", "dirderiv"):
        if kind != "function":
            raise ArgumentError("query.op", f"{op} needs a function instance")
        _require(q, "point")
        x = vec_of(q.point)
        if op == "eval":
            return evaluate(obj, x)
        if op == "subdiff":
            return subdiff(obj, x, q.variant or "convex")
        _require(q, "direction")
        return dirderiv(obj, x, vec_of(q.direction), q.variant or "clarke")
    if op == "normal-cone":
        if kind != "set":
            raise ArgumentError("query.op", "normal-cone needs a set instance")
        _require(q, "point")
        return normal_cone(obj, vec_of(q.point), q.variant or "limiting")
    if kind != "mapping":
        raise ArgumentError("query.op", "coderiv needs a mapping instance")
    _require(q, "x", "y", "ystar")
    return coderiv(obj, vec_of(q.x), vec_of(q.y), vec_of(q.ystar), q.variant or "limiting")


def encode_result(res) -> dict:
    if isinstance(res, (Polyhedron, PolyUnion)):
        return enc_set(res)
    return {"value": enc_scalar(res)}


# ---------------------------------------------------------------------------
# oracle cross-checks


def _rng_for(name: str, seed: int) -> random.Random:
    return random.Random(seed * 1_000_003 + zlib.crc32(name.encode()))


def _random_vector(rng: random.Random, dim: int) -> tuple:
    return tuple(Fraction(rng.randint(-12, 12), rng.choice((1, 2, 4))) for _ in range(dim))


def membership_cross_check(f: ConvexPL, x, sub: Polyhedron, rng: random.Random, count: int = 25) -> dict:
    """Biconditional ``x* ∈ sub ⇔ subgradient_membership_exact`` on random candidates and the vertices."""
    cands = [_random_vector(rng, f.dim) for _ in range(count)] + list(sub.vertices)
    for c in cands:
        if sub.contains(c) != subgradient_membership_exact(f, x, c):
            return {"check": "membership", "ok": False, "witness": [enc_scalar(t) for t in c]}
    return {"check": "membership", "ok": True, "candidates": len(cands)}


def dirderiv_cross_check(f, x, cfg: SamplingConfig, directions=None) -> dict:
    """The sampled estimate never exceeds the exact value and reaches it within tolerance."""
    n = f.dim
    if directions is None:
        directions = [tuple(Fraction(s if j == i else 0) for j in range(n)) for i in range(n) for s in (1, -1)]
    worst = Fraction(0)
    for v in directions:
        exact = nc.clarke_directional_derivative(f, x, v)
        est = clarke_dirderiv_estimate(f, x, v, cfg).estimate
        if est > exact:
            return {"check": "dirderiv", "ok": False, "direction": [enc_scalar(t) for t in v], "reason": "estimate above exact"}
        worst = max(worst, exact - est)
    ok = worst <= cfg.tolerance
    return {"check": "dirderiv", "ok": ok, "max_gap": enc_scalar(worst), "directions": len(directions)}


def limiting_cross_check(omega, x, cfg: SamplingConfig) -> dict:
    s = limiting_normal_sample(omega, x, cfg)
    return {"check": "limiting-sample", "ok": s.contained and s.covered, "contained": s.contained, "covered": s.covered}


def frechet_cross_check(omega, x, cfg: SamplingConfig) -> dict:
    """Every generator of the exact Fréchet cone survives the sampling refuter."""
    fr = nc.frechet_normal_union(omega, x)
    gens = list(fr.rays) + list(fr.lineality) + [tuple(-t for t in g) for g in fr.lineality]
    for g in gens:
        if frechet_normal_reject(omega, x, g, cfg).rejected:
            return {"check": "frechet-reject", "ok": False, "witness": [enc_scalar(t) for t in g]}
    return {"check": "frechet-reject", "ok": True, "generators": len(gens)}


def oracle_checks(obj, kind: str, q: Optional[QueryModel], name: str, cfg: SamplingConfig) -> list[dict]:
    if q is None:
        return []
    out = []
    rng = _rng_for(name, cfg.seed)
    if kind == "function" and q.point is not None:
        x = vec_of(q.point)
        if len(x) != obj.dim or eval_pl(obj, x) == INF:
            return []
        if isinstance(obj, ConvexPL):
            out.append(membership_cross_check(obj, x, subdifferential_convex(obj, x), rng))
        if to_cells(obj).is_full_domain():
            dirs = None
            if q.direction is not None:
                n = obj.dim
                dirs = [vec_of(q.direction)] + [tuple(Fraction(1 if j == i else 0) for j in range(n)) for i in range(n)]
            out.append(dirderiv_cross_check(obj, x, cfg, dirs))
    elif kind == "set" and q.point is not None:
        omega, x = as_union(obj), vec_of(q.point)
        if omega.dim <= 3 and omega.contains(x):
            out.append(limiting_cross_check(omega, x, cfg))
            out.append(frechet_cross_check(omega, x, cfg))
    return out


# ---------------------------------------------------------------------------
# verification of one instance file


def _expected_matches(expected: dict, result) -> tuple[bool, str]:
    if "value" in expected:
        want = expected["value"]
        got = enc_scalar(result) if not isinstance(result, (Polyhedron, PolyUnion)) else None
        return got == (want if want in ("inf", "-inf") else enc_scalar(Fraction(want))), "value"
    if "set" in expected:
        if not isinstance(result, (Polyhedron, PolyUnion)):
            return False, "set"
        return union_equal(as_union(result), as_union(expected_set(expected["set"]))), "set"
    return True, "none"


_REPORT_FIELDS = ("verdict", "observed", "relation_claimed", "qc_status")


def _rule_expected(expected: dict, report: cr.RuleReport) -> list[str]:
    bad = []
    expected = {k: v for k, v in expected.items() if k != "error"}
    for k in _REPORT_FIELDS:
        if k in expected and getattr(report, k) != expected[k]:
            bad.append(f"{k}: expected {expected[k]!r}, got {getattr(report, k)!r}")
    for side in ("lhs", "rhs"):
        if side in expected and not union_equal(getattr(report, side), as_union(expected_set(expected[side]))):
            bad.append(f"{side} differs from expected")
    for k, want in expected.get("auxiliary", {}).items():
        got = report.auxiliary.get(k)
        if isinstance(got, (Polyhedron, PolyUnion)):
            ok = union_equal(as_union(got), as_union(expected_set(want)))
        else:
            ok = got == want
        if not ok:
            bad.append(f"auxiliary {k} differs from expected")
    return bad


def verify_instance(path, *, oracle: bool = True, cfg: SamplingConfig = SamplingConfig()) -> dict:
    """Run one instance file; the record is JSON-ready and free of timing data."""
    path = Path(path)
    name = path.name
    rec: dict[str, Any] = {"instance": name}
    try:
        inst = InstanceFile.model_validate_json(path.read_text(encoding="utf-8"))
    except Exception as exc:  # pydantic or JSON errors
        rec.update(status="error", error={"error": "parse", "message": str(exc).splitlines()[0]})
        return rec
    rec["kind"] = inst.kind
    expected = inst.expected or {}
    try:
        if inst.kind == "rule-instance":
            rule = inst.payload["rule"]
            rec["rule_id"] = rule
            isc = bool(expected.get("assume_inner_semicontinuous", False))
            report = run_rule(rule, inst.payload["args"], assume_inner_semicontinuous=isc)
            rec["report"] = enc_report(report)
            rec["verdict"] = report.verdict
            problems = _rule_expected({k: v for k, v in expected.items() if k != "assume_inner_semicontinuous"}, report)
            if report.verdict == cr.REFUTED:
                problems.insert(0, "rule refuted")
            if "error" in expected:
                problems.append(f"expected error {expected['error']!r}, got a report")
            rec["oracle"] = []
        else:
            from .schema import decode

            obj = decode(inst.kind, inst.payload)
            if inst.query is None:
                rec.update(status="pass", checks=[], oracle=[])
                return rec
            res = run_query(obj, inst.kind, inst.query)
            rec["result"] = encode_result(res)
            problems = []
            if "error" in expected:
                problems.append(f"expected error {expected['error']!r}, got a result")
            else:
                ok, what = _expected_matches(expected, res)
                if not ok:
                    problems.append(f"{what} differs from expected")
            rec["oracle"] = oracle_checks(obj, inst.kind, inst.query, name, cfg) if oracle else []
            problems += [f"oracle {c['check']} failed" for c in rec["oracle"] if not c["ok"]]
    except UnboundedError as exc:
        return _error_record(rec, expected, "unbounded", str(exc))
    except (cr.PreconditionError, UndefinedError) as exc:
        return _error_record(rec, expected, "undefined", str(exc))
    except ArgumentError as exc:
        rec.update(status="error", error={"error": "parse", "location": exc.loc, "message": exc.msg})
        return rec
    rec["problems"] = problems
    rec["status"] = "pass" if not problems else "fail"
    return rec


def _error_record(rec: dict, expected: dict, kind: str, msg: str) -> dict:
    rec["error"] = {"error": kind, "message": msg}
    want = expected.get("error")
    rec["status"] = "pass" if want == kind else "fail"
    if want != kind:
        rec["problems"] = [f"unexpected {kind} error"]
    return rec
