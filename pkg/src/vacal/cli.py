"""Command-line interface.

Exit codes: 0 success, 1 a refuted rule or a regression mismatch, 2 an input
that does not parse (with its location), 3 an unbounded or undefined
quantity (reported as a JSON error object on stdout).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from pydantic import ValidationError

from . import __version__
from .calculus_rules import PreconditionError
from .oracle import SamplingConfig
from .polyhedra import UnboundedError
from .runner import (
    CODERIV_VARIANTS,
    NORMAL_VARIANTS,
    RULES,
    SUBDIFF_VARIANTS,
    ArgumentError,
    UndefinedError,
    coderiv,
    dirderiv,
    encode_result,
    evaluate,
    normal_cone,
    run_rule,
    subdiff,
    verify_instance,
)
from .schema import PAYLOAD_KINDS, InstanceFile, decode, dumps, enc_report, parse_payload
from .rational import q

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_UNDEFINED = 0, 1, 2, 3

REPORT_SCHEMA = "vacal-report/1"


class ParseFailure(Exception):
    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location
        self.message = message


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))


def _point(text: str, what: str) -> tuple:
    try:
        return tuple(q(t.strip()) for t in text.split(",") if t.strip() != "")
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseFailure(f"argument {what}", f"not a comma-separated list of rationals: {text!r}") from exc


def _load(path: str) -> InstanceFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseFailure(path, exc.strerror or str(exc)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from exc
    try:
        # the payload is checked first so its errors carry a full path
        if isinstance(data, dict) and data.get("kind") in PAYLOAD_KINDS and isinstance(data.get("payload"), dict):
            prefix = "payload."
            parse_payload(data["kind"], data["payload"])
        prefix = ""
        return InstanceFile.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = prefix + ".".join(str(p) for p in err["loc"])
        raise ParseFailure(f"{path}:{loc}", err["msg"]) from exc


def _load_kind(path: str, kind: str):
    inst = _load(path)
    if inst.kind != kind:
        raise ParseFailure(f"{path}:kind", f"expected a {kind} instance, got {inst.kind}")
    return inst, decode(inst.kind, inst.payload)


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    _, f = _load_kind(args.file, "function")
    _emit(encode_result(evaluate(f, _point(args.point, "POINT"))))
    return EXIT_OK


def cmd_subdiff(args) -> int:
    _, f = _load_kind(args.file, "function")
    _emit(encode_result(subdiff(f, _point(args.point, "POINT"), args.variant)))
    return EXIT_OK


def cmd_dirderiv(args) -> int:
    _, f = _load_kind(args.file, "function")
    res = dirderiv(f, _point(args.point, "POINT"), _point(args.direction, "DIRECTION"), args.variant)
    _emit(encode_result(res))
    return EXIT_OK


def cmd_normal_cone(args) -> int:
    _, omega = _load_kind(args.file, "set")
    _emit(encode_result(normal_cone(omega, _point(args.point, "POINT"), args.variant)))
    return EXIT_OK


def cmd_coderiv(args) -> int:
    _, F = _load_kind(args.file, "mapping")
    res = coderiv(F, _point(args.x, "X"), _point(args.y, "Y"), _point(args.ystar, "YSTAR"), args.variant)
    _emit(encode_result(res))
    return EXIT_OK


def cmd_rule(args) -> int:
    inst = _load(args.file)
    if inst.kind != "rule-instance":
        raise ParseFailure(f"{args.file}:kind", "expected a rule-instance")
    if inst.payload["rule"] != args.rule_id:
        raise ParseFailure(f"{args.file}:payload.rule", f"instance is for {inst.payload['rule']!r}, not {args.rule_id!r}")
    try:
        report = run_rule(args.rule_id, inst.payload["args"], assume_inner_semicontinuous=args.assume_inner_semicontinuous)
    except ArgumentError as exc:
        raise ParseFailure(f"{args.file}:{exc.loc}", exc.msg) from exc
    _emit(enc_report(report))
    return EXIT_FAIL if report.refuted else EXIT_OK


def default_suite() -> Path:
    env = os.environ.get("VACAL_CORPUS")
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "corpus"


def _sampling_config(args) -> SamplingConfig:
    kw = {"seed": args.seed, "grid_density": args.grid_density, "tolerance": args.tolerance}
    if args.radii:
        kw["radius_sequence"] = tuple(_point(args.radii, "--radii"))
    try:
        return SamplingConfig(**kw)
    except ValueError as exc:
        raise ParseFailure("oracle options", str(exc)) from exc


def run_suite(suite: Path, *, oracle: bool, jobs: int, cfg: SamplingConfig) -> dict:
    files = sorted(p for p in suite.glob("*.json"))
    work = partial(verify_instance, oracle=oracle, cfg=cfg)
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(work, files))
    else:
        records = [work(p) for p in files]
    records.sort(key=lambda r: r["instance"])
    verdicts = Counter(r.get("verdict") for r in records if r.get("verdict"))
    statuses = Counter(r["status"] for r in records)
    return {
        "schema": REPORT_SCHEMA,
        "oracle": "on" if oracle else "off",
        "sampling": {
            "radius_sequence": [str(r) for r in cfg.radius_sequence],
            "grid_density": cfg.grid_density,
            "tolerance": str(cfg.tolerance),
            "seed": cfg.seed,
        },
        "summary": {
            "instances": len(records),
            "status": dict(sorted(statuses.items())),
            "verdicts": dict(sorted(verdicts.items())),
        },
        "instances": records,
    }


def _summary_line(r: dict) -> str:
    tag = r.get("rule_id") or r.get("kind", "?")
    extra = r.get("verdict") or (r.get("error") or {}).get("error") or ""
    line = f"{r['status'].upper():5} {r['instance']} [{tag}] {extra}".rstrip()
    if r.get("problems"):
        line += " :: " + "; ".join(r["problems"])
    return line


def cmd_verify(args) -> int:
    suite = Path(args.suite) if args.suite else default_suite()
    if not suite.is_dir():
        raise ParseFailure(str(suite), "suite directory not found")
    cfg = _sampling_config(args)
    report = run_suite(suite, oracle=args.oracle == "on", jobs=max(1, args.jobs), cfg=cfg)
    for r in report["instances"]:
        print(_summary_line(r), file=sys.stderr)
    s = report["summary"]
    print(f"{s['instances']} instances: " + ", ".join(f"{k}={v}" for k, v in s["status"].items()), file=sys.stderr)
    text = dumps(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if any(r["status"] == "error" for r in report["instances"]):
        bad_parse = [r for r in report["instances"] if r.get("error", {}).get("error") == "parse"]
        if bad_parse:
            return EXIT_PARSE
    return EXIT_OK if all(r["status"] == "pass" for r in report["instances"]) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vacal", description="Exact variational calculus for polyhedral data.")
    p.add_argument("--version", action="version", version=f"vacal {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", help="evaluate a piecewise-linear function")
    e.add_argument("file")
    e.add_argument("point", help="comma-separated rationals, e.g. 1/2,0")
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("subdiff", help="subdifferential of a function at a point")
    s.add_argument("file")
    s.add_argument("point")
    s.add_argument("--variant", choices=SUBDIFF_VARIANTS, default="convex")
    s.set_defaults(func=cmd_subdiff)

    d = sub.add_parser("dirderiv", help="directional derivative at a point")
    d.add_argument("file")
    d.add_argument("point")
    d.add_argument("direction")
    d.add_argument("--variant", choices=("clarke", "convex"), default="clarke")
    d.set_defaults(func=cmd_dirderiv)

    n = sub.add_parser("normal-cone", help="normal or tangent cone of a set at a point")
    n.add_argument("file")
    n.add_argument("point")
    n.add_argument("--variant", choices=NORMAL_VARIANTS, default="limiting")
    n.set_defaults(func=cmd_normal_cone)

    c = sub.add_parser("coderiv", help="coderivative of a mapping")
    c.add_argument("file")
    c.add_argument("x")
    c.add_argument("y")
    c.add_argument("ystar")
    c.add_argument("--variant", choices=CODERIV_VARIANTS, default="limiting")
    c.set_defaults(func=cmd_coderiv)

    r = sub.add_parser("rule", help="apply a calculus rule to an instance")
    r.add_argument("rule_id", choices=sorted(RULES))
    r.add_argument("file")
    r.add_argument("--assume-inner-semicontinuous", action="store_true")
    r.set_defaults(func=cmd_rule)

    v = sub.add_parser("verify", help="run a suite of instance files")
    v.add_argument("suite", nargs="?", help="directory of *.json instances (default: $VACAL_CORPUS or the bundled corpus)")
    v.add_argument("--oracle", choices=("on", "off"), default="on")
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--report", help="write the JSON report here instead of stdout")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--grid-density", type=int, default=9)
    v.add_argument("--tolerance", default="1/1000")
    v.add_argument("--radii", help="comma-separated decreasing radii")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseFailure as exc:
        _emit({"error": "parse", "location": exc.location, "message": exc.message})
        print(f"vacal: parse error at {exc.location}: {exc.message}", file=sys.stderr)
        return EXIT_PARSE
    except UnboundedError as exc:
        _emit({"error": "unbounded", "message": str(exc)})
        return EXIT_UNDEFINED
    except (PreconditionError, UndefinedError) as exc:
        _emit({"error": "undefined", "message": str(exc)})
        return EXIT_UNDEFINED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
