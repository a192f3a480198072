"""Regenerate the bundled instance corpus under src/vacal/corpus.

Expected values are written by hand from direct computation; every file is
verified with the exact engines and the oracle cross-checks before it is
kept.  Run from the repository root:  python3 tools/make_corpus.py
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

from vacal.runner import verify_instance

OUT = Path(__file__).resolve().parent.parent / "src" / "vacal" / "corpus"


def s(x) -> str:
    return str(Fraction(x))


def sv(v) -> list[str]:
    return [s(x) for x in v]


# ---------------------------------------------------------------------------
# payload builders


def H(dim, ineqs=(), eqs=()):
    d = {"type": "polyhedron", "dim": dim, "ineqs": [{"a": sv(a), "b": s(b)} for a, b in ineqs]}
    if eqs:
        d["eqs"] = [{"a": sv(a), "b": s(b)} for a, b in eqs]
    return d


def V(dim, vertices, rays=(), lin=()):
    d = {"type": "polyhedron", "dim": dim, "vertices": [sv(v) for v in vertices]}
    if rays:
        d["rays"] = [sv(r) for r in rays]
    if lin:
        d["lineality"] = [sv(r) for r in lin]
    return d


def U(dim, *parts):
    return {"type": "union", "dim": dim, "parts": list(parts)}


def cvx(dim, pieces, domain=None):
    d = {"type": "convex-pl", "dim": dim, "pieces": [{"gradient": sv(g), "offset": s(o)} for g, o in pieces]}
    if domain is not None:
        d["domain"] = domain
    return d


def cellpl(dim, cells):
    return {
        "type": "cell-pl",
        "dim": dim,
        "cells": [{"cell": c, "piece": {"gradient": sv(g), "offset": s(o)}} for c, g, o in cells],
    }


def epi(f):
    return {"type": "epi", "f": f}


def affine(A, b):
    return {"type": "affine", "A": [sv(r) for r in A], "b": sv(b)}


def graph(dim_in, dim_out, g):
    return {"type": "graph", "dim_in": dim_in, "dim_out": dim_out, "graph": g}


def constant(dim_in, K):
    return {"type": "constant", "dim_in": dim_in, "K": K}


# common functions
ABS = cvx(1, [([1], 0), ([-1], 0)])
ABS2 = cvx(1, [([2], 0), ([-2], 0)])
ZERO1 = cvx(1, [([0], 0)])
IDENT1 = cvx(1, [([1], 0)])
NEG_ABS = cellpl(1, [(H(1, [([1], 0)]), [1], 0), (H(1, [([-1], 0)]), [-1], 0)])
L1_2 = cvx(2, [([a, b], 0) for a in (1, -1) for b in (1, -1)])
# |y1| - |y2| on R^2, one cell per quadrant
DIFF2 = cellpl(
    2,
    [
        (H(2, [([-a, 0], 0), ([0, -b], 0)]), [a, -b], 0)
        for a in (1, -1)
        for b in (1, -1)
    ],
)


def indicator(dim, poly):
    return cvx(dim, [([0] * dim, 0)], poly)


# expected-set shorthands
def ev(vertices, rays=(), lin=()):
    d = {"vertices": [sv(v) for v in vertices]}
    if rays:
        d["rays"] = [sv(r) for r in rays]
    if lin:
        d["lineality"] = [sv(r) for r in lin]
    return d


def seg(a, b):
    return ev([[a], [b]])


def pt(*v):
    return ev([list(v)])


def empty(dim):
    return {"empty": True, "dim": dim}


def parts(dim, *ps):
    return {"dim": dim, "parts": list(ps)}


# ---------------------------------------------------------------------------
# instances

INSTANCES: dict[str, dict] = {}


def add(name, kind, payload, *, description, query=None, expected=None):
    d = {"schema_version": "1", "kind": kind, "description": description, "payload": payload}
    if query is not None:
        d["query"] = query
    if expected is not None:
        d["expected"] = expected
    INSTANCES[name] = d


def rule(name, rule_id, args, *, description, **expected):
    add(name, "rule-instance", {"type": "rule", "rule": rule_id, "args": args}, description=description, expected=expected)


def q_sub(point, variant):
    return {"op": "subdiff", "point": sv(point), "variant": variant}


def q_nc(point, variant):
    return {"op": "normal-cone", "point": sv(point), "variant": variant}


def build():
    # -- functions -----------------------------------------------------------
    add("fn-abs-subdiff-convex", "function", ABS, description="|x| at 0, convex subdifferential",
        query=q_sub([0], "convex"), expected={"set": seg(-1, 1)})
    add("fn-abs-subdiff-limiting", "function", ABS, description="|x| at 0, limiting subdifferential equals the convex one",
        query=q_sub([0], "limiting"), expected={"set": seg(-1, 1)})
    add("fn-abs-eval", "function", ABS, description="|x| at -3/2",
        query={"op": "eval", "point": ["-3/2"]}, expected={"value": "3/2"})
    add("fn-negabs-limiting", "function", NEG_ABS, description="-|x| at 0: limiting subdifferential {-1, 1}",
        query=q_sub([0], "limiting"), expected={"set": parts(1, pt(-1), pt(1))})
    add("fn-negabs-clarke", "function", NEG_ABS, description="-|x| at 0: Clarke subdifferential [-1, 1]",
        query=q_sub([0], "clarke"), expected={"set": seg(-1, 1)})
    add("fn-negabs-frechet", "function", NEG_ABS, description="-|x| at 0: Frechet subdifferential is empty",
        query=q_sub([0], "frechet"), expected={"set": empty(1)})
    add("fn-negabs-dirderiv", "function", NEG_ABS, description="-|x| at 0: Clarke directional derivative along 1",
        query={"op": "dirderiv", "point": ["0"], "direction": ["1"], "variant": "clarke"}, expected={"value": "1"})
    add("fn-indicator-halfline", "function", indicator(1, H(1, [([-1], 0)])),
        description="indicator of [0, inf) at 0: subdifferential (-inf, 0]",
        query=q_sub([0], "convex"), expected={"set": ev([[0]], rays=[[-1]])})
    add("fn-indicator-halfline-singular", "function", indicator(1, H(1, [([-1], 0)])),
        description="indicator of [0, inf) at 0: singular subdifferential (-inf, 0]",
        query=q_sub([0], "singular"), expected={"set": ev([[0]], rays=[[-1]])})
    add("fn-linf-2d", "function", cvx(2, [([1, 0], 0), ([-1, 0], 0), ([0, 1], 0), ([0, -1], 0)]),
        description="max(|x1|, |x2|) at 0: cross-polytope",
        query=q_sub([0, 0], "convex"), expected={"set": ev([[1, 0], [-1, 0], [0, 1], [0, -1]])})
    add("fn-l1-2d-edge", "function", L1_2, description="|x1| + |x2| at (1, 0): {1} x [-1, 1]",
        query=q_sub([1, 0], "convex"), expected={"set": ev([[1, 1], [1, -1]])})
    add("fn-l1-2d-limiting", "function", L1_2, description="|x1| + |x2| at 0: limiting equals convex (box)",
        query=q_sub([0, 0], "limiting"), expected={"set": ev([[1, 1], [1, -1], [-1, 1], [-1, -1]])})
    add("fn-segment-outside", "function", cvx(1, [([1], 0)], H(1, [([1], 1), ([-1], 0)])),
        description="x on [0, 1] evaluated outside its domain",
        query={"op": "eval", "point": ["2"]}, expected={"value": "inf"})
    add("fn-diff-limiting", "function", DIFF2, description="|x1| - |x2| at 0: limiting is [-1,1] x {-1, 1}",
        query=q_sub([0, 0], "limiting"),
        expected={"set": parts(2, ev([[-1, 1], [1, 1]]), ev([[-1, -1], [1, -1]]))})
    add("fn-diff-clarke", "function", DIFF2, description="|x1| - |x2| at 0: Clarke is the box",
        query=q_sub([0, 0], "clarke"), expected={"set": ev([[1, 1], [1, -1], [-1, 1], [-1, -1]])})
    add("fn-min-limiting", "function", cellpl(1, [(H(1, [([1], 0)]), [1], 0), (H(1, [([-1], 0)]), [0], 0)]),
        description="min(x, 0) at 0: limiting {0, 1}",
        query=q_sub([0], "limiting"), expected={"set": parts(1, pt(0), pt(1))})
    add("fn-min-clarke", "function", cellpl(1, [(H(1, [([1], 0)]), [1], 0), (H(1, [([-1], 0)]), [0], 0)]),
        description="min(x, 0) at 0: Clarke [0, 1]",
        query=q_sub([0], "clarke"), expected={"set": seg(0, 1)})

    # -- sets ----------------------------------------------------------------
    cross = U(2, H(2, eqs=[([0, 1], 0)]), H(2, eqs=[([1, 0], 0)]))
    add("set-cross-limiting", "set", cross, description="cross at origin: limiting cone is the union of both axes",
        query=q_nc([0, 0], "limiting"),
        expected={"set": parts(2, ev([[0, 0]], lin=[[1, 0]]), ev([[0, 0]], lin=[[0, 1]]))})
    add("set-cross-clarke", "set", cross, description="cross at origin: Clarke cone is the plane",
        query=q_nc([0, 0], "clarke"), expected={"set": ev([[0, 0]], lin=[[1, 0], [0, 1]])})
    add("set-cross-frechet", "set", cross, description="cross at origin: Frechet cone is trivial",
        query=q_nc([0, 0], "frechet"), expected={"set": ev([[0, 0]])})
    add("set-cross-tangent", "set", cross, description="cross at origin: Clarke tangent cone is trivial",
        query=q_nc([0, 0], "tangent"), expected={"set": ev([[0, 0]])})
    zaxis = H(3, eqs=[([1, 0, 0], 0), ([0, 1, 0], 0)])
    xyplane = H(3, eqs=[([0, 0, 1], 0)])
    add("set-zaxis-clarke", "set", zaxis, description="z-axis in R^3: Clarke normal cone is the xy-plane",
        query=q_nc([0, 0, 0], "clarke"), expected={"set": ev([[0, 0, 0]], lin=[[1, 0, 0], [0, 1, 0]])})
    add("set-xyplane-clarke", "set", xyplane, description="xy-plane in R^3: Clarke normal cone is the z-axis",
        query=q_nc([0, 0, 0], "clarke"), expected={"set": ev([[0, 0, 0]], lin=[[0, 0, 1]])})
    add("set-halfplane-convex", "set", H(2, [([1, 0], 0)]), description="halfplane x1 <= 0 at the origin",
        query=q_nc([0, 0], "convex"), expected={"set": ev([[0, 0]], rays=[[1, 0]])})
    notquad = U(2, H(2, [([1, 0], 0)]), H(2, [([0, 1], 0)]))
    add("set-notquadrant-limiting", "set", notquad,
        description="{x1 <= 0} union {x2 <= 0}: limiting cone is two rays",
        query=q_nc([0, 0], "limiting"),
        expected={"set": parts(2, ev([[0, 0]], rays=[[1, 0]]), ev([[0, 0]], rays=[[0, 1]]))})
    add("set-notquadrant-clarke", "set", notquad, description="{x1 <= 0} union {x2 <= 0}: Clarke cone is the quadrant",
        query=q_nc([0, 0], "clarke"), expected={"set": ev([[0, 0]], rays=[[1, 0], [0, 1]])})
    add("set-plane-axis-limiting", "set", U(3, zaxis, xyplane),
        description="xy-plane union z-axis: limiting cone is z-axis union xy-plane",
        query=q_nc([0, 0, 0], "limiting"),
        expected={"set": parts(3, ev([[0, 0, 0]], lin=[[1, 0, 0], [0, 1, 0]]), ev([[0, 0, 0]], lin=[[0, 0, 1]]))})
    add("set-cross-offcenter", "set", cross, description="cross at (1, 0): normal cone is the vertical line",
        query=q_nc([1, 0], "limiting"), expected={"set": ev([[0, 0]], lin=[[0, 1]])})

    # -- mappings ------------------------------------------------------------
    add("map-epi-abs-limiting", "mapping", epi(ABS), description="epi |x| at (0, 0), y* = 1",
        query={"op": "coderiv", "x": ["0"], "y": ["0"], "ystar": ["1"], "variant": "limiting"},
        expected={"set": seg(-1, 1)})
    add("map-epi-abs-negative", "mapping", epi(ABS), description="epi |x| at (0, 0), y* = -1: empty",
        query={"op": "coderiv", "x": ["0"], "y": ["0"], "ystar": ["-1"], "variant": "limiting"},
        expected={"set": parts(1)})
    add("map-affine-2x", "mapping", affine([[2]], [0]), description="x -> 2x, y* = 1",
        query={"op": "coderiv", "x": ["0"], "y": ["0"], "ystar": ["1"], "variant": "clarke"},
        expected={"set": pt(2)})
    add("map-epi-negabs-clarke", "mapping", epi(NEG_ABS), description="epi(-|x|) at (0, 0), y* = 1, Clarke",
        query={"op": "coderiv", "x": ["0"], "y": ["0"], "ystar": ["1"], "variant": "clarke"},
        expected={"set": seg(-1, 1)})
    add("map-epi-negabs-limiting", "mapping", epi(NEG_ABS), description="epi(-|x|) at (0, 0), y* = 1, limiting",
        query={"op": "coderiv", "x": ["0"], "y": ["0"], "ystar": ["1"], "variant": "limiting"},
        expected={"set": parts(1, pt(-1), pt(1))})

    # -- optimal value (marginal function) --------------------------------------
    phi_y = cvx(2, [([0, 1], 0)])
    rule("ov-epi-abs", "optimal-value", {"F": epi(ABS), "phi": phi_y, "x": ["0"], "y": ["0"]},
         description="phi(x, y) = y over epi |x|: mu = |x|",
         verdict="confirmed", observed="equal", qc_status="satisfied", lhs=seg(-1, 1), rhs=seg(-1, 1))
    rule("ov-sum-instance", "optimal-value",
         {"F": epi(ABS), "phi": cvx(2, [([1, 1], 0), ([-1, 1], 0)]), "x": ["0"], "y": ["0"]},
         description="phi(x, y) = |x| + y over epi |x|: mu = 2|x|",
         verdict="confirmed", observed="equal", lhs=seg(-2, 2), rhs=seg(-2, 2))
    rule("ov-constant-map", "optimal-value",
         {"F": constant(1, H(1)), "phi": cvx(2, [([a, b], 0) for a in (1, -1) for b in (1, -1)]), "x": ["0"], "y": ["0"]},
         description="phi(x, y) = |x| + |y| over a constant full mapping",
         verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("ov-epi-abs-smooth", "optimal-value", {"F": epi(ABS), "phi": phi_y, "x": ["1"], "y": ["1"]},
         description="mu = |x| at x = 1",
         verdict="confirmed", observed="equal", lhs=pt(1))
    rule("ov-affine-map", "optimal-value",
         {"F": affine([[2]], [0]), "phi": cvx(2, [([0, 1], 0), ([0, -1], 0)]), "x": ["0"], "y": ["0"]},
         description="phi(x, y) = |y| over y = 2x: mu = 2|x|",
         verdict="confirmed", observed="equal", lhs=seg(-2, 2))
    rule("ov-epi-plus", "optimal-value",
         {"F": epi(cvx(1, [([1], 0), ([0], 0)])), "phi": phi_y, "x": ["0"], "y": ["0"]},
         description="mu = max(x, 0)",
         verdict="confirmed", observed="equal", lhs=seg(0, 1))
    rule("ov-epi-l1", "optimal-value",
         {"F": epi(L1_2), "phi": cvx(3, [([0, 0, 1], 0)]), "x": ["0", "0"], "y": ["0"]},
         description="mu = |x1| + |x2| at the origin",
         verdict="confirmed", observed="equal", lhs=ev([[1, 1], [1, -1], [-1, 1], [-1, -1]]))
    band = graph(1, 1, H(2, [([1, -1], 1), ([-1, 1], 1)]))
    rule("ov-band-inside", "optimal-value",
         {"F": band, "phi": cvx(2, [([0, 1], 0), ([0, -1], 0)]), "x": ["0"], "y": ["0"]},
         description="distance to [x - 1, x + 1] at x = 0",
         verdict="confirmed", observed="equal", lhs=pt(0))
    rule("ov-band-edge", "optimal-value",
         {"F": band, "phi": cvx(2, [([0, 1], 0), ([0, -1], 0)]), "x": ["2"], "y": ["1"]},
         description="distance to [x - 1, x + 1] at x = 2",
         verdict="confirmed", observed="equal", lhs=pt(1))
    rule("ov-distance-halfline", "optimal-value",
         {"F": constant(1, H(1, [([-1], 0)])), "phi": cvx(2, [([1, -1], 0), ([-1, 1], 0)]), "x": ["-1"], "y": ["0"]},
         description="distance from x to [0, inf) at x = -1",
         verdict="confirmed", observed="equal", lhs=pt(-1))
    rule("ov-qc-violated", "optimal-value",
         {"F": constant(1, H(1, [([-1], 0)])), "phi": cvx(2, [([1, 1], 0)], H(2, [([0, 1], 0)])), "x": ["0"], "y": ["0"]},
         description="x + y with y <= 0 over the constant [0, inf): qualification fails",
         qc_status="violated", relation_claimed="reverse-inclusion", lhs=pt(1), rhs=pt(1))
    rule("ov-not-minimizer", "optimal-value", {"F": epi(ABS), "phi": phi_y, "x": ["0"], "y": ["1"]},
         description="y = 1 is not a minimizer of phi over F(0)", error="undefined")

    # -- scalar chain rule ----------------------------------------------------------
    rule("chain-scalar-plus", "chain-scalar", {"f": ABS, "outer": cvx(1, [([1], 0), ([0], 0)]), "x": ["0"]},
         description="max(|x|, 0)", verdict="confirmed", observed="equal", lhs=seg(-1, 1), rhs=seg(-1, 1))
    rule("chain-scalar-affine", "chain-scalar", {"f": ABS, "outer": cvx(1, [([2], 1)]), "x": ["0"]},
         description="2|x| + 1", verdict="confirmed", observed="equal", lhs=seg(-2, 2))
    rule("chain-scalar-identity", "chain-scalar", {"f": ABS, "outer": IDENT1, "x": ["0"]},
         description="identity outer function", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("chain-scalar-2d", "chain-scalar",
         {"f": cvx(2, [([1, 1], 0), ([1, -1], 0)]), "outer": cvx(1, [([1], 0), ([0], 0)]), "x": ["1", "0"]},
         description="max(x1 + |x2|, 0) at (1, 0)", verdict="confirmed", observed="equal", lhs=ev([[1, 1], [1, -1]]))
    rule("chain-scalar-qc-violated", "chain-scalar",
         {"f": ABS, "outer": cvx(1, [([1], 0)], H(1, [([1], 0)])), "x": ["0"]},
         description="outer t + indicator(t <= 0) with 0 in the inner subdifferential",
         qc_status="violated", relation_claimed="reverse-inclusion", observed="equal")

    # -- vector chain, sum and max rules ------------------------------------------------
    rule("chain-vector-sum", "chain-vector", {"fs": [ABS, ABS], "g": cvx(2, [([1, 1], 0)]), "x": ["0"]},
         description="g = y1 + y2 with |x| twice", verdict="confirmed", observed="equal", lhs=seg(-2, 2))
    rule("chain-vector-max", "chain-vector",
         {"fs": [IDENT1, cvx(1, [([-1], 0)])], "g": cvx(2, [([1, 0], 0), ([0, 1], 0)]), "x": ["0"]},
         description="g = max(y1, y2) with x and -x", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("chain-vector-identity", "chain-vector", {"fs": [ABS], "g": IDENT1, "x": ["0"]},
         description="single inner function, identity outer", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("chain-vector-max-2d", "chain-vector",
         {"fs": [cvx(2, [([1, 0], 0), ([-1, 0], 0)]), cvx(2, [([0, 1], 0), ([0, -1], 0)])],
          "g": cvx(2, [([1, 0], 0), ([0, 1], 0)]), "x": ["0", "0"]},
         description="max(|x1|, |x2|) through the vector chain rule",
         verdict="confirmed", observed="equal", lhs=ev([[1, 0], [-1, 0], [0, 1], [0, -1]]))
    rule("sum-abs-abs", "sum", {"fs": [ABS, ABS], "x": ["0"]},
         description="|x| + |x|", verdict="confirmed", observed="equal", lhs=seg(-2, 2))
    rule("sum-abs-linear", "sum", {"fs": [ABS, IDENT1], "x": ["0"]},
         description="|x| + x", verdict="confirmed", observed="equal", lhs=seg(0, 2))
    rule("sum-l1-2d", "sum", {"fs": [cvx(2, [([1, 0], 0), ([-1, 0], 0)]), cvx(2, [([0, 1], 0), ([0, -1], 0)])],
                              "x": ["0", "0"]},
         description="|x1| + |x2|", verdict="confirmed", observed="equal",
         lhs=ev([[1, 1], [1, -1], [-1, 1], [-1, -1]]))
    rule("max-x-negx", "max", {"fs": [IDENT1, cvx(1, [([-1], 0)])], "x": ["0"]},
         description="max(x, -x)", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("max-abs-2x", "max", {"fs": [ABS, cvx(1, [([2], 0)])], "x": ["0"]},
         description="max(|x|, 2x)", verdict="confirmed", observed="equal", lhs=seg(-1, 2))
    rule("max-coordinates", "max", {"fs": [cvx(2, [([1, 0], 0)]), cvx(2, [([0, 1], 0)])], "x": ["0", "0"]},
         description="max(x1, x2)", verdict="confirmed", observed="equal", lhs=ev([[1, 0], [0, 1]]))
    rule("max-inactive", "max", {"fs": [ABS, cvx(1, [([0], 1)])], "x": ["0"]},
         description="max(|x|, 1): only the constant is active", verdict="confirmed", observed="equal", lhs=pt(0))

    # -- constrained marginal ------------------------------------------------------
    l1xy = cvx(2, [([a, b], 0) for a in (1, -1) for b in (1, -1)])
    rule("cm-l1-free", "constrained-marginal", {"phi": l1xy, "K": H(1), "x": ["0"], "y": ["0"]},
         description="|x| + |y| over y in R", verdict="confirmed", observed="equal", lhs=seg(-1, 1), rhs=seg(-1, 1))
    rule("cm-diff-zero", "constrained-marginal",
         {"phi": cvx(2, [([1, -1], 0), ([-1, 1], 0)]), "K": H(1, eqs=[([1], 0)]), "x": ["0"], "y": ["0"]},
         description="|x - y| over y = 0", verdict="confirmed", observed="equal", lhs=seg(-1, 1), rhs=seg(-1, 1))
    rule("cm-independent", "constrained-marginal",
         {"phi": cvx(2, [([1, 0], 0), ([-1, 0], 0)]), "K": H(1, [([1], 1), ([-1], 0)]), "x": ["0"], "y": ["0"]},
         description="phi independent of y, K = [0, 1]", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("cm-sign", "constrained-marginal",
         {"phi": cvx(2, [([1, 1], 0), ([-1, 1], 0)]), "K": H(1, [([-1], 0)]), "x": ["0"], "y": ["0"]},
         description="|x| + y over y >= 0: the normal cone enters with a minus sign",
         verdict="confirmed", observed="equal", lhs=seg(-1, 1), rhs=seg(-1, 1),
         auxiliary={"plus-sign-variant-equal": False})

    # -- affine preimage -----------------------------------------------------
    rule("ap-identity", "affine-preimage", {"phi": ABS, "A": [[1]], "b": [0], "x": ["0"], "y": ["0"]},
         description="identity map", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("ap-sum-map", "affine-preimage",
         {"phi": cvx(2, [([a, 2 * b], 0) for a in (1, -1) for b in (1, -1)]), "A": [[1, 1]], "b": [0],
          "x": ["1"], "y": ["1", "0"]},
         description="inf {|y1| + 2|y2| : y1 + y2 = x} at x = 1", verdict="confirmed", observed="equal",
         lhs=pt(1), rhs=pt(1))
    rule("ap-constant", "affine-preimage",
         {"phi": cvx(2, [([0, 0], 0)]), "A": [[1, 1]], "b": [0], "x": ["0"], "y": ["0", "0"]},
         description="constant phi", verdict="confirmed", observed="equal", lhs=pt(0))
    rule("ap-scaled", "affine-preimage", {"phi": ABS, "A": [[2]], "b": [1], "x": ["1"], "y": ["0"]},
         description="inf {|y| : 2y + 1 = x} at x = 1", verdict="confirmed", observed="equal", lhs=seg("-1/2", "1/2"))

    # -- infimal convolution --------------------------------------------------------
    rule("ic-abs-2abs", "inf-convolution", {"f1": ABS, "f2": ABS2, "x": ["1"]},
         description="|x| with 2|x| at 1", verdict="confirmed", observed="equal", lhs=pt(1), rhs=pt(1))
    rule("ic-abs-abs", "inf-convolution", {"f1": ABS, "f2": ABS, "x": ["0"]},
         description="|x| with |x| at 0", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("ic-indicator-zero", "inf-convolution", {"f1": ABS, "f2": indicator(1, H(1, eqs=[([1], 0)])), "x": ["1"]},
         description="|x| with the indicator of {0}", verdict="confirmed", observed="equal", lhs=pt(1))
    rule("ic-unbounded", "inf-convolution", {"f1": IDENT1, "f2": cvx(1, [([-1], 0)]), "x": ["0"]},
         description="x with -x: the convolution is -inf", error="unbounded")

    # -- coderivative sum (Clarke) ----------------------------------------------------
    z = ["0"]
    rule("cds-affine", "coderivative-sum",
         {"F1": affine([[1]], [0]), "F2": affine([[2]], [0]), "x": z, "y": z, "y1": z, "y2": z, "ystar": ["1"]},
         description="two affine maps", verdict="confirmed", observed="equal", lhs=pt(3), rhs=pt(3))
    rule("cds-abs-negabs", "coderivative-sum",
         {"F1": epi(ABS), "F2": epi(NEG_ABS), "x": z, "y": z, "y1": z, "y2": z, "ystar": ["1"]},
         description="epi |x| + epi(-|x|): strict inclusion", verdict="confirmed", observed="strict-subset",
         lhs=pt(0), rhs=seg(-2, 2))
    rule("cds-constant-zero", "coderivative-sum",
         {"F1": epi(ABS), "F2": constant(1, H(1, eqs=[([1], 0)])), "x": z, "y": z, "y1": z, "y2": z, "ystar": ["1"]},
         description="adding the constant {0}", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("cds-abs-abs", "coderivative-sum",
         {"F1": epi(ABS), "F2": epi(ABS), "x": z, "y": z, "y1": z, "y2": z, "ystar": ["1"]},
         description="epi |x| + epi |x|", verdict="confirmed", observed="equal", lhs=seg(-2, 2))

    # -- restriction -----------------------------------------------------------
    halfline = H(1, [([-1], 0)])
    rule("restr-abs-halfline", "restriction",
         {"F": epi(ABS), "omega": halfline, "x": z, "y": z, "ystar": ["1"]},
         description="epi |x| restricted to [0, inf)", verdict="confirmed", observed="equal",
         lhs=ev([[1]], rays=[[-1]]))
    rule("restr-affine-isolated", "restriction",
         {"F": affine([[1]], [0]), "omega": U(1, H(1, eqs=[([1], 0)]), H(1, [([-1], -1), ([1], 2)])),
          "x": z, "y": z, "ystar": ["1"]},
         description="identity restricted to {0} union [1, 2]", verdict="confirmed", observed="equal",
         lhs=ev([[0]], lin=[[1]]))
    rule("restr-negabs-halfline", "restriction",
         {"F": epi(NEG_ABS), "omega": halfline, "x": z, "y": z, "ystar": ["1"]},
         description="epi(-|x|) restricted to [0, inf): strict inclusion", verdict="confirmed",
         observed="strict-subset", lhs=ev([[-1]], rays=[[-1]]), rhs=ev([[1]], rays=[[-1]]))

    # -- intersection -----------------------------------------------------------
    rule("inter-axis-plane", "intersection", {"omega1": zaxis, "omega2": xyplane, "x": ["0", "0", "0"]},
         description="z-axis and xy-plane in R^3", verdict="confirmed", observed="equal", qc_status="satisfied",
         auxiliary={"qc-tangent": "violated", "tangent-implies-normal": True})
    rule("inter-same-halfplane", "intersection",
         {"omega1": H(2, [([1, 0], 0)]), "omega2": H(2, [([1, 0], 0)]), "x": ["0", "0"]},
         description="a halfplane with itself", verdict="confirmed", observed="equal", qc_status="satisfied",
         lhs=ev([[0, 0]], rays=[[1, 0]]), auxiliary={"qc-tangent": "satisfied"})
    rule("inter-full", "intersection", {"omega1": notquad, "omega2": H(2), "x": ["0", "0"]},
         description="second set is the whole plane", verdict="confirmed", observed="equal", qc_status="satisfied")
    rule("inter-strict", "intersection", {"omega1": notquad, "omega2": H(2, [([1, 1], 0)]), "x": ["0", "0"]},
         description="nonconvex union met with a halfplane: strict inclusion", verdict="confirmed",
         observed="strict-subset", qc_status="satisfied", lhs=ev([[0, 0]], rays=[[1, 1]]),
         rhs=ev([[0, 0]], rays=[[1, 0], [0, 1]]), auxiliary={"qc-tangent": "satisfied", "tangent-implies-normal": True})
    rule("inter-cross-axis", "intersection",
         {"omega1": cross, "omega2": H(2, eqs=[([0, 1], 0)]), "x": ["0", "0"]},
         description="cross met with the horizontal axis: qualification fails", qc_status="violated")

    # -- Clarke subdifferential sum -------------------------------------------------------
    rule("ssum-abs-negabs", "subdifferential-sum", {"phis": [ABS, NEG_ABS], "x": z},
         description="|x| + (-|x|): strict inclusion", verdict="confirmed", observed="strict-subset",
         lhs=pt(0), rhs=seg(-2, 2))
    rule("ssum-abs-abs", "subdifferential-sum", {"phis": [ABS, ABS], "x": z},
         description="|x| + |x|: equality under lower regularity", verdict="confirmed", observed="equal",
         relation_claimed="equality", lhs=seg(-2, 2))
    rule("ssum-abs-zero", "subdifferential-sum", {"phis": [ABS, ZERO1], "x": z},
         description="adding zero", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("ssum-negabs-negabs", "subdifferential-sum", {"phis": [NEG_ABS, NEG_ABS], "x": z},
         description="-|x| twice", verdict="confirmed", observed="equal", lhs=seg(-2, 2))
    notquad_ind = cellpl(2, [(H(2, [([1, 0], 0)]), [0, 0], 0), (H(2, [([0, 1], 0)]), [0, 0], 0)])
    diag_ind = indicator(2, H(2, [([1, 1], 0)]))
    rule("ssum-indicators-strict", "subdifferential-sum", {"phis": [notquad_ind, diag_ind], "x": ["0", "0"]},
         description="indicators of a nonconvex union and a halfplane", verdict="confirmed", observed="strict-subset",
         lhs=ev([[0, 0]], rays=[[1, 1]]), rhs=ev([[0, 0]], rays=[[1, 0], [0, 1]]))
    rule("ssing-halfline-abs", "subdifferential-sum-singular", {"phis": [indicator(1, halfline), ABS], "x": z},
         description="singular: indicator of [0, inf) plus |x|", verdict="confirmed", observed="equal",
         lhs=ev([[0]], rays=[[-1]]))
    rule("ssing-halfline-negabs", "subdifferential-sum-singular", {"phis": [indicator(1, halfline), NEG_ABS], "x": z},
         description="singular: indicator of [0, inf) plus -|x|", verdict="confirmed", observed="equal",
         lhs=ev([[0]], rays=[[-1]]))
    rule("ssing-indicators-strict", "subdifferential-sum-singular", {"phis": [notquad_ind, diag_ind], "x": ["0", "0"]},
         description="singular: indicators of a nonconvex union and a halfplane", verdict="confirmed",
         observed="strict-subset", lhs=ev([[0, 0]], rays=[[1, 1]]), rhs=ev([[0, 0]], rays=[[1, 0], [0, 1]]))
    rule("ssing-opposite-halflines", "subdifferential-sum-singular",
         {"phis": [indicator(1, halfline), indicator(1, H(1, [([1], 0)]))], "x": z},
         description="singular: opposite half-lines, qualification fails", qc_status="violated")

    # -- Clarke chain rule for coderivatives ---------------------------------------------
    rule("cchain-affine", "coderivative-chain",
         {"G": affine([[2]], [0]), "F": affine([[3]], [0]), "x": z, "y": z, "z": z, "zstar": ["1"]},
         description="two affine maps", verdict="confirmed", observed="equal", lhs=pt(6), rhs=pt(6))
    rule("cchain-indicator", "coderivative-chain",
         {"G": affine([[2]], [0]), "F": {"type": "indicator", "omega": halfline, "dim_out": 1},
          "x": z, "y": z, "z": z, "zstar": ["1"]},
         description="2x followed by the indicator mapping of [0, inf)", verdict="confirmed", observed="equal",
         lhs=ev([[0]], rays=[[-1]]))
    rule("cchain-diff-strict", "coderivative-chain",
         {"G": affine([[1], [1]], [0, 0]), "F": epi(DIFF2), "x": z, "y": ["0", "0"], "z": z, "zstar": ["1"]},
         description="x -> (x, x) followed by epi(|y1| - |y2|): strict inclusion", verdict="confirmed",
         observed="strict-subset", lhs=pt(0), rhs=seg(-2, 2))
    rule("cchain-l1", "coderivative-chain",
         {"G": affine([[1], [1]], [0, 0]), "F": epi(L1_2), "x": z, "y": ["0", "0"], "z": z, "zstar": ["1"]},
         description="x -> (x, x) followed by epi(|y1| + |y2|)", verdict="confirmed", observed="equal",
         lhs=seg(-2, 2))
    rule("cchain-withheld", "coderivative-chain",
         {"G": epi(ABS), "F": epi(ABS), "x": z, "y": z, "z": z, "zstar": ["1"]},
         description="no inner-semicontinuity certificate: verdict withheld", verdict="withheld")

    # -- preimage -------------------------------------------------------------
    rule("pre-affine-halfline", "preimage", {"F": affine([[2]], [0]), "omega": halfline, "x": z, "y": z},
         description="2x with Omega = [0, inf)", verdict="confirmed", observed="equal",
         lhs=ev([[0]], rays=[[-1]]), rhs=ev([[0]], rays=[[-1]]))
    rule("pre-full", "preimage", {"F": affine([[2]], [0]), "omega": H(1), "x": z, "y": z},
         description="Omega is the whole line", verdict="confirmed", observed="equal", lhs=pt(0))
    rule("pre-diag-notquadrant", "preimage",
         {"F": affine([[1], [1]], [0, 0]), "omega": notquad, "x": z, "y": ["0", "0"]},
         description="x -> (x, x) with a nonconvex union", verdict="confirmed", observed="equal",
         lhs=ev([[0]], rays=[[1]]))
    rule("pre-cross-identity", "preimage",
         {"F": affine([[1, 0], [0, 1]], [0, 0]), "omega": cross, "x": ["0", "0"], "y": ["0", "0"]},
         description="identity with the cross: the limiting-argument variant fails",
         verdict="confirmed", observed="equal", auxiliary={"limiting-argument-inclusion": False})

    wedge = U(3, H(3, [([1, -2, 1], 0)]), H(3, [([2, 1, 1], 0), ([2, 2, -1], 0)]))
    rule("pre-wedge-strict", "preimage",
         {"F": affine([[0, 2], [2, -2], [1, 2]], [0, 0, 0]), "omega": wedge, "x": ["0", "0"], "y": ["0", "0", "0"]},
         description="linear preimage of a halfspace union a wedge: strict inclusion", verdict="confirmed",
         observed="strict-subset", qc_status="satisfied",
         lhs=ev([[0, 0]], rays=[[-3, 8], [3, 4]]), rhs=ev([[0, 0]], rays=[[-3, 8], [3, -2]]))

    # -- affine chain -------------------------------------------------------
    rule("achain-identity", "affine-chain", {"g": NEG_ABS, "A": [[1]], "b": [0], "x": z},
         description="identity map", verdict="confirmed", observed="equal", lhs=seg(-1, 1))
    rule("achain-scaled", "affine-chain", {"g": NEG_ABS, "A": [[2]], "b": [0], "x": z},
         description="-|2x|", verdict="confirmed", observed="equal", lhs=seg(-2, 2), rhs=seg(-2, 2))
    rule("achain-l1", "affine-chain", {"g": L1_2, "A": [[1], [1]], "b": [0, 0], "x": z},
         description="convex outer function: equality", verdict="confirmed", observed="equal",
         relation_claimed="equality", lhs=seg(-2, 2))
    rule("achain-diff-strict", "affine-chain", {"g": DIFF2, "A": [[1], [1]], "b": [0, 0], "x": z},
         description="|x| - |x|: strict inclusion", verdict="confirmed", observed="strict-subset",
         lhs=pt(0), rhs=seg(-2, 2))
    rule("achain-singular-halfline", "affine-chain-singular",
         {"g": indicator(1, halfline), "A": [[1]], "b": [0], "x": z},
         description="singular: indicator of [0, inf) composed with the identity", verdict="confirmed",
         observed="equal", lhs=ev([[0]], rays=[[-1]]))


def main() -> int:
    build()
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.json"):
        old.unlink()
    bad = 0
    for name, inst in sorted(INSTANCES.items()):
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(inst, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        rec = verify_instance(path)
        if rec["status"] != "pass":
            bad += 1
            print(f"FAIL {name}: {rec.get('problems') or rec.get('error')}", file=sys.stderr)
            if rec.get("report"):
                r = rec["report"]
                print(f"     verdict={r['verdict']} observed={r['observed']} qc={r['qc']['status']}"
                      f" claim={r['relation_claimed']}", file=sys.stderr)
    print(f"{len(INSTANCES)} instances written, {bad} failing", file=sys.stderr)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
