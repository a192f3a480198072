"""Instance-file schema, decoding into engine objects and canonical JSON encoding.

Scalars are written as strings ``"p/q"`` (integers are accepted as JSON
integers or strings); floats are rejected so the boundary stays exact.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Annotated, Any, List, Literal, Optional, Union

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from .mappings import (
    PolyMapping,
    build_affine,
    build_composition_graph,
    build_constant,
    build_epi,
    build_indicator_mapping,
    build_restriction,
    build_sum_graph,
)
from .pl_functions import INF, AffinePiece, CellPL, ConvexPL
from .polyhedra import PolyUnion, Polyhedron
from .rational import fmt, q

SCHEMA_VERSION = "1"


def _rational(v: Any) -> str:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ValueError("scalars must be strings 'p/q' or integers")
    try:
        q(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not an exact rational: {v!r}") from exc
    return str(v)


Rat = Annotated[str, BeforeValidator(_rational)]
Vec = List[Rat]


class Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class Row(Strict):
    a: Vec
    b: Rat = "0"


class PolyModel(Strict):
    type: Literal["polyhedron"]
    dim: int = Field(ge=1)
    ineqs: Optional[List[Row]] = None
    eqs: Optional[List[Row]] = None
    vertices: Optional[List[Vec]] = None
    rays: Optional[List[Vec]] = None
    lineality: Optional[List[Vec]] = None

    @model_validator(mode="after")
    def _one_rep(self):
        h = self.ineqs is not None or self.eqs is not None
        v = self.vertices is not None or self.rays is not None or self.lineality is not None
        if h and v:
            raise ValueError("give either an H-representation or a V-representation, not both")
        for r in (self.ineqs or []) + (self.eqs or []):
            if len(r.a) != self.dim:
                raise ValueError("row length does not match dim")
        for g in (self.vertices or []) + (self.rays or []) + (self.lineality or []):
            if len(g) != self.dim:
                raise ValueError("generator length does not match dim")
        if v and not self.vertices:
            raise ValueError("a V-representation needs at least one vertex")
        return self


class UnionModel(Strict):
    type: Literal["union"]
    dim: int = Field(ge=1)
    parts: List[PolyModel]


SetModel = Annotated[Union[PolyModel, UnionModel], Field(discriminator="type")]


class PieceModel(Strict):
    gradient: Vec
    offset: Rat = "0"


class ConvexModel(Strict):
    type: Literal["convex-pl"]
    dim: int = Field(ge=1)
    pieces: List[PieceModel] = Field(min_length=1)
    domain: Optional[PolyModel] = None

    @model_validator(mode="after")
    def _dims(self):
        if any(len(p.gradient) != self.dim for p in self.pieces):
            raise ValueError("gradient length does not match dim")
        if self.domain is not None and self.domain.dim != self.dim:
            raise ValueError("domain dimension does not match dim")
        return self


class CellModel(Strict):
    cell: PolyModel
    piece: PieceModel


class CellPLModel(Strict):
    type: Literal["cell-pl"]
    dim: int = Field(ge=1)
    cells: List[CellModel] = Field(min_length=1)

    @model_validator(mode="after")
    def _dims(self):
        for c in self.cells:
            if c.cell.dim != self.dim or len(c.piece.gradient) != self.dim:
                raise ValueError("cell or gradient dimension does not match dim")
        return self


FunctionModel = Annotated[Union[ConvexModel, CellPLModel], Field(discriminator="type")]


class GraphMapModel(Strict):
    type: Literal["graph"]
    dim_in: int = Field(ge=1)
    dim_out: int = Field(ge=1)
    graph: SetModel


class ConstantMapModel(Strict):
    type: Literal["constant"]
    dim_in: int = Field(ge=1)
    K: PolyModel


class AffineMapModel(Strict):
    type: Literal["affine"]
    A: List[Vec]
    b: Vec


class EpiMapModel(Strict):
    type: Literal["epi"]
    f: FunctionModel


class IndicatorMapModel(Strict):
    type: Literal["indicator"]
    omega: SetModel
    dim_out: int = Field(ge=1)


class SumMapModel(Strict):
    type: Literal["sum"]
    F1: "MappingModel"
    F2: "MappingModel"


class CompositionMapModel(Strict):
    type: Literal["composition"]
    G: "MappingModel"
    F: "MappingModel"


class RestrictionMapModel(Strict):
    type: Literal["restriction"]
    F: "MappingModel"
    omega: SetModel


MappingModel = Annotated[
    Union[
        GraphMapModel,
        ConstantMapModel,
        AffineMapModel,
        EpiMapModel,
        IndicatorMapModel,
        SumMapModel,
        CompositionMapModel,
        RestrictionMapModel,
    ],
    Field(discriminator="type"),
]

for _m in (SumMapModel, CompositionMapModel, RestrictionMapModel):
    _m.model_rebuild()


class RuleModel(Strict):
    type: Literal["rule"]
    rule: str
    args: dict


class QueryModel(Strict):
    op: Literal["eval", "subdiff", "normal-cone", "coderiv", "dirderiv"]
    variant: Optional[str] = None
    point: Optional[Vec] = None
    direction: Optional[Vec] = None
    x: Optional[Vec] = None
    y: Optional[Vec] = None
    ystar: Optional[Vec] = None


class InstanceFile(Strict):
    schema_version: Literal["1"]
    kind: Literal["set", "function", "mapping", "rule-instance"]
    description: Optional[str] = None
    payload: dict
    query: Optional[QueryModel] = None
    expected: Optional[dict] = None

    @model_validator(mode="after")
    def _payload_kind(self):
        parse_payload(self.kind, self.payload)
        if self.kind == "rule-instance" and self.query is not None:
            raise ValueError("rule instances take no query")
        return self


_PAYLOAD_MODELS = {
    "set": SetModel,
    "function": FunctionModel,
    "mapping": MappingModel,
    "rule-instance": RuleModel,
}


PAYLOAD_KINDS = tuple(_PAYLOAD_MODELS)


def parse_payload(kind: str, payload: dict):
    from pydantic import TypeAdapter

    return TypeAdapter(_PAYLOAD_MODELS[kind]).validate_python(payload)


# ---------------------------------------------------------------------------
# decoding


def vec_of(v) -> tuple:
    return tuple(q(x) for x in v)


def to_polyhedron(m: PolyModel) -> Polyhedron:
    if m.vertices is not None or m.rays is not None or m.lineality is not None:
        return Polyhedron.from_v(
            m.dim,
            [vec_of(g) for g in m.vertices or []],
            [vec_of(g) for g in m.rays or []],
            [vec_of(g) for g in m.lineality or []],
        )
    return Polyhedron.from_h(
        m.dim,
        [(vec_of(r.a), q(r.b)) for r in m.ineqs or []],
        [(vec_of(r.a), q(r.b)) for r in m.eqs or []],
    )


def to_set(m) -> Union[Polyhedron, PolyUnion]:
    if isinstance(m, PolyModel):
        return to_polyhedron(m)
    return PolyUnion(m.dim, tuple(to_polyhedron(p) for p in m.parts))


def _piece(m: PieceModel) -> AffinePiece:
    return AffinePiece(vec_of(m.gradient), q(m.offset))


def to_function(m) -> Union[ConvexPL, CellPL]:
    if isinstance(m, ConvexModel):
        dom = to_polyhedron(m.domain) if m.domain is not None else Polyhedron.full(m.dim)
        return ConvexPL(tuple(_piece(p) for p in m.pieces), dom)
    return CellPL(tuple((to_polyhedron(c.cell), _piece(c.piece)) for c in m.cells))


def to_mapping(m) -> PolyMapping:
    if isinstance(m, GraphMapModel):
        return PolyMapping(m.dim_in, m.dim_out, PolyUnion.of(g) if isinstance(g := to_set(m.graph), Polyhedron) else g)
    if isinstance(m, ConstantMapModel):
        return build_constant(m.dim_in, to_polyhedron(m.K))
    if isinstance(m, AffineMapModel):
        return build_affine([vec_of(r) for r in m.A], vec_of(m.b))
    if isinstance(m, EpiMapModel):
        return build_epi(to_function(m.f))
    if isinstance(m, IndicatorMapModel):
        return build_indicator_mapping(to_set(m.omega), m.dim_out)
    if isinstance(m, SumMapModel):
        return build_sum_graph(to_mapping(m.F1), to_mapping(m.F2))
    if isinstance(m, CompositionMapModel):
        return build_composition_graph(to_mapping(m.G), to_mapping(m.F))
    return build_restriction(to_mapping(m.F), to_set(m.omega))


def decode(kind: str, payload: dict):
    m = parse_payload(kind, payload)
    if kind == "set":
        return to_set(m)
    if kind == "function":
        return to_function(m)
    if kind == "mapping":
        return to_mapping(m)
    return m


def load_instance(path) -> InstanceFile:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return InstanceFile.model_validate(data)


# ---------------------------------------------------------------------------
# encoding


def enc_scalar(x) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return fmt(Fraction(x))


def enc_vec(v) -> list[str]:
    return [enc_scalar(x) for x in v]


def enc_polyhedron(p: Polyhedron) -> dict:
    if p.is_empty():
        return {"empty": True, "vertices": [], "rays": [], "lineality": [], "hrep": {"ineqs": [], "eqs": []}}
    return {
        "empty": False,
        "vertices": sorted(enc_vec(v) for v in p.vertices),
        "rays": sorted(enc_vec(v) for v in p.rays),
        "lineality": sorted(enc_vec(v) for v in p.lineality),
        "hrep": {
            "ineqs": _rows(p.ineqs),
            "eqs": _rows(p.eqs),
        },
    }


def _rows(rows) -> list[dict]:
    out = [{"a": enc_vec(a), "b": enc_scalar(b)} for a, b in rows]
    return sorted(out, key=lambda r: (r["a"], r["b"]))


def enc_union(u: PolyUnion) -> dict:
    return {"parts": [enc_polyhedron(p) for p in u.parts]}


def enc_set(s) -> dict:
    return enc_union(s) if isinstance(s, PolyUnion) else enc_polyhedron(s)


def enc_value(v):
    """Encode auxiliary values of any supported type."""
    if isinstance(v, PolyUnion):
        return enc_union(v)
    if isinstance(v, Polyhedron):
        return enc_polyhedron(v)
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (Fraction, int, float)):
        return enc_scalar(v)
    if isinstance(v, (tuple, list)):
        return [enc_value(x) for x in v]
    if isinstance(v, dict):
        return {str(k): enc_value(x) for k, x in v.items()}
    return str(v)


def enc_report(r) -> dict:
    return {
        "rule_id": r.rule_id,
        "qc": {"status": r.qc_status, "witness": enc_value(r.qc_witness)},
        "relation_claimed": r.relation_claimed,
        "observed": r.observed,
        "verdict": r.verdict,
        "witness": enc_value(r.witness),
        "lhs": enc_union(r.lhs),
        "rhs": enc_union(r.rhs),
        "assumptions": list(r.assumptions),
        "auxiliary": enc_value(r.auxiliary),
    }


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# expected values


def expected_set(d: dict) -> Union[Polyhedron, PolyUnion]:
    """Decode an ``expected`` set: ``{"parts": [...]}`` or a single V-rep (possibly empty)."""
    if "parts" in d:
        parts = [expected_set(p) for p in d["parts"]]
        dim = parts[0].dim if parts else int(d["dim"])
        return PolyUnion(dim, tuple(parts))
    if d.get("empty"):
        return Polyhedron.empty(int(d["dim"]))
    verts = [vec_of(v) for v in d["vertices"]]
    return Polyhedron.from_v(
        len(verts[0]),
        verts,
        [vec_of(v) for v in d.get("rays", [])],
        [vec_of(v) for v in d.get("lineality", [])],
    )
