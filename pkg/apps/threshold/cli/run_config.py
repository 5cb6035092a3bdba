"""
Run configuration documents.

A run is described by one JSON document:

    {
      "graph": {"k_vertices": [0], "k_edges": [], "joints": [0, 0, 0]},
      "perturbation": {"joining": {}},
      "backend": {"name": "rational"},
      "engine": {"window": 6, "kappas": [0.4, 0.2, 0.1, 0.05]},
      "output": {"report": "star.json", "summary": "star.txt"}
    }

The perturbation block holds exactly one of

    factored  {"columns": [{site: value, ...}, ...], "U": [[...], ...]}
    dense     {"entries": [[site, site, value], ...]}   (float backend)
    joining   {}
    family    {"E": value, "tau": value}                 (forces float)
    none      {}

Sites are written as K vertex labels ("0", "a") or as "n^(alpha)" for the
n-th site of ray alpha. Exact values are integers or "p/q" strings; JSON
numbers with a fraction part are read through their decimal text, never
through a binary float.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..config.settings import BACKENDS, FREE_OPERATORS, Settings, get_settings
from ..errors import AsymmetricInput, InvalidFraction, ParseError, ThresholdError, UnknownField
from ..free.free_model import FreeModel, build_free_model
from ..graph.graph import GraphWithRays, KVertex, RaySite, SiteIndex, build_graph, star_graph
from ..graph.ray_function import RayFunction
from ..linalg.backends import get_backend
from ..perturbation.factored import (
    FactoredPerturbation,
    build_factored,
    empty_perturbation,
    factor_dense,
    family_perturbation,
    joining_perturbation,
)

logger = logging.getLogger(__name__)

Vertex = Union[int, str]
Number = Union[int, str]

PERTURBATION_MODES = ("factored", "dense", "joining", "family", "none")
_FRACTION = re.compile(r"^\s*[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(\s*/\s*\d+)?\s*$")
_RAY_SITE = re.compile(r"^\s*(\d+)\s*\^\s*\(\s*(\d+)\s*\)\s*$")


def parse_fraction(value: Any) -> Fraction:
    """Exact value of an integer, a "p/q" string or a decimal string."""
    if isinstance(value, bool):
        raise InvalidFraction(f"{value!r} is not a number")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str) and _FRACTION.match(value):
        try:
            return Fraction(value.replace(" ", ""))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidFraction(f"cannot read {value!r} as a fraction: {exc}") from exc
    raise InvalidFraction(f"cannot read {value!r} as a fraction")


def format_fraction(value: Fraction) -> str:
    return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GraphBlock(_Block):
    k_vertices: List[Vertex] = Field(..., description="Vertices of the finite part K")
    k_edges: List[Tuple[Vertex, Vertex]] = Field(default_factory=list, description="Edges of K")
    joints: List[Vertex] = Field(..., description="Joint vertex of every ray, in ray order")


class FactoredBlock(_Block):
    columns: List[Dict[str, Number]] = Field(..., description="Columns of v as site -> value maps")
    U: List[List[Number]] = Field(..., description="Symmetric k x k matrix with U^2 = I")

    @field_validator("columns")
    @classmethod
    def _check_column_values(cls, columns):
        return [{site: parse_fraction(value) for site, value in column.items()} for column in columns]

    @field_validator("U")
    @classmethod
    def _check_u_values(cls, rows):
        return [[parse_fraction(value) for value in row] for row in rows]


class DenseBlock(_Block):
    entries: List[Tuple[Vertex, Vertex, Number]] = Field(..., description="(site, site, value) triples")

    @field_validator("entries")
    @classmethod
    def _check_entry_values(cls, entries):
        return [(x, y, parse_fraction(value)) for x, y, value in entries]


class JoiningBlock(_Block):
    pass


class FamilyBlock(_Block):
    E: Number = Field(..., description="Vertex energy")
    tau: Number = Field(..., description="Joining strength")

    @field_validator("E", "tau")
    @classmethod
    def _check_parameter(cls, value):
        return parse_fraction(value)


class NoneBlock(_Block):
    pass


class PerturbationBlock(_Block):
    factored: Optional[FactoredBlock] = None
    dense: Optional[DenseBlock] = None
    joining: Optional[JoiningBlock] = None
    family: Optional[FamilyBlock] = None
    none: Optional[NoneBlock] = None

    @model_validator(mode="after")
    def _exactly_one_mode(self):
        given = [mode for mode in PERTURBATION_MODES if getattr(self, mode) is not None]
        if len(given) != 1:
            raise UnknownField(f"the perturbation block needs exactly one of {PERTURBATION_MODES}, got {given}")
        return self

    @property
    def mode(self) -> str:
        return next(mode for mode in PERTURBATION_MODES if getattr(self, mode) is not None)


class BackendBlock(_Block):
    name: Optional[str] = Field(None, description="'rational' or 'float'")
    rank_tol: Optional[float] = Field(None, description="Float rank tolerance")

    @field_validator("name")
    @classmethod
    def _check_name(cls, value):
        if value is not None and value not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {value!r}")
        return value


class EngineBlock(_Block):
    kernel_cap: Optional[int] = None
    tail_cap: Optional[int] = None
    free_operator: Optional[str] = None
    cutoff_const: Optional[float] = None
    kappas: Optional[List[float]] = None
    window: Optional[int] = None
    workers: Optional[int] = None

    @field_validator("free_operator")
    @classmethod
    def _check_free_operator(cls, value):
        if value is not None and value not in FREE_OPERATORS:
            raise ValueError(f"free_operator must be one of {FREE_OPERATORS}, got {value!r}")
        return value


class OutputBlock(_Block):
    report: Optional[str] = Field(None, description="Machine-readable JSON report path")
    summary: Optional[str] = Field(None, description="Human-readable text summary path")


class RunConfig(_Block):
    graph: Optional[GraphBlock] = None
    perturbation: PerturbationBlock = Field(default_factory=lambda: PerturbationBlock(none=NoneBlock()))
    backend: BackendBlock = Field(default_factory=BackendBlock)
    engine: EngineBlock = Field(default_factory=EngineBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    @model_validator(mode="after")
    def _check_graph(self):
        if self.graph is None and self.perturbation.mode != "family":
            raise ParseError("a graph block is required unless the perturbation is the (E, tau) family")
        return self


def _raise_mapped(exc: ValidationError) -> None:
    """Turn a pydantic validation error into the matching analyzer error."""
    for error in exc.errors():
        location = ".".join(str(part) for part in error.get("loc", ()))
        if error.get("type") == "extra_forbidden":
            raise UnknownField(f"unknown field '{location}'") from exc
        original = (error.get("ctx") or {}).get("error")
        if isinstance(original, ThresholdError):
            raise type(original)(f"{location}: {original}" if location else str(original)) from exc
    raise ParseError(str(exc)) from exc


def parse_config(document: str, settings: Optional[Settings] = None) -> RunConfig:
    """Validate a JSON run document and fill the defaults from the settings."""
    try:
        raw = json.loads(document, parse_float=str)
    except json.JSONDecodeError as exc:
        raise ParseError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("config must be a JSON object")
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as exc:
        _raise_mapped(exc)
    return fill_defaults(config, settings or get_settings())


def fill_defaults(config: RunConfig, settings: Settings) -> RunConfig:
    backend = config.backend
    name = backend.name or settings.backend
    if config.perturbation.mode == "family" and name != "float":
        logger.info("The (E, tau) family needs square roots; switching to the float backend")
        name = "float"
    engine = config.engine
    filled_engine = EngineBlock(
        kernel_cap=engine.kernel_cap if engine.kernel_cap is not None else settings.kernel_cap,
        tail_cap=engine.tail_cap if engine.tail_cap is not None else settings.tail_cap,
        free_operator=engine.free_operator or settings.free_operator,
        cutoff_const=engine.cutoff_const if engine.cutoff_const is not None else settings.cutoff_const,
        kappas=engine.kappas if engine.kappas is not None else list(settings.kappas),
        window=engine.window if engine.window is not None else settings.window,
        workers=engine.workers if engine.workers is not None else settings.oracle_workers,
    )
    filled = config.model_copy(
        update={
            "backend": BackendBlock(name=name, rank_tol=backend.rank_tol or settings.rank_tol),
            "engine": filled_engine,
        }
    )
    _check_engine(filled_engine)
    return filled


def _check_engine(engine: EngineBlock) -> None:
    # mirrors the Settings validators so documents and environment agree
    try:
        Settings(
            kernel_cap=engine.kernel_cap,
            tail_cap=engine.tail_cap,
            free_operator=engine.free_operator,
            cutoff_const=engine.cutoff_const,
            kappas=engine.kappas,
            window=engine.window,
        )
    except ValidationError as exc:
        raise ParseError(f"engine options rejected: {exc.errors()[0].get('msg')}") from exc


def load_config(path: str, settings: Optional[Settings] = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = f.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config(document, settings)


# ----------------------------------------------------------------------
# Materialization
# ----------------------------------------------------------------------
@dataclass(eq=False)
class RunContext:
    config: RunConfig
    graph: GraphWithRays
    model: FreeModel
    perturbation: FactoredPerturbation

    @property
    def backend(self):
        return self.model.backend


def parse_site(graph: GraphWithRays, key: str) -> SiteIndex:
    match = _RAY_SITE.match(str(key))
    if match:
        site: SiteIndex = RaySite(int(match.group(2)), int(match.group(1)))
        graph.check_site(site)
        return site
    for vertex in graph.k_vertices:
        if str(vertex) == str(key).strip():
            return KVertex(vertex)
    raise ParseError(f"unknown site {key!r}")


def _dense_entries(graph: GraphWithRays, block: DenseBlock) -> Dict[Tuple[SiteIndex, SiteIndex], Fraction]:
    entries: Dict[Tuple[SiteIndex, SiteIndex], Fraction] = {}
    for x, y, value in block.entries:
        key = (parse_site(graph, x), parse_site(graph, y))
        if key in entries and entries[key] != value:
            raise AsymmetricInput(f"conflicting values for entry ({x}, {y})")
        entries[key] = value
    for (x, y), value in list(entries.items()):
        mirrored = entries.setdefault((y, x), value)
        if mirrored != value:
            raise AsymmetricInput(f"entries ({x}, {y}) and ({y}, {x}) differ")
    return entries


def build_run(config: RunConfig) -> RunContext:
    """Graph, free model and factored perturbation for a validated config."""
    engine = config.engine
    backend = get_backend(config.backend.name, config.backend.rank_tol)
    if config.graph is None:
        graph = star_graph(2)
    else:
        graph = build_graph(config.graph.k_vertices, config.graph.k_edges, config.graph.joints)
    model = build_free_model(graph, backend, engine.kernel_cap, engine.tail_cap, engine.free_operator)

    block = config.perturbation
    mode = block.mode
    if mode == "factored":
        columns = [
            RayFunction.from_values(graph, {parse_site(graph, key): value for key, value in column.items()})
            for column in block.factored.columns
        ]
        perturbation = build_factored(graph, columns, block.factored.U, backend)
    elif mode == "dense":
        perturbation = factor_dense(graph, _dense_entries(graph, block.dense), backend)
    elif mode == "joining":
        perturbation = joining_perturbation(model)
    elif mode == "family":
        perturbation = family_perturbation(model, block.family.E, block.family.tau)
    else:
        perturbation = empty_perturbation(graph, backend)
    logger.info(
        f"Run prepared: {len(graph.k_vertices)} K vertices, {graph.ray_count} rays, "
        f"{mode} perturbation of rank {perturbation.k}, {backend.name} backend"
    )
    return RunContext(config, graph, model, perturbation)


def apply_overrides(config: RunConfig, overrides: Dict[str, Any]) -> RunConfig:
    """CLI flags win over the document; None means not given."""
    backend_update = {key: overrides[key] for key in ("name", "rank_tol") if overrides.get(key) is not None}
    engine_update = {
        key: overrides[key]
        for key in ("kernel_cap", "cutoff_const", "kappas", "window")
        if overrides.get(key) is not None
    }
    output_update = {"report": overrides["report"]} if overrides.get("report") else {}
    if backend_update.get("name") == "rational" and config.perturbation.mode == "family":
        logger.warning("Ignoring --backend rational for the (E, tau) family")
        backend_update.pop("name")
    updated = config.model_copy(
        update={
            "backend": config.backend.model_copy(update=backend_update),
            "engine": config.engine.model_copy(update=engine_update),
            "output": config.output.model_copy(update=output_update),
        }
    )
    _check_engine(updated.engine)
    return updated
