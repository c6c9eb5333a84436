"""Manifold-spec files: JSON schema, validation and construction of library objects."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import catalog
from . import expr as ex
from . import models as M
from .detectors import ProductChartSpec
from .errors import InputError, SchemaError
from .killing import VectorField
from .metric import MetricField
from .submanifolds import Immersion
from .tolerances import DEFAULT, Tolerances

SCHEMA_VERSION = 1

_ident = {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}
_num = {"type": "number"}
_entry = {"type": ["string", "number"]}
_point = {"type": "array", "items": _num, "minItems": 1}
_interval = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_box = {"type": "array", "items": _interval, "minItems": 1}
_matrix = {"type": "array", "items": {"type": "array", "items": _entry, "minItems": 1}, "minItems": 1}
_signature = {"type": "array", "items": {"enum": [-1, 1]}, "minItems": 1}

_builtin = {
    "type": "object",
    "properties": {
        "name": {"enum": sorted(set(M.BUILTINS) | set(catalog.CATALOG))},
        "params": {"type": "object"},
    },
    "required": ["name"],
    "additionalProperties": False,
}

_killing = {
    "type": "object",
    "properties": {"name": {"enum": sorted(M.KILLING_BASES)}, "params": {"type": "object"}},
    "required": ["name"],
    "additionalProperties": False,
}

_explicit_metric = {
    "type": "object",
    "properties": {
        "coords": {"type": "array", "items": _ident, "minItems": 1},
        "metric": _matrix,
        "signature": _signature,
        "box": _box,
        "name": {"type": "string"},
    },
    "required": ["coords", "metric", "signature"],
    "additionalProperties": False,
}

_immersion = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "params": {"type": "array", "items": _ident, "minItems": 1},
        "map": {"type": "array", "items": _entry, "minItems": 1},
        "domain_box": _box,
        "at": _point,
    },
    "required": ["params", "map"],
    "additionalProperties": False,
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "lorentzlab manifold spec",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "dim": {"type": "integer", "minimum": 2},
        "coords": {"type": "array", "items": _ident, "minItems": 2},
        "metric": _matrix,
        "signature": _signature,
        "builtin": _builtin,
        "warped": {
            "type": "object",
            "properties": {
                "base": _explicit_metric,
                "fiber": {"oneOf": [_explicit_metric, {"type": "object", "properties": {"builtin": _builtin}, "required": ["builtin"], "additionalProperties": False}]},
                "warp": {"type": "string"},
            },
            "required": ["base", "fiber", "warp"],
            "additionalProperties": False,
        },
        "box": _box,
        "tolerances": {
            "type": "object",
            "properties": {k: _num for k in DEFAULT.as_dict()},
            "additionalProperties": False,
        },
        "point": _point,
        "grid": {"type": "array", "items": _point, "minItems": 1},
        "submanifolds": {"type": "array", "items": _immersion},
        "vector_fields": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"name": {"type": "string"}, "components": {"type": "array", "items": _entry}},
                "required": ["components"],
                "additionalProperties": False,
            },
        },
        "killing_basis": _killing,
        "product_split": {
            "type": "object",
            "properties": {"base_dim": {"type": "integer", "minimum": 1}},
            "required": ["base_dim"],
            "additionalProperties": False,
        },
        "hypersurfaces": {"type": "array", "items": _immersion},
        "geodesic": {
            "type": "object",
            "properties": {"x0": _point, "v0": _point, "s_max": {"type": "number", "exclusiveMinimum": 0}, "step": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["x0", "v0", "s_max"],
            "additionalProperties": False,
        },
    },
    "required": ["schema_version"],
    "oneOf": [{"required": ["metric"]}, {"required": ["builtin"]}, {"required": ["warped"]}],
    "dependentRequired": {"metric": ["coords", "signature"]},
    "additionalProperties": False,
}


@dataclass
class LoadedSpec:
    raw: dict
    digest: str
    metric: MetricField
    tolerances: Tolerances
    point: np.ndarray | None = None
    grid: np.ndarray | None = None
    submanifolds: list[tuple[Immersion, np.ndarray | None]] = field(default_factory=list)
    vector_fields: list[VectorField] = field(default_factory=list)
    killing_basis: list[VectorField] | None = None
    product: ProductChartSpec | None = None
    warped_spec: M.WarpedSpec | None = None
    hypersurfaces: list[tuple[Immersion, np.ndarray | None]] = field(default_factory=list)
    geodesic: dict | None = None


def validate(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise SchemaError(f"spec file invalid at {where}: {err.message}")


def _box_t(box):
    return None if box is None else tuple((float(a), float(b)) for a, b in box)


def _explicit(d: dict, default_name: str) -> MetricField:
    return MetricField.from_strings(d["coords"], d["metric"], d["signature"], _box_t(d.get("box")), d.get("name", default_name))


def _builtin_metric(b: dict):
    name = b["name"]
    params = dict(b.get("params", {}))
    factory = catalog.CATALOG.get(name) or M.BUILTINS[name]
    try:
        return factory(**params)
    except TypeError as e:
        raise SchemaError(f"bad parameters for builtin {name!r}: {e}") from None


def _immersions(items, coords_dim: int) -> list[tuple[Immersion, np.ndarray | None]]:
    out = []
    for i, d in enumerate(items or []):
        im = Immersion.from_strings(d["params"], d["map"], d.get("domain_box"), d.get("name", f"S{i}"))
        if len(im.map) != coords_dim:
            raise InputError(f"immersion {im.name} must have {coords_dim} components")
        at = None if "at" not in d else np.array(d["at"], dtype=float)
        out.append((im, at))
    return out


def load_spec(path: str | Path) -> LoadedSpec:
    import hashlib

    data = Path(path).read_bytes()
    digest = hashlib.sha256(data).hexdigest()
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"spec file is not valid JSON: {e}") from None
    return build_spec(doc, digest)


def build_spec(doc: Any, digest: str = "") -> LoadedSpec:
    validate(doc)
    tol = DEFAULT.override(doc.get("tolerances", {}))
    product = None
    warped_spec = None
    hyps: list = []
    grid = None
    if "metric" in doc:
        metric = MetricField.from_strings(doc["coords"], doc["metric"], doc["signature"], _box_t(doc.get("box")), doc.get("name", "metric"))
    elif "warped" in doc:
        w = doc["warped"]
        base = _explicit(w["base"], "base")
        fb = w["fiber"]
        fiber = _builtin_metric(fb["builtin"]) if "builtin" in fb else _explicit(fb, "fiber")
        if not isinstance(fiber, MetricField):
            raise SchemaError("warped fiber builtin must be a plain metric")
        warped_spec = M.WarpedSpec(base, fiber, ex.parse(w["warp"], base.coords))
        metric = M.warped(warped_spec, doc.get("name"))
        product = ProductChartSpec(metric, base.dim)
    else:
        obj = _builtin_metric(doc["builtin"])
        if isinstance(obj, catalog.WarpedExample):
            warped_spec = obj.spec
            metric = M.warped(obj.spec, doc.get("name", obj.name))
            product = ProductChartSpec(metric, obj.spec.k)
            hyps = [(im, np.array(u, dtype=float)) for im, u in obj.lifts]
            grid = obj.grid
        elif isinstance(obj, catalog.ChartExample):
            metric, product = obj.product.metric, obj.product
            hyps = [(im, np.array(u, dtype=float)) for im, u in obj.lifts]
            grid = obj.grid
        else:
            metric = obj
        if "box" in doc:
            metric = metric.with_box(doc["box"])
            if product is not None:
                product = ProductChartSpec(metric, product.k)
    if "dim" in doc and doc["dim"] != metric.dim:
        raise SchemaError(f"dim {doc['dim']} does not match the metric dimension {metric.dim}")
    if "coords" in doc and tuple(doc["coords"]) != metric.coords:
        raise SchemaError(f"coords {doc['coords']} do not match the metric coordinates {list(metric.coords)}")
    if metric.dim < 2:
        raise SchemaError("the analysed metric must have dimension >= 2")
    n = metric.dim

    def pt(v, what):
        a = np.array(v, dtype=float)
        if a.shape != (n,):
            raise SchemaError(f"{what} must have {n} components")
        return a

    point = pt(doc["point"], "point") if "point" in doc else None
    if "grid" in doc:
        grid = np.array([pt(p, "grid point") for p in doc["grid"]])
    if "product_split" in doc:
        product = ProductChartSpec(metric, doc["product_split"]["base_dim"])
    if "hypersurfaces" in doc:
        hyps = _immersions(doc["hypersurfaces"], n)
    fields = []
    for i, d in enumerate(doc.get("vector_fields", [])):
        if len(d["components"]) != n:
            raise SchemaError(f"vector field {i} must have {n} components")
        fields.append(VectorField.from_strings(metric.coords, d["components"], d.get("name", f"V{i}")))
    basis = None
    if "killing_basis" in doc:
        kb = doc["killing_basis"]
        params = dict(kb.get("params", {}))
        params.setdefault("coords", metric.coords)
        try:
            basis = M.KILLING_BASES[kb["name"]](**params)
        except TypeError as e:
            raise SchemaError(f"bad parameters for Killing basis {kb['name']!r}: {e}") from None
    geo = None
    if "geodesic" in doc:
        g = doc["geodesic"]
        geo = {"x0": pt(g["x0"], "x0"), "v0": pt(g["v0"], "v0"), "s_max": float(g["s_max"]), "step": g.get("step")}
    return LoadedSpec(
        raw=doc,
        digest=digest,
        metric=metric,
        tolerances=tol,
        point=point,
        grid=grid,
        submanifolds=_immersions(doc.get("submanifolds"), n),
        vector_fields=fields,
        killing_basis=basis,
        product=product,
        warped_spec=warped_spec,
        hypersurfaces=hyps,
        geodesic=geo,
    )
