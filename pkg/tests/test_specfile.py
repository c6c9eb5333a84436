import json
from pathlib import Path

import numpy as np
import pytest

from lorentzlab import tolerances
from lorentzlab.errors import InputError, SchemaError
from lorentzlab.specfile import build_spec, load_spec, validate

SPECS = Path(__file__).resolve().parents[1] / "specs"


def doc(**kw):
    d = {"schema_version": 1, "builtin": {"name": "minkowski", "params": {"n": 3}}}
    d.update(kw)
    return d


@pytest.mark.parametrize("path", sorted(p.name for p in SPECS.glob("*.json") if p.name != "malformed.json"))
def test_shipped_specs_load(path):
    spec = load_spec(SPECS / path)
    assert len(spec.digest) == 64
    assert spec.metric.dim >= 3


def test_malformed_spec_rejected():
    with pytest.raises(SchemaError, match="colour"):
        load_spec(SPECS / "malformed.json")


@pytest.mark.parametrize(
    "bad",
    [
        {"builtin": {"name": "minkowski"}},  # no schema_version
        doc(schema_version=2),
        doc(metric=[["-1"]], coords=["t"], signature=[-1]),  # metric and builtin both
        doc(builtin={"name": "klein_bottle"}),
        doc(point="origin"),
        doc(tolerances={"not_a_key": 1.0}),
        doc(killing_basis={"name": "minkowski", "extra": 1}),
    ],
)
def test_schema_violations(bad):
    with pytest.raises(SchemaError):
        validate(bad)


def test_semantic_errors():
    with pytest.raises(SchemaError):
        build_spec(doc(dim=4))
    with pytest.raises(SchemaError):
        build_spec(doc(point=[0, 0]))
    with pytest.raises(SchemaError):
        build_spec(doc(builtin={"name": "minkowski", "params": {"dimension": 3}}))
    with pytest.raises(InputError):
        build_spec({"schema_version": 1, "coords": ["t", "x"], "metric": [["-1", "z"], ["z", "1"]], "signature": [-1, 1]})


def test_bad_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        load_spec(p)


def test_explicit_metric_with_extras():
    spec = build_spec(
        {
            "schema_version": 1,
            "name": "rindler-ish",
            "coords": ["t", "x"],
            "metric": [["-exp(2*x)", 0], [0, 1]],
            "signature": [-1, 1],
            "box": [[-1, 1], [-1, 1]],
            "vector_fields": [{"name": "T", "components": ["1", "0"]}],
            "submanifolds": [{"params": ["a"], "map": ["a", "0.2"], "at": [0.1]}],
            "geodesic": {"x0": [0, 0], "v0": [1, 0.2], "s_max": 0.5},
            "tolerances": {"geodesic_cert": 1e-6},
        }
    )
    assert spec.metric.coords == ("t", "x")
    assert spec.vector_fields[0].name == "T"
    assert spec.submanifolds[0][1].tolist() == [0.1]
    assert spec.tolerances.geodesic_cert == 1e-6
    assert spec.geodesic["s_max"] == 0.5


def test_warped_section():
    spec = build_spec(
        {
            "schema_version": 1,
            "warped": {
                "base": {"coords": ["s"], "metric": [["1"]], "signature": [1], "box": [[-1, 1]]},
                "fiber": {"builtin": {"name": "de_sitter", "params": {"n": 3}}},
                "warp": "cosh(s)^2",
            },
            "hypersurfaces": [{"params": ["s", "a", "b"], "map": ["s", "a", "0.0", "b"], "at": [0.0, 0.0]}],
        }
    )
    assert spec.product.k == 1
    assert spec.metric.dim == 4
    assert spec.warped_spec is not None


def test_catalog_builtin_carries_lifts_and_grid():
    spec = build_spec({"schema_version": 1, "builtin": {"name": "warped_de_sitter"}})
    assert spec.product is not None and spec.hypersurfaces and spec.grid is not None


def test_tolerance_override_is_active_inside_using():
    spec = build_spec(doc(tolerances={"geodesic_cert": 0.5}))
    assert tolerances.ACTIVE.geodesic_cert == 1e-7
    with tolerances.using(spec.tolerances):
        assert tolerances.ACTIVE.geodesic_cert == 0.5
        from lorentzlab.submanifolds import geodesy_label

        assert geodesy_label(0.1) == "geodesic"
    assert tolerances.ACTIVE.geodesic_cert == 1e-7


def test_killing_basis_default_coords():
    spec = build_spec(doc(killing_basis={"name": "minkowski_translations", "params": {"n": 3}}))
    assert [f.name for f in spec.killing_basis]
    vals = np.stack([f.values(np.zeros(3)) for f in spec.killing_basis])
    assert np.linalg.matrix_rank(vals) == 3


def test_shipped_spec_files_are_valid_json_objects():
    for p in SPECS.glob("*.json"):
        assert isinstance(json.loads(p.read_text()), dict)
