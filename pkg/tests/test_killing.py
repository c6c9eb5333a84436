import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentzlab import catalog
from lorentzlab import models as M
from lorentzlab.errors import InputError, ZeroFieldError
from lorentzlab.killing import (
    VectorField,
    combine,
    extend_isometry_pullback_residual,
    geodesic_orbit_residual,
    killing_residual,
    lie_derivative_metric,
    lightlike_check,
    lightlike_killing_search,
)
from lorentzlab.metric import MetricField

MINK = M.minkowski(3)
C3 = ("t", "x", "y")
GRID = MINK.sample_points(25, np.random.default_rng(0))


def vf(*comps, name="V"):
    return VectorField.from_strings(C3, comps, name)


def test_boost_is_killing():
    assert killing_residual(MINK, vf("x", "t", "0"), GRID) < 1e-10


def test_time_dilation_is_not_killing():
    v = vf("t", "0", "0")
    lie = lie_derivative_metric(MINK, v, GRID)
    assert np.allclose(lie[:, 0, 0], -2.0)
    assert killing_residual(MINK, v, GRID) == pytest.approx(2.0)


def test_fiber_translation_in_exponential_warp():
    m = MetricField.from_strings(C3, [["-1", "0", "0"], ["0", "exp(2*t)", "0"], ["0", "0", "exp(2*t)"]], [-1, 1, 1])
    assert killing_residual(m, vf("0", "1", "0"), GRID) == 0.0


def test_lightlike_check():
    assert lightlike_check(MINK, vf("1", "1", "0"), GRID)
    assert not lightlike_check(MINK, vf("0", "1", "0"), GRID)
    assert not lightlike_check(MINK, vf("1", "0", "0"), GRID)
    with pytest.raises(InputError):
        lightlike_check(MINK, vf("1", "1", "0"), np.zeros((0, 3)))


def test_geodesic_orbits():
    assert geodesic_orbit_residual(MINK, vf("1", "1", "0"), [0.1, 0.2, 0.3]) == 0.0
    rot = vf("0", "-y", "x")
    assert geodesic_orbit_residual(MINK, rot, [0.0, 1.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(ZeroFieldError):
        geodesic_orbit_residual(MINK, rot, [0.3, 0.0, 0.0])


def test_minkowski_translations_search():
    basis = M.minkowski_translations(3)
    found = lightlike_killing_search(MINK, basis, GRID, trials=48)
    assert found
    for c in found:
        # unit coefficients of a null translation: c_t^2 = c_x^2 + c_y^2 = 1/2
        assert abs(-c[0] ** 2 + c[1] ** 2 + c[2] ** 2) < 1e-6
        field = combine(basis, c)
        assert lightlike_check(MINK, field, GRID)
        norms = np.linalg.norm(field.values(GRID), axis=1)
        assert norms.min() > 1e-6
        assert max(geodesic_orbit_residual(MINK, field, p) for p in GRID) < 1e-8


def test_de_sitter_has_no_lightlike_killing_fields():
    m = M.de_sitter(3)
    grid = m.sample_points(25, np.random.default_rng(1))
    assert lightlike_killing_search(m, M.de_sitter_killing_basis(3), grid, trials=48) == []


def test_anti_de_sitter_has_lightlike_killing_fields():
    m = M.anti_de_sitter(3)
    grid = m.sample_points(25, np.random.default_rng(2))
    basis = M.anti_de_sitter_killing_basis(3)
    found = lightlike_killing_search(m, basis, grid, trials=48)
    assert found
    for c in found[:5]:
        field = combine(basis, c)
        values = field.values(grid)
        assert np.linalg.norm(values, axis=1).min() > 1e-6
        assert max(geodesic_orbit_residual(m, field, p) for p in grid) < 1e-7


def test_search_requires_killing_basis():
    with pytest.raises(InputError):
        lightlike_killing_search(MINK, [vf("t", "0", "0")], GRID)


def test_search_is_deterministic():
    basis = M.minkowski_translations(3)
    a = lightlike_killing_search(MINK, basis, GRID, trials=16, seed=5)
    b = lightlike_killing_search(MINK, basis, GRID, trials=16, seed=5)
    assert len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


def test_isometry_extension():
    ex_ = catalog.warped_minkowski()
    grid = ex_.grid
    assert extend_isometry_pullback_residual(ex_.spec, ["t", "x", "y"], grid) == 0.0
    boost = ["cosh(0.3)*t + sinh(0.3)*x", "sinh(0.3)*t + cosh(0.3)*x", "y"]
    assert extend_isometry_pullback_residual(ex_.spec, boost, grid) < 1e-9
    assert extend_isometry_pullback_residual(ex_.spec, ["2*t", "2*x", "2*y"], grid) > 0.5
    with pytest.raises(InputError):
        extend_isometry_pullback_residual(ex_.spec, ["s", "x", "y"], grid)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_residual_triangle_inequality(a, b):
    v = vf("t", "0", "x")  # not Killing
    w = vf("x", "t", "0")
    comb = combine([v, w], [a, b])
    for p in GRID[:5]:
        lhs = killing_residual(MINK, comb, p)
        assert lhs <= abs(a) * killing_residual(MINK, v, p) + abs(b) * killing_residual(MINK, w, p) + 1e-12
