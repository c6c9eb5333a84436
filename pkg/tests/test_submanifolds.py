import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentzlab import models as M
from lorentzlab.errors import (
    DegenerateSubmanifoldError,
    InputError,
    NonNormalError,
    RankDeficiencyError,
)
from lorentzlab.metric import MetricField
from lorentzlab.submanifolds import (
    Immersion,
    classify,
    geodesy_label,
    geodesy_residual,
    induced_metric,
    induced_type,
    lightlike_geodesy_test,
    normal_space,
    product_lift,
    second_fundamental_form,
    weingarten,
)

MINK = M.minkowski(3)
E3 = M.euclidean(3, coords=("x", "y", "z"), box=[(-2, 2)] * 3)
SPHERE = Immersion.from_strings(["th", "ph"], ["sin(th)*cos(ph)", "sin(th)*sin(ph)", "cos(th)"], name="sphere")
NULL_PLANE = Immersion.from_strings(["a", "b"], ["a", "a", "b"], name="t=x")
HYPERBOLIC_SHEET = Immersion.from_strings(["a", "b"], ["sqrt(1+a^2+b^2)", "a", "b"], name="q=-1")


def _pt(th=0.9, ph=0.4):
    return np.array([th, ph])


def test_spacelike_slice_has_identity_metric():
    im = Immersion.from_strings(["a", "b"], ["0.2", "a", "b"])
    assert np.array_equal(induced_metric(MINK, im, [0.1, 0.3]), np.eye(2))
    assert classify(MINK, im, [0.1, 0.3]) == "geodesic"


def test_lightlike_plane_is_degenerate():
    im = Immersion.from_strings(["a", "b"], ["-a", "a", "b"])  # t + x = 0
    h = induced_metric(MINK, im, [0.1, 0.2])
    assert np.linalg.det(h) == 0.0
    assert induced_type(MINK, im, [0.1, 0.2]) == "degenerate"
    with pytest.raises(DegenerateSubmanifoldError):
        second_fundamental_form(MINK, im, [0.1, 0.2])


def test_sphere_round_metric_and_umbilic():
    th, ph = _pt()
    assert np.allclose(induced_metric(E3, SPHERE, [th, ph]), np.diag([1.0, np.sin(th) ** 2]), atol=1e-15)
    sff = second_fundamental_form(E3, SPHERE, [th, ph])
    inward = -SPHERE.points(np.array([th, ph]))
    assert np.allclose(sff.II, sff.induced[:, :, None] * inward, atol=1e-12)
    assert np.allclose(sff.mean_normal, inward, atol=1e-12)
    assert np.linalg.norm(sff.mean_normal) == pytest.approx(1.0, abs=1e-12)
    assert classify(E3, SPHERE, [th, ph]) == "umbilical"


def test_sphere_weingarten_sign():
    # A_Z X = tangential part of nabla_X Z; the outward unit normal Z = x has nabla_X Z = X
    u = _pt()
    outward = SPHERE.points(u)
    assert np.allclose(weingarten(E3, SPHERE, u, outward), np.eye(2), atol=1e-12)


def test_hyperplane_weingarten_is_zero():
    im = Immersion.from_strings(["a", "b"], ["0.2*a", "a", "b"])
    z = np.array([1.0, 0.2, 0.0])  # g-normal to (0.2, 1, 0) and (0, 0, 1)
    assert np.allclose(weingarten(MINK, im, [0.1, 0.2], z), 0, atol=1e-15)
    assert classify(MINK, im, [0.1, 0.2]) == "geodesic"


def test_non_normal_vector_rejected():
    with pytest.raises(NonNormalError):
        weingarten(E3, SPHERE, _pt(), [1.0, 0.0, 0.0])


def test_minkowski_quadric_is_umbilical():
    sff = second_fundamental_form(MINK, HYPERBOLIC_SHEET, [0.3, -0.2])
    assert sff.umbilic_residual() < 1e-8
    assert classify(MINK, HYPERBOLIC_SHEET, [0.3, -0.2]) == "umbilical"


def test_wavy_graph_is_generic():
    im = Immersion.from_strings(["a", "b"], ["0.1*sin(a)", "a", "b"])
    assert classify(MINK, im, [0.3, 0.1]) == "generic"


def test_rank_deficiency():
    im = Immersion.from_strings(["a", "b"], ["a", "a", "a"])
    with pytest.raises(RankDeficiencyError):
        induced_metric(MINK, im, [0.1, 0.2])


def test_domain_and_dimension_checks():
    im = Immersion.from_strings(["a"], ["a", "0", "0"], domain_box=[(-0.5, 0.5)])
    with pytest.raises(InputError):
        induced_metric(MINK, im, [0.9])
    with pytest.raises(InputError):
        induced_metric(MINK, Immersion.from_strings(["a"], ["a", "0"]), [0.0])
    with pytest.raises(InputError):
        Immersion.from_strings(["a"], ["a", "b", "0"])


def test_null_plane_lightlike_geodesic():
    assert lightlike_geodesy_test(MINK, NULL_PLANE, [0.1, 0.2]) < 1e-7
    assert geodesy_residual(MINK, NULL_PLANE, [0.1, 0.2])[0] == "degenerate"
    with pytest.raises(InputError):
        lightlike_geodesy_test(MINK, HYPERBOLIC_SHEET, [0.1, 0.2])


def test_de_sitter_light_cone_is_geodesic():
    ds = M.de_sitter(3)
    cone = Immersion.from_strings(["r", "p"], ["-log(r)", "r*cos(p)", "r*sin(p)"], name="cone")
    u = [0.8, 0.4]
    assert induced_type(ds, cone, u) == "degenerate"
    assert lightlike_geodesy_test(ds, cone, u) < 1e-7


def test_minkowski_light_cone_is_not_geodesic():
    cone = Immersion.from_strings(["r", "p"], ["r", "r*cos(p)", "r*sin(p)"], name="cone")
    assert induced_type(MINK, cone, [0.5, 0.3]) == "degenerate"
    assert lightlike_geodesy_test(MINK, cone, [0.5, 0.3]) > 1e-3


def test_tilted_lightlike_graph_not_geodesic():
    # |grad f| = 1 makes the graph t = f(x, y) lightlike
    im = Immersion.from_strings(["a", "b"], ["sqrt((a+2)^2+b^2) - 2", "a", "b"])
    assert induced_type(MINK, im, [0.1, 0.2]) == "degenerate"
    assert lightlike_geodesy_test(MINK, im, [0.1, 0.2]) > 1e-3


def test_normal_space_of_null_plane_is_its_null_direction():
    n = normal_space(MINK, NULL_PLANE, [0.0, 0.0])
    assert n.shape == (1, 3)
    v = n[0] / n[0][0]
    assert np.allclose(v, [1.0, 1.0, 0.0], atol=1e-12)


def test_labels():
    assert geodesy_label(1e-9) == "geodesic"
    assert geodesy_label(1e-2) == "not_geodesic"
    assert geodesy_label(1e-5) == "inconclusive"


def test_product_lift_params():
    lift = product_lift(("s",), ((-1, 1),), NULL_PLANE)
    assert lift.params == ("s", "a", "b")
    assert lift.k == 3
    with pytest.raises(InputError):
        product_lift(("a",), None, NULL_PLANE)


def test_transversal_intersection_fact():
    # A: -t^2 + x^2 + y^2 = 1 (umbilical in Minkowski), B: y = 0 (geodesic).
    # B contains the normal of A along A n B, so A n B is geodesic in A.
    a_im = Immersion.from_strings(["a", "c"], ["sinh(a)", "cosh(a)*cos(c)", "cosh(a)*sin(c)"], name="A")
    b_im = Immersion.from_strings(["t", "x"], ["t", "x", "0"], name="B")
    u = [0.3, 0.0]
    assert classify(MINK, b_im, [0.1, 0.2]) == "geodesic"
    normal = normal_space(MINK, a_im, u)[0]
    assert abs(normal[2]) < 1e-12  # lies in B
    a_metric = MetricField.from_strings(["a", "c"], [["-1", "0"], ["0", "cosh(a)^2"]], [-1, 1], [(-1, 1), (-1, 1)])
    # the metric is the one induced by A
    assert np.allclose(a_metric.values(np.array(u)), induced_metric(MINK, a_im, u), atol=1e-14)
    curve = Immersion.from_strings(["s"], ["s", "0"], name="A n B")
    assert classify(a_metric, curve, [0.3]) == "geodesic"


@settings(max_examples=40, deadline=None)
@given(
    st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3), st.floats(-0.3, 0.3)
)
def test_second_fundamental_form_symmetric_and_dual(a, b, c1, c2, c3):
    im = Immersion.from_strings(["a", "b"], [f"{c1}*a^2 + {c2}*a*b + {c3}*sin(b)", "a", "b"])
    ds = M.de_sitter(3)
    sff = second_fundamental_form(ds, im, [a, b])
    assert np.abs(sff.II - np.swapaxes(sff.II, 0, 1)).max() < 1e-9
    z = normal_space(ds, im, [a, b])[0]
    g = ds.values(im.points(np.array([a, b])))
    aw = weingarten(ds, im, [a, b], z)
    lhs = np.einsum("abi,ij,j->ab", sff.II, g, z)
    assert np.allclose(lhs, -(sff.induced @ aw), atol=1e-8)
