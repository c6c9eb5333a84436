import numpy as np
import pytest

from lorentzlab import catalog
from lorentzlab import expr as ex
from lorentzlab import models as M
from lorentzlab.detectors import (
    ProductChartSpec,
    check_base_saturated,
    check_block_structure,
    conformal_factor_map,
    geodesic_transfer_pair,
    holonomy_homothety_check,
    warped_criterion,
)
from lorentzlab.errors import InputError, InsufficientHypersurfacesError
from lorentzlab.metric import MetricField
from lorentzlab.submanifolds import Immersion

C4 = ("s", "t", "x", "y")
BOX4 = [(-1, 1)] * 4
WM = catalog.warped_minkowski()
WM_SPEC = ProductChartSpec.from_warped(WM.spec)


def product(rows, k=1):
    return ProductChartSpec(MetricField.from_strings(C4, rows, (1, -1, 1, 1), BOX4, "test"), k)


def exp_warp(factor="1"):
    w = f"exp(2*s)*({factor})"
    return product([["1", 0, 0, 0], [0, f"-{w}", 0, 0], [0, 0, w, 0], [0, 0, 0, w]])


def test_block_structure_of_warped_product():
    grid = WM.grid
    bs = check_block_structure(WM_SPEC, grid)
    assert bs.off_block_max == 0.0
    assert bs.fiber_conformal


def test_block_structure_cross_term():
    spec = product([["1", "0.1", 0, 0], ["0.1", "-exp(2*s)", 0, 0], [0, 0, "exp(2*s)", 0], [0, 0, 0, "exp(2*s)"]])
    assert check_block_structure(spec, WM.grid).off_block_max == pytest.approx(0.1)


def test_block_structure_factor_must_be_y_uniform():
    assert check_block_structure(exp_warp("1+0.1*s^2"), WM.grid).fiber_conformal
    assert not check_block_structure(exp_warp("1+0.1*s*y^2"), WM.grid).fiber_conformal


def test_holonomy_on_warped_product():
    ys = WM.grid[:, 1:]
    rep = holonomy_homothety_check(WM_SPEC, [-0.3], [0.4], ys)
    assert rep.max_variation < 1e-10
    assert rep.ratio == pytest.approx(np.exp(2 * 0.7), rel=1e-12)
    same = holonomy_homothety_check(WM_SPEC, [0.2], [0.2], ys)
    assert same.ratio == 1.0 and same.max_variation == 0.0


def test_holonomy_separable_y_factor_is_still_homothetic():
    # w(x)(1 + 0.1 y^2): the y-factor cancels in the ratio of the two leaves
    rep = holonomy_homothety_check(exp_warp("1+0.1*y^2"), [-0.3], [0.4], WM.grid[:, 1:])
    assert rep.max_variation < 1e-10


def test_holonomy_mixed_factor_is_not_homothetic():
    spec, _ = catalog.counterexamples()[0]
    rep = holonomy_homothety_check(spec, [-0.3], [0.4], WM.grid[:, 1:])
    assert rep.max_variation > 1e-2


def test_holonomy_transitive():
    ys = WM.grid[:, 1:]
    r12 = holonomy_homothety_check(WM_SPEC, [-0.5], [0.1], ys).ratio
    r23 = holonomy_homothety_check(WM_SPEC, [0.1], [0.6], ys).ratio
    r13 = holonomy_homothety_check(WM_SPEC, [-0.5], [0.6], ys).ratio
    assert r13 == pytest.approx(r12 * r23, rel=1e-8)


def test_holonomy_guard_reports_skipped_entries():
    # fiber entry that is zero at x1 but not at x2
    spec = product([["1", 0, 0, 0], [0, "-exp(2*s)", "0.1*s+0.1", 0], [0, "0.1*s+0.1", "exp(2*s)", 0], [0, 0, 0, "exp(2*s)"]])
    rep = holonomy_homothety_check(spec, [-1.0], [0.5], np.array([[0.0, 0.0, 0.0]]))
    assert (0, 1) in rep.skipped


def test_warped_criterion_accepts_minkowski_fiber():
    v = warped_criterion(WM_SPEC, list(WM.lifts), WM.grid)
    assert v.verdict == "warped"
    assert v.fiber_constant_curvature.value < 1e-6
    assert v.hypersurface_rank == 3
    assert all(c.passed for _, _, c in v.hypersurfaces)
    assert set(v.to_dict()) >= {"verdict", "base_geodesic", "fiber_umbilical", "holonomy_homothetic"}


def test_insufficient_hypersurfaces():
    two = [lift for lift in WM.lifts if "y" not in lift[0].name][:2]
    with pytest.raises(InsufficientHypersurfacesError):
        warped_criterion(WM_SPEC, two, WM.grid)


def test_non_umbilical_fiber_is_rejected():
    ce = catalog.CATALOG["nonwarped_anisotropic"]()
    v = warped_criterion(ce.product, list(ce.lifts), ce.grid)
    assert v.verdict == "not_warped"
    assert not v.fiber_umbilical.passed


def test_berger_product_split_is_not_warped():
    spec = ProductChartSpec(M.berger_sl2(2.0), 1)
    hyps = [
        (Immersion.from_strings(["s", "b"], ["s", "0.1", "b"], name="x=0.1"), [0.0]),
        (Immersion.from_strings(["s", "a"], ["s", "a", "0.1"], name="y=0.1"), [0.0]),
    ]
    grid = np.array([[s, x, y] for s in (-0.2, 0.2) for x, y in ((0.1, 0.1), (0.2, -0.1))])
    assert warped_criterion(spec, hyps, grid).verdict in ("not_warped", "inconclusive")


def test_base_saturation_check():
    bad = Immersion.from_strings(["a", "b", "c"], ["0.5*a", "b", "b", "c"], name="bad")
    with pytest.raises(InputError):
        check_base_saturated(WM_SPEC, bad)
    mixed = Immersion.from_strings(["s", "b", "c"], ["s", "s*b", "b", "c"], name="mixed")
    with pytest.raises(InputError):
        check_base_saturated(WM_SPEC, mixed)


def test_conformal_maps():
    mink = M.minkowski(3)
    grid = mink.sample_points(10, np.random.default_rng(0), shrink=0.4)
    dil = conformal_factor_map(mink, mink, ["2*t", "2*x", "2*y"], grid)
    assert dil.is_conformal and dil.factor_variation == 0.0
    assert np.allclose(dil.factors, 4.0)
    boost = ["cosh(0.2)*t + sinh(0.2)*x", "sinh(0.2)*t + cosh(0.2)*x", "y"]
    iso = conformal_factor_map(mink, mink, boost, grid)
    assert iso.is_conformal and np.allclose(iso.factors, 1.0, atol=1e-14)
    plane = M.euclidean(2, coords=("u", "v"), box=[(-2, 2), (-2, 2)])
    pts = np.random.default_rng(1).uniform(0.2, 0.9, (10, 2))
    sq = conformal_factor_map(plane, plane, ["u^2 - v^2", "2*u*v"], pts)
    assert sq.is_conformal
    assert sq.factor_variation > 0.1
    shear = conformal_factor_map(mink, mink, ["t", "x + 0.5*y", "y"], grid)
    assert not shear.is_conformal


def test_transfer_pair_on_null_plane():
    s = WM.surfaces[0]
    pair = geodesic_transfer_pair(WM.spec, s.immersion, s.u, [0.1])
    assert pair.fiber_kind == pair.lifted_kind == "degenerate"
    assert pair.fiber_residual < 1e-7 and pair.lifted_residual < 1e-7


def test_fiber_leaf_substitutes_base_values():
    leaf = WM_SPEC.fiber_leaf([0.5])
    assert leaf.coords == ("t", "x", "y")
    assert np.allclose(leaf.values(np.zeros(3)), np.exp(1.0) * np.diag([-1.0, 1.0, 1.0]))
    assert ex.is_zero(leaf.components[0][1])
