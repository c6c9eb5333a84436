"""Shipped example configurations: warped models, non-warped perturbations, fiber
hypersurfaces with known geodesy, fiber maps and a generically perturbed metric.

Everything here is plain data built from the public constructors, so it doubles as
documentation of how to set such configurations up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from . import models as M
from .detectors import ProductChartSpec
from .metric import MetricField
from .models import WarpedSpec
from .submanifolds import Immersion


@dataclass(frozen=True)
class FiberSurface:
    immersion: Immersion
    u: tuple[float, ...]  # evaluation parameter
    expect_geodesic: bool


@dataclass(frozen=True)
class WarpedExample:
    name: str
    spec: WarpedSpec
    surfaces: tuple[FiberSurface, ...]
    lifts: tuple[tuple[Immersion, tuple[float, ...]], ...]  # base-saturated, for the criterion
    grid: np.ndarray
    isometry: tuple[str, ...]
    non_isometry: tuple[str, ...]


def _imm(params, comps, box, name) -> Immersion:
    return Immersion.from_strings(params, comps, box, name)


def _lift(base: tuple[str, ...], params: tuple[str, ...], comps: tuple[str, ...], name: str) -> Immersion:
    return Immersion.from_strings(base + params, base + comps, None, name)


def _grid(base_pts, fiber_pts) -> np.ndarray:
    return np.array([list(b) + list(f) for b in base_pts for f in fiber_pts], dtype=float)


def warped_minkowski() -> WarpedExample:
    base = M.euclidean(1, coords=("s",))
    fiber = M.minkowski(3)
    spec = WarpedSpec(base, fiber, ex.parse("exp(2*s)", ("s",)))
    surfaces = (
        FiberSurface(_imm(("a", "b"), ("a", "a", "b"), None, "null plane t=x"), (0.1, 0.2), True),
        FiberSurface(_imm(("a", "b"), ("sqrt(1+a^2+b^2)-1", "a", "b"), None, "hyperboloid"), (0.2, -0.1), False),
        FiberSurface(_imm(("a", "b"), ("0.1*sin(a)", "a", "b"), None, "wavy graph"), (0.3, 0.1), False),
    )
    b = ("s",)
    lifts = tuple(
        (_lift(b, ("a", "c"), comps, name), (0.0, 0.0))
        for comps, name in (
            (("a", "a", "c"), "t=x"),
            (("a", "-a", "c"), "t=-x"),
            (("a", "c", "a"), "t=y"),
            (("a", "c", "-a"), "t=-y"),
        )
    )
    grid = _grid([(-0.5,), (0.0,), (0.6,)], [(0.0, 0.0, 0.0), (0.3, -0.2, 0.4), (-0.4, 0.5, 0.1)])
    boost = ("cosh(0.3)*t+sinh(0.3)*x", "sinh(0.3)*t+cosh(0.3)*x", "y")
    return WarpedExample("R x_exp(2s) Minkowski(3)", spec, surfaces, lifts, grid, boost, ("t", "x", "2*y"))


def warped_de_sitter() -> WarpedExample:
    base = M.euclidean(1, coords=("s",))
    fiber = M.de_sitter(3, 1.0)
    spec = WarpedSpec(base, fiber, ex.parse("cosh(s)^2", ("s",)))
    surfaces = (
        FiberSurface(_imm(("a", "b"), ("a", "0.2", "b"), None, "plane x=0.2"), (0.1, 0.2), True),
        FiberSurface(_imm(("a", "b"), ("0", "a", "b"), None, "slice t=0"), (0.1, 0.2), False),
        FiberSurface(_imm(("r", "p"), ("-log(r)", "r*cos(p)", "r*sin(p)"), None, "light cone"), (0.8, 0.4), True),
    )
    b = ("s",)
    lifts = (
        (_lift(b, ("a", "c"), ("a", "0", "c"), "x=0"), (0.0, 0.0)),
        (_lift(b, ("a", "c"), ("a", "c", "0"), "y=0"), (0.0, 0.0)),
        (_lift(b, ("r", "p"), ("-log(r)", "r*cos(p)", "r*sin(p)"), "light cone"), (0.8, 0.4)),
    )
    grid = _grid([(-0.4,), (0.0,), (0.5,)], [(0.0, 0.0, 0.0), (0.2, -0.1, 0.3), (-0.3, 0.3, -0.2)])
    return WarpedExample(
        "R x_cosh^2 dS(3)", spec, surfaces, lifts, grid, ("t", "x+0.3", "y"), ("t", "2*x", "y")
    )


def warped_anti_de_sitter() -> WarpedExample:
    base = M.euclidean(2, coords=("s1", "s2"))
    fiber = M.anti_de_sitter(3, 1.0, chart="poincare")
    spec = WarpedSpec(base, fiber, ex.parse("1+s1^2+s2^2", ("s1", "s2")))
    surfaces = (
        FiberSurface(_imm(("a", "b"), ("a", "0.1", "b"), None, "plane x=0.1"), (0.1, 1.0), True),
        FiberSurface(_imm(("a", "b"), ("a", "b", "1"), None, "horosphere z=1"), (0.1, 0.2), False),
        FiberSurface(_imm(("a", "b"), ("a", "a", "b"), None, "null plane t=x"), (0.1, 1.0), True),
    )
    b = ("s1", "s2")
    lifts = (
        (_lift(b, ("a", "c"), ("a", "a", "c"), "t=x"), (0.0, 1.0)),
        (_lift(b, ("a", "c"), ("a", "-a", "c"), "t=-x"), (0.0, 1.0)),
        (_lift(b, ("a", "c"), ("a", "sqrt(1+a^2)*cos(c)", "sqrt(1+a^2)*sin(c)"), "quadric x^2+z^2-t^2=1"), (0.0, 1.2)),
    )
    grid = _grid([(0.0, 0.0), (0.4, -0.3), (-0.5, 0.2)], [(0.0, 0.0, 1.0), (0.2, -0.3, 0.8), (-0.3, 0.1, 1.2)])
    return WarpedExample(
        "R^2 x_(1+|s|^2) AdS(3)", spec, surfaces, lifts, grid, ("1.2*t", "1.2*x", "1.2*z"), ("t", "2*x", "z")
    )


def warped_examples() -> list[WarpedExample]:
    return [warped_minkowski(), warped_de_sitter(), warped_anti_de_sitter()]


# ---------------------------------------------------------------------------
# Counterexamples: product charts that are not warped products


def _product(coords, rows, signature, box, name, k) -> ProductChartSpec:
    return ProductChartSpec(MetricField.from_strings(coords, rows, signature, box, name), k)


def counterexamples() -> list[tuple[ProductChartSpec, WarpedExample]]:
    """Each entry pairs a perturbed chart with the warped example it perturbs
    (whose lifts and grid are reused)."""
    c = ("s", "t", "x", "y")
    box = ((-1.0, 1.0),) * 4
    f = "(exp(2*s)+0.1*y^2)"
    mixed = _product(
        c,
        [["1", 0, 0, 0], [0, f"-{f}", 0, 0], [0, 0, f, 0], [0, 0, 0, f]],
        (1, -1, 1, 1),
        box,
        "(exp(2s)+0.1y^2) Minkowski",
        1,
    )
    w = "exp(2*s)"
    aniso = _product(
        c,
        [["1", 0, 0, 0], [0, f"-{w}", 0, 0], [0, 0, f"{w}*(1+0.1*s)", 0], [0, 0, 0, w]],
        (1, -1, 1, 1),
        box,
        "anisotropic Minkowski fiber",
        1,
    )
    e = "exp(2*t)"
    wd = "cosh(s)^2*(1+0.1*s*x)"
    ds = _product(
        c,
        [["1", 0, 0, 0], [0, f"-{wd}", 0, 0], [0, 0, f"{wd}*{e}", 0], [0, 0, 0, f"{wd}*{e}"]],
        (1, -1, 1, 1),
        box,
        "x-dependent de Sitter warp",
        1,
    )
    return [(mixed, warped_minkowski()), (aniso, warped_minkowski()), (ds, warped_de_sitter())]


# ---------------------------------------------------------------------------
# Generic perturbation of Minkowski(3)


def perturbed_minkowski() -> MetricField:
    """A small perturbation of Minkowski(3) with no symmetry and no product structure."""
    rows = [
        ["-1+0.05*sin(x)*cos(y)", "0.03*sin(y)", "0"],
        ["0.03*sin(y)", "1+0.04*sin(t)", "0"],
        ["0", "0", "1+0.05*cos(x)"],
    ]
    return MetricField.from_strings(("t", "x", "y"), rows, (-1, 1, 1), ((-1.0, 1.0),) * 3, "perturbed minkowski(3)")


@dataclass(frozen=True)
class ChartExample:
    """A product chart that is not assumed warped, with hypersurfaces and a grid to test it on."""

    name: str
    product: ProductChartSpec
    lifts: tuple[tuple[Immersion, tuple[float, ...]], ...]
    grid: np.ndarray


def _counterexample(i: int) -> ChartExample:
    ce, exm = counterexamples()[i]
    return ChartExample(ce.metric.name, ce, exm.lifts, exm.grid)


CATALOG = {
    "warped_minkowski": warped_minkowski,
    "warped_de_sitter": warped_de_sitter,
    "warped_anti_de_sitter": warped_anti_de_sitter,
    "nonwarped_mixed_factor": lambda: _counterexample(0),
    "nonwarped_anisotropic": lambda: _counterexample(1),
    "nonwarped_de_sitter": lambda: _counterexample(2),
    "perturbed_minkowski": perturbed_minkowski,
}
