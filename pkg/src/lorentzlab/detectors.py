"""Decision procedures on declared product charts: block structure, holonomy homothety,
the warped-product criterion, geodesic transfer and conformal factors of maps."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import expr as ex
from .errors import InputError, InsufficientHypersurfacesError
from .metric import MetricField, constant_curvature_residual
from .models import WarpedSpec, warped
from .submanifolds import (
    Immersion,
    geodesy_residual,
    normal_space,
    product_lift,
    second_fundamental_form,
)
from .tolerances import ACTIVE as TOL
from .tolerances import Tolerances


@dataclass(frozen=True)
class ProductChartSpec:
    """A metric on a chart whose first ``k`` coordinates are the base block."""

    metric: MetricField
    k: int

    def __post_init__(self):
        if not 1 <= self.k < self.metric.dim:
            raise InputError(f"base block size {self.k} incompatible with dimension {self.metric.dim}")

    @classmethod
    def from_warped(cls, spec: WarpedSpec, name: str | None = None) -> "ProductChartSpec":
        return cls(warped(spec, name), spec.k)

    @property
    def base_coords(self) -> tuple[str, ...]:
        return self.metric.coords[: self.k]

    @property
    def fiber_coords(self) -> tuple[str, ...]:
        return self.metric.coords[self.k :]

    def fiber_block(self, points) -> np.ndarray:
        return self.metric.values(points)[..., self.k :, self.k :]

    def fiber_leaf(self, x) -> MetricField:
        """Metric induced on the leaf {x} x N, written in fiber coordinates."""
        k = self.k
        sub = {c: float(v) for c, v in zip(self.base_coords, x)}
        rows = tuple(
            tuple(ex.substitute(self.metric.components[k + i][k + j], sub) for j in range(self.metric.dim - k))
            for i in range(self.metric.dim - k)
        )
        box = None if self.metric.box is None else self.metric.box[k:]
        return MetricField(self.fiber_coords, rows, self.metric.signature[k:], box, f"leaf at {list(map(float, x))}")


def _split(spec: ProductChartSpec, grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[1] != spec.metric.dim:
        raise InputError("grid points must have the chart dimension")
    return grid, grid[:, : spec.k], grid[:, spec.k :]


class BlockStructure(NamedTuple):
    off_block_max: float
    fiber_conformal: bool
    conformal_residual: float


def check_block_structure(spec: ProductChartSpec, grid, tol: Tolerances | None = None) -> BlockStructure:
    """Off-block size, and whether fiber blocks at (x, y) and (x0, y) differ by a y-independent scalar.

    ``x0`` is the base part of the first grid point.
    """
    tol = tol or TOL
    grid, xs, ys = _split(spec, grid)
    g = spec.metric.values(grid)
    off = float(np.max(np.abs(g[:, : spec.k, spec.k :])))
    ref_pts = np.hstack([np.broadcast_to(xs[0], xs.shape), ys])
    b = g[:, spec.k :, spec.k :]
    b0 = spec.fiber_block(ref_pts)
    lam = np.einsum("pij,pij->p", b, b0) / np.einsum("pij,pij->p", b0, b0)
    resid = float(np.max(np.abs(b - lam[:, None, None] * b0)))
    # the scalar must depend on the base point only
    spread = 0.0
    keys = [tuple(np.round(x, 12)) for x in xs]
    for key in set(keys):
        idx = [i for i, kk in enumerate(keys) if kk == key]
        spread = max(spread, float(np.ptp(lam[idx])))
    worst = max(resid, spread)
    return BlockStructure(off, bool(worst < tol.conformal), worst)


@dataclass(frozen=True)
class HolonomyReport:
    max_variation: float
    ratio: float
    skipped: tuple[tuple[int, int], ...] = ()

    def __float__(self) -> float:
        return self.max_variation


def holonomy_homothety_check(spec: ProductChartSpec, x1, x2, grid, guard: float = 1e-12) -> HolonomyReport:
    """Entrywise ratio of fiber blocks at (x2, y) and (x1, y) over fiber points ``grid``.

    The reference ratio is the largest-magnitude entry at the first fiber point;
    the variation is the largest deviation of any guarded entry at any grid point
    from it, so anisotropic rescalings count as non-homothetic too.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    ys = np.atleast_2d(np.asarray(grid, dtype=float))
    if ys.shape[1] != spec.metric.dim - spec.k:
        raise InputError("holonomy grid must consist of fiber points")
    for x in (x1, x2):
        spec.metric.require_in_box(np.concatenate([x, ys[0]]))
    p1 = np.hstack([np.broadcast_to(x1, (len(ys), spec.k)), ys])
    p2 = np.hstack([np.broadcast_to(x2, (len(ys), spec.k)), ys])
    b1 = spec.fiber_block(p1)
    b2 = spec.fiber_block(p2)
    scale = np.max(np.abs(b1), axis=(1, 2), keepdims=True)
    ok = np.abs(b1) > guard * scale
    skipped = tuple(sorted({(int(i), int(j)) for _, i, j in zip(*np.nonzero(~ok & (np.abs(b2) > guard * scale)))}))
    i0, j0 = np.unravel_index(np.argmax(np.abs(b1[0])), b1[0].shape)
    ref = float(b2[0, i0, j0] / b1[0, i0, j0])
    ratios = np.where(ok, b2 / np.where(ok, b1, 1.0), ref)
    return HolonomyReport(float(np.max(np.abs(ratios - ref))), ref, skipped)


# ---------------------------------------------------------------------------
# Warped-product criterion


@dataclass(frozen=True)
class Check:
    passed: bool
    value: float
    rejected: bool

    def to_dict(self) -> dict:
        return {"passed": self.passed, "value": self.value, "rejected": self.rejected}


def _check(value: float, cert: float, reject: float) -> Check:
    return Check(bool(value < cert), float(value), bool(value > reject))


@dataclass(frozen=True)
class WarpedVerdict:
    base_geodesic: Check
    fiber_umbilical: Check
    holonomy_homothetic: Check
    fiber_constant_curvature: Check
    block_orthogonal: Check
    hypersurfaces: tuple[tuple[str, str, Check], ...]
    hypersurface_rank: int
    verdict: str
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "base_geodesic": self.base_geodesic.to_dict(),
            "fiber_umbilical": self.fiber_umbilical.to_dict(),
            "holonomy_homothetic": self.holonomy_homothetic.to_dict(),
            "fiber_constant_curvature": self.fiber_constant_curvature.to_dict(),
            "block_orthogonal": self.block_orthogonal.to_dict(),
            "hypersurfaces": [{"name": n, "kind": k, **c.to_dict()} for n, k, c in self.hypersurfaces],
            "hypersurface_rank": self.hypersurface_rank,
            "notes": list(self.notes),
        }


def _base_leaf(spec: ProductChartSpec, y) -> Immersion:
    comps = tuple(ex.Sym(c) for c in spec.base_coords) + tuple(ex.Num(float(v)) for v in y)
    return Immersion(spec.base_coords, comps, None, "base leaf")


def _fiber_leaf_immersion(spec: ProductChartSpec, x) -> Immersion:
    comps = tuple(ex.Num(float(v)) for v in x) + tuple(ex.Sym(c) for c in spec.fiber_coords)
    return Immersion(spec.fiber_coords, comps, None, "fiber leaf")


def check_base_saturated(spec: ProductChartSpec, im: Immersion) -> None:
    """Syntactic check: the first k map components are the bare base parameters,
    and the fiber components do not involve them."""
    if len(im.map) != spec.metric.dim:
        raise InputError(f"hypersurface {im.name} has the wrong number of components")
    if im.k != spec.metric.dim - 1:
        raise InputError(f"{im.name} is not a hypersurface")
    for c, e in zip(spec.base_coords, im.map[: spec.k]):
        if not (isinstance(e, ex.Sym) and e.name == c and c in im.params):
            raise InputError(f"hypersurface {im.name} is not base-saturated: component for {c} must be the parameter {c}")
    for e in im.map[spec.k :]:
        if e.symbols() & set(spec.base_coords):
            raise InputError(f"hypersurface {im.name} mixes base parameters into fiber components")


def _hypersurface_param(spec: ProductChartSpec, im: Immersion, x, u_fiber) -> np.ndarray:
    idx = {p: i for i, p in enumerate(im.params)}
    u = np.zeros(im.k)
    for c, v in zip(spec.base_coords, x):
        u[idx[c]] = v
    rest = [p for p in im.params if p not in spec.base_coords]
    for p, v in zip(rest, u_fiber):
        u[idx[p]] = v
    return u


def _default_fiber_param(spec: ProductChartSpec, im: Immersion) -> np.ndarray:
    rest = [i for i, p in enumerate(im.params) if p not in spec.base_coords]
    if im.domain_box is None:
        return np.zeros(len(rest))
    return np.array([(im.domain_box[i][0] + im.domain_box[i][1]) / 2 for i in rest])


def warped_criterion(
    spec: ProductChartSpec,
    hypersurfaces: Sequence[Immersion | tuple[Immersion, Sequence[float]]],
    grid,
    tol: Tolerances | None = None,
    curvature_samples: int = 200,
    seed: int = 0,
) -> WarpedVerdict:
    """Spot-check the warped-product criterion at the grid points.

    Hypersurfaces are base-saturated immersions, optionally paired with the fiber
    part of the parameter point where they are evaluated (default: domain centre).
    They are evaluated above every distinct base point of the grid.
    """
    tol = tol or TOL
    grid, xs, ys = _split(spec, grid)
    n, k = spec.metric.dim, spec.k
    for p in grid:
        spec.metric.require_in_box(p)
    base_pts = np.unique(xs, axis=0)
    fiber_pts = np.unique(ys, axis=0)
    notes: list[str] = []

    block = check_block_structure(spec, grid, tol)
    block_check = _check(block.off_block_max, tol.pullback, tol.geodesic_reject)

    base_res = max(second_fundamental_form(spec.metric, _base_leaf(spec, y), x).norm() for x, y in zip(xs, ys))
    umb_res = max(
        second_fundamental_form(spec.metric, _fiber_leaf_immersion(spec, x), y).umbilic_residual()
        for x, y in zip(xs, ys)
    )

    hyp_checks = []
    normals = []
    for item in hypersurfaces:
        im, u_f = (item if isinstance(item, tuple) else (item, None))
        check_base_saturated(spec, im)
        u_f = _default_fiber_param(spec, im) if u_f is None else np.asarray(u_f, dtype=float)
        worst, kind = 0.0, ""
        for x in base_pts:
            u = _hypersurface_param(spec, im, x, u_f)
            kind, r = geodesy_residual(spec.metric, im, u)
            worst = max(worst, r)
            nv = normal_space(spec.metric, im, u)
            normals.extend(list(nv[:, k:] / np.linalg.norm(nv, axis=1, keepdims=True)))
        hyp_checks.append((im.name, kind, _check(worst, tol.geodesic_cert, tol.geodesic_reject)))
    if normals:
        sv = np.linalg.svd(np.array(normals), compute_uv=False)
        rank = int(np.sum(sv > tol.span_singular * max(1.0, sv[0])))
    else:
        rank = 0
    if rank < n - k:
        raise InsufficientHypersurfacesError(
            f"hypersurface normals span a {rank}-dimensional subspace of the {n - k}-dimensional fiber tangent"
        )

    spread = 0.0
    if n - k < 3:
        notes.append("fiber dimension 2: one plane per point, curvature spread is trivially zero")
    for x in base_pts:
        leaf = spec.fiber_leaf(x)
        for y in fiber_pts:
            _, s = constant_curvature_residual(leaf, y, samples=curvature_samples, seed=seed)
            spread = max(spread, s)

    hol = 0.0
    for x2 in base_pts[1:]:
        rep = holonomy_homothety_check(spec, base_pts[0], x2, fiber_pts)
        hol = max(hol, rep.max_variation)
        if rep.skipped:
            notes.append(f"holonomy ratio skipped near-zero entries {list(rep.skipped)}")
    if len(base_pts) < 2:
        notes.append("single base point: holonomy not tested")

    checks = {
        "base_geodesic": _check(base_res, tol.geodesic_cert, tol.geodesic_reject),
        "fiber_umbilical": _check(umb_res, tol.geodesic_cert, tol.geodesic_reject),
        "holonomy_homothetic": _check(hol, tol.homothety, tol.homothety_reject),
        "fiber_constant_curvature": _check(spread, tol.curvature_spread, tol.curvature_spread_reject),
    }
    everything = list(checks.values()) + [block_check] + [c for _, _, c in hyp_checks]
    if all(c.passed for c in everything):
        verdict = "warped"
    elif any(c.rejected for c in everything):
        verdict = "not_warped"
    else:
        verdict = "inconclusive"
    return WarpedVerdict(
        block_orthogonal=block_check,
        hypersurfaces=tuple(hyp_checks),
        hypersurface_rank=rank,
        verdict=verdict,
        notes=tuple(dict.fromkeys(notes)),
        **checks,
    )


# ---------------------------------------------------------------------------
# Transfer and conformal maps


class TransferPair(NamedTuple):
    fiber_kind: str
    fiber_residual: float
    lifted_kind: str
    lifted_residual: float


def geodesic_transfer_pair(spec: WarpedSpec, im: Immersion, u, x) -> TransferPair:
    """Geodesy residual of S in N at u and of L x S in the warped product at (x, u)."""
    k_fiber, r_fiber = geodesy_residual(spec.fiber, im, u)
    lift = product_lift(spec.base.coords, spec.base.box, im)
    big = warped(spec)
    k_lift, r_lift = geodesy_residual(big, lift, np.concatenate([np.asarray(x, float), np.asarray(u, float)]))
    return TransferPair(k_fiber, r_fiber, k_lift, r_lift)


class ConformalFactor(NamedTuple):
    is_conformal: bool
    factor_variation: float
    factors: np.ndarray
    conformal_residual: float


def conformal_factor_map(
    m1: MetricField, m2: MetricField, phi: Sequence[ex.Expr | str], grid, tol: Tolerances | None = None
) -> ConformalFactor:
    """Fit phi^* g2 = lambda(x) g1 pointwise; report the fit residual and the spread of lambda."""
    tol = tol or TOL
    comps = [ex.parse(c, m1.coords) if isinstance(c, str) else c for c in phi]
    if len(comps) != m2.dim:
        raise InputError("map needs one component per target coordinate")
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    jets = [ex.eval_jet(c, m1.coords, grid, order=1) for c in comps]
    image = np.stack([j.value for j in jets], axis=-1)
    jac = np.stack([j.grad for j in jets], axis=-2)
    m2.require_in_box(image)
    pulled = np.einsum("pai,pab,pbj->pij", jac, m2.values(image), jac)
    g1 = m1.values(grid)
    lam = np.einsum("pij,pij->p", pulled, g1) / np.einsum("pij,pij->p", g1, g1)
    resid = float(np.max(np.abs(pulled - lam[:, None, None] * g1)))
    variation = float(np.max(np.abs(lam - lam[0])))
    return ConformalFactor(bool(resid < tol.conformal), variation, lam, resid)
