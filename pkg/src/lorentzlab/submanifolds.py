"""Immersed submanifolds: induced metric, second fundamental form, Weingarten maps, geodesy tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import (
    DegenerateSubmanifoldError,
    InputError,
    NonNormalError,
    RankDeficiencyError,
)
from .geodesics import gauss_newton_offset, rk4_flow
from .metric import MetricField
from .tolerances import ACTIVE as TOL


@dataclass(frozen=True)
class Immersion:
    """Chart coordinates of the ambient manifold as expressions in ``params``."""

    params: tuple[str, ...]
    map: tuple[ex.Expr, ...]
    domain_box: tuple[tuple[float, float], ...] | None = None
    name: str = "S"

    def __post_init__(self):
        extra = set().union(*(e.symbols() for e in self.map)) - set(self.params)
        if extra:
            raise InputError(f"immersion {self.name} uses undeclared symbols {sorted(extra)}")
        if self.domain_box is not None and len(self.domain_box) != len(self.params):
            raise InputError("domain_box needs one interval per parameter")

    @classmethod
    def from_strings(cls, params: Sequence[str], comps, domain_box=None, name: str = "S") -> "Immersion":
        params = tuple(params)
        exprs = tuple(ex.parse(c, params) if isinstance(c, str) else ex.as_expr(c) for c in comps)
        box = None if domain_box is None else tuple((float(a), float(b)) for a, b in domain_box)
        return cls(params, exprs, box, name)

    @property
    def k(self) -> int:
        return len(self.params)

    def in_domain(self, u) -> bool:
        if self.domain_box is None:
            return True
        u = np.asarray(u, dtype=float)
        return bool(all(lo <= ui <= hi for ui, (lo, hi) in zip(u, self.domain_box)))

    def points(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.stack([ex.eval_value(e, self.params, u) for e in self.map], axis=-1)

    def jacobian(self, u) -> np.ndarray:
        """J[..., i, a] = d x^i / d u^a."""
        u = np.asarray(u, dtype=float)
        return np.stack([ex.eval_jet(e, self.params, u, order=1).grad for e in self.map], axis=-2)

    def jets(self, u):
        """Point, Jacobian J[i, a] and Hessian H[i, a, b]."""
        u = np.asarray(u, dtype=float)
        jets = [ex.eval_jet(e, self.params, u, order=2) for e in self.map]
        return (
            np.stack([j.value for j in jets], axis=-1),
            np.stack([j.grad for j in jets], axis=-2),
            np.stack([j.hess for j in jets], axis=-3),
        )


def _check(m: MetricField, im: Immersion, u) -> np.ndarray:
    if len(im.map) != m.dim:
        raise InputError(f"immersion {im.name} has {len(im.map)} components, ambient dimension is {m.dim}")
    u = np.asarray(u, dtype=float)
    if u.shape != (im.k,):
        raise InputError(f"parameter point must have {im.k} components")
    if not im.in_domain(u):
        raise InputError(f"parameter point {u.tolist()} outside the domain of {im.name}")
    return u


def _rank_checked_jacobian(im: Immersion, j: np.ndarray) -> None:
    s = np.linalg.svd(j, compute_uv=False)
    if s[-1] <= TOL.rank_min_singular:
        raise RankDeficiencyError(f"differential of {im.name} has rank < {im.k} (smallest singular value {s[-1]:.2e})")


def induced_metric(m: MetricField, im: Immersion, u) -> np.ndarray:
    u = _check(m, im, u)
    x = im.points(u)
    j = im.jacobian(u)
    _rank_checked_jacobian(im, j)
    return j.T @ m.values(x) @ j


def is_degenerate(h: np.ndarray) -> bool:
    return abs(float(np.linalg.det(h))) <= TOL.induced_degenerate


def induced_type(m: MetricField, im: Immersion, u) -> str:
    return "degenerate" if is_degenerate(induced_metric(m, im, u)) else "nondegenerate"


@dataclass(frozen=True)
class SecondFundamentalForm:
    """II[a, b] is the normal-valued form on coordinate fields, in ambient chart components."""

    at: np.ndarray
    II: np.ndarray
    induced: np.ndarray
    mean_normal: np.ndarray

    def norm(self) -> float:
        return float(np.max(np.abs(self.II))) if self.II.size else 0.0

    def umbilic_residual(self) -> float:
        fit = self.induced[:, :, None] * self.mean_normal
        return float(np.max(np.abs(self.II - fit))) if self.II.size else 0.0


def _tangent_projector(j: np.ndarray, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    # P v = J h^{-1} J^T g v
    return j @ np.linalg.solve(h, j.T @ g)


def second_fundamental_form(m: MetricField, im: Immersion, u) -> SecondFundamentalForm:
    u = _check(m, im, u)
    x, j, hess = im.jets(u)
    _rank_checked_jacobian(im, j)
    g = m.values(x)
    h = j.T @ g @ j
    if is_degenerate(h):
        raise DegenerateSubmanifoldError(
            f"induced metric of {im.name} is degenerate at {u.tolist()}; use lightlike_geodesy_test"
        )
    gamma = m.christoffel(x)
    # nabla_{X_a} X_b in chart components: [i, a, b]
    nab = hess + np.einsum("kij,ia,jb->kab", gamma, j, j)
    proj = _tangent_projector(j, g, h)
    normal = nab - np.einsum("ij,jab->iab", proj, nab)
    ii = np.moveaxis(normal, 0, -1)
    ii = 0.5 * (ii + np.swapaxes(ii, 0, 1))
    iu = np.triu_indices(im.k)
    hv = h[iu]
    mean = (hv @ ii[iu]) / (hv @ hv)
    return SecondFundamentalForm(u, ii, h, mean)


def weingarten(m: MetricField, im: Immersion, u, z) -> np.ndarray:
    """Matrix A[c, a] of A_Z X_a = A[c, a] X_c, the tangential part of nabla_{X_a} Z.

    Computed from <II(X, Y), Z> = -<A_Z X, Y>.
    """
    u = _check(m, im, u)
    z = np.asarray(z, dtype=float)
    x = im.points(u)
    j = im.jacobian(u)
    g = m.values(x)
    along = j.T @ g @ z
    if np.max(np.abs(along)) > TOL.normal_tol * max(1.0, float(np.linalg.norm(z))):
        raise NonNormalError(f"Z is not normal to {im.name} (max |<Z, X_a>| = {np.max(np.abs(along)):.2e})")
    sff = second_fundamental_form(m, im, u)
    lowered = -np.einsum("abi,ij,j->ab", sff.II, g, z)
    return np.linalg.solve(sff.induced, lowered)


def classify(m: MetricField, im: Immersion, u) -> str:
    sff = second_fundamental_form(m, im, u)
    if sff.norm() < TOL.geodesic_cert:
        return "geodesic"
    if sff.umbilic_residual() < TOL.geodesic_cert:
        return "umbilical"
    return "generic"


# ---------------------------------------------------------------------------
# Deviation tests


def _probe_directions(k: int) -> np.ndarray:
    """Deterministic unit directions in parameter space: axes and pairwise diagonals."""
    dirs = list(np.eye(k))
    for a in range(k):
        for b in range(a + 1, k):
            for sgn in (1.0, -1.0):
                d = np.zeros(k)
                d[a], d[b] = 1.0, sgn
                dirs.append(d / np.sqrt(2.0))
    return np.array(dirs)


def deviation_vectors(
    m: MetricField,
    points_fn,
    jac_fn,
    base: np.ndarray,
    dirs: np.ndarray,
    s: float,
    steps: int = 16,
    jac_at_base: np.ndarray | None = None,
):
    """Second-order deviation of probe geodesics from a parametrised surface.

    For each base parameter ``base[..., :]`` and parameter direction ``dirs[p]`` a
    geodesic leaves the surface point with Euclidean-unit velocity J·dir, runs for
    parameter length ``s`` and its endpoint is projected back onto the surface.

    Returns the chart-space vectors ``(q - F(a*)) / s**2`` with shape
    ``base.shape[:-1] + (P, n)``.
    """
    base = np.asarray(base, dtype=float)
    x0 = points_fn(base)
    j0 = jac_fn(base) if jac_at_base is None else jac_at_base
    vel = np.einsum("...ia,pa->...pi", j0, dirs)
    speed = np.linalg.norm(vel, axis=-1, keepdims=True)
    vel = vel / speed
    x0b = np.broadcast_to(x0[..., None, :], vel.shape)
    q, _ = rk4_flow(m, x0b, vel, s, steps, check_box=False)
    a0 = base[..., None, :] + s * dirs / speed
    _, a = gauss_newton_offset(points_fn, jac_fn, q, a0)
    return (q - points_fn(a)) / (s * s)


def deviation_residual(m: MetricField, im: Immersion, u, probes: int | None = None, s: float = 0.05) -> float:
    """max over probe directions of |offset| / s^2 at im(u), for any immersion."""
    u = _check(m, im, u)
    j = im.jacobian(u)
    _rank_checked_jacobian(im, j)
    dirs = _probe_directions(im.k)
    if probes is not None:
        if probes < 1:
            raise InputError("probes must be >= 1")
        dirs = dirs[: max(probes, 1)] if probes <= len(dirs) else _extra_dirs(im.k, probes)
    dev = deviation_vectors(m, im.points, im.jacobian, u, dirs, s, jac_at_base=j)
    return float(np.max(np.linalg.norm(dev, axis=-1)))


def _extra_dirs(k: int, count: int) -> np.ndarray:
    base = _probe_directions(k)
    rng = np.random.default_rng(12345)
    extra = rng.standard_normal((count - len(base), k))
    extra /= np.linalg.norm(extra, axis=1, keepdims=True)
    return np.vstack([base, extra])


def lightlike_geodesy_test(m: MetricField, im: Immersion, u, probes: int | None = None, s: float = 0.05) -> float:
    """Geodesic-deviation residual of a lightlike hypersurface at ``u``.

    Values below the certificate threshold (1e-7) certify geodesy at u; above 1e-4
    reject it.
    """
    h = induced_metric(m, im, u)
    if not is_degenerate(h):
        raise InputError(f"{im.name} is nondegenerate at {np.asarray(u).tolist()}; use classify")
    return deviation_residual(m, im, u, probes, s)


def geodesy_residual(m: MetricField, im: Immersion, u) -> tuple[str, float]:
    """Geodesy residual with automatic dispatch on the induced metric type.

    Nondegenerate submanifolds use max |II|, degenerate ones the deviation test.
    """
    h = induced_metric(m, im, u)
    if is_degenerate(h):
        return "degenerate", deviation_residual(m, im, u)
    return "nondegenerate", second_fundamental_form(m, im, u).norm()


def geodesy_label(residual: float) -> str:
    if residual < TOL.geodesic_cert:
        return "geodesic"
    if residual > TOL.geodesic_reject:
        return "not_geodesic"
    return "inconclusive"


def normal_space(m: MetricField, im: Immersion, u) -> np.ndarray:
    """Basis (rows) of the g-orthogonal complement of the tangent space at u.

    For a lightlike hypersurface this is its isotropic tangent direction.
    """
    u = _check(m, im, u)
    x = im.points(u)
    j = im.jacobian(u)
    covec = j.T @ m.values(x)  # (k, n)
    _, s, vt = np.linalg.svd(covec)
    rank = int(np.sum(s > TOL.rank_min_singular * max(1.0, s[0])))
    return vt[rank:]


def product_lift(base_coords: Sequence[str], base_box, im: Immersion, name: str | None = None) -> Immersion:
    """L x S as an immersion into L x N: base coordinates enter as free parameters."""
    base_coords = tuple(base_coords)
    clash = set(base_coords) & set(im.params)
    if clash:
        raise InputError(f"base and submanifold parameters overlap: {sorted(clash)}")
    params = base_coords + im.params
    comps = tuple(ex.Sym(c) for c in base_coords) + im.map
    box = None
    if im.domain_box is not None and base_box is not None:
        box = tuple(tuple(b) for b in base_box) + im.domain_box
    return Immersion(params, comps, box, name or f"L x {im.name}")
