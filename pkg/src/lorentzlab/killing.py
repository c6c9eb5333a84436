"""Killing fields: residuals, lightlike checks, searches over Killing bases, isometry extension."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from . import expr as ex
from .errors import InputError, ZeroFieldError
from .tolerances import ACTIVE as TOL


@dataclass(frozen=True)
class VectorField:
    coords: tuple[str, ...]
    comp: tuple[ex.Expr, ...]
    name: str = "V"

    def __post_init__(self):
        if len(self.comp) != len(self.coords):
            raise InputError("vector field needs one component per coordinate")
        extra = set().union(*(c.symbols() for c in self.comp)) - set(self.coords)
        if extra:
            raise InputError(f"vector field uses undeclared symbols {sorted(extra)}")

    @classmethod
    def from_strings(cls, coords: Sequence[str], comps, name: str = "V") -> "VectorField":
        coords = tuple(coords)
        return cls(coords, tuple(ex.parse(c, coords) if isinstance(c, str) else ex.as_expr(c) for c in comps), name)

    def values(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.stack([ex.eval_value(c, self.coords, pts) for c in self.comp], axis=-1)

    def jets(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Components V^i and derivatives dV[..., i, j] = d_j V^i."""
        pts = np.asarray(points, dtype=float)
        n = len(self.coords)
        v = np.empty(pts.shape[:-1] + (n,))
        dv = np.empty(pts.shape[:-1] + (n, n))
        for i, c in enumerate(self.comp):
            jet = ex.eval_jet(c, self.coords, pts, order=1)
            v[..., i] = jet.value
            dv[..., i, :] = jet.grad
        return v, dv


def combine(basis: Sequence[VectorField], coeffs, name: str = "V") -> VectorField:
    """The field sum_i c_i V_i as a new expression-defined field."""
    coeffs = np.asarray(coeffs, dtype=float)
    coords = basis[0].coords
    comps = []
    for i in range(len(coords)):
        acc: ex.Expr | None = None
        for c, field in zip(coeffs, basis):
            if c == 0.0 or ex.is_zero(field.comp[i]):
                continue
            term = ex.scale(float(c), field.comp[i])
            acc = term if acc is None else ex.Add(acc, term)
        comps.append(acc if acc is not None else ex.Num(0.0))
    return VectorField(coords, tuple(comps), name)


def _check_chart(m, field: VectorField):
    if tuple(field.coords) != tuple(m.coords):
        raise InputError(f"field {field.name} is written in coordinates {field.coords}, metric in {m.coords}")


def lie_derivative_metric(m, field: VectorField, p) -> np.ndarray:
    """(L_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k = nabla_i V_j + nabla_j V_i."""
    _check_chart(m, field)
    g, dg, _ = m.jets(p, order=1)
    v, dv = field.jets(p)
    term = np.einsum("...kj,...ki->...ij", g, dv)
    return np.einsum("...ijk,...k->...ij", dg, v) + term + np.swapaxes(term, -1, -2)


def killing_residual(m, field: VectorField, p) -> float:
    """max |nabla_i V_j + nabla_j V_i| at p (or over a batch of points)."""
    return float(np.max(np.abs(lie_derivative_metric(m, field, p))))


def lightlike_check(m, field: VectorField, grid) -> bool:
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise InputError("grid must be nonempty")
    _check_chart(m, field)
    g = m.values(grid)
    v = field.values(grid)
    q = np.einsum("...i,...ij,...j->...", v, g, v)
    bound = TOL.lightlike_field_rel * (1.0 + np.einsum("...i,...i->...", v, v))
    return bool(np.all(np.abs(q) < bound))


def covariant_self_derivative(m, field: VectorField, p) -> np.ndarray:
    """nabla_V V = V^j d_j V^k + Gamma^k_ij V^i V^j."""
    _check_chart(m, field)
    v, dv = field.jets(p)
    gamma = m.christoffel(p)
    return np.einsum("...kj,...j->...k", dv, v) + np.einsum("...kij,...i,...j->...k", gamma, v, v)


def geodesic_orbit_residual(m, field: VectorField, p) -> float:
    p = np.asarray(p, dtype=float)
    v = field.values(p)
    if np.linalg.norm(v) == 0.0:
        raise ZeroFieldError(f"{field.name} vanishes at {p.tolist()}")
    return float(np.linalg.norm(covariant_self_derivative(m, field, p)))


def gram_matrices(m, basis: Sequence[VectorField], grid) -> np.ndarray:
    """Q[p, a, b] = g(V_a, V_b) at each grid point."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    g = m.values(grid)
    vals = np.stack([f.values(grid) for f in basis], axis=1)  # (P, B, n)
    return np.einsum("pai,pij,pbj->pab", vals, g, vals)


def lightlike_killing_search(
    m,
    basis: Sequence[VectorField],
    grid,
    trials: int = 64,
    seed: int = 0,
    threshold: float | None = None,
    check_killing: bool = True,
) -> list[np.ndarray]:
    """Unit coefficient vectors c whose field sum c_i V_i is null at every grid point.

    Random starts on the coefficient sphere are refined by Levenberg-Marquardt on
    the residuals g(V, V)(p) = c^T Q_p c with |c| = 1; a refined vector is kept when
    max_p |g(V, V)| < ``threshold``. Vectors equal up to sign are merged.
    Results are sorted by that maximum.
    """
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    threshold = TOL.lightlike_search if threshold is None else threshold
    for f in basis:
        _check_chart(m, f)
    if check_killing:
        for f in basis:
            res = killing_residual(m, f, grid)
            if res >= TOL.killing_zero:
                raise InputError(f"basis field {f.name} is not Killing on the grid (residual {res:.2e})")
    q = gram_matrices(m, basis, grid)
    scale = max(1.0, float(np.max(np.abs(q))))
    qs = q / scale

    def residuals(c):
        return np.append(np.einsum("a,pab,b->p", c, qs, c), c @ c - 1.0)

    def jacobian(c):
        return np.vstack([2.0 * np.einsum("pab,b->pa", qs, c), 2.0 * c])

    rng = np.random.default_rng(seed)
    found: list[tuple[float, np.ndarray]] = []
    for _ in range(trials):
        c0 = rng.standard_normal(len(basis))
        c0 /= np.linalg.norm(c0)
        res = least_squares(residuals, c0, jac=jacobian, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        c = res.x / np.linalg.norm(res.x)
        worst = float(np.max(np.abs(np.einsum("a,pab,b->p", c, q, c))))
        if worst >= threshold:
            continue
        k = int(np.argmax(np.abs(c)))
        if c[k] < 0:
            c = -c
        if any(abs(float(c @ d)) > 1.0 - 1e-8 for _, d in found):
            continue
        found.append((worst, c))
    found.sort(key=lambda item: (item[0], tuple(item[1])))
    return [c for _, c in found]


def extend_isometry_pullback_residual(spec, fiber_map: Sequence[ex.Expr | str], grid) -> float:
    """max over the grid of |F^* G - G| for F(x, y) = (x, f(y)) on the warped metric G."""
    from .models import warped

    fiber = spec.fiber
    comps = [ex.parse(c, fiber.coords) if isinstance(c, str) else c for c in fiber_map]
    if len(comps) != fiber.dim:
        raise InputError("fiber map needs one component per fiber coordinate")
    extra = set().union(*(c.symbols() for c in comps)) - set(fiber.coords)
    if extra:
        raise InputError(f"fiber map uses non-fiber symbols {sorted(extra)}")
    big = warped(spec)
    k = spec.k
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    fy = np.empty((grid.shape[0], fiber.dim))
    jy = np.empty((grid.shape[0], fiber.dim, fiber.dim))
    for i, c in enumerate(comps):
        jet = ex.eval_jet(c, fiber.coords, grid[:, k:], order=1)
        fy[:, i] = jet.value
        jy[:, i, :] = jet.grad
    image = np.concatenate([grid[:, :k], fy], axis=1)
    jac = np.zeros((grid.shape[0], big.dim, big.dim))
    jac[:, :k, :k] = np.eye(k)
    jac[:, k:, k:] = jy
    pulled = np.einsum("pai,pab,pbj->pij", jac, big.values(image), jac)
    return float(np.max(np.abs(pulled - big.values(grid))))
