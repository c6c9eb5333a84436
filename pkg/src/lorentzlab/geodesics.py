"""Geodesic integration, exponential map, exponential images of planes, and offsets to them.

All integrators are fixed-step classical RK4 on the first-order system
``x' = v, v' = -Gamma(x)(v, v)``, vectorised over a batch of initial conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartBoundaryError, InputError
from .metric import MetricField, metric_at

DEFAULT_EXP_STEPS = 48


@dataclass(frozen=True)
class GeodesicState:
    x: np.ndarray
    v: np.ndarray
    s: float


def _accel(m: MetricField, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    gamma = m.christoffel(x)
    n = x.shape[-1]
    vv = (v[..., :, None] * v[..., None, :]).reshape(v.shape[:-1] + (n * n, 1))
    return -(gamma.reshape(gamma.shape[:-2] + (n * n,)) @ vv)[..., 0]


def _check_box(m: MetricField, x: np.ndarray) -> None:
    if m.box is not None and not np.all(m.in_box(x)):
        bad = np.asarray(x)[~m.in_box(x)]
        raise ChartBoundaryError(f"geodesic left the valid box of {m.name} near {bad.reshape(-1, m.dim)[0].tolist()}")


def rk4_flow(m: MetricField, x0, v0, s: float, steps: int, keep: bool = False, check_box: bool = True):
    """Integrate a batch of geodesics for parameter length ``s`` in ``steps`` RK4 steps.

    Returns ``(x, v)`` at the end, or the full trajectories ``(steps+1, ..., n)`` when
    ``keep`` is set.
    """
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    x, v = np.broadcast_arrays(x, v)
    x, v = x.copy(), v.copy()
    if steps < 1:
        raise InputError("steps must be >= 1")
    h = s / steps
    xs, vs = ([x.copy()], [v.copy()]) if keep else (None, None)
    for _ in range(steps):
        k1x, k1v = v, _accel(m, x, v)
        x2, v2 = x + 0.5 * h * k1x, v + 0.5 * h * k1v
        k2x, k2v = v2, _accel(m, x2, v2)
        x3, v3 = x + 0.5 * h * k2x, v + 0.5 * h * k2v
        k3x, k3v = v3, _accel(m, x3, v3)
        x4, v4 = x + h * k3x, v + h * k3v
        k4x, k4v = v4, _accel(m, x4, v4)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
        if check_box:
            _check_box(m, x)
        if keep:
            xs.append(x.copy())
            vs.append(v.copy())
    if keep:
        return np.stack(xs), np.stack(vs)
    return x, v


def integrate_geodesic(m: MetricField, x0, v0, s_max: float, step: float | None = None) -> list[GeodesicState]:
    """Geodesic from ``x0`` with velocity ``v0`` on ``[0, s_max]``; default step ``s_max/1000``."""
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    metric_at(m, x0, check_signature=False)
    if step is None:
        step = s_max / 1000.0
    if step <= 0:
        raise InputError("step must be positive")
    steps = max(1, int(round(s_max / step)))
    xs, vs = rk4_flow(m, x0, v0, s_max, steps, keep=True)
    h = s_max / steps
    return [GeodesicState(xs[i], vs[i], i * h) for i in range(steps + 1)]


def energy_drift(m: MetricField, states: list[GeodesicState]) -> float:
    """max |g(v,v)(s) - g(v,v)(0)| along an integrated geodesic."""
    xs = np.stack([st.x for st in states])
    vs = np.stack([st.v for st in states])
    g = m.values(xs)
    e = np.einsum("si,sij,sj->s", vs, g, vs)
    return float(np.max(np.abs(e - e[0])))


def exp_map(m: MetricField, x, w, steps: int = DEFAULT_EXP_STEPS, check_box: bool = True) -> np.ndarray:
    """exp_x(w): endpoint at parameter 1 of the geodesic with initial velocity w.

    ``w`` may be a batch ``(..., n)``.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if not np.any(w):
        return np.broadcast_to(x, w.shape).copy()
    end, _ = rk4_flow(m, np.broadcast_to(x, w.shape), w, 1.0, steps, check_box=check_box)
    return end


# ---------------------------------------------------------------------------
# Exponential images of planes


def gauss_newton_offset(
    points_fn, jac_fn, q: np.ndarray, a0: np.ndarray, iters: int = 12, fresh: int = 2, xtol: float = 1e-13
):
    """Closest-point search on a parametrised surface, batched over rows of ``q``.

    The Jacobian is recomputed for the first ``fresh`` iterations and then frozen
    (chord iterations), which is cheap once the start is close. Returns
    ``(distance, params)`` with ``distance`` the chart-Euclidean distance from each
    ``q`` to the surface near ``a0``.
    """
    a = np.array(a0, dtype=float)
    f = points_fn(a)
    for it in range(iters):
        if it < fresh:
            j = jac_fn(a)
            jt = np.swapaxes(j, -1, -2)
            normal = jt @ j
        r = q - f
        da = np.linalg.solve(normal, (jt @ r[..., None]))[..., 0]
        a = a + da
        f = points_fn(a)
        if np.max(np.abs(da)) < xtol:
            break
    return np.linalg.norm(q - f, axis=-1), a


def _orthonormalise(plane: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(plane.T)
    if np.min(np.abs(np.diag(r))) < 1e-12 * max(1.0, np.max(np.abs(r))):
        raise InputError("plane vectors are linearly dependent")
    return q.T * np.sign(np.diag(r))[:, None]


@dataclass
class ExpPatch:
    """Samples of exp_x(w) for w in a k-plane p of T_xM with |w| <= radius.

    ``basis`` is a Euclidean-orthonormal basis of p; parameters ``a`` map to
    ``w = a @ basis``. ``samples[0]`` is the centre.
    """

    metric: MetricField
    center: np.ndarray
    plane: np.ndarray
    basis: np.ndarray
    radius: float
    params: np.ndarray
    samples: np.ndarray
    steps: int = DEFAULT_EXP_STEPS
    fd_step: float = 1e-5
    check_box: bool = True

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    def points(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        return exp_map(self.metric, self.center, a @ self.basis, self.steps, self.check_box)

    def jacobian(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        h = self.fd_step
        eye = np.eye(self.k)
        shifted = np.concatenate([a[..., None, :] + h * eye, a[..., None, :] - h * eye], axis=-2)
        pts = self.points(shifted)
        plus, minus = pts[..., : self.k, :], pts[..., self.k :, :]
        return np.swapaxes((plus - minus) / (2 * h), -1, -2)

    def tangents(self, a) -> np.ndarray:
        return self.jacobian(a)


def exp_patch(
    m: MetricField,
    x,
    plane,
    radius: float,
    grid: int = 5,
    steps: int = DEFAULT_EXP_STEPS,
    check_box: bool = True,
) -> ExpPatch:
    x = np.asarray(x, dtype=float)
    plane = np.atleast_2d(np.asarray(plane, dtype=float))
    if plane.shape[1] != m.dim:
        raise InputError("plane vectors must have the chart dimension")
    basis = _orthonormalise(plane)
    k = basis.shape[0]
    if radius <= 0 or grid < 2:
        params = np.zeros((1, k))
    else:
        axis = np.linspace(-radius, radius, grid)
        mesh = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
        norms = np.linalg.norm(mesh, axis=1)
        keep = (norms <= radius * (1 + 1e-12)) & (norms > 0)
        if k == 1:
            keep = norms > 0
        params = np.vstack([np.zeros((1, k)), mesh[keep]])
    samples = exp_map(m, x, params @ basis, steps, check_box)
    return ExpPatch(m, x, plane, basis, float(radius), params, samples, steps, check_box=check_box)


def surface_offset(patch: ExpPatch, q) -> float:
    """Chart-Euclidean distance from ``q`` to the patch surface.

    Starts at the nearest sample and refines by Gauss-Newton on the exact
    exponential parametrisation.
    """
    q = np.asarray(q, dtype=float)
    lo = patch.samples.min(axis=0)
    hi = patch.samples.max(axis=0)
    margin = max(0.5 * patch.radius, 1e-9)
    if np.any(q < lo - margin) or np.any(q > hi + margin):
        raise InputError("point lies outside the patch bounding box")
    i = int(np.argmin(np.linalg.norm(patch.samples - q, axis=1)))
    if patch.radius == 0.0:
        return float(np.linalg.norm(q - patch.samples[0]))
    d, _ = gauss_newton_offset(patch.points, patch.jacobian, q[None, :], patch.params[i][None, :])
    return float(d[0])
