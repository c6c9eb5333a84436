"""Scan of the isotropic directions u at a point whose orthogonal hyperplane exponentiates
to a lightlike geodesic hypersurface (the set C_x), with its span E_x.

Each isotropic direction is written u = e_0 + omega in a g-orthonormal frame with
omega on the unit sphere S^{n-2}. The hypersurface exp_x(u^perp) is sampled on a
ring of base points around x (at x itself the deviation vanishes by construction)
and probe geodesics tangent to it are measured against it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .geodesics import exp_map
from .metric import MetricField, metric_at, orthonormal_frame
from .submanifolds import _probe_directions, deviation_vectors
from .tolerances import ACTIVE as TOL
from .tolerances import Tolerances


@dataclass(frozen=True)
class ScanSettings:
    ring_radius: float = 0.12
    probe_length: float = 0.1
    exp_steps: int = 24
    probe_steps: int = 12
    fd_step: float = 1e-5
    refine: bool = True
    refine_iters: int = 10
    max_refine: int = 8


@dataclass
class ScanReport:
    at: np.ndarray
    accepted: list[tuple[np.ndarray, float]]
    clusters: list[list[int]]
    span_dim: int
    class_label: str
    resolution: int
    grid_residuals: np.ndarray = field(repr=False)
    grid_angles: np.ndarray = field(repr=False)
    accepted_fraction: float = 0.0
    spacing: float = 0.0

    def to_dict(self) -> dict:
        return {
            "at": self.at.tolist(),
            "class": self.class_label,
            "clusters": len(self.clusters),
            "span_dim": self.span_dim,
            "accepted_fraction": self.accepted_fraction,
            "grid_size": int(len(self.grid_residuals)),
            "accepted": [{"direction": d.tolist(), "residual": r} for d, r in self.accepted],
            "cluster_members": [list(c) for c in self.clusters],
        }


# ---------------------------------------------------------------------------
# Sphere parametrisation


def _omega(angles: np.ndarray) -> np.ndarray:
    """Hyperspherical map (..., d) -> (..., d+1); the last angle is azimuthal."""
    d = angles.shape[-1]
    out = np.empty(angles.shape[:-1] + (d + 1,))
    sin_acc = np.ones(angles.shape[:-1])
    for i in range(d - 1):
        out[..., i] = sin_acc * np.cos(angles[..., i])
        sin_acc = sin_acc * np.sin(angles[..., i])
    out[..., d - 1] = sin_acc * np.cos(angles[..., d - 1])
    out[..., d] = sin_acc * np.sin(angles[..., d - 1])
    return out


def _omega_tangents(angles: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Unit tangent vectors of the sphere along each angle, (..., d, d+1), Gram-Schmidt cleaned."""
    d = angles.shape[-1]
    tans = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        t = (_omega(angles + e) - _omega(angles - e)) / (2 * h)
        tans.append(t)
    t = np.stack(tans, axis=-2)
    w = _omega(angles)
    # orthonormalise against omega and each other
    out = np.empty_like(t)
    for i in range(d):
        v = t[..., i, :] - np.sum(t[..., i, :] * w, axis=-1, keepdims=True) * w
        for j in range(i):
            v = v - np.sum(v * out[..., j, :], axis=-1, keepdims=True) * out[..., j, :]
        out[..., i, :] = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return out


def sphere_grid(d: int, resolution: int) -> np.ndarray:
    """Angle grid on S^d with ``resolution`` points per great circle."""
    if d == 1:
        return (2 * np.pi * np.arange(resolution) / resolution)[:, None]
    rows = max(2, resolution // 2)
    out = []
    for i in range(rows):
        a = (i + 0.5) * np.pi / rows
        sub = sphere_grid(d - 1, max(4, int(round(resolution * np.sin(a)))))
        out.append(np.hstack([np.full((len(sub), 1), a), sub]))
    return np.vstack(out)


# ---------------------------------------------------------------------------
# Batched family of exponential hypersurfaces


class _ExpFamily:
    """exp_x(a @ basis[d]) for a stack of plane bases; parameters carry the family index first."""

    def __init__(self, m: MetricField, x: np.ndarray, bases: np.ndarray, steps: int, fd_step: float):
        self.m = m
        self.x = x
        self.bases = bases  # (D, k, n)
        self.steps = steps
        self.h = fd_step

    def points(self, a: np.ndarray) -> np.ndarray:
        extra = a.ndim - 2
        w = np.einsum("d...k,dkn->d...n", a, self.bases) if extra else a @ self.bases
        return exp_map(self.m, self.x, w, self.steps, check_box=False)

    def jacobian(self, a: np.ndarray) -> np.ndarray:
        k = a.shape[-1]
        eye = np.eye(k) * self.h
        shifted = np.concatenate([a[..., None, :] + eye, a[..., None, :] - eye], axis=-2)
        pts = self.points(shifted)
        return np.swapaxes((pts[..., :k, :] - pts[..., k:, :]) / (2 * self.h), -1, -2)


def _ring(k: int) -> np.ndarray:
    dirs = list(np.eye(k)) + list(-np.eye(k))
    if k == 2:
        dirs += [np.array(v) / np.sqrt(2) for v in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    return np.array(dirs)


def _orthonormal_rows(plane: np.ndarray) -> np.ndarray:
    # batched QR on (..., k, n) with a sign convention that is smooth in the input
    q, r = np.linalg.qr(np.swapaxes(plane, -1, -2))
    sign = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    sign[sign == 0] = 1.0
    return np.swapaxes(q * sign[..., None, :], -1, -2)


class _Scanner:
    def __init__(self, m: MetricField, x, settings: ScanSettings):
        self.m = m
        self.x = np.asarray(x, dtype=float)
        self.st = settings
        g, _ = metric_at(m, self.x)
        if not m.is_lorentzian:
            raise InputError("lightlike scans need a Lorentzian metric")
        self.g = g
        self.frame = orthonormal_frame(g)
        self.n = m.dim
        self.k = self.n - 1
        self.ring = _ring(self.k)
        self.dirs = _probe_directions(self.k)

    def directions(self, angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Isotropic vectors u and Euclidean-orthonormal bases of u^perp for a batch of angles."""
        e0 = self.frame[:, 0]
        spatial = self.frame[:, 1:]
        if self.n == 2:
            omega = np.where(angles[..., :1] < np.pi / 2, 1.0, -1.0)
            tans = np.zeros(angles.shape[:-1] + (0, 1))
        else:
            omega = _omega(angles)
            tans = _omega_tangents(angles)
        u = e0 + omega @ spatial.T
        comp = tans @ spatial.T
        plane = np.concatenate([u[..., None, :], comp], axis=-2)
        return u, _orthonormal_rows(plane)

    def deviations(self, angles: np.ndarray) -> np.ndarray:
        """Deviation vectors (D, R, P, n) for a batch of direction angles (D, d)."""
        _, bases = self.directions(angles)
        fam = _ExpFamily(self.m, self.x, bases, self.st.exp_steps, self.st.fd_step)
        base = np.broadcast_to(self.st.ring_radius * self.ring, (len(angles),) + self.ring.shape).copy()
        return deviation_vectors(
            self.m, fam.points, fam.jacobian, base, self.dirs, self.st.probe_length, self.st.probe_steps
        )

    def residuals(self, angles: np.ndarray) -> np.ndarray:
        dev = self.deviations(angles)
        return np.max(np.linalg.norm(dev, axis=-1), axis=(-1, -2))

    def refine(self, start: np.ndarray, spacing: float) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Newton in angle space on the stacked deviation vectors, batched over starts."""
        a = np.array(start, dtype=float)
        d = a.shape[-1]
        h = 1e-6
        eye = np.eye(d) * h
        for _ in range(self.st.refine_iters):
            trial = np.concatenate([a[:, None, :], a[:, None, :] + eye, a[:, None, :] - eye], axis=1)
            dev = self.deviations(trial.reshape(-1, d)).reshape(len(a), 1 + 2 * d, -1)
            r = dev[:, 0]
            jac = (dev[:, 1 : 1 + d] - dev[:, 1 + d :]) / (2 * h)  # (M, d, N)
            step = np.stack([np.linalg.lstsq(jac[i].T, -r[i], rcond=None)[0] for i in range(len(a))])
            # keep each start inside its own well
            big = np.linalg.norm(step, axis=1) > spacing
            step[big] *= (spacing / np.linalg.norm(step[big], axis=1))[:, None]
            a = a + step
            if np.max(np.abs(step)) < 1e-12:
                break
        return a, self.residuals(a)


def _angular(u: np.ndarray, v: np.ndarray) -> float:
    c = float(np.clip(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)), -1.0, 1.0))
    return float(np.arccos(c))


def _local_minima(angles: np.ndarray, res: np.ndarray, omegas: np.ndarray, spacing: float) -> list[int]:
    out = []
    for i in range(len(res)):
        near = [j for j in range(len(res)) if j != i and _angular(omegas[i], omegas[j]) < 1.6 * spacing]
        if all(res[i] <= res[j] for j in near):
            out.append(i)
    return out


def scan_cx(
    m: MetricField,
    x,
    resolution: int = 32,
    settings: ScanSettings | None = None,
    tol: Tolerances | None = None,
) -> ScanReport:
    if resolution < 16:
        raise InputError("resolution must be at least 16")
    st = settings or ScanSettings()
    tol = tol or TOL
    sc = _Scanner(m, x, st)
    d = sc.n - 2
    if d == 0:
        angles = np.array([[0.0], [np.pi]])
        spacing = np.pi
    else:
        angles = sphere_grid(d, resolution)
        spacing = 2 * np.pi / resolution
    grid_res = sc.residuals(angles)
    omegas = np.array([[1.0], [-1.0]]) if d == 0 else _omega(angles)
    acc_mask = grid_res < tol.geodesic_cert
    fraction = float(np.mean(acc_mask))

    cand: list[tuple[np.ndarray, np.ndarray, float]] = []  # (omega, angles, residual)
    for i in np.flatnonzero(acc_mask):
        cand.append((omegas[i], angles[i], float(grid_res[i])))

    if st.refine and d > 0 and fraction <= tol.cone_fraction:
        minima = [i for i in _local_minima(angles, grid_res, omegas, spacing) if not acc_mask[i]]
        minima = sorted(minima, key=lambda i: (grid_res[i], i))[: st.max_refine]
        if minima:
            ref, ref_res = sc.refine(angles[minima], spacing)
            for a, r in zip(ref, ref_res):
                if r < tol.geodesic_cert:
                    cand.append((_omega(a[None])[0], a, float(r)))

    # cluster by angular distance in merge order (grid index, then refinements)
    merge = tol.cluster_factor * spacing
    clusters: list[list[int]] = []
    for idx, (om, _, _) in enumerate(cand):
        hit = [c for c in clusters if any(_angular(om, cand[j][0]) < merge for j in c)]
        if not hit:
            clusters.append([idx])
        else:
            first = hit[0]
            first.append(idx)
            for other in hit[1:]:
                first.extend(other)
                clusters.remove(other)
            first.sort()

    accepted = []
    for om, a, r in cand:
        u, _ = sc.directions(a[None])
        u = u[0] / np.linalg.norm(u[0])
        accepted.append((u, r))

    if accepted:
        sv = np.linalg.svd(np.array([u for u, _ in accepted]), compute_uv=False)
        span_dim = int(np.sum(sv > tol.span_singular))
    else:
        span_dim = 0

    if fraction > tol.cone_fraction:
        label = "cone"
    else:
        label = {0: "empty", 1: "mono", 2: "bi"}.get(len(clusters), "finite_k")
    return ScanReport(
        at=sc.x,
        accepted=accepted,
        clusters=clusters,
        span_dim=span_dim,
        class_label=label,
        resolution=resolution,
        grid_residuals=grid_res,
        grid_angles=angles,
        accepted_fraction=fraction,
        spacing=spacing,
    )


def span_e(report: ScanReport) -> tuple[int, np.ndarray]:
    """Euclidean-orthonormal basis of the span of the accepted directions."""
    if not report.accepted:
        return 0, np.zeros((0, len(report.at)))
    a = np.array([u for u, _ in report.accepted])
    _, s, vt = np.linalg.svd(a)
    dim = int(np.sum(s > TOL.span_singular))
    return dim, vt[:dim]


def tautological_integrability_sample(
    m: MetricField, x, u, settings: ScanSettings | None = None, tol: Tolerances | None = None
) -> tuple[bool, float]:
    """Whether the lightlike hyperplane u^perp at x exponentiates to a geodesic hypersurface."""
    tol = tol or TOL
    sc = _Scanner(m, x, settings or ScanSettings())
    u = np.asarray(u, dtype=float)
    if abs(u @ sc.g @ u) > tol.isotropy_rel * max(1.0, float(u @ u)) * 1e3:
        raise InputError("u is not isotropic")
    coeff = np.linalg.solve(sc.frame, u)
    if coeff[0] == 0:
        raise InputError("u has no timelike component in the orthonormal frame")
    omega = coeff[1:] / coeff[0]
    omega /= np.linalg.norm(omega)
    if sc.n == 2:
        angles = np.array([[0.0 if omega[0] > 0 else np.pi]])
    else:
        angles = _angles_from_omega(omega)[None]
    r = float(sc.residuals(angles)[0])
    return r < tol.geodesic_cert, r


def _angles_from_omega(w: np.ndarray) -> np.ndarray:
    d = len(w) - 1
    a = np.empty(d)
    for i in range(d - 1):
        a[i] = np.arctan2(np.linalg.norm(w[i + 1 :]), w[i])
    a[d - 1] = np.arctan2(w[d], w[d - 1])
    return a
