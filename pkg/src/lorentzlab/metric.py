"""Metric fields on a single chart and their curvature at a point.

Conventions
-----------
* Signature (-,+,...,+) for Lorentz metrics: spacelike means g(v, v) > 0.
* ``gamma[k, i, j]`` is the Christoffel symbol Gamma^k_ij.
* ``riemann[l, i, j, k]`` is R^l_ijk with R(d_i, d_j) d_k = R^l_ijk d_l and
  R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
* ``lowered[i, j, k, l]`` is R_ijkl = g_lm R^m_ijk, so the sectional curvature is
  R(u, v, v, u) / (g(u,u) g(v,v) - g(u,v)^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import (
    ChartBoundaryError,
    DegenerateMetricError,
    DegeneratePlaneError,
    InputError,
    ResamplingError,
    SignatureError,
)
from .tolerances import ACTIVE as TOL

Box = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class MetricField:
    """Expression-defined metric g_ij(x) on a chart with a declared signature and sample box."""

    coords: tuple[str, ...]
    components: tuple[tuple[ex.Expr, ...], ...]
    signature: tuple[int, ...]
    box: Box | None = None
    name: str = "metric"
    _pairs: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.coords)
        if n < 1:
            raise InputError("metric dimension must be at least 1")
        if n == 1 and self.signature and self.signature[0] < 0:
            raise InputError("a 1-dimensional metric (warped-product base) must be Riemannian")
        if len(set(self.coords)) != n:
            raise InputError(f"duplicate coordinate names in {self.coords}")
        if len(self.components) != n or any(len(row) != n for row in self.components):
            raise InputError(f"metric components must be a {n}x{n} matrix")
        if len(self.signature) != n or any(s not in (-1, 1) for s in self.signature):
            raise InputError("signature must list n entries of +1/-1")
        for i in range(n):
            for j in range(i + 1, n):
                if self.components[i][j] != self.components[j][i]:
                    raise InputError(f"components [{i}][{j}] and [{j}][{i}] differ")
        declared = set(self.coords)
        for row in self.components:
            for e in row:
                extra = e.symbols() - declared
                if extra:
                    raise InputError(f"component uses undeclared symbols {sorted(extra)}")
        if self.box is not None:
            if len(self.box) != n or any(lo >= hi for lo, hi in self.box):
                raise InputError("box must give n intervals with lo < hi")
        pairs = []
        for i in range(n):
            for j in range(i, n):
                pairs.append((i, j, self.components[i][j]))
        object.__setattr__(self, "_pairs", tuple(pairs))

    @classmethod
    def from_strings(cls, coords: Sequence[str], components, signature, box=None, name="metric"):
        coords = tuple(coords)
        rows = []
        for row in components:
            rows.append(tuple(ex.parse(c, coords) if isinstance(c, str) else ex.as_expr(c) for c in row))
        box_t = None if box is None else tuple((float(a), float(b)) for a, b in box)
        return cls(coords, tuple(rows), tuple(int(s) for s in signature), box_t, name)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def is_lorentzian(self) -> bool:
        return sum(1 for s in self.signature if s < 0) == 1

    def center(self) -> np.ndarray:
        if self.box is None:
            return np.zeros(self.dim)
        return np.array([(lo + hi) / 2 for lo, hi in self.box])

    def in_box(self, p, margin: float = 0.0) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.box is None:
            return np.ones(p.shape[:-1], dtype=bool)
        lo = np.array([b[0] for b in self.box]) + margin
        hi = np.array([b[1] for b in self.box]) - margin
        return np.all((p >= lo) & (p <= hi), axis=-1)

    def require_in_box(self, p) -> None:
        if not np.all(self.in_box(p)):
            raise ChartBoundaryError(f"point {np.asarray(p).tolist()} outside the valid box of {self.name}")

    def sample_points(self, count: int, rng: np.random.Generator, shrink: float = 0.8) -> np.ndarray:
        """Uniform points in the box shrunk about its centre by ``shrink``."""
        c = self.center()
        if self.box is None:
            half = np.ones(self.dim)
        else:
            half = np.array([(hi - lo) / 2 for lo, hi in self.box])
        return c + shrink * half * rng.uniform(-1.0, 1.0, size=(count, self.dim))

    def with_box(self, box) -> "MetricField":
        box_t = tuple((float(a), float(b)) for a, b in box)
        return MetricField(self.coords, self.components, self.signature, box_t, self.name)

    def scaled(self, c: float) -> "MetricField":
        rows = tuple(tuple(ex.scale(c, e) for e in row) for row in self.components)
        return MetricField(self.coords, rows, self.signature, self.box, f"{c}*{self.name}")

    # -- batched evaluation ---------------------------------------------------

    def values(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        n = self.dim
        g = np.empty(pts.shape[:-1] + (n, n))
        for i, j, e in self._pairs:
            v = ex.eval_value(e, self.coords, pts)
            g[..., i, j] = v
            g[..., j, i] = v
        return g

    def jets(self, points, order: int = 2):
        """Return g, dg and (order 2) d2g with dg[..., a, b, c] = d_c g_ab."""
        pts = np.asarray(points, dtype=float)
        n = self.dim
        shape = pts.shape[:-1]
        g = np.empty(shape + (n, n))
        dg = np.empty(shape + (n, n, n))
        d2g = np.empty(shape + (n, n, n, n)) if order >= 2 else None
        for i, j, e in self._pairs:
            if isinstance(e, ex.Num):
                g[..., i, j] = g[..., j, i] = e.value
                dg[..., i, j, :] = dg[..., j, i, :] = 0.0
                if d2g is not None:
                    d2g[..., i, j, :, :] = d2g[..., j, i, :, :] = 0.0
                continue
            jet = ex.eval_jet(e, self.coords, pts, order=order)
            g[..., i, j] = g[..., j, i] = jet.value
            dg[..., i, j, :] = jet.grad
            dg[..., j, i, :] = jet.grad
            if d2g is not None:
                d2g[..., i, j, :, :] = jet.hess
                d2g[..., j, i, :, :] = jet.hess
        return g, dg, d2g

    def christoffel(self, points) -> np.ndarray:
        """Gamma^k_ij at a batch of points (first-order jets only)."""
        g, dg, _ = self.jets(points, order=1)
        return _christoffel(inv_small(g), dg)


def inv_small(g: np.ndarray) -> np.ndarray:
    """Batched inverse with closed forms for 2x2 and 3x3 (much faster than LAPACK per call)."""
    n = g.shape[-1]
    if n == 2:
        a, b, c, d = g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1]
        det = a * d - b * c
        out = np.stack([np.stack([d, -b], -1), np.stack([-c, a], -1)], -2)
        return out / det[..., None, None]
    if n == 3:
        cof = np.empty_like(g)
        for i in range(3):
            for j in range(3):
                i1, i2 = (i + 1) % 3, (i + 2) % 3
                j1, j2 = (j + 1) % 3, (j + 2) % 3
                cof[..., j, i] = g[..., i1, j1] * g[..., i2, j2] - g[..., i1, j2] * g[..., i2, j1]
        det = np.einsum("...j,...j->...", g[..., 0, :], cof[..., :, 0])
        return cof / det[..., None, None]
    return np.linalg.inv(g)


def _gamma_lower(dg: np.ndarray) -> np.ndarray:
    # [m, i, j] = (d_i g_mj + d_j g_mi - d_m g_ij) / 2
    return 0.5 * (
        np.swapaxes(dg, -1, -2) + dg - np.moveaxis(dg, -1, -3)
    )


def _christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    n = ginv.shape[-1]
    gl = _gamma_lower(dg).reshape(dg.shape[:-3] + (n, n * n))
    return (ginv @ gl).reshape(dg.shape)


def classify_metric_signature(g: np.ndarray) -> tuple[int, int]:
    w = np.linalg.eigvalsh(g)
    return int(np.sum(w < 0)), int(np.sum(w > 0))


def metric_at(m: MetricField, p, check_signature: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Metric matrix and its inverse at a single point."""
    p = np.asarray(p, dtype=float)
    if p.shape != (m.dim,):
        raise InputError(f"point must have {m.dim} components")
    m.require_in_box(p)
    g = m.values(p)
    det = np.linalg.det(g)
    if abs(det) <= TOL.degenerate_det:
        raise DegenerateMetricError(f"|det g| = {abs(det):.3e} at {p.tolist()}")
    if check_signature:
        neg, pos = classify_metric_signature(g)
        want = sum(1 for s in m.signature if s < 0)
        if neg != want:
            raise SignatureError(f"metric has {neg} negative eigenvalues at {p.tolist()}, declared {want}")
    return g, np.linalg.inv(g)


def check_signature_on_box(m: MetricField, probes: int = 27, seed: int = 0) -> None:
    """Probe the declared box and raise if the metric is degenerate or has the wrong signature."""
    rng = np.random.default_rng(seed)
    pts = [m.center()] + list(m.sample_points(probes - 1, rng, shrink=0.95))
    for p in pts:
        metric_at(m, p)


# ---------------------------------------------------------------------------
# Tangent vectors


@dataclass(frozen=True)
class TangentVector:
    base: np.ndarray
    comp: np.ndarray
    q: float
    causal_type: str


def causal_type(g: np.ndarray, v, rel_tol: float | None = None) -> str:
    """timelike / spacelike / isotropic, with tolerance scaled by |v|^2 (Euclidean)."""
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.det(g)) <= TOL.degenerate_det:
        return "degenerate-context"
    tol = (TOL.isotropy_rel if rel_tol is None else rel_tol) * float(v @ v)
    q = float(v @ g @ v)
    if q < -tol:
        return "timelike"
    if q > tol:
        return "spacelike"
    return "isotropic"


def tangent_vector(m: MetricField, base, comp) -> TangentVector:
    base = np.asarray(base, dtype=float)
    comp = np.asarray(comp, dtype=float)
    g = m.values(base)
    return TangentVector(base, comp, float(comp @ g @ comp), causal_type(g, comp))


def orthonormal_frame(g: np.ndarray) -> np.ndarray:
    """Columns e_0..e_{n-1} with g(e_a, e_b) = diag(signs), negative directions first."""
    w, q = np.linalg.eigh(g)
    order = np.argsort(w, kind="stable")
    w, q = w[order], q[:, order]
    # fix eigenvector signs so the frame is reproducible
    for a in range(q.shape[1]):
        k = int(np.argmax(np.abs(q[:, a])))
        if q[k, a] < 0:
            q[:, a] = -q[:, a]
    return q / np.sqrt(np.abs(w))


# ---------------------------------------------------------------------------
# Curvature


@dataclass(frozen=True)
class CurvatureBundle:
    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray

    @property
    def lowered(self) -> np.ndarray:
        return np.einsum("lm,mijk->ijkl", self.g, self.riemann)


def curvature_from_jets(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray):
    """Christoffel symbols and Riemann tensor (batched) from metric jets."""
    ginv = np.linalg.inv(g)
    gl = _gamma_lower(dg)
    gamma = np.einsum("...km,...mij->...kij", ginv, gl)
    # d_c of lowered symbols: [m, i, j, c]
    dgl = 0.5 * (
        np.swapaxes(d2g, -2, -3)  # d_c d_i g_mj -> [m, i, j, c] from d2g[m, j, i, c]
        + d2g
        - np.moveaxis(d2g, -2, -4)
    )
    dginv = -np.einsum("...ka,...abc,...bm->...kmc", ginv, dg, ginv)
    dgamma = np.einsum("...kmc,...mij->...kijc", dginv, gl) + np.einsum("...km,...mijc->...kijc", ginv, dgl)
    riemann = (
        np.einsum("...ljki->...lijk", dgamma)
        - np.einsum("...likj->...lijk", dgamma)
        + np.einsum("...lim,...mjk->...lijk", gamma, gamma)
        - np.einsum("...ljm,...mik->...lijk", gamma, gamma)
    )
    return ginv, gamma, riemann


def curvature_at(m: MetricField, p) -> CurvatureBundle:
    p = np.asarray(p, dtype=float)
    metric_at(m, p, check_signature=False)
    g, dg, d2g = m.jets(p, order=2)
    ginv, gamma, riemann = curvature_from_jets(g, dg, d2g)
    return CurvatureBundle(p, g, ginv, gamma, riemann)


def curvature_operator(cb: CurvatureBundle, u) -> np.ndarray:
    """Matrix of v -> R(u, v)u."""
    u = np.asarray(u, dtype=float)
    return np.einsum("lajb,a,b->lj", cb.riemann, u, u)


def sectional_curvature(cb: CurvatureBundle, g: np.ndarray, u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
    if abs(den) <= TOL.degenerate_plane:
        raise DegeneratePlaneError(f"plane is degenerate (|Gram det| = {abs(den):.3e})")
    num = np.einsum("ijkl,i,j,k,l->", cb.lowered, u, v, v, u)
    return float(num / den)


def constant_curvature_residual(
    m: MetricField,
    p,
    samples: int = 200,
    seed: int = 0,
    min_plane_det: float | None = None,
    cb: CurvatureBundle | None = None,
    frame: np.ndarray | None = None,
) -> tuple[float, float]:
    """Mean and spread (max deviation) of sectional curvature over random planes at ``p``.

    Planes are drawn from Gaussian vectors in a g-orthonormal frame, normalised to
    unit length; planes whose Gram determinant falls below ``min_plane_det`` are
    redrawn. A custom ``frame`` (columns) replaces the eigen-frame, e.g. a
    left-invariant frame on a Lie group so that samples at different points are
    comparable. In dimension 2 there is only one plane, so the spread is trivially zero
    there and certifies nothing.
    """
    if samples < 10:
        raise InputError("constant_curvature_residual needs samples >= 10")
    if cb is None:
        cb = curvature_at(m, p)
    g = cb.g
    frame = orthonormal_frame(g) if frame is None else np.asarray(frame, dtype=float)
    lowered = cb.lowered
    min_det = TOL.plane_sampling_det if min_plane_det is None else min_plane_det
    rng = np.random.default_rng(seed)
    values = []
    rejects = 0
    while len(values) < samples:
        a, b = rng.standard_normal((2, m.dim))
        a /= np.linalg.norm(a)
        b /= np.linalg.norm(b)
        u, v = frame @ a, frame @ b
        den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
        if abs(den) <= max(min_det, TOL.degenerate_plane) * (u @ u) * (v @ v):
            rejects += 1
            if rejects >= 100:
                raise ResamplingError("100 consecutive degenerate planes")
            continue
        rejects = 0
        values.append(np.einsum("ijkl,i,j,k,l->", lowered, u, v, v, u) / den)
    k = np.asarray(values)
    k_mean = float(k.mean())
    return k_mean, float(np.max(np.abs(k - k_mean)))
