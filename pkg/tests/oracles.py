"""Independent reference computations for the tests.

Nothing here imports lorentzlab. Metrics are plain numpy callables, derivatives
are central finite differences, and the model spaces come from their embeddings
as quadrics in flat space.
"""

from __future__ import annotations

import numpy as np


def fd_jacobian(f, p, h=1e-6):
    p = np.asarray(p, dtype=float)
    cols = []
    for i in range(len(p)):
        e = np.zeros_like(p)
        e[i] = h
        cols.append((np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_christoffel(g, p, h=1e-4):
    """Gamma^k_ij from a metric callable by central differences (4th-order stencil)."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    dg = np.empty((n, n, n))  # dg[c, i, j] = d_c g_ij
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        dg[c] = (-g(p + 2 * e) + 8 * g(p + e) - 8 * g(p - e) + g(p - 2 * e)) / (12 * h)
    low = 0.5 * (np.einsum("jmi->mij", dg) + np.einsum("imj->mij", dg) - dg)  # [m, i, j]
    return np.linalg.solve(g(p), low.reshape(n, -1)).reshape(n, n, n)


def fd_riemann(g, p, h=1e-3):
    """R^l_ijk with R(d_i, d_j) d_k = R^l_ijk d_l."""
    p = np.asarray(p, dtype=float)
    n = len(p)
    gam = fd_christoffel(g, p)
    dgam = np.empty((n, n, n, n))  # [c, l, i, j] = d_c Gamma^l_ij
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        dgam[c] = (
            -fd_christoffel(g, p + 2 * e) + 8 * fd_christoffel(g, p + e) - 8 * fd_christoffel(g, p - e)
            + fd_christoffel(g, p - 2 * e)
        ) / (12 * h)
    r = np.empty((n, n, n, n))
    for l in range(n):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    r[l, i, j, k] = (
                        dgam[i, l, j, k] - dgam[j, l, i, k]
                        + gam[l, i, :] @ gam[:, j, k] - gam[l, j, :] @ gam[:, i, k]
                    )
    return r


def sectional(g, riemann, u, v):
    low = np.einsum("lm,mijk->ijkl", g, riemann)
    num = np.einsum("ijkl,i,j,k,l->", low, u, v, v, u)
    return num / ((u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2)


# ---------------------------------------------------------------------------
# Embedded model spaces


def cs_jacobian(f, p, h=1e-30):
    """Complex-step Jacobian; exact to rounding for analytic ``f``."""
    p = np.asarray(p, dtype=float)
    cols = []
    for i in range(len(p)):
        e = np.zeros(len(p), dtype=complex)
        e[i] = 1j * h
        cols.append(np.imag(f(p + e)) / h)
    return np.stack(cols, axis=-1)


def pullback(embed, ambient, p):
    j = cs_jacobian(embed, p)
    return j.T @ ambient @ j


def de_sitter_embedding(r):
    """Flat slicing (t, x_1..x_{n-1}) of the hyperboloid -X0^2 + sum X^2 = r^2."""

    def f(p):
        t, x = p[0], np.asarray(p[1:])
        e = np.exp(t / r)
        q = np.sum(x * x)
        return np.concatenate([[r * np.sinh(t / r) + q * e / (2 * r)], e * x, [r * np.cosh(t / r) - q * e / (2 * r)]])

    return f


def minkowski_form(n):
    return np.diag([-1.0] + [1.0] * (n - 1))


def de_sitter_metric(r, n):
    emb = de_sitter_embedding(r)
    amb = minkowski_form(n + 1)
    return lambda p: pullback(emb, amb, p)


def sl2_embedding(p):
    """(s, x, y) -> exp(xE) exp(sH) exp(yF) as a vector in R^4."""
    s, x, y = p
    es, ems = np.exp(s), np.exp(-s)
    # [[1, x], [0, 1]] diag(e^s, e^-s) [[1, 0], [y, 1]]
    return np.array([es + x * ems * y, x * ems, ems * y, ems])


# -det on 2x2 matrices as a quadratic form on R^4 (signature (2, 2))
NEG_DET = 0.5 * np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=float)


def ads_sl2_metric(r):
    return lambda p: r * r * pullback(sl2_embedding, NEG_DET, p)


def ads_poincare_metric(r, n):
    """Poincare chart (t, x.., z) of AdS, from the embedding into R^{2,n-1}."""

    def emb(p):
        t, xs, z = p[0], np.asarray(p[1:-1]), p[-1]
        q = -t * t + np.sum(xs * xs)
        return np.concatenate(
            [
                [r * t / z],
                [(z * z + r * r + q) / (2 * z)],
                r * xs / z,
                [(z * z - r * r + q) / (2 * z)],
            ]
        )

    amb = np.diag([-1.0, -1.0] + [1.0] * (n - 1))
    return lambda p: pullback(emb, amb, p)


def random_plane(rng, g):
    """Two random vectors spanning a nondegenerate plane for ``g``."""
    while True:
        u, v = rng.standard_normal((2, g.shape[0]))
        den = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
        if abs(den) > 1e-3 * (u @ u) * (v @ v):
            return u, v


def rk4_reference(f, y0, t1, steps):
    """Classical RK4 for y' = f(y)."""
    y = np.asarray(y0, dtype=float)
    h = t1 / steps
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def de_sitter_geodesic(r, p, v, s):
    """Exact chart position after parameter s on the geodesic through (p, v).

    In the ambient space X'' = -(<X', X'> / r^2) X, so the curve is a circle,
    hyperbola or straight line in the plane spanned by X(0) and X'(0).
    """
    emb = de_sitter_embedding(r)
    x0 = emb(np.asarray(p, dtype=float))
    v0 = cs_jacobian(emb, p) @ np.asarray(v, dtype=float)
    q = v0 @ minkowski_form(len(x0)) @ v0
    w = np.sqrt(abs(q)) / r
    if q > 0:
        x = x0 * np.cos(w * s) + v0 * np.sin(w * s) / w
    elif q < 0:
        x = x0 * np.cosh(w * s) + v0 * np.sinh(w * s) / w
    else:
        x = x0 + s * v0
    t = r * np.log((x[0] + x[-1]) / r)
    return np.concatenate([[t], x[1:-1] * np.exp(-t / r)])
