"""Model spaces as single-chart metric fields, plus their Killing bases.

Charts
------
minkowski(n)
    Cartesian ``(t, x, y, ...)``, metric ``diag(-1, 1, ..., 1)``.
de_sitter(n, r)
    Flat slicing ``-dt^2 + exp(2t/r) (dx_1^2 + ... + dx_{n-1}^2)``.
    Covers the half of de Sitter space where ``X_0 + X_n > 0`` in the hyperboloid
    ``-X_0^2 + X_1^2 + ... + X_n^2 = r^2``.
anti_de_sitter(n, r)
    ``n == 3`` (default): the group SL(2,R) with ``r^2`` times the Killing form
    normalised to ``<X, Y> = tr(XY)/2`` (so ``K = -1/r^2``), in the coordinates
    ``g = [[1, x], [0, 1]] diag(e^s, e^-s) [[1, 0], [y, 1]]``.  Writing
    ``g^-1 dg = w_H H + w_E E + w_F F`` with ``H = diag(1, -1)`` and ``E``, ``F``
    the upper/lower nilpotents::

        w_H = ds + y e^{-2s} dx,   w_E = e^{-2s} dx,   w_F = dy - 2y ds - y^2 e^{-2s} dx

    and the metric is ``w_H^2 + w_E w_F``.  Other dimensions (or ``chart="poincare"``)
    use the Poincare patch ``(r/z)^2 (-dt^2 + dx_1^2 + ... + dz^2)``, ``z > 0``.
berger_sl2(eps)
    Same SL(2,R) chart with the hyperbolic direction ``H`` rescaled:
    ``eps w_H^2 + w_E w_F``.  ``eps = 1`` is anti-de Sitter of radius 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as ex
from .errors import InputError
from .killing import VectorField
from .metric import MetricField

ZERO = ex.Num(0.0)


def _diag(entries: Sequence[ex.Expr]) -> tuple[tuple[ex.Expr, ...], ...]:
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else ZERO for j in range(n)) for i in range(n))


def _default_coords(n: int, last: str | None = None) -> tuple[str, ...]:
    if n == 2:
        names = ["t", "x"]
    elif n == 3:
        names = ["t", "x", "y"]
    elif n == 4:
        names = ["t", "x", "y", "z"]
    else:
        names = ["t"] + [f"x{i}" for i in range(1, n)]
    if last is not None:
        names[-1] = last
    return tuple(names)


def _box(n: int, half: float = 1.0, box=None):
    if box is not None:
        return tuple((float(a), float(b)) for a, b in box)
    return tuple((-half, half) for _ in range(n))


def _check_coords(coords, n):
    coords = tuple(coords)
    if len(coords) != n:
        raise InputError(f"expected {n} coordinate names, got {len(coords)}")
    return coords


def minkowski(n: int, coords=None, box=None) -> MetricField:
    if n < 2:
        raise InputError("minkowski needs n >= 2")
    coords = _check_coords(coords or _default_coords(n), n)
    comps = _diag([ex.Num(-1.0)] + [ex.Num(1.0)] * (n - 1))
    return MetricField(coords, comps, (-1,) + (1,) * (n - 1), _box(n, box=box), f"minkowski({n})")


def euclidean(k: int, coords=None, box=None) -> MetricField:
    coords = _check_coords(coords or tuple(f"u{i}" for i in range(1, k + 1)), k)
    return MetricField(coords, _diag([ex.Num(1.0)] * k), (1,) * k, _box(k, box=box), f"euclidean({k})")


def hyperbolic(k: int, r: float = 1.0, coords=None, box=None) -> MetricField:
    """Upper half-space model ``(r/z)^2 (du_1^2 + ... + dz^2)``, last coordinate ``z > 0``."""
    if r <= 0:
        raise InputError("radius must be positive")
    coords = _check_coords(coords or tuple([f"u{i}" for i in range(1, k)] + ["w"]), k)
    z = ex.Sym(coords[-1])
    factor = ex.Num(r * r) / ex.Pow(z, 2)
    box = _box(k, box=box) if box is not None else tuple([(-1.0, 1.0)] * (k - 1) + [(0.5, 1.5)])
    return MetricField(coords, _diag([factor] * k), (1,) * k, box, f"hyperbolic({k},{r})")


def round_sphere(r: float = 1.0, coords=("th", "ph"), box=((0.2, np.pi - 0.2), (-np.pi, np.pi))) -> MetricField:
    coords = _check_coords(coords, 2)
    th = ex.Sym(coords[0])
    comps = _diag([ex.Num(r * r), ex.Num(r * r) * ex.Pow(ex.Call("sin", th), 2)])
    return MetricField(coords, comps, (1, 1), _box(2, box=box), f"sphere({r})")


def de_sitter(n: int, r: float = 1.0, coords=None, box=None) -> MetricField:
    if n < 2 or r <= 0:
        raise InputError("de_sitter needs n >= 2 and r > 0")
    coords = _check_coords(coords or _default_coords(n), n)
    t = ex.Sym(coords[0])
    warp = ex.Call("exp", ex.Num(2.0 / r) * t)
    comps = _diag([ex.Num(-1.0)] + [warp] * (n - 1))
    return MetricField(coords, comps, (-1,) + (1,) * (n - 1), _box(n, box=box), f"de_sitter({n},{r})")


def _sl2_metric(eps: float, r2: float, coords) -> tuple[tuple[ex.Expr, ...], ...]:
    s, x, y = (ex.Sym(c) for c in coords)
    e2 = ex.Call("exp", ex.Num(-2.0) * s)
    e4 = ex.Call("exp", ex.Num(-4.0) * s)
    k = eps - 1.0
    g_ss = ex.Num(r2 * eps)
    g_xy = ex.Num(0.5 * r2) * e2
    if k == 0.0:
        g_sx = ZERO
        g_xx = ZERO
    else:
        g_sx = ex.Num(r2 * k) * y * e2
        g_xx = ex.Num(r2 * k) * ex.Pow(y, 2) * e4
    return (
        (g_ss, g_sx, ZERO),
        (g_sx, g_xx, g_xy),
        (ZERO, g_xy, ZERO),
    )


SL2_COORDS = ("s", "x", "y")


def anti_de_sitter(n: int, r: float = 1.0, coords=None, box=None, chart: str | None = None) -> MetricField:
    if n < 2 or r <= 0:
        raise InputError("anti_de_sitter needs n >= 2 and r > 0")
    chart = chart or ("sl2" if n == 3 else "poincare")
    if chart == "sl2":
        if n != 3:
            raise InputError("the SL(2,R) chart is three-dimensional")
        coords = _check_coords(coords or SL2_COORDS, 3)
        comps = _sl2_metric(1.0, r * r, coords)
        return MetricField(coords, comps, (1, 1, -1), _box(3, box=box), f"anti_de_sitter(3,{r})")
    if chart != "poincare":
        raise InputError(f"unknown chart {chart!r}")
    coords = _check_coords(coords or _default_coords(n, last="z"), n)
    z = ex.Sym(coords[-1])
    factor = ex.Num(r * r) / ex.Pow(z, 2)
    comps = _diag([-factor] + [factor] * (n - 1))
    if box is None:
        box = [(-1.0, 1.0)] * (n - 1) + [(0.5, 1.5)]
    sig = (-1,) + (1,) * (n - 1)
    return MetricField(coords, comps, sig, _box(n, box=box), f"anti_de_sitter({n},{r},poincare)")


def berger_sl2(epsilon: float, coords=None, box=None) -> MetricField:
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    coords = _check_coords(coords or SL2_COORDS, 3)
    comps = _sl2_metric(float(epsilon), 1.0, coords)
    # det = -eps/4 e^{-4s}; the eigenvalue count is (+, +, -) for every eps > 0
    return MetricField(coords, comps, (1, 1, -1), _box(3, box=box), f"berger_sl2({epsilon})")


def sl2_left_frame(p) -> np.ndarray:
    """Columns H^L, E^L, F^L (left-invariant fields) at a point of the SL(2,R) chart."""
    s, x, y = np.asarray(p, dtype=float)
    e = np.exp(2 * s)
    return np.array([
        [1.0, -y, 0.0],
        [0.0, e, 0.0],
        [2 * y, -y * y, 1.0],
    ])


# ---------------------------------------------------------------------------
# Warped products


@dataclass(frozen=True)
class WarpedSpec:
    """``base`` (Riemannian, k dims) times ``fiber`` (Lorentzian) with metric h + warp * g."""

    base: MetricField
    fiber: MetricField
    warp: ex.Expr

    def __post_init__(self):
        if any(s < 0 for s in self.base.signature):
            raise InputError("warped product base must be Riemannian")
        clash = set(self.base.coords) & set(self.fiber.coords)
        if clash:
            raise InputError(f"base and fiber share coordinate names {sorted(clash)}")
        extra = self.warp.symbols() - set(self.base.coords)
        if extra:
            raise InputError(f"warp depends on non-base coordinates {sorted(extra)}")

    @property
    def k(self) -> int:
        return self.base.dim

    def check_warp_positive(self, probes: int = 64, seed: int = 0) -> None:
        rng = np.random.default_rng(seed)
        pts = np.vstack([self.base.center(), self.base.sample_points(probes, rng, shrink=1.0)])
        w = ex.eval_value(self.warp, self.base.coords, pts)
        if np.any(w <= 0):
            raise InputError("warp is not positive on the base box")


def warped(spec: WarpedSpec, name: str | None = None) -> MetricField:
    spec.check_warp_positive()
    k, m = spec.base.dim, spec.fiber.dim
    n = k + m
    rows = [[ZERO] * n for _ in range(n)]
    for a in range(k):
        for b in range(k):
            rows[a][b] = spec.base.components[a][b]
    w = spec.warp
    for i in range(m):
        for j in range(m):
            c = spec.fiber.components[i][j]
            if ex.is_zero(c):
                continue
            if isinstance(w, ex.Num):
                rows[k + i][k + j] = ex.scale(w.value, c)
            else:
                rows[k + i][k + j] = ex.Mul(w, c)
    box = None
    if spec.base.box is not None and spec.fiber.box is not None:
        box = spec.base.box + spec.fiber.box
    coords = spec.base.coords + spec.fiber.coords
    sig = spec.base.signature + spec.fiber.signature
    label = name or f"{spec.base.name} x_w {spec.fiber.name}"
    return MetricField(coords, tuple(tuple(r) for r in rows), sig, box, label)


# ---------------------------------------------------------------------------
# Killing bases (shipped as data)


def _vf(coords, comps, name) -> VectorField:
    return VectorField.from_strings(coords, comps, name)


def minkowski_translations(n: int, coords=None) -> list[VectorField]:
    coords = tuple(coords or _default_coords(n))
    out = []
    for i, c in enumerate(coords):
        comps = ["0"] * n
        comps[i] = "1"
        out.append(_vf(coords, comps, f"d_{c}"))
    return out


def minkowski_killing_basis(n: int, coords=None) -> list[VectorField]:
    """Translations, boosts ``x_i d_t + t d_i`` and rotations ``x_i d_j - x_j d_i``."""
    coords = tuple(coords or _default_coords(n))
    out = minkowski_translations(n, coords)
    t = coords[0]
    for i in range(1, n):
        comps = ["0"] * n
        comps[0] = coords[i]
        comps[i] = t
        out.append(_vf(coords, comps, f"boost_{coords[i]}"))
    for i in range(1, n):
        for j in range(i + 1, n):
            comps = ["0"] * n
            comps[i] = f"-{coords[j]}"
            comps[j] = coords[i]
            out.append(_vf(coords, comps, f"rot_{coords[i]}{coords[j]}"))
    return out


def de_sitter_killing_basis(n: int, r: float = 1.0, coords=None) -> list[VectorField]:
    """so(1, n) in the flat-slicing chart.

    With conformal time ``eta = -r exp(-t/r)`` the chart is conformally flat and the
    Killing fields are the flat conformal fields preserving ``1/eta^2``: spatial
    translations and rotations, the dilation ``-r d_t + x.d_x`` and the special
    conformal fields ``2 x_i (-r d_t + x.d_x) - (|x|^2 - r^2 exp(-2t/r)) d_i``.
    """
    coords = tuple(coords or _default_coords(n))
    t, xs = coords[0], coords[1:]
    out = []
    for i, c in enumerate(xs):
        comps = ["0"] * n
        comps[i + 1] = "1"
        out.append(_vf(coords, comps, f"d_{c}"))
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            comps = ["0"] * n
            comps[i + 1] = f"-{xs[j]}"
            comps[j + 1] = xs[i]
            out.append(_vf(coords, comps, f"rot_{xs[i]}{xs[j]}"))
    comps = [f"-{r!r}"] + list(xs)
    out.append(_vf(coords, comps, "dilation"))
    sq = " + ".join(f"{c}^2" for c in xs)
    for i, c in enumerate(xs):
        comps = [f"-2*{r!r}*{c}"]
        for j, d in enumerate(xs):
            if i == j:
                comps.append(f"2*{c}^2 - ({sq}) + {r * r!r}*exp(-2*{t}/{r!r})")
            else:
                comps.append(f"2*{c}*{d}")
        out.append(_vf(coords, comps, f"special_{c}"))
    return out


def anti_de_sitter_killing_basis(n: int, r: float = 1.0, coords=None, chart: str | None = None) -> list[VectorField]:
    chart = chart or ("sl2" if n == 3 else "poincare")
    if chart == "sl2":
        return sl2_killing_basis(coords)
    coords = tuple(coords or _default_coords(n, last="z"))
    t, xs, z = coords[0], coords[1:-1], coords[-1]
    bdy = (t,) + xs
    eta = [-1.0] + [1.0] * len(xs)
    out = []
    for i, c in enumerate(bdy):
        comps = ["0"] * n
        comps[i] = "1"
        out.append(_vf(coords, comps, f"d_{c}"))
    for i in range(1, len(bdy)):
        comps = ["0"] * n
        comps[0] = bdy[i]
        comps[i] = t
        out.append(_vf(coords, comps, f"boost_{bdy[i]}"))
    for i in range(1, len(bdy)):
        for j in range(i + 1, len(bdy)):
            comps = ["0"] * n
            comps[i] = f"-{bdy[j]}"
            comps[j] = bdy[i]
            out.append(_vf(coords, comps, f"rot_{bdy[i]}{bdy[j]}"))
    out.append(_vf(coords, list(coords), "dilation"))
    # K_mu = 2 x_mu (x.d + z d_z) - (x.x + z^2) d_mu, x_mu = eta_mu x^mu
    xx = " + ".join(f"({e!r})*{c}^2" for e, c in zip(eta, bdy)) + f" + {z}^2"
    for mu, c in enumerate(bdy):
        lower = f"({eta[mu]!r})*{c}"
        comps = [f"2*{lower}*{d}" for d in coords]
        comps[mu] = f"2*{lower}*{c} - ({xx})"
        out.append(_vf(coords, comps, f"special_{c}"))
    return out


def sl2_killing_basis(coords=None) -> list[VectorField]:
    """Left-invariant fields H^L, E^L, F^L and right-invariant fields H^R, E^R, F^R."""
    coords = tuple(coords or SL2_COORDS)
    s, x, y = coords
    return [
        _vf(coords, ["1", "0", f"2*{y}"], "H_left"),
        _vf(coords, [f"-{y}", f"exp(2*{s})", f"-{y}^2"], "E_left"),
        _vf(coords, ["0", "0", "1"], "F_left"),
        _vf(coords, ["1", f"2*{x}", "0"], "H_right"),
        _vf(coords, ["0", "1", "0"], "E_right"),
        _vf(coords, [f"-{x}", f"-{x}^2", f"exp(2*{s})"], "F_right"),
    ]


def berger_killing_basis(coords=None) -> list[VectorField]:
    """Left translations (right-invariant fields) plus the left-invariant field H^L."""
    basis = sl2_killing_basis(coords)
    return [basis[0], basis[3], basis[4], basis[5]]


BUILTINS = {
    "minkowski": minkowski,
    "euclidean": euclidean,
    "hyperbolic": hyperbolic,
    "round_sphere": round_sphere,
    "de_sitter": de_sitter,
    "anti_de_sitter": anti_de_sitter,
    "berger_sl2": berger_sl2,
}

KILLING_BASES = {
    "minkowski": minkowski_killing_basis,
    "minkowski_translations": minkowski_translations,
    "de_sitter": de_sitter_killing_basis,
    "anti_de_sitter": anti_de_sitter_killing_basis,
    "berger_sl2": lambda **kw: berger_killing_basis(kw.get("coords")),
}
