"""Random well-defined expressions over (x, y, z) for property tests.

Arguments of log, sqrt and denominators are wrapped so they stay bounded away
from their singularities on [-1, 1]^3; growth is capped by squashing exp
arguments through tanh.
"""

from __future__ import annotations

import numpy as np

COORDS = ("x", "y", "z")


def random_expr(rng: np.random.Generator, depth: int = 3) -> str:
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            return str(COORDS[rng.integers(3)])
        return f"{rng.uniform(-2, 2):.3f}"
    kind = rng.integers(13)
    a = random_expr(rng, depth - 1)
    if kind == 11:
        return f"sinh(tanh({a})) * cosh(tanh({a}))"
    if kind == 12:
        return f"tanh({a})^{int(rng.integers(0, 4))}"
    if kind == 0:
        return f"({a} + {random_expr(rng, depth - 1)})"
    if kind == 1:
        return f"({a} - {random_expr(rng, depth - 1)})"
    if kind == 2:
        return f"({a} * {random_expr(rng, depth - 1)})"
    if kind == 3:
        return f"({a} / (2 + cos({random_expr(rng, depth - 1)})))"
    if kind == 4:
        return f"(1.5 + sin({a}))^{int(rng.integers(-2, 4))}"
    if kind == 5:
        return f"exp(tanh({a}))"
    if kind == 6:
        return f"log(1 + ({a})^2)"
    if kind == 7:
        return f"sin({a})"
    if kind == 8:
        return f"cos({a})"
    if kind == 9:
        return f"sqrt(2 + sin({a}))"
    return f"-({a})"


def fd_grad(f, p, h=1e-5):
    out = np.empty(len(p))
    for i in range(len(p)):
        e = np.zeros(len(p))
        e[i] = h
        out[i] = (f(p + e) - f(p - e)) / (2 * h)
    return out


def rel_err(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))
