"""Searching Killing algebras for everywhere-lightlike fields.

Minkowski space has them (null translations, with straight-line orbits);
de Sitter space has none; anti-de Sitter has plenty.
"""

import numpy as np

from lorentzlab import models as M
from lorentzlab.killing import combine, geodesic_orbit_residual, lightlike_killing_search

cases = [
    (M.minkowski(3), M.minkowski_translations(3)),
    (M.de_sitter(3), M.de_sitter_killing_basis(3)),
    (M.anti_de_sitter(3), M.anti_de_sitter_killing_basis(3)),
]
for m, basis in cases:
    grid = m.sample_points(20, np.random.default_rng(0))
    found = lightlike_killing_search(m, basis, grid, trials=32)
    line = f"{m.name:22s} lightlike Killing fields found: {len(found)}"
    if found:
        field = combine(basis, found[0])
        orbit = max(geodesic_orbit_residual(m, field, p) for p in grid)
        line += f"  first has |nabla_V V| <= {orbit:.1e}"
    print(line)
