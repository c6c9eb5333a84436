"""Sectional curvature and lightlike geodesic hyperplanes on the model spaces.

Constant curvature shows up twice: as a zero spread of sectional curvature over
random planes, and as every isotropic direction carrying a lightlike geodesic
hypersurface. The Berger deformation of SL(2,R) breaks both; only two
directions survive.
"""

import numpy as np

from lorentzlab import models as M
from lorentzlab.metric import constant_curvature_residual
from lorentzlab.scan import scan_cx, span_e

POINT = (0.1, 0.2, -0.1)

for m in (M.minkowski(3), M.de_sitter(3, 2.0), M.anti_de_sitter(3, 1.0), M.berger_sl2(2.0)):
    k, spread = constant_curvature_residual(m, np.array(POINT))
    rep = scan_cx(m, POINT, resolution=16)
    dim, _ = span_e(rep)
    print(f"{m.name:22s} K={k:+.4f} spread={spread:.1e}  class={rep.class_label:5s} "
          f"grid hits={rep.accepted_fraction:.0%} accepted={len(rep.accepted)} clusters={len(rep.clusters)} dim E={dim}")
