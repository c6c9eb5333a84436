"""Telling warped products apart from product charts that merely look like one."""

from lorentzlab import catalog
from lorentzlab.detectors import ProductChartSpec, warped_criterion

for exm in catalog.warped_examples():
    v = warped_criterion(ProductChartSpec.from_warped(exm.spec), list(exm.lifts), exm.grid)
    print(f"{exm.name:28s} -> {v.verdict}")

for ce, exm in catalog.counterexamples():
    v = warped_criterion(ce, list(exm.lifts), exm.grid)
    failed = [name for name in ("base_geodesic", "fiber_umbilical", "holonomy_homothetic")
              if not getattr(v, name).passed]
    print(f"{ce.metric.name:28s} -> {v.verdict}  (fails: {', '.join(failed) or '-'})")
