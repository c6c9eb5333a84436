"""Chart-based numerical pseudo-Riemannian geometry."""

import os as _os

# Thread caps must be in the environment before numpy loads its BLAS.
_threads = _os.environ.get("LORENTZLAB_THREADS", "").strip()
if _threads.isdigit() and int(_threads) > 0:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ[_var] = _threads

__version__ = "0.1.0"

from .errors import InputError, LorentzLabError, NumericalDomainError  # noqa: E402
from .metric import MetricField, curvature_at  # noqa: E402

__all__ = ["__version__", "MetricField", "curvature_at", "LorentzLabError", "InputError", "NumericalDomainError"]
