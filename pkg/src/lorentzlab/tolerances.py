"""Global tolerance table.

Every detector threshold lives here so it can be audited and overridden from a
manifold-spec file's ``tolerances`` section.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    degenerate_det: float = 1e-12  # |det g| at or below this is an error
    degenerate_plane: float = 1e-10  # Gram determinant of a 2-plane
    plane_sampling_det: float = 1e-6  # relative Gram det below which random planes are redrawn
    isotropy_rel: float = 1e-9  # |g(v,v)| <= isotropy_rel * |v|^2 means isotropic
    induced_degenerate: float = 1e-10  # |det| of an induced metric
    rank_min_singular: float = 1e-8
    geodesic_cert: float = 1e-7  # second fundamental form / deviation certificate
    geodesic_reject: float = 1e-4
    normal_tol: float = 1e-9  # Weingarten normal-vector check
    span_singular: float = 1e-8
    cone_fraction: float = 0.95
    cluster_factor: float = 3.0  # cluster merge distance, in grid spacings
    killing_zero: float = 1e-8
    lightlike_field_rel: float = 1e-9
    lightlike_search: float = 1e-6
    homothety: float = 1e-8
    homothety_reject: float = 1e-3
    conformal: float = 1e-8
    curvature_spread: float = 1e-6
    curvature_spread_reject: float = 1e-3
    pullback: float = 1e-8

    def override(self, values: dict) -> "Tolerances":
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            from .errors import SchemaError

            raise SchemaError(f"unknown tolerance keys: {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in values.items()})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()


_active: Tolerances = DEFAULT


class _ActiveTolerances:
    """Attribute proxy to whichever table is active (see ``using``)."""

    def __getattr__(self, name):
        return getattr(_active, name)

    def __repr__(self) -> str:
        return f"active {_active!r}"


ACTIVE = _ActiveTolerances()


def current() -> Tolerances:
    return _active


@contextmanager
def using(tol: Tolerances):
    """Make ``tol`` the active table for library code inside the block."""
    global _active
    prev = _active
    _active = tol
    try:
        yield tol
    finally:
        _active = prev
