"""Model parameters, band structure and closed-form existence conditions.

The continuum is the tight-binding band ``omega(k) = -2 kappa0 cos k`` on
``0 <= k <= pi`` and the discrete level couples to it through
``v(k) = sqrt(2/pi) kappaa sin(n0 k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandEdgeSingularity, DomainError, InvalidSiteIndex, NonPositiveRate

__all__ = [
    "ModelParams",
    "BandPoint",
    "validate",
    "dispersion",
    "coupling",
    "density_of_states",
    "bic_frequencies",
    "outside_bound_state_window",
    "RESONANCE_TOL",
]

#: Default absolute tolerance (in units of kappa0) for matching omega_a to a BIC frequency.
RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the side-coupled level.

    Parameters
    ----------
    kappa0 : float
        Nearest-neighbour hopping rate of the lattice (> 0).
    kappaa : float
        Coupling rate between the level and site ``n0`` (> 0).
    n0 : int
        Index of the lattice site the level is attached to (>= 1).
    omega_a : float
        Frequency of the discrete level.
    """

    kappa0: float
    kappaa: float
    n0: int
    omega_a: float

    @property
    def band_low(self) -> float:
        return -2.0 * self.kappa0

    @property
    def band_high(self) -> float:
        return 2.0 * self.kappa0

    def replace(self, **changes) -> "ModelParams":
        fields = {
            "kappa0": self.kappa0,
            "kappaa": self.kappaa,
            "n0": self.n0,
            "omega_a": self.omega_a,
        }
        fields.update(changes)
        return ModelParams(**fields)

    def as_dict(self) -> dict:
        return {
            "kappa0": self.kappa0,
            "kappaa": self.kappaa,
            "n0": self.n0,
            "omega_a": self.omega_a,
        }


@dataclass(frozen=True)
class BandPoint:
    k: float
    omega: float


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged if all invariants hold, raise otherwise."""
    if not (params.kappa0 > 0):
        raise NonPositiveRate(f"kappa0 must be > 0, got {params.kappa0!r}")
    if not (params.kappaa > 0):
        raise NonPositiveRate(f"kappaa must be > 0, got {params.kappaa!r}")
    if isinstance(params.n0, bool) or int(params.n0) != params.n0 or params.n0 < 1:
        raise InvalidSiteIndex(f"n0 must be an integer >= 1, got {params.n0!r}")
    if not math.isfinite(params.omega_a):
        raise DomainError(f"omega_a must be finite, got {params.omega_a!r}")
    return params


def _check_momentum(k):
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0.0) or np.any(k_arr > math.pi) or np.any(np.isnan(k_arr)):
        raise DomainError("momentum must lie in [0, pi]")
    return k_arr


def dispersion(params: ModelParams, k):
    """Band frequency ``-2 kappa0 cos k``; accepts scalars or arrays."""
    k_arr = _check_momentum(k)
    out = -2.0 * params.kappa0 * np.cos(k_arr)
    return float(out) if out.ndim == 0 else out


def band_point(params: ModelParams, k: float) -> BandPoint:
    return BandPoint(k=float(k), omega=dispersion(params, k))


def coupling(params: ModelParams, k):
    """Colored coupling ``sqrt(2/pi) kappaa sin(n0 k)``."""
    k_arr = _check_momentum(k)
    out = math.sqrt(2.0 / math.pi) * params.kappaa * np.sin(params.n0 * k_arr)
    return float(out) if out.ndim == 0 else out


def density_of_states(params: ModelParams, omega):
    """Density of states ``1/sqrt(4 kappa0^2 - omega^2)`` on the open band.

    Raises :class:`BandEdgeSingularity` at or beyond the band edges instead
    of returning an infinity.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) >= 2.0 * params.kappa0) or np.any(np.isnan(w)):
        raise BandEdgeSingularity("density of states is only finite strictly inside the band")
    out = 1.0 / np.sqrt(4.0 * params.kappa0**2 - w**2)
    return float(out) if out.ndim == 0 else out


def bic_frequencies(params: ModelParams) -> list[float]:
    """Resonance frequencies ``-2 kappa0 cos(m pi / n0)``, m = 1..n0-1, increasing.

    Evaluated as ``2 kappa0 sin((2m - n0) pi / (2 n0))`` so the list is exactly
    antisymmetric and the band centre comes out as exactly 0.
    """
    n0 = params.n0
    return [2.0 * params.kappa0 * math.sin((2 * m - n0) * math.pi / (2 * n0)) for m in range(1, n0)]


def matching_bic_index(params: ModelParams, tol: float | None = None) -> int | None:
    """Return the ``m`` whose BIC frequency equals ``omega_a``, or ``None``.

    ``tol`` is absolute, in units of ``kappa0``; the default
    :data:`RESONANCE_TOL` only absorbs floating-point rounding of the
    cosine expression.
    """
    tol = RESONANCE_TOL if tol is None else tol
    best = None
    best_gap = math.inf
    for m, omega_m in enumerate(bic_frequencies(params), start=1):
        gap = abs(params.omega_a - omega_m)
        if gap <= tol * params.kappa0 and gap < best_gap:
            best, best_gap = m, gap
    return best


def outside_bound_state_window(params: ModelParams) -> tuple[tuple[float, float], bool]:
    """Interval of ``omega_a`` free of bound states outside the band.

    Returns
    -------
    (lower, upper), inside
        The open interval ``(-2 kappa0 + kappaa^2 n0 / kappa0, 2 kappa0 - kappaa^2 n0 / kappa0)``
        and whether ``omega_a`` lies in it.  An empty interval (``lower >= upper``)
        always yields ``inside=False``.
    """
    edge_shift = params.kappaa**2 * params.n0 / params.kappa0
    lower = -2.0 * params.kappa0 + edge_shift
    upper = 2.0 * params.kappa0 - edge_shift
    inside = lower < upper and lower < params.omega_a < upper
    return (lower, upper), inside
