"""Closed-form spectral functions of the colored Fano-Anderson model.

Covers the weighted density ``G(omega) = rho(omega) |v(omega)|^2``, the level
shift ``Delta(omega)``, the self-energy ``Sigma(s)`` on the first sheet, their
flat-coupling (``n0 -> infinity``) limits, and the bound-state searches.
Each closed form has a quadrature counterpart (``*_quadrature`` / ``*_pv``)
that shares no code with it and serves as an oracle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import quadrature
from .errors import BandEdge, BandEdgeSingularity, DomainError, OnBranchCut, RootFindFailure
from .model import ModelParams, bic_frequencies, matching_bic_index, outside_bound_state_window

__all__ = [
    "BoundKind",
    "BoundState",
    "SelfEnergyPoint",
    "spectral_density_G",
    "level_shift_delta",
    "delta_edge_limit",
    "self_energy",
    "self_energy_boundary",
    "self_energy_quadrature",
    "level_shift_pv",
    "find_outside_bound_states",
    "bic_bound_states",
    "flat_limit_G",
    "flat_limit_delta",
    "flat_limit_self_energy",
]


class BoundKind(str, enum.Enum):
    BELOW_BAND = "BelowBand"
    IN_CONTINUUM = "InContinuum"
    ABOVE_BAND = "AboveBand"


@dataclass(frozen=True)
class BoundState:
    """A bound state of the full Hamiltonian.

    ``weight`` (the squared overlap with the bare level) and ``m_index`` are
    only populated for states in the continuum; ``residual`` only for the
    root-found states outside the band.
    """

    omega: float
    kind: BoundKind
    weight: float | None = None
    m_index: int | None = None
    residual: float | None = None


@dataclass(frozen=True)
class SelfEnergyPoint:
    s: complex
    sigma: complex


def _scalar_or_array(out):
    out = np.asarray(out)
    return out.item() if out.ndim == 0 else out


def spectral_density_G(params: ModelParams, omega):
    """``G(omega) = (2 kappaa^2 / pi) sin^2[n0 acos(omega / 2 kappa0)] / sqrt(4 kappa0^2 - omega^2)``.

    Defined on the closed band; the band-edge limit is 0.
    """
    k0 = params.kappa0
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) > 2.0 * k0) or np.any(np.isnan(w)):
        raise DomainError("G(omega) is defined on the closed band only")
    edge = np.abs(w) == 2.0 * k0
    w_in = np.where(edge, 0.0, w)
    theta = np.arccos(w_in / (2.0 * k0))
    root = np.sqrt((2.0 * k0 - w_in) * (2.0 * k0 + w_in))
    out = (2.0 * params.kappaa**2 / math.pi) * np.sin(params.n0 * theta) ** 2 / root
    return _scalar_or_array(np.where(edge, 0.0, out))


def _outer_magnitude(params: ModelParams, u, excess):
    """``kappaa^2 / u * [1 - x^(2 n0)]`` with ``x = -2 kappa0 / (u + |omega|)``.

    ``u = sqrt(omega^2 - 4 kappa0^2)`` and ``excess = |omega| - 2 kappa0`` are
    passed separately so neither is recomputed with cancellation.
    """
    k0 = params.kappa0
    log_x = -np.log1p((u + excess) / (2.0 * k0))
    return params.kappaa**2 / u * -np.expm1(2 * params.n0 * log_x)


def _delta_outer(params: ModelParams, w):
    """Outer branches of the level shift, |w| > 2 kappa0."""
    k0 = params.kappa0
    a = np.abs(w)
    excess = a - 2.0 * k0
    u = np.sqrt(excess * (a + 2.0 * k0))
    return np.sign(w) * _outer_magnitude(params, u, excess)


def level_shift_delta(params: ModelParams, omega):
    """Level shift ``Delta(omega)`` from its three-branch closed form.

    Inside the band ``kappaa^2 sin[2 n0 acos(omega/2 kappa0)] / sqrt(4 kappa0^2 - omega^2)``;
    outside ``+-kappaa^2 / sqrt(omega^2 - 4 kappa0^2) [1 - ((sqrt(omega^2 - 4 kappa0^2) -+ omega)/2 kappa0)^(2 n0)]``.
    The band edges raise :class:`BandEdge`; use :func:`delta_edge_limit`.
    """
    k0 = params.kappa0
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) == 2.0 * k0):
        raise BandEdge("Delta at the band edge is a one-sided limit; use delta_edge_limit")
    if np.any(np.isnan(w)):
        raise DomainError("omega must not be NaN")
    inside = np.abs(w) < 2.0 * k0
    w_in = np.where(inside, w, 0.0)
    theta = np.arccos(w_in / (2.0 * k0))
    root = np.sqrt((2.0 * k0 - w_in) * (2.0 * k0 + w_in))
    inner = params.kappaa**2 * np.sin(2 * params.n0 * theta) / root
    w_out = np.where(inside, 3.0 * k0, w)
    outer = _delta_outer(params, w_out)
    return _scalar_or_array(np.where(inside, inner, outer))


def delta_edge_limit(params: ModelParams, side: str) -> float:
    """Finite one-sided limit of Delta at a band edge: ``-+ kappaa^2 n0 / kappa0``."""
    value = params.kappaa**2 * params.n0 / params.kappa0
    if side == "upper":
        return value
    if side == "lower":
        return -value
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def _sheet_root(params: ModelParams, s):
    """``sqrt(s^2 + 4 kappa0^2)`` on the first sheet: cut on the band segment, ~ s at infinity."""
    return s * np.sqrt(1.0 + 4.0 * params.kappa0**2 / (s * s))


def _check_off_cut(params: ModelParams, s):
    s = np.asarray(s, dtype=complex)
    on_cut = (s.real == 0.0) & (np.abs(s.imag) <= 2.0 * params.kappa0)
    if np.any(on_cut):
        raise OnBranchCut("s lies on the branch cut {-i omega : |omega| <= 2 kappa0}")
    return s


def self_energy(params: ModelParams, s):
    """Closed-form self-energy ``Sigma(s)`` on the first Riemann sheet.

    ``-i kappaa^2 / sqrt(s^2 + 4 kappa0^2) * [1 - ((i sqrt(s^2 + 4 kappa0^2) - i s) / 2 kappa0)^(2 n0)]``
    """
    s = _check_off_cut(params, s)
    root = _sheet_root(params, s)
    x = 2j * params.kappa0 / (root + s)
    out = -1j * params.kappaa**2 / root * (1.0 - x ** (2 * params.n0))
    return _scalar_or_array(out)


def self_energy_boundary(params: ModelParams, omega, side: str):
    """Boundary value ``Sigma(-i omega +- 0) = Delta(omega) -+ i pi G(omega)`` inside the band."""
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) >= 2.0 * params.kappa0):
        raise DomainError("boundary values are defined on the open band only")
    sign = {"plus": -1.0, "minus": 1.0}.get(side)
    if sign is None:
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")
    out = level_shift_delta(params, w) + sign * 1j * math.pi * np.asarray(spectral_density_G(params, w))
    return _scalar_or_array(out)


def self_energy_quadrature(params: ModelParams, s: complex, settings=quadrature.DEFAULT_SETTINGS) -> complex:
    """``(2 kappaa^2 / pi) int_0^pi sin^2(n0 k) / (i s + 2 kappa0 cos k) dk`` by adaptive quadrature."""
    s = complex(_check_off_cut(params, s))
    pref = 2.0 * params.kappaa**2 / math.pi

    def integrand(k):
        return pref * np.sin(params.n0 * k) ** 2 / (1j * s + 2.0 * params.kappa0 * np.cos(k))

    return complex(quadrature.integrate(integrand, 0.0, math.pi, settings))


def level_shift_pv(
    params: ModelParams,
    omega: float,
    settings=quadrature.DEFAULT_SETTINGS,
    variable: str = "k",
) -> float:
    """Level shift as the principal value ``P int G(w') / (omega - w') dw'``.

    ``variable="k"`` integrates in momentum (smooth at the band edges);
    ``variable="omega"`` integrates ``G`` directly over the band.
    """
    k0 = params.kappa0
    omega = float(omega)
    if abs(omega) >= 2.0 * k0:
        raise DomainError("level_shift_pv evaluates interior frequencies only")
    if variable == "omega":
        def integrand(w):
            return np.asarray(spectral_density_G(params, w)) / (omega - w)

        return float(quadrature.principal_value(integrand, -2.0 * k0, 2.0 * k0, [omega], settings))
    if variable != "k":
        raise ValueError("variable must be 'k' or 'omega'")
    pref = 2.0 * params.kappaa**2 / math.pi
    pole = math.acos(-omega / (2.0 * k0))

    def integrand(k):
        return pref * np.sin(params.n0 * k) ** 2 / (omega + 2.0 * k0 * np.cos(k))

    return float(quadrature.principal_value(integrand, 0.0, math.pi, [pole], settings))


def _outer_residual(params: ModelParams, u: float, sign: float) -> float:
    """``sign * (Omega - omega_a - Delta(Omega))`` at ``|Omega| = sqrt(u^2 + 4 kappa0^2)``.

    ``sign`` is +1 above the band and -1 below.  Increasing in ``u``.
    """
    k0 = params.kappa0
    excess = u * u / (math.sqrt(u * u + 4.0 * k0 * k0) + 2.0 * k0)
    if u == 0.0:
        shift = params.kappaa**2 * params.n0 / k0
    else:
        shift = float(_outer_magnitude(params, u, excess))
    return 2.0 * k0 + excess - sign * params.omega_a - shift


def _root_outside(params: ModelParams, side: str) -> BoundState | None:
    k0 = params.kappa0
    sign = 1.0 if side == "upper" else -1.0
    if _outer_residual(params, 0.0, sign) >= 0.0:
        return None
    span = 10.0 * max(k0, params.kappaa**2 * params.n0 / k0)
    for _ in range(60):
        u_far = math.sqrt(span * (span + 4.0 * k0))
        if _outer_residual(params, u_far, sign) > 0.0:
            break
        span *= 2.0
    else:
        raise RootFindFailure(f"no sign change on the {side} side up to |omega|={2 * k0 + span!r}")
    try:
        u = brentq(lambda x: _outer_residual(params, x, sign), 0.0, u_far, xtol=1e-300, rtol=8.9e-16, maxiter=500)
    except (RuntimeError, ValueError) as exc:
        raise RootFindFailure(
            f"bisection failed on u in [0, {u_far}]: residuals {_outer_residual(params, 0.0, sign)!r}, "
            f"{_outer_residual(params, u_far, sign)!r}"
        ) from exc
    omega = sign * math.sqrt(u * u + 4.0 * k0 * k0)
    edge = sign * 2.0 * k0
    if sign * (omega - edge) <= 0.0:
        # true root closer to the edge than one ulp
        omega = math.nextafter(edge, sign * math.inf)
    kind = BoundKind.ABOVE_BAND if side == "upper" else BoundKind.BELOW_BAND
    return BoundState(omega=omega, kind=kind, residual=abs(float(_outer_residual(params, u, sign))))


def find_outside_bound_states(params: ModelParams) -> list[BoundState]:
    """Roots of ``Omega - omega_a = Delta(Omega)`` below and above the band, in increasing order.

    The search runs in ``u = sqrt(Omega^2 - 4 kappa0^2)``, where the residual
    stays well conditioned even for roots hugging a band edge.
    """
    states = [st for st in (_root_outside(params, "lower"), _root_outside(params, "upper")) if st]
    _, inside = outside_bound_state_window(params)
    if inside and states:
        raise RootFindFailure(f"found {len(states)} outside states although omega_a is inside the window")
    return states


def bic_bound_states(params: ModelParams, tol: float | None = None, formula=None) -> list[BoundState]:
    """The bound state in the continuum, if ``omega_a`` sits on a resonance.

    ``tol`` is the absolute matching tolerance in units of ``kappa0`` (see
    :func:`fanolab.model.matching_bic_index`).  ``formula`` selects the
    residue used for ``weight``; defaults to the empirically resolved one.
    """
    m = matching_bic_index(params, tol)
    if m is None:
        return []
    from .decay import ResidueFormula, pole_amplitude

    weight = pole_amplitude(params, formula or ResidueFormula.AUTO_RESOLVE, tol=tol)
    omega = bic_frequencies(params)[m - 1]
    return [BoundState(omega=omega, kind=BoundKind.IN_CONTINUUM, weight=weight, m_index=m)]


def flat_limit_G(params: ModelParams, omega):
    """``kappaa^2 / (pi sqrt(4 kappa0^2 - omega^2))``, the cycle average of G."""
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) >= 2.0 * params.kappa0):
        raise BandEdgeSingularity("flat-limit G diverges at the band edges")
    out = params.kappaa**2 / (math.pi * np.sqrt(4.0 * params.kappa0**2 - w**2))
    return _scalar_or_array(out)


def flat_limit_delta(params: ModelParams, omega):
    """Flat-limit level shift: 0 inside the band, ``+-kappaa^2 / sqrt(omega^2 - 4 kappa0^2)`` outside."""
    k0 = params.kappa0
    w = np.asarray(omega, dtype=float)
    if np.any(np.abs(w) == 2.0 * k0):
        raise BandEdge("flat-limit Delta diverges at the band edges")
    outside = np.abs(w) > 2.0 * k0
    w_out = np.where(outside, w, 3.0 * k0)
    out = np.where(outside, np.sign(w_out) * params.kappaa**2 / np.sqrt(w_out**2 - 4.0 * k0**2), 0.0)
    return _scalar_or_array(out)


def flat_limit_self_energy(params: ModelParams, s):
    """``-i kappaa^2 / sqrt(s^2 + 4 kappa0^2)`` on the first sheet."""
    s = _check_off_cut(params, s)
    return _scalar_or_array(-1j * params.kappaa**2 / _sheet_root(params, s))

