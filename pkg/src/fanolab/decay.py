"""Exact survival amplitude of the level: pole term plus branch-cut integral.

For parameters with no bound state outside the band,

    c_a(t) = Z exp(-i omega_a t) + c_decay(t)

where ``Z`` is the weight of the bound state in the continuum (zero off
resonance) and ``c_decay`` is a momentum integral over the band.  Two
closed forms for ``Z`` are carried (:class:`ResidueFormula`); they differ in
the exponent of ``1 - (omega_a / 2 kappa0)^2`` and agree only at
``omega_a = 0``.  ``AutoResolve`` picks between them by measuring the
long-time plateau of a lattice simulation once per process.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import lattice, quadrature
from .errors import GridMismatch, NoBic, OutsideBoundStatePresent, ResidueResolutionError
from .model import ModelParams, bic_frequencies, matching_bic_index, outside_bound_state_window

__all__ = [
    "ResidueFormula",
    "DecayLawConfig",
    "ResidueResolution",
    "TraceComparison",
    "residue_candidates",
    "resolve_residue_formula",
    "pole_amplitude",
    "pole_term",
    "decay_integral",
    "analytic_ca",
    "analytic_series",
    "compare_traces",
]


class ResidueFormula(str, enum.Enum):
    PAPER_EQ25 = "PaperEq25"
    EIGENVECTOR_OVERLAP = "EigenvectorOverlap"
    AUTO_RESOLVE = "AutoResolve"


@dataclass(frozen=True)
class DecayLawConfig:
    residue_formula: ResidueFormula = ResidueFormula.AUTO_RESOLVE
    quadrature: quadrature.QuadratureSettings = quadrature.DEFAULT_SETTINGS
    time_grid: tuple[float, ...] = ()

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float)
        if grid.size and (np.any(grid < 0) or np.any(np.diff(grid) <= 0)):
            raise GridMismatch("time_grid must be nonnegative and strictly increasing")


DEFAULT_DECAY_CONFIG = DecayLawConfig()

# Reference point for AutoResolve: m = 4 of n0 = 12, where the two
# candidates differ by 0.025.
REFERENCE_PARAMS = ModelParams(kappa0=1.0, kappaa=0.2, n0=12, omega_a=-2.0 * math.cos(4 * math.pi / 12))
REFERENCE_T_MAX = 200.0
REFERENCE_WINDOW = (150.0, 200.0)
REFERENCE_MATCH_TOL = 0.005


def residue_candidates(params: ModelParams) -> dict[ResidueFormula, float]:
    """Both closed-form residues, evaluated at ``omega_a`` regardless of resonance."""
    ratio = params.n0 / 2.0 * (params.kappaa / params.kappa0) ** 2
    edge = 1.0 - (params.omega_a / (2.0 * params.kappa0)) ** 2
    if edge <= 0.0:
        return {ResidueFormula.PAPER_EQ25: 0.0, ResidueFormula.EIGENVECTOR_OVERLAP: 0.0}
    return {
        ResidueFormula.PAPER_EQ25: 1.0 / (1.0 + ratio * edge**-0.5),
        ResidueFormula.EIGENVECTOR_OVERLAP: 1.0 / (1.0 + ratio / edge),
    }


@dataclass(frozen=True)
class ResidueResolution:
    winner: ResidueFormula
    plateau: float
    candidates: dict = field(default_factory=dict)
    backend: str = ""


@functools.lru_cache(maxsize=None)
def resolve_residue_formula(backend: str = "auto") -> ResidueResolution:
    """Decide between the residue candidates from a lattice simulation.

    Simulates the reference point, averages ``|c_a|`` over the tail window
    and requires exactly one candidate within ``REFERENCE_MATCH_TOL``.
    The result is cached per backend.
    """
    params = REFERENCE_PARAMS
    trace = lattice.integrate(
        params, lattice.default_config(params, REFERENCE_T_MAX, store_sites=False), backend=backend
    )
    plateau = float(np.mean(np.abs(trace.ca_series[trace.window(*REFERENCE_WINDOW)])))
    candidates = residue_candidates(params)
    matches = [f for f, v in candidates.items() if abs(v - plateau) <= REFERENCE_MATCH_TOL]
    if len(matches) != 1:
        raise ResidueResolutionError(
            f"lattice plateau {plateau:.6f} matched {len(matches)} of the candidates "
            + ", ".join(f"{f.value}={v:.6f}" for f, v in candidates.items())
        )
    return ResidueResolution(
        winner=matches[0],
        plateau=plateau,
        candidates={f.value: v for f, v in candidates.items()},
        backend=lattice.BACKEND if backend == "auto" else backend,
    )


def pole_amplitude(
    params: ModelParams,
    formula: ResidueFormula | str = ResidueFormula.AUTO_RESOLVE,
    tol: float | None = None,
    strict: bool = False,
) -> float:
    """Weight of the non-decaying term; 0 without a BIC (or :class:`NoBic` if ``strict``)."""
    formula = ResidueFormula(formula)
    if matching_bic_index(params, tol) is None:
        if strict:
            raise NoBic(f"omega_a={params.omega_a!r} is not a resonance of n0={params.n0}")
        return 0.0
    if formula is ResidueFormula.AUTO_RESOLVE:
        formula = resolve_residue_formula().winner
    return residue_candidates(params)[formula]


def pole_term(params: ModelParams, t, formula=ResidueFormula.AUTO_RESOLVE, tol: float | None = None):
    """``Z exp(-i omega_a t)``."""
    z = pole_amplitude(params, formula, tol)
    return z * np.exp(-1j * params.omega_a * np.asarray(t, dtype=float))


def _bracket(params: ModelParams, k):
    k0 = params.kappa0
    return (
        params.omega_a / (2.0 * k0)
        + np.cos(k)
        - (params.kappaa / (2.0 * k0)) ** 2 * np.sin(2 * params.n0 * k) / np.sin(k)
    )


@functools.lru_cache(maxsize=256)
def _bracket_roots(params: ModelParams) -> tuple[float, ...]:
    """Sign changes of the real bracket on a 4097-point grid, refined by bisection."""
    grid = np.linspace(0.0, math.pi, 4097)[1:-1]
    values = _bracket(params, grid)
    roots = [
        brentq(lambda k: float(_bracket(params, k)), grid[i], grid[i + 1], xtol=1e-15)
        for i in np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)[0]
    ]
    roots += [float(grid[i]) for i in np.nonzero(values == 0.0)[0]]
    return tuple(sorted(set(roots)))


@functools.lru_cache(maxsize=256)
def _breakpoints(params: ModelParams) -> tuple[float, ...]:
    """Zeros of ``sin(n0 k)`` and of the real bracket, where the integrand is sharp."""
    points = [j * math.pi / params.n0 for j in range(1, params.n0)]
    return tuple(sorted(set(points) | set(_bracket_roots(params))))


def _decay_integrand(params: ModelParams, t: float) -> Callable[[np.ndarray], np.ndarray]:
    k0 = params.kappa0
    n0 = params.n0
    pref = (params.kappaa / k0) ** 2 / (2.0 * math.pi)
    width = params.kappaa**2 / (2.0 * k0**2)

    def integrand(k):
        sin_k = np.sin(k)
        s_n = np.sin(n0 * k)
        denom = _bracket(params, k) ** 2 + (width * s_n**2 / sin_k) ** 2
        return pref * s_n**2 * np.exp(2j * k0 * t * np.cos(k)) / denom

    return integrand


# Bracket roots whose Lorentzian half-width (in k) falls below this are
# treated by pole subtraction; wider ones are left to adaptive quadrature.
_NARROW_WIDTH = 1e-6
_NEAR_POLE = 1e-3


def _d_pair(params: ModelParams, k, sign: int):
    """``D(k)`` (sign=+1) or its reflection (sign=-1) and the k-derivative.

    ``D = a + cos k - 2 beta exp(-i n0 k) sin(n0 k) / sin k`` is analytic in
    ``k``; on the real axis its real part is the bracket and its imaginary
    part the width term, so the integrand equals ``K (1/D - 1/D~)``.
    """
    k0 = params.kappa0
    n0 = params.n0
    beta = (params.kappaa / (2.0 * k0)) ** 2
    phase = np.exp(-sign * 1j * n0 * k)
    sin_k = np.sin(k)
    q = phase * np.sin(n0 * k) / sin_k
    dq = phase * (n0 * phase * sin_k - np.sin(n0 * k) * np.cos(k)) / sin_k**2
    d = params.omega_a / (2.0 * k0) + np.cos(k) - 2.0 * beta * q
    return d, -sin_k - 2.0 * beta * dq


def _k_factor(params: ModelParams, t: float, k):
    k0 = params.kappa0
    pref = (params.kappaa / k0) ** 2 / (2.0 * math.pi)
    beta = (params.kappaa / (2.0 * k0)) ** 2
    return 1j * pref / (4.0 * beta) * np.sin(k) * np.exp(2j * k0 * t * np.cos(k))


def _narrow_poles(params: ModelParams) -> list[complex]:
    """Near-real zeros of ``D`` next to a resonance, as ``k_r - i eta``.

    Off but close to a resonance the integrand has a Lorentzian spike at a
    bracket root ``k_r`` of half-width ``eta ~ detuning^2``, far below what
    double precision resolves in ``k``.  The imaginary part comes from the
    first-order expansion about ``k_r`` (where the bracket vanishes), which
    keeps its sign exact; Newton refinement is used only once ``eta`` is
    large enough to be resolved.
    """
    poles = []
    k0 = params.kappa0
    width = params.kappaa**2 / (2.0 * k0**2)
    for k_r in _bracket_roots(params):
        s_n = math.sin(params.n0 * k_r)
        gamma = width * s_n * s_n / math.sin(k_r)
        _, d1 = _d_pair(params, complex(k_r), 1)
        eta = -1j * gamma / complex(d1)
        if not abs(eta) < _NARROW_WIDTH:
            continue
        k_p = complex(k_r) + eta
        if abs(eta.imag) > 1e-10:
            for _ in range(4):
                d, d1 = _d_pair(params, k_p, 1)
                k_p -= complex(d) / complex(d1)
        poles.append(k_p)
    return poles


def _log_segment(z: complex) -> complex:
    """``int_0^pi dk / (k - z)`` for ``z`` off the real segment."""
    return complex(np.log(math.pi - z) - np.log(-z))


def decay_integral(
    params: ModelParams,
    t: float,
    settings: quadrature.QuadratureSettings = quadrature.DEFAULT_SETTINGS,
    tol: float | None = None,
) -> complex:
    """Branch-cut contribution ``c_decay(t)`` as a momentum integral over ``[0, pi]``.

    At a resonance the integrand is 0/0 at ``k* = m pi / n0`` and is handled
    by the symmetric-window principal value.  Close to (but off) a resonance
    the integrand has an unresolvably narrow Lorentzian; its two simple
    poles ``k_p`` and ``conj(k_p)`` are subtracted and integrated in closed
    form.  Otherwise plain adaptive quadrature is used, seeded with the
    integrand's sharp points.
    """
    if t < 0:
        raise GridMismatch("decay_integral needs t >= 0")
    t = float(t)
    f = _decay_integrand(params, t)
    m = matching_bic_index(params, tol)
    breaks = _breakpoints(params)
    if m is not None:
        k_star = m * math.pi / params.n0
        others = [b for b in breaks if abs(b - k_star) > 1e-9]
        return complex(quadrature.principal_value(f, 0.0, math.pi, [k_star], settings, others))
    poles = _narrow_poles(params)
    if not poles:
        return complex(quadrature.integrate(f, 0.0, math.pi, settings, breaks))
    terms = []
    closed = 0.0j
    for k_p in poles:
        k_c = k_p.conjugate()
        r1 = complex(_k_factor(params, t, k_p) / _d_pair(params, k_p, 1)[1])
        r2 = complex(_k_factor(params, t, k_c) / _d_pair(params, k_c, -1)[1])
        terms.append((k_p, r1, k_c, r2))
        closed += r1 * _log_segment(k_p) - r2 * _log_segment(k_c)

    def remainder(k):
        out = f(k)
        for k_p, r1, k_c, r2 in terms:
            out = out - r1 / (k - k_p) + r2 / (k - k_c)
        return out

    # The remainder is smooth, but its evaluation is not: the spike centre is
    # known only to rounding, which leaves an odd O(eps / u^3) residue within
    # u of k_r.  Keep quadrature nodes away by dropping nearby breakpoints.
    far = [b for b in breaks if all(abs(b - k_p.real) > _NEAR_POLE for k_p in poles)]
    return complex(quadrature.integrate(remainder, 0.0, math.pi, settings, far)) + closed


def _check_regime(params: ModelParams):
    _, inside = outside_bound_state_window(params)
    if not inside:
        raise OutsideBoundStatePresent(
            "a bound state outside the band exists; the pole + branch-cut formula does not cover this regime"
        )


def analytic_ca(params: ModelParams, t: float, config: DecayLawConfig = DEFAULT_DECAY_CONFIG) -> complex:
    """``c_a(t) = Z exp(-i omega_a t) + c_decay(t)``."""
    _check_regime(params)
    z = pole_amplitude(params, config.residue_formula)
    return complex(z * np.exp(-1j * params.omega_a * t) + decay_integral(params, t, config.quadrature))


def analytic_series(
    params: ModelParams, times: Sequence[float], config: DecayLawConfig = DEFAULT_DECAY_CONFIG
) -> np.ndarray:
    """:func:`analytic_ca` on a grid, in grid order."""
    _check_regime(params)
    z = pole_amplitude(params, config.residue_formula)
    out = np.empty(len(times), dtype=np.complex128)
    for i, t in enumerate(times):
        out[i] = z * np.exp(-1j * params.omega_a * t) + decay_integral(params, float(t), config.quadrature)
    return out


@dataclass(frozen=True)
class TraceComparison:
    t_lo: float
    t_hi: float
    n_points: int
    max_error: float
    rms_error: float
    plateau_mean: float
    plateau_min: float
    plateau_max: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def compare_traces(
    numeric: lattice.DecayTrace,
    analytic,
    window: tuple[float, float],
    tail: tuple[float, float] | None = None,
) -> TraceComparison:
    """Error between a simulated and an analytic ``c_a`` on the simulation grid.

    ``analytic`` is either a callable ``t -> c_a`` or a ``(times, values)``
    pair that must coincide with the numeric samples inside ``window``.
    Plateau statistics of ``|c_a|`` (numeric) are taken over ``tail``,
    defaulting to the last quarter of ``window``.
    """
    t_lo, t_hi = window
    mask = numeric.window(t_lo, t_hi)
    times = numeric.times[mask]
    if times.size == 0:
        raise GridMismatch(f"no numeric samples in window [{t_lo}, {t_hi}]")
    if callable(analytic):
        values = np.array([analytic(float(t)) for t in times], dtype=np.complex128)
    else:
        a_times, a_values = (np.asarray(x) for x in analytic)
        sel = (a_times >= t_lo - 1e-9 * max(1.0, abs(t_hi))) & (a_times <= t_hi + 1e-9 * max(1.0, abs(t_hi)))
        if a_times[sel].shape != times.shape or not np.allclose(a_times[sel], times, rtol=0, atol=1e-9):
            raise GridMismatch("analytic samples are not on the numeric time grid")
        values = np.asarray(a_values, dtype=np.complex128)[sel]
    err = np.abs(numeric.ca_series[mask] - values)
    if tail is None:
        tail = (t_hi - 0.25 * (t_hi - t_lo), t_hi)
    tail_abs = np.abs(numeric.ca_series[numeric.window(*tail)])
    if tail_abs.size == 0:
        raise GridMismatch(f"no numeric samples in tail window {tail}")
    return TraceComparison(
        t_lo=float(t_lo),
        t_hi=float(t_hi),
        n_points=int(times.size),
        max_error=float(err.max()),
        rms_error=float(np.sqrt(np.mean(err**2))),
        plateau_mean=float(tail_abs.mean()),
        plateau_min=float(tail_abs.min()),
        plateau_max=float(tail_abs.max()),
    )
