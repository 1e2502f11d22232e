"""Time-domain simulation of the level side-coupled to a semi-infinite chain.

State vectors are laid out as ``[c_a, c_1, ..., c_N]``.  The equations of
motion are

    i dc_n/dt = -kappa0 (c_{n+1} + c_{n-1}) - kappaa c_a delta_{n, n0}
    i dc_a/dt = omega_a c_a - kappaa c_{n0}

with ``c_0 = c_{N+1} = 0`` and an optional damping ramp on the last sites.
Integration uses an embedded Dormand-Prince 5(4) pair; the hot loop lives in
a compiled extension with a numpy fallback (see :data:`BACKEND`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _lattice_py
from .errors import ConfigError, IndexOutOfRange, ResonanceMismatch
from .model import ModelParams, bic_frequencies, validate, RESONANCE_TOL

try:
    from . import _lattice_ext
except ImportError:  # extension not built
    _lattice_ext = None

__all__ = [
    "BACKEND",
    "available_backends",
    "Absorber",
    "SimConfig",
    "LatticeState",
    "DecayTrace",
    "default_config",
    "absorber_profile",
    "rhs",
    "integrate",
    "bic_state",
    "hamiltonian_residual",
    "matrix_M_eigen",
]

#: Name of the kernel used when ``backend="auto"``.
BACKEND = "compiled" if _lattice_ext is not None else "python"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _lattice_ext is not None else ["python"]


def _kernel(backend: str):
    if backend == "auto":
        backend = BACKEND
    if backend == "python":
        return _lattice_py
    if backend == "compiled":
        if _lattice_ext is None:
            raise ConfigError("compiled lattice kernel is not available; rebuild the package")
        return _lattice_ext
    raise ConfigError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class Absorber:
    """Damping ramp ``strength * ((n - start) / (N - start))**power`` for sites ``n >= start``."""

    start: int
    strength: float
    power: int = 3


@dataclass(frozen=True)
class SimConfig:
    N: int
    t_max: float
    rk_tol: float = 1e-9
    absorber: Absorber | None = None
    snapshot_stride: float = 0.1
    store_sites: bool = True

    def check(self, params: ModelParams) -> "SimConfig":
        if self.N <= params.n0 + 2:
            raise ConfigError(f"lattice size N={self.N} must exceed n0 + 2 = {params.n0 + 2}")
        if not (self.t_max >= 0 and math.isfinite(self.t_max)):
            raise ConfigError("t_max must be finite and >= 0")
        if not self.rk_tol > 0:
            raise ConfigError("rk_tol must be > 0")
        if not self.snapshot_stride > 0:
            raise ConfigError("snapshot_stride must be > 0")
        ab = self.absorber
        if ab is not None:
            if ab.start <= params.n0:
                raise ConfigError(f"absorber start {ab.start} overlaps the attachment site n0={params.n0}")
            if ab.start >= self.N:
                raise ConfigError("absorber must start before the last site")
            if ab.power < 2 or ab.strength < 0:
                raise ConfigError("absorber needs power >= 2 and strength >= 0")
        return self


@dataclass
class LatticeState:
    t: float
    ca: complex
    c: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([[self.ca], self.c]).astype(np.complex128)

    @classmethod
    def from_vector(cls, t: float, y) -> "LatticeState":
        y = np.asarray(y, dtype=np.complex128)
        return cls(t=t, ca=complex(y[0]), c=y[1:].copy())

    def norm(self) -> float:
        return float(abs(self.ca) ** 2 + np.sum(np.abs(self.c) ** 2))


@dataclass
class DecayTrace:
    """Sampled output of :func:`integrate`.

    ``site_snapshots[j, n-1]`` is ``|c_n|`` at ``times[j]`` (empty when sites
    were not stored).  ``final_state`` is the full state at the last time.
    """

    times: np.ndarray
    ca_series: np.ndarray
    norm_series: np.ndarray
    site_snapshots: np.ndarray
    n0: int
    absorber_start: int | None = None
    steps_accepted: int = 0
    steps_rejected: int = 0
    final_state: LatticeState | None = field(default=None, repr=False)

    def window(self, t_lo: float, t_hi: float) -> np.ndarray:
        """Boolean mask of samples with ``t_lo <= t <= t_hi`` (tolerant of grid rounding)."""
        eps = 1e-9 * max(1.0, abs(t_hi))
        return (self.times >= t_lo - eps) & (self.times <= t_hi + eps)

    def trapped_norm(self) -> np.ndarray:
        """``|c_a|^2 + sum_{n < n0} |c_n|^2`` at each sample."""
        return np.abs(self.ca_series) ** 2 + np.sum(self.site_snapshots[:, : self.n0 - 1] ** 2, axis=1)

    def escaped_norm(self) -> np.ndarray:
        """``sum_{n >= n0} |c_n|^2`` over sites in front of the absorber."""
        stop = self.absorber_start - 1 if self.absorber_start else self.site_snapshots.shape[1]
        return np.sum(self.site_snapshots[:, self.n0 - 1 : stop] ** 2, axis=1)


def default_config(params: ModelParams, t_max: float, absorber: bool = True, **kwargs) -> SimConfig:
    """Lattice sized from the light cone.

    Without an absorber the chain extends past the wavefront reached at
    ``t_max`` (speed ``2 kappa0``) plus 50 sites.  With an absorber it is 600
    sites for ``t_max <= 200 / kappa0`` (scaled up beyond that), the last 25%
    damped with ``strength = kappa0`` and ``power = 3``.
    """
    k0 = params.kappa0
    if not absorber:
        n = params.n0 + math.ceil(2.0 * k0 * t_max) + 50
        return SimConfig(N=n, t_max=t_max, **kwargs)
    n = max(600, math.ceil(3.0 * k0 * t_max), 4 * (params.n0 + 3))
    start = n - n // 4
    return SimConfig(N=n, t_max=t_max, absorber=Absorber(start=start, strength=k0, power=3), **kwargs)


def absorber_profile(N: int, absorber: Absorber | None) -> np.ndarray:
    damp = np.zeros(N, dtype=np.float64)
    if absorber is not None:
        n = np.arange(1, N + 1)
        mask = n >= absorber.start
        damp[mask] = absorber.strength * ((n[mask] - absorber.start) / (N - absorber.start)) ** absorber.power
    return damp


def rhs(params: ModelParams, state: LatticeState, absorber: Absorber | None = None) -> LatticeState:
    """Time derivative of ``state`` as a :class:`LatticeState`."""
    y = state.vector()
    damp = absorber_profile(y.shape[0] - 1, absorber)
    dy = _lattice_py.lattice_rhs(y, params.kappa0, params.kappaa, params.n0, params.omega_a, damp)
    return LatticeState.from_vector(state.t, dy)


def _time_grid(t_max: float, stride: float) -> np.ndarray:
    n = int(math.floor(t_max / stride + 1e-9))
    times = np.arange(n + 1) * stride
    if t_max - times[-1] > 1e-9 * max(1.0, t_max):
        times = np.append(times, t_max)
    return times


def integrate(
    params: ModelParams,
    config: SimConfig,
    initial: LatticeState | None = None,
    backend: str = "auto",
) -> DecayTrace:
    """Evolve the lattice from ``c_a = 1`` (or ``initial``) up to ``config.t_max``.

    Samples are taken every ``snapshot_stride`` (plus ``t_max`` itself); the
    integrator lands exactly on each sample time.  Tolerances are absolute and
    relative with ``atol = rtol = rk_tol`` in the max norm.
    """
    validate(params)
    config.check(params)
    kernel = _kernel(backend)
    if initial is None:
        y0 = np.zeros(config.N + 1, dtype=np.complex128)
        y0[0] = 1.0
    else:
        y0 = initial.vector()
        if y0.shape[0] != config.N + 1:
            raise ConfigError(f"initial state has {y0.shape[0] - 1} sites, config expects {config.N}")
    damp = absorber_profile(config.N, config.absorber)
    times = _time_grid(config.t_max, config.snapshot_stride)
    rate = max(2.0 * params.kappa0 + abs(params.omega_a) + params.kappaa, 1e-12)
    h0 = 0.01 / rate
    ca, norm, sites, n_acc, n_rej, y_final = kernel.run(
        y0, float(params.kappa0), float(params.kappaa), int(params.n0), float(params.omega_a),
        damp, times, float(config.rk_tol), float(config.rk_tol), h0, bool(config.store_sites),
    )
    return DecayTrace(
        times=times,
        ca_series=ca,
        norm_series=norm,
        site_snapshots=sites,
        n0=params.n0,
        absorber_start=config.absorber.start if config.absorber else None,
        steps_accepted=int(n_acc),
        steps_rejected=int(n_rej),
        final_state=LatticeState.from_vector(float(times[-1]), y_final),
    )


def matrix_M_eigen(params: ModelParams) -> list[tuple[float, np.ndarray]]:
    """Closed-form eigenpairs ``(Omega_m, sin(m pi n / n0))`` of the boundary block.

    The block is the ``(n0-1) x (n0-1)`` hopping matrix of sites ``1..n0-1``
    with ``-kappa0`` on both off-diagonals.
    """
    n0 = params.n0
    if n0 < 2:
        raise IndexOutOfRange("the boundary block needs n0 >= 2")
    n = np.arange(1, n0)
    omegas = bic_frequencies(params)
    return [(omegas[m - 1], np.sin(m * math.pi * n / n0)) for m in range(1, n0)]


def bic_state(params: ModelParams, m: int, N: int | None = None, tol: float | None = None) -> LatticeState:
    """Normalised bound state in the continuum for resonance index ``m``.

    ``c_n = sin(m pi n / n0)`` for ``n < n0``, zero from ``n0`` on, and
    ``c_a = -(kappa0 / kappaa) c_{n0-1}``.  ``N`` defaults to ``n0 + 3``.
    """
    n0 = params.n0
    if not (1 <= m <= n0 - 1):
        raise IndexOutOfRange(f"m must lie in 1..{n0 - 1}, got {m}")
    tol = RESONANCE_TOL if tol is None else tol
    omega_m = bic_frequencies(params)[m - 1]
    if abs(params.omega_a - omega_m) > tol * params.kappa0:
        raise ResonanceMismatch(f"omega_a={params.omega_a!r} is not the resonance Omega_{m}={omega_m!r}")
    N = n0 + 3 if N is None else N
    if N < n0:
        raise ConfigError("N must be at least n0")
    c = np.zeros(N, dtype=np.complex128)
    n = np.arange(1, n0)
    c[: n0 - 1] = np.sin(m * math.pi * n / n0)
    ca = -(params.kappa0 / params.kappaa) * math.sin(m * math.pi * (n0 - 1) / n0)
    scale = math.sqrt(ca**2 + float(np.sum(np.abs(c) ** 2)))
    return LatticeState(t=0.0, ca=complex(ca / scale), c=c / scale)


def hamiltonian_residual(params: ModelParams, state: LatticeState, omega: float) -> float:
    """``|| H psi - omega psi ||`` for the absorber-free tight-binding Hamiltonian."""
    y = state.vector()
    damp = np.zeros(y.shape[0] - 1)
    h_psi = 1j * _lattice_py.lattice_rhs(y, params.kappa0, params.kappaa, params.n0, params.omega_a, damp)
    return float(np.linalg.norm(h_psi - omega * y))
