"""Pure-numpy lattice kernel; the fallback when the compiled extension is absent.

Mirrors ``_lattice_ext.pyx`` step for step.
"""

import math

import numpy as np

from ._dopri_coeffs import *  # noqa: F401,F403
from ._dopri_coeffs import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54, A61, A62, A63, A64, A65,
    A71, A73, A74, A75, A76, E1, E3, E4, E5, E6, E7,
    SAFETY, FAC_MIN, FAC_MAX, BETA, EXPO, MIN_STEP_REL, MAX_STEPS,
)
from .errors import StepSizeUnderflow


def lattice_rhs(y, kappa0, kappaa, n0, omega_a, damp):
    """Time derivative of ``y = [c_a, c_1, ..., c_N]``."""
    c = y[1:]
    dy = np.empty_like(y)
    dy[0] = -1j * (omega_a * y[0] - kappaa * c[n0 - 1])
    hop = np.zeros_like(c)
    hop[:-1] = c[1:]
    hop[1:] += c[:-1]
    dc = 1j * (kappa0 * hop) - damp * c
    dc[n0 - 1] += 1j * (kappaa * y[0])
    dy[1:] = dc
    return dy


def run(y0, kappa0, kappaa, n0, omega_a, damp, t_out, rtol, atol, h0, store_sites):
    """Integrate from ``t_out[0]`` and sample at every ``t_out``.

    Returns ``(ca, norm, sites, n_accept, n_reject, y_final)``; ``sites`` holds
    ``|c_n|`` rows when ``store_sites`` is true, else has zero rows.
    """
    y = np.array(y0, dtype=np.complex128)
    damp = np.asarray(damp, dtype=np.float64)
    t_out = np.asarray(t_out, dtype=np.float64)
    m = t_out.shape[0]
    nsites = y.shape[0] - 1
    ca = np.empty(m, dtype=np.complex128)
    norm = np.empty(m, dtype=np.float64)
    sites = np.empty((m if store_sites else 0, nsites), dtype=np.float64)

    def record(j):
        ca[j] = y[0]
        norm[j] = float(np.sum(y.real**2 + y.imag**2))
        if store_sites:
            sites[j] = np.abs(y[1:])

    record(0)
    t = float(t_out[0])
    h = h0
    err_old = 1e-4
    n_accept = n_reject = 0
    k1 = lattice_rhs(y, kappa0, kappaa, n0, omega_a, damp)
    for j in range(1, m):
        target = float(t_out[j])
        while t < target:
            if n_accept + n_reject > MAX_STEPS:
                raise StepSizeUnderflow("step budget exhausted")
            clipped = t + h >= target
            hs = target - t if clipped else h
            k2 = lattice_rhs(y + hs * (A21 * k1), kappa0, kappaa, n0, omega_a, damp)
            k3 = lattice_rhs(y + hs * (A31 * k1 + A32 * k2), kappa0, kappaa, n0, omega_a, damp)
            k4 = lattice_rhs(y + hs * (A41 * k1 + A42 * k2 + A43 * k3), kappa0, kappaa, n0, omega_a, damp)
            k5 = lattice_rhs(
                y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), kappa0, kappaa, n0, omega_a, damp
            )
            k6 = lattice_rhs(
                y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
                kappa0, kappaa, n0, omega_a, damp,
            )
            y_new = y + hs * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
            k7 = lattice_rhs(y_new, kappa0, kappaa, n0, omega_a, damp)
            e = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
            scale = atol + rtol * np.sqrt(np.maximum(y.real**2 + y.imag**2, y_new.real**2 + y_new.imag**2))
            err = math.sqrt(float(np.max((e.real**2 + e.imag**2) / (scale * scale))))
            if err <= 1.0:
                fac = SAFETY * max(err, 1e-300) ** (-EXPO) * err_old**BETA
                fac = min(FAC_MAX, max(FAC_MIN, fac))
                err_old = max(err, 1e-4)
                t = target if clipped else t + hs
                y = y_new
                k1 = k7
                n_accept += 1
                if not clipped:
                    h = hs * fac
            else:
                fac = max(FAC_MIN, SAFETY * err ** (-0.2))
                h = hs * fac
                n_reject += 1
                if h < MIN_STEP_REL * max(1.0, abs(t)):
                    raise StepSizeUnderflow(f"step size {h!r} underflowed at t={t!r}")
        record(j)
    return ca, norm, sites, n_accept, n_reject, y
