# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled lattice kernel: Dormand-Prince 5(4) for the side-coupled chain.

Same algorithm and call signature as ``fanolab._lattice_py.run``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, pow, fmax, fmin

from fanolab.errors import StepSizeUnderflow
from fanolab._dopri_coeffs import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54, A61, A62, A63, A64, A65,
    A71, A73, A74, A75, A76, E1, E3, E4, E5, E6, E7,
    SAFETY, FAC_MIN, FAC_MAX, BETA, EXPO, MIN_STEP_REL, MAX_STEPS,
)

cnp.import_array()

ctypedef double complex cplx


cdef inline double abs2(cplx z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double cabs(cplx z) noexcept nogil:
    return sqrt(abs2(z))


cdef void rhs(const cplx[::1] y, cplx[::1] dy, int nsites, double kappa0, double kappaa,
              int n0, double omega_a, const double[::1] damp) noexcept nogil:
    cdef int n
    cdef cplx ca = y[0]
    cdef cplx I = 1j
    dy[0] = -I * (omega_a * ca - kappaa * y[n0])
    dy[1] = I * (kappa0 * y[2]) - damp[0] * y[1]
    for n in range(2, nsites):
        dy[n] = I * (kappa0 * (y[n + 1] + y[n - 1])) - damp[n - 1] * y[n]
    dy[nsites] = I * (kappa0 * y[nsites - 1]) - damp[nsites - 1] * y[nsites]
    dy[n0] = dy[n0] + I * (kappaa * ca)


def lattice_rhs(y, double kappa0, double kappaa, int n0, double omega_a, damp):
    cdef cplx[::1] yv = np.ascontiguousarray(y, dtype=np.complex128)
    out = np.empty(yv.shape[0], dtype=np.complex128)
    cdef cplx[::1] ov = out
    cdef double[::1] dv = np.ascontiguousarray(damp, dtype=np.float64)
    rhs(yv, ov, yv.shape[0] - 1, kappa0, kappaa, n0, omega_a, dv)
    return out


def run(y0, double kappa0, double kappaa, int n0, double omega_a, damp, t_out,
        double rtol, double atol, double h0, bint store_sites):
    cdef cplx[::1] y = np.array(y0, dtype=np.complex128)
    cdef double[::1] dmp = np.ascontiguousarray(damp, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(t_out, dtype=np.float64)
    cdef Py_ssize_t m = tv.shape[0]
    cdef int size = y.shape[0]
    cdef int nsites = size - 1

    ca_np = np.empty(m, dtype=np.complex128)
    norm_np = np.empty(m, dtype=np.float64)
    sites_np = np.empty((m if store_sites else 0, nsites), dtype=np.float64)
    cdef cplx[::1] ca = ca_np
    cdef double[::1] norm = norm_np
    cdef double[:, ::1] sites = sites_np

    cdef cplx[::1] k1 = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] k2 = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] k3 = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] k4 = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] k5 = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] k6 = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] k7 = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] tmp = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] ynew = np.empty(size, dtype=np.complex128)
    cdef cplx[::1] swap

    cdef double a21 = A21, a31 = A31, a32 = A32, a41 = A41, a42 = A42, a43 = A43
    cdef double a51 = A51, a52 = A52, a53 = A53, a54 = A54
    cdef double a61 = A61, a62 = A62, a63 = A63, a64 = A64, a65 = A65
    cdef double a71 = A71, a73 = A73, a74 = A74, a75 = A75, a76 = A76
    cdef double e1 = E1, e3 = E3, e4 = E4, e5 = E5, e6 = E6, e7 = E7
    cdef double safety = SAFETY, fac_min = FAC_MIN, fac_max = FAC_MAX
    cdef double beta = BETA, expo = EXPO, min_step_rel = MIN_STEP_REL
    cdef long max_steps = MAX_STEPS

    cdef double t, h, hs, target, err, sc, fac, err_old = 1e-4, s
    cdef long n_accept = 0, n_reject = 0
    cdef bint clipped
    cdef Py_ssize_t j, i
    cdef cplx ei

    # record(0)
    ca[0] = y[0]
    s = 0.0
    for i in range(size):
        s += y[i].real * y[i].real + y[i].imag * y[i].imag
    norm[0] = s
    if store_sites:
        for i in range(nsites):
            sites[0, i] = cabs(y[i + 1])

    t = tv[0]
    h = h0
    rhs(y, k1, nsites, kappa0, kappaa, n0, omega_a, dmp)
    for j in range(1, m):
        target = tv[j]
        while t < target:
            if n_accept + n_reject > max_steps:
                raise StepSizeUnderflow("step budget exhausted")
            clipped = t + h >= target
            hs = target - t if clipped else h
            with nogil:
                for i in range(size):
                    tmp[i] = y[i] + hs * (a21 * k1[i])
                rhs(tmp, k2, nsites, kappa0, kappaa, n0, omega_a, dmp)
                for i in range(size):
                    tmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i])
                rhs(tmp, k3, nsites, kappa0, kappaa, n0, omega_a, dmp)
                for i in range(size):
                    tmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i])
                rhs(tmp, k4, nsites, kappa0, kappaa, n0, omega_a, dmp)
                for i in range(size):
                    tmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i])
                rhs(tmp, k5, nsites, kappa0, kappaa, n0, omega_a, dmp)
                for i in range(size):
                    tmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i])
                rhs(tmp, k6, nsites, kappa0, kappaa, n0, omega_a, dmp)
                for i in range(size):
                    ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i])
                rhs(ynew, k7, nsites, kappa0, kappaa, n0, omega_a, dmp)
                err = 0.0
                for i in range(size):
                    ei = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i])
                    sc = atol + rtol * sqrt(fmax(abs2(y[i]), abs2(ynew[i])))
                    err = fmax(err, abs2(ei) / (sc * sc))
                err = sqrt(err)
            if err <= 1.0:
                fac = safety * pow(fmax(err, 1e-300), -expo) * pow(err_old, beta)
                fac = fmin(fac_max, fmax(fac_min, fac))
                err_old = fmax(err, 1e-4)
                t = target if clipped else t + hs
                swap = y
                y = ynew
                ynew = swap
                swap = k1
                k1 = k7
                k7 = swap
                n_accept += 1
                if not clipped:
                    h = hs * fac
            else:
                fac = fmax(fac_min, safety * pow(err, -0.2))
                h = hs * fac
                n_reject += 1
                if h < min_step_rel * fmax(1.0, fabs(t)):
                    raise StepSizeUnderflow(f"step size {h!r} underflowed at t={t!r}")
        ca[j] = y[0]
        s = 0.0
        for i in range(size):
            s += y[i].real * y[i].real + y[i].imag * y[i].imag
        norm[j] = s
        if store_sites:
            for i in range(nsites):
                sites[j, i] = cabs(y[i + 1])
    return ca_np, norm_np, sites_np, n_accept, n_reject, np.asarray(y).copy()
