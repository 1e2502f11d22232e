"""Acceptance criteria 1-13, one test each.

Every test records a single PASS/FAIL line (shown in the terminal summary)
and then asserts the same condition.
"""

import math

import numpy as np
import pytest

from conftest import FIG4, FIG5, M4
from fanolab import decay, lattice, spectral
from fanolab.decay import DecayLawConfig, ResidueFormula
from fanolab.model import ModelParams, bic_frequencies, matching_bic_index, outside_bound_state_window
from fanolab.quadrature import integrate


def P(n0, omega_a=0.0, kappaa=0.2):
    return ModelParams(1.0, kappaa, n0, omega_a)


def test_01_self_energy_closed_form(record):
    rng = np.random.default_rng(1)
    s = rng.uniform(0.1, 10.0, 100) + 1j * rng.uniform(-3.0, 3.0, 100)
    worst = 0.0
    for n0 in (1, 3, 12):
        p = P(n0)
        closed = spectral.self_energy(p, s)
        for si, ci in zip(s, closed):
            worst = max(worst, abs(ci - spectral.self_energy_quadrature(p, si)) / (1 + abs(ci)))
    assert record(1, worst < 1e-10, f"max |dSigma|/(1+|Sigma|) = {worst:.2e} over 3 x 100 points (< 1e-10)")


def test_02_kramers_kronig(record):
    worst = 0.0
    for n0 in (2, 5, 12):
        p = P(n0)
        zeros = np.array([-2 * math.cos(l * math.pi / (2 * n0)) for l in range(1, 2 * n0)])
        grid = [w for w in np.linspace(-1.96, 1.96, 61) if np.min(np.abs(zeros - w)) > 1e-3][:50]
        assert len(grid) == 50
        for w in grid:
            worst = max(worst, abs(spectral.level_shift_pv(p, w) - spectral.level_shift_delta(p, w)))
    assert record(2, worst < 1e-6, f"max |Delta - PV| = {worst:.2e} at 3 x 50 frequencies (< 1e-6)")


def test_03_sum_rule(record):
    errs = {}
    for n0 in (1, 2, 7, 12):
        p = P(n0)
        errs[n0] = abs(integrate(lambda w: spectral.spectral_density_G(p, w), -2.0, 2.0) - 0.04)
    worst = max(errs.values())
    assert record(3, worst < 1e-8, f"max |int G - kappaa^2| = {worst:.2e} for n0 in 1,2,7,12 (< 1e-8)")


def test_04_zero_structure(record):
    w = np.linspace(-2, 2, 200001)[1:-1]
    bad = []
    for n0 in range(1, 13):
        p = P(n0)
        d = spectral.level_shift_delta(p, w)
        s = np.sign(d)
        s = s[s != 0]
        delta_changes = int(np.count_nonzero(s[1:] != s[:-1]))
        g = spectral.spectral_density_G(p, w)
        minima = np.flatnonzero((g[1:-1] < g[:-2]) & (g[1:-1] < g[2:])) + 1
        # grid minima sit within half a step of the true double zeros, so
        # their values scale with the local curvature; test them relative to
        # the peak and check the located positions against the exact zeros
        g_zeros = int(np.count_nonzero(g[minima] < 1e-6 * g.max()))
        predicted = np.array(bic_frequencies(p))
        located = predicted.size == minima.size and np.allclose(w[minima], predicted, atol=2e-5)
        at_predicted = max([float(spectral.spectral_density_G(p, x)) for x in predicted], default=0.0)
        if delta_changes != 2 * n0 - 1 or g_zeros != n0 - 1 or not located or at_predicted > 1e-25:
            bad.append((n0, delta_changes, g_zeros))
    assert record(4, not bad, "Delta sign changes 2n0-1 and G interior zeros n0-1 for n0 = 1..12"
                  + (f"; mismatches {bad}" if bad else ""))


def test_05_bic_eigenstates(record):
    worst = 0.0
    exact = True
    for n0 in range(2, 13):
        base = P(n0)
        exact &= [w for w, _ in lattice.matrix_M_eigen(base)] == bic_frequencies(base)
        for m, omega in enumerate(bic_frequencies(base), start=1):
            p = base.replace(omega_a=omega)
            worst = max(worst, lattice.hamiltonian_residual(p, lattice.bic_state(p, m), omega))
    ok = worst < 1e-12 and exact
    assert record(5, ok, f"max residual {worst:.2e} (< 1e-12); matrix M spectrum == resonances: {exact}")


def test_06_fig5(record, fig5_trace, fig5_short_trace):
    # plateau from the default 600-site run; trapping measured on a 200-site
    # chain whose absorber (sites >= 150) has already swallowed the escaped
    # pulse by t = 150 (on 600 sites it is still in flight before the absorber)
    plateau = float(np.mean(np.abs(fig5_trace.ca_series[fig5_trace.window(150, 200)])))
    short = fig5_short_trace
    plateau_short = float(np.mean(np.abs(short.ca_series[short.window(150, 200)])))
    escaped = float(np.max(short.escaped_norm()[short.window(150, 200)]))
    ok = abs(plateau - 0.8065) <= 0.01 and abs(plateau_short - 0.8065) <= 0.01 and escaped < 0.02
    assert record(6, ok, f"plateau {plateau:.5f} (N=600), {plateau_short:.5f} (N=200), target 0.8065 +- 0.01; "
                  f"max escaped norm on [150,200] {escaped:.4f} (< 0.02)")


def test_07_fig4(record, fig4_trace):
    final = float(abs(fig4_trace.ca_series[-1]))
    leaked = float(fig4_trace.escaped_norm()[-1])
    ok = final < 0.05 and leaked > 0.9
    assert record(7, ok, f"|c_a(200)| = {final:.4f} (< 0.05); norm past site n0 = {leaked:.4f} (> 0.9)")


def _compare(params, cfg=decay.DEFAULT_DECAY_CONFIG):
    trace = lattice.integrate(params, lattice.SimConfig(N=400, t_max=50.0, store_sites=False))
    return decay.compare_traces(trace, lambda t: decay.analytic_ca(params, t, cfg), (0.0, 50.0)).max_error


def test_08_analytic_vs_lattice(record):
    errs = {"fig4": _compare(FIG4), "fig5": _compare(FIG5)}
    worst = max(errs.values())
    assert record(8, worst < 1e-3, "max |c_num - c_analytic| on [0,50], N=400: "
                  + ", ".join(f"{k} {v:.2e}" for k, v in errs.items()) + " (< 1e-3)")


COMPLETENESS_SETS = [
    FIG4,
    FIG5,
    M4,
    ModelParams(1.0, 0.3, 5, -2.0 * math.cos(2 * math.pi / 5)),
    ModelParams(1.0, 0.1, 20, 0.7),
]


def test_09_completeness(record):
    errs = []
    for p in COMPLETENESS_SETS:
        assert outside_bound_state_window(p)[1]
        errs.append(abs(decay.pole_amplitude(p) + decay.decay_integral(p, 0.0) - 1))
    n_bic = sum(matching_bic_index(p) is not None for p in COMPLETENESS_SETS)
    worst = max(errs)
    assert record(9, worst < 1e-5, f"max |Z + c_decay(0) - 1| = {worst:.2e} over 5 sets ({n_bic} with BIC) (< 1e-5)")


def test_10_residue_resolution(record):
    res = decay.resolve_residue_formula()
    cands = decay.residue_candidates(M4)
    matches = [f for f, v in cands.items() if abs(v - res.plateau) <= 0.005]
    winner = DecayLawConfig(residue_formula=res.winner)
    err8 = _compare(M4, winner)
    err9 = abs(decay.pole_amplitude(M4, res.winner) + decay.decay_integral(M4, 0.0) - 1)
    ok = len(matches) == 1 and matches[0] is res.winner and err8 < 1e-3 and err9 < 1e-5
    assert record(10, ok, f"plateau {res.plateau:.6f}; PaperEq25 {cands[ResidueFormula.PAPER_EQ25]:.6f}, "
                  f"EigenvectorOverlap {cands[ResidueFormula.EIGENVECTOR_OVERLAP]:.6f}; winner "
                  f"{res.winner.value}; m=4 trace error {err8:.1e}, completeness {err9:.1e}")


def test_11_conservation(record, fig5_short_trace):
    # free chain: run to the wavefront arrival time (N - n0) / (2 kappa0)
    N = 400
    t_arrive = (N - FIG5.n0) / 2.0
    free = lattice.integrate(FIG5, lattice.SimConfig(N=N, t_max=t_arrive, rk_tol=1e-11, store_sites=False))
    drift = float(np.max(np.abs(free.norm_series - 1)))
    # absorber: monotone once flux reaches the absorbing region
    tr = fig5_short_trace
    arrival = (tr.absorber_start - FIG5.n0) / 2.0
    rise = float(np.max(np.diff(tr.norm_series[tr.times >= arrival])))
    # tolerance halving on the default fig5 run
    cfg = lattice.default_config(FIG5, 200.0, store_sites=False)
    a = lattice.integrate(FIG5, cfg)
    b = lattice.integrate(FIG5, lattice.SimConfig(**{**cfg.__dict__, "rk_tol": cfg.rk_tol / 2}))
    change = float(abs(abs(a.ca_series[-1]) - abs(b.ca_series[-1])))
    ok = drift < 1e-9 and rise <= 0.0 and change < 1e-6
    assert record(11, ok, f"norm drift {drift:.1e} to t={t_arrive:g} at rk_tol=1e-11 (< 1e-9); "
                  f"max norm increase after arrival {rise:.1e} (<= 0); |c_a(200)| change on halving rk_tol "
                  f"{change:.1e} (< 1e-6)")


def test_12_outside_window(record):
    scan = np.linspace(-2.4, 2.4, 20)
    mismatches, worst = [], 0.0
    for wa in scan:
        p = P(12, float(wa))
        states = spectral.find_outside_bound_states(p)
        if bool(states) == outside_bound_state_window(p)[1]:
            mismatches.append(float(wa))
        for st in states:
            worst = max(worst, abs(st.omega - wa - spectral.level_shift_delta(p, st.omega)))
    n_found = sum(bool(spectral.find_outside_bound_states(P(12, float(w)))) for w in scan)
    ok = not mismatches and worst < 1e-10
    assert record(12, ok, f"{n_found}/20 scan points with outside roots, all where the window test fails; "
                  f"max residual {worst:.1e} (< 1e-10)")


def test_13_flat_limit(record):
    n0 = 200
    p = P(n0)
    worst = 0.0
    for centre in np.linspace(-1.8, 1.8, 10):
        theta = math.acos(-centre / 2)
        lo, hi = sorted(-2 * math.cos(theta + d * math.pi / (2 * n0)) for d in (-1, 1))
        mean = integrate(lambda w: spectral.spectral_density_G(p, w), lo, hi) / (hi - lo)
        worst = max(worst, abs(mean / spectral.flat_limit_G(p, centre) - 1))
    # flat coupling has no zero of G, hence no resonance, at any omega_a
    band = np.linspace(-2, 2, 4001)[1:-1]
    g_positive = bool(np.all(spectral.flat_limit_G(p, band) > 0))
    scan = np.linspace(-1.9, 1.9, 20)
    bics = [float(w) for w in scan if spectral.bic_bound_states(P(n0, float(w)))]
    ok = worst < 0.02 and g_positive and not bics
    assert record(13, ok, f"max relative deviation of cycle-averaged G {worst:.2e} (< 2%); flat G > 0 on band: "
                  f"{g_positive}; BIC found at scanned omega_a: {bics or 'none'}")
