import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIG4, FIG5, M4
from fanolab import decay, lattice
from fanolab.decay import DecayLawConfig, ResidueFormula
from fanolab.errors import GridMismatch, NoBic, OutsideBoundStatePresent
from fanolab.model import ModelParams, bic_frequencies, outside_bound_state_window

PAPER = ResidueFormula.PAPER_EQ25
OVERLAP = ResidueFormula.EIGENVECTOR_OVERLAP


class TestResidue:
    def test_fig5_both_coincide(self):
        c = decay.residue_candidates(FIG5)
        assert c[PAPER] == pytest.approx(0.806451612903225806, rel=1e-15)
        assert c[OVERLAP] == pytest.approx(0.806451612903225806, rel=1e-15)

    def test_m4_candidates(self):
        c = decay.residue_candidates(M4)
        assert c[PAPER] == pytest.approx(0.783006792449068060, rel=1e-14)
        assert c[OVERLAP] == pytest.approx(0.757575757575757576, rel=1e-14)

    def test_overlap_equals_bic_projection(self):
        for n0, m in ((12, 4), (12, 6), (7, 2), (5, 3)):
            p = ModelParams(1.0, 0.2, n0, bic_frequencies(ModelParams(1.0, 0.2, n0, 0.0))[m - 1])
            psi = lattice.bic_state(p, m)
            assert abs(psi.ca) ** 2 == pytest.approx(decay.pole_amplitude(p, OVERLAP), rel=1e-12)

    def test_no_bic(self):
        assert decay.pole_amplitude(FIG4) == 0.0
        with pytest.raises(NoBic):
            decay.pole_amplitude(FIG4, strict=True)

    def test_auto_resolves_to_overlap(self):
        res = decay.resolve_residue_formula()
        assert res.winner is OVERLAP
        assert abs(res.plateau - res.candidates["EigenvectorOverlap"]) < decay.REFERENCE_MATCH_TOL
        assert abs(res.plateau - res.candidates["PaperEq25"]) > decay.REFERENCE_MATCH_TOL
        assert decay.pole_amplitude(M4) == decay.pole_amplitude(M4, OVERLAP)

    def test_phase_rotation(self):
        t = np.linspace(0, 37.0, 11)
        term = decay.pole_term(M4, t)
        assert np.allclose(np.abs(term), decay.pole_amplitude(M4))
        assert np.allclose(term / term[0], np.exp(-1j * M4.omega_a * t), atol=1e-14)


class TestDecayIntegral:
    def test_t0_without_bic(self):
        assert decay.decay_integral(FIG4, 0.0) == pytest.approx(1.0, abs=1e-6)

    def test_t0_with_bic(self):
        z = decay.pole_amplitude(FIG5)
        assert decay.decay_integral(FIG5, 0.0) == pytest.approx(1 - z, abs=1e-9)

    def test_t0_discriminates_candidates(self):
        val = decay.decay_integral(M4, 0.0).real
        c = decay.residue_candidates(M4)
        assert abs(val + c[OVERLAP] - 1) < 1e-9
        assert abs(val + c[PAPER] - 1) > 1e-2

    def test_long_time_no_bic(self):
        assert abs(decay.decay_integral(FIG4, 200.0)) < 0.05

    def test_negative_time(self):
        with pytest.raises(GridMismatch):
            decay.decay_integral(FIG4, -1.0)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(2, 16), st.floats(0.05, 0.3), st.data())
    def test_completeness_property(self, n0, ka, data):
        (lo, hi), inside = outside_bound_state_window(ModelParams(1.0, ka, n0, 0.0))
        if not inside and lo >= hi:
            return
        if data.draw(st.booleans()):
            wa = data.draw(st.sampled_from([w for w in bic_frequencies(ModelParams(1.0, ka, n0, 0.0)) if lo < w < hi] or [0.5 * (lo + hi)]))
        else:
            wa = data.draw(st.floats(lo + 1e-3, hi - 1e-3))
        p = ModelParams(1.0, ka, n0, wa)
        total = decay.pole_amplitude(p) + decay.decay_integral(p, 0.0)
        assert abs(total - 1) < 1e-9


class TestNearResonance:
    """Detunings just above the resonance tolerance: an unresolvably narrow spike."""

    @pytest.mark.parametrize("detuning", [1e-4, 1e-6, 1.28e-9, -1e-9, 1e-11])
    @pytest.mark.parametrize("n0", [2, 4, 12])
    def test_completeness(self, n0, detuning):
        p = ModelParams(1.0, 0.25, n0, detuning)
        assert decay.pole_amplitude(p) == 0.0
        assert abs(decay.decay_integral(p, 0.0) - 1) < 1e-9

    def test_matches_plain_quadrature_where_resolvable(self):
        from fanolab.quadrature import integrate

        p = ModelParams(1.0, 0.25, 4, 3e-4)
        assert decay._narrow_poles(p)
        plain = integrate(decay._decay_integrand(p, 37.0), 0, math.pi, breakpoints=decay._breakpoints(p))
        assert abs(decay.decay_integral(p, 37.0) - plain) < 1e-8

    def test_continuous_with_bic_law(self):
        # off by 1e-9 the spike carries the BIC weight; over t = 37 the
        # phase difference is ~4e-8
        near = decay.analytic_ca(ModelParams(1.0, 0.25, 12, 1e-9), 37.0)
        exact = decay.analytic_ca(ModelParams(1.0, 0.25, 12, 0.0), 37.0)
        assert abs(near - exact) < 1e-7


class TestAnalytic:
    def test_initial_condition(self):
        assert decay.analytic_ca(FIG5, 0.0) == pytest.approx(1.0, abs=1e-9)
        assert decay.analytic_ca(FIG4, 0.0) == pytest.approx(1.0, abs=1e-9)

    def test_bounded(self):
        vals = decay.analytic_series(FIG5, np.linspace(0, 60, 121))
        assert np.max(np.abs(vals)) <= 1 + 1e-6

    def test_fig5_tail(self):
        t = np.arange(150.0, 200.01, 0.5)
        a = np.abs(decay.analytic_series(FIG5, t))
        assert np.mean(a) == pytest.approx(0.8065, abs=0.01)
        dev = np.abs(a - 1 / 1.24)
        assert np.max(dev[-20:]) < np.max(dev[:20])

    def test_fig4_decayed(self):
        assert abs(decay.analytic_ca(FIG4, 200.0)) < 0.05

    def test_outside_regime(self):
        with pytest.raises(OutsideBoundStatePresent):
            decay.analytic_ca(ModelParams(1.0, 0.2, 12, 1.9), 1.0)

    def test_off_resonance_slows(self):
        # approaching the m = 6 resonance: no pole, but the decay is slower
        amps = []
        for d in (0.1, 0.05, 0.02):
            p = FIG5.replace(omega_a=d)
            assert decay.pole_amplitude(p) == 0.0
            amps.append(abs(decay.analytic_ca(p, 200.0)))
        assert amps[0] < amps[1] < amps[2]
        assert abs(decay.analytic_ca(FIG5.replace(omega_a=0.1), 600.0)) < amps[0]

    def test_formula_override(self):
        cfg = DecayLawConfig(residue_formula=PAPER)
        a = decay.analytic_ca(M4, 3.0, cfg) - decay.analytic_ca(M4, 3.0)
        c = decay.residue_candidates(M4)
        assert a == pytest.approx((c[PAPER] - c[OVERLAP]) * np.exp(-1j * M4.omega_a * 3.0), abs=1e-12)


class TestCompare:
    def test_identical(self, fig4_trace):
        cmp = decay.compare_traces(fig4_trace, (fig4_trace.times, fig4_trace.ca_series), (0, 200))
        assert cmp.max_error == 0.0 and cmp.rms_error == 0.0
        assert cmp.n_points == fig4_trace.times.size

    def test_grid_mismatch(self, fig4_trace):
        with pytest.raises(GridMismatch):
            decay.compare_traces(fig4_trace, (fig4_trace.times + 0.05, fig4_trace.ca_series), (0, 10))

    @pytest.mark.parametrize("params", [FIG4, FIG5, M4], ids=["fig4", "fig5", "m4"])
    def test_lattice_matches(self, params):
        trace = lattice.integrate(params, lattice.SimConfig(N=400, t_max=50.0, store_sites=False))
        cmp = decay.compare_traces(trace, lambda t: decay.analytic_ca(params, t), (0.0, 50.0))
        assert cmp.max_error < 1e-3
        assert cmp.max_error < 1e-8  # observed ~1e-9; tolerance set by rk_tol

    def test_wrong_residue_is_visible(self):
        trace = lattice.integrate(M4, lattice.SimConfig(N=400, t_max=50.0, store_sites=False))
        cfg = DecayLawConfig(residue_formula=PAPER)
        cmp = decay.compare_traces(trace, lambda t: decay.analytic_ca(M4, t, cfg), (0.0, 50.0))
        assert cmp.max_error > 1e-2
