"""Parameter derivations, Hamiltonian generators, and the analytic gate unitary."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catghz.fock import build_layout, qutrit_projector
from catghz.model import (EffectiveRates, Generator, SystemParams,
                          analytic_unitary, derive_detunings, effective_rates,
                          gate_time, hamiltonian_effective, hamiltonian_full,
                          resolve_couplings, solve_coupling_constraint,
                          validate_params)

TWO_PI = 2.0 * math.pi


def params_with(**kw):
    return dataclasses.replace(SystemParams(), **kw)


class TestValidation:
    def test_defaults_pass(self):
        validate_params(SystemParams())

    @pytest.mark.parametrize("kw, match", [
        (dict(nu_fe=6.6), "anharmonicity"),
        (dict(nu_c=(7.0, 5.8, 5.68)), "two-photon"),
        (dict(nu_c=(6.4, 5.69, 5.68)), "nu_c1 must exceed"),
        (dict(kappa=(-0.1, 0.0, 0.0)), "nonnegative"),
        (dict(gamma_phi_f=-1.0), "nonnegative"),
        (dict(alpha=0.0), "positive"),
        (dict(truncations=(0, 5, 5)), ">= 1"),
        (dict(crosstalk_pairs="12"), "crosstalk_pairs"),
        (dict(g1=-5.0), "g1"),
    ])
    def test_rejects(self, kw, match):
        with pytest.raises(ValueError, match=match):
            validate_params(params_with(**kw))


class TestDetunings:
    def test_default_values(self):
        d = derive_detunings(SystemParams())
        assert d.delta1 == pytest.approx(0.50, abs=1e-12)
        assert d.delta2 == pytest.approx(0.51, abs=1e-12)
        assert d.delta3 == pytest.approx(0.52, abs=1e-12)
        assert d.Delta12 == pytest.approx(0.01, abs=1e-12)
        assert d.Delta13 == pytest.approx(0.02, abs=1e-12)
        assert d.deltat1 == pytest.approx(0.80, abs=1e-12)
        assert d.deltat2 == pytest.approx(0.81, abs=1e-12)
        assert d.deltat3 == pytest.approx(0.82, abs=1e-12)
        assert d.Deltat12 == pytest.approx(1.31, abs=1e-12)
        assert d.Deltat13 == pytest.approx(1.32, abs=1e-12)
        assert d.Deltat23 == pytest.approx(0.01, abs=1e-12)


class TestCouplingDesign:
    def test_solved_couplings_frozen(self):
        g2, g3 = solve_coupling_constraint(SystemParams())
        assert g2 == pytest.approx(50.49504950494771, abs=1e-9)
        assert g3 == pytest.approx(72.09716200333352, abs=1e-9)

    def test_resolve_fills_only_missing(self):
        p = resolve_couplings(SystemParams())
        assert p.g2 is not None and p.g3 is not None
        q = resolve_couplings(params_with(g2=40.0))
        assert q.g2 == 40.0
        assert q.g3 == pytest.approx(72.09716200333352, abs=1e-9)
        r = resolve_couplings(p)
        assert (r.g2, r.g3) == (p.g2, p.g3)

    def test_rates_frozen_values(self, paper_like_params):
        r = effective_rates(paper_like_params)
        assert r.lambda1 == pytest.approx(2.45, abs=1e-12)
        assert r.lambda2 == pytest.approx(4.999510, abs=1e-5)
        assert r.lambda3 == pytest.approx(9.996152, abs=1e-5)
        assert r.lambda12 == pytest.approx(3.5, abs=1e-9)
        assert r.lambda13 == pytest.approx(math.sqrt(24.5), abs=1e-9)
        assert r.lambda23 == pytest.approx(7.069695055543546, abs=1e-9)
        assert r.chi12 == pytest.approx(1.225, abs=1e-12)
        assert r.chi13 == pytest.approx(1.225, abs=1e-12)

    @given(delta1=st.floats(0.3, 0.8), D12=st.floats(0.005, 0.05),
           extra=st.floats(0.005, 0.05))
    def test_design_meets_phase_matching(self, delta1, D12, extra):
        """Solved couplings give χ_1l = λ₁/2 for any consistent detuning set."""
        D13 = D12 + extra
        p = params_with(nu_c=(6.5 + delta1,
                              6.2 - delta1 - D12,
                              6.2 - delta1 - D13))
        r = effective_rates(resolve_couplings(p))
        assert 2.0 * r.chi12 / r.lambda1 == pytest.approx(1.0, abs=1e-9)
        assert 2.0 * r.chi13 / r.lambda1 == pytest.approx(1.0, abs=1e-9)

    def test_gate_time_value(self, paper_like_params):
        t = gate_time(effective_rates(paper_like_params))
        assert t == pytest.approx(0.4081632653061224, abs=1e-12)
        assert abs(t - 0.41) / 0.41 < 0.01

    def test_gate_time_guards(self):
        with pytest.raises(ValueError):
            gate_time(EffectiveRates(0.0, 1, 1, 1, 1, 1, 1, 1))
        with pytest.warns(UserWarning, match="consistency"):
            gate_time(EffectiveRates(2.45, 1, 1, 1, 1, 1, 1.0, 1.225))


class TestGeneratorAlgebra:
    def test_value_is_hermitian(self, paper_like_params):
        layout = build_layout((3, 3, 3))
        gen = hamiltonian_full(paper_like_params, layout)
        for t in (0.0, 0.0137, 0.2):
            h = gen.value(t).toarray()
            assert np.abs(h - h.conj().T).max() < 1e-12

    def test_term_count_and_frequencies(self, paper_like_params):
        layout = build_layout((2, 2, 2))
        ideal = hamiltonian_full(paper_like_params, layout, include_errors=False)
        assert len(ideal.terms) == 3
        assert ideal.max_abs_omega == pytest.approx(0.52 * TWO_PI * 1e3)
        full = hamiltonian_full(paper_like_params, layout, include_errors=True)
        assert len(full.terms) == 9
        assert full.max_abs_omega == pytest.approx(1.32 * TWO_PI * 1e3)

    def test_wanted_matrix_element(self, paper_like_params):
        layout = build_layout((2, 2, 2))
        h0 = hamiltonian_full(paper_like_params, layout,
                              include_errors=False).value(0.0).toarray()

        def idx(q, n):
            return layout.flatten({"g": 0, "e": 1, "f": 2}[q], *n)

        # photon emission on cavity 1 accompanies e→g
        elem = h0[idx("g", (1, 0, 0)), idx("e", (0, 0, 0))]
        assert elem == pytest.approx(35.0 * TWO_PI, abs=1e-9)
        # no co-rotating double excitation
        assert h0[idx("e", (1, 0, 0)), idx("g", (0, 0, 0))] == 0.0
        # cavity 2 line couples e↔f
        assert h0[idx("e", (0, 1, 0)), idx("f", (0, 0, 0))] == pytest.approx(
            50.49504950494771 * TWO_PI, abs=1e-6)

    def test_crosstalk_pair_selection(self, paper_like_params):
        layout = build_layout((2, 2, 2))
        all_pairs = hamiltonian_full(paper_like_params, layout)
        only23 = hamiltonian_full(
            dataclasses.replace(paper_like_params, crosstalk_pairs="23"), layout)
        assert len(all_pairs.terms) - len(only23.terms) == 2
        assert only23.max_abs_omega == pytest.approx(0.82 * TWO_PI * 1e3)
        no_xt = hamiltonian_full(
            dataclasses.replace(paper_like_params, crosstalk_ratio=0.0), layout)
        assert len(no_xt.terms) == 6

    def test_effective_levels_reject_unknown(self, paper_like_params):
        layout = build_layout((2, 2, 2))
        with pytest.raises(ValueError, match="level"):
            hamiltonian_effective(paper_like_params, layout, level="bogus")

    def test_diagonal_level_is_static_and_diagonal(self, paper_like_params):
        layout = build_layout((3, 3, 3))
        gen = hamiltonian_effective(paper_like_params, layout, level="diagonal")
        assert gen.max_abs_omega == 0.0
        h = gen.value(0.42).toarray()
        assert np.abs(h - np.diag(np.diag(h))).max() == 0.0
        # e and f manifolds are untouched
        assert np.abs(np.diag(h)[layout.total_dim // 3:]).max() == 0.0

    def test_kerr_matches_diagonal_on_ground_manifold(self, paper_like_params):
        layout = build_layout((3, 3, 3))
        pg = qutrit_projector(layout, "g").toarray()
        hk = hamiltonian_effective(paper_like_params, layout, level="kerr").value(0.31)
        hd = hamiltonian_effective(paper_like_params, layout, level="diagonal").value(0.31)
        diff = pg @ (hk.toarray() - hd.toarray()) @ pg
        assert np.abs(diff).max() < 1e-10

    def test_stark_two_photon_element(self, paper_like_params):
        layout = build_layout((2, 2, 2))
        gen = hamiltonian_effective(paper_like_params, layout, level="stark")
        h0 = gen.value(0.0).toarray()
        i_g110 = layout.flatten(0, 1, 1, 0)
        i_f000 = layout.flatten(2, 0, 0, 0)
        assert h0[i_g110, i_f000] == pytest.approx(3.5 * TWO_PI, abs=1e-9)


class TestAnalyticUnitary:
    def test_unitary_and_diagonal(self, paper_like_params, layout5):
        rates = effective_rates(paper_like_params)
        u = analytic_unitary(rates, layout5, 0.2)
        dense = u.toarray()
        assert np.abs(dense - np.diag(np.diag(dense))).max() == 0.0
        assert np.abs(dense @ dense.conj().T - np.eye(layout5.total_dim)).max() < 1e-12

    def test_phases(self, paper_like_params, layout5):
        rates = effective_rates(paper_like_params)
        t = gate_time(rates)
        u = analytic_unitary(rates, layout5, t).toarray()
        diag = np.diag(u)

        def phase(q, n):
            return diag[layout5.flatten(q, *n)]

        # e/f manifolds pick up no phase at all
        assert phase(1, (3, 2, 1)) == 1.0
        assert phase(2, (0, 4, 4)) == 1.0
        # full period: e^{-iλ₁t} = 1 at t = 1/λ₁ (in ν units)
        assert phase(0, (1, 0, 0)) == pytest.approx(1.0, abs=1e-9)
        # conditional π phase per control-target photon pair at the gate time
        p11 = phase(0, (1, 1, 0)) / (phase(0, (1, 0, 0)) * phase(0, (0, 1, 0)))
        assert p11 == pytest.approx(-1.0, abs=1e-9)
        p13 = phase(0, (1, 0, 3)) / (phase(0, (1, 0, 0)) * phase(0, (0, 0, 3)))
        assert p13 == pytest.approx(-1.0, abs=1e-9)

    def test_matches_diagonal_generator(self, paper_like_params):
        layout = build_layout((3, 3, 3))
        rates = effective_rates(paper_like_params)
        h = hamiltonian_effective(paper_like_params, layout,
                                  level="diagonal").value(0.0).toarray()
        t = 0.173
        expected = np.diag(np.exp(-1j * np.diag(h) * t))
        assert np.abs(analytic_unitary(rates, layout, t).toarray() - expected).max() < 1e-10
