"""Cat-code states, normalizations, targets, and the code-subspace rotation."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catghz.catcode import (build_code, cat_normalization, code_hadamard,
                            ghz_target, logical_state, pre_rotation_target,
                            prepare_initial)
from catghz.fock import basis_state, build_layout, qutrit_populations

ALPHAS = st.floats(0.2, 2.5)


def coherent_coeffs(alpha, dim):
    n = np.arange(dim)
    log_amp = -0.5 * alpha ** 2 + n * np.log(alpha) - 0.5 * np.array(
        [math.lgamma(k + 1) for k in n])
    return np.exp(log_amp)


def test_cat_normalization_closed_form():
    assert cat_normalization(0.5, "+") == pytest.approx(
        1.0 / math.sqrt(2.0 * (1.0 + math.exp(-0.5))), rel=1e-15)
    assert cat_normalization(0.5, "-") == pytest.approx(
        1.0 / math.sqrt(2.0 * (1.0 - math.exp(-0.5))), rel=1e-15)
    # frozen reference values
    assert cat_normalization(0.5, "+") == pytest.approx(0.5578796, abs=5e-8)
    assert cat_normalization(0.5, "-") == pytest.approx(1.1272742, abs=5e-8)
    # integer sign spellings
    assert cat_normalization(0.5, 1) == cat_normalization(0.5, "+")
    assert cat_normalization(0.5, -1) == cat_normalization(0.5, "-")


def test_cat_normalization_validation():
    with pytest.raises(ValueError):
        cat_normalization(0.0, "+")
    with pytest.raises(ValueError):
        cat_normalization(-1.0, "+")
    with pytest.raises(ValueError):
        cat_normalization(0.5, "x")


@given(alpha=ALPHAS, sign=st.sampled_from(["+", "-"]))
def test_cat_normalization_normalizes_superposition(alpha, sign):
    """N(|α⟩ ± |−α⟩) has unit norm, checked in a 40-level basis."""
    c = coherent_coeffs(alpha, 40)
    s = 1.0 if sign == "+" else -1.0
    signs = np.where(np.arange(40) % 2 == 0, 1.0, -1.0)  # ⟨n|−α⟩ = (−1)^n ⟨n|α⟩
    vec = c + s * signs * c
    assert cat_normalization(alpha, sign) * np.linalg.norm(vec) == pytest.approx(
        1.0, abs=1e-10)


def test_asymptotic_normalization():
    assert cat_normalization(6.0, "+") == pytest.approx(1 / math.sqrt(2), rel=1e-12)
    assert cat_normalization(6.0, "-") == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_logical_coefficients_frozen_values(code):
    c0 = logical_state(code, 0)
    assert c0[0] == pytest.approx(0.984653, abs=2e-6)
    assert c0[2] == pytest.approx(0.174064, abs=2e-6)
    assert c0[4] == pytest.approx(0.012562, abs=2e-6)
    c1 = logical_state(code, 1)
    assert np.all(c1[::2] == 0.0)
    with pytest.raises(ValueError):
        logical_state(code, 2)


@given(alpha=ALPHAS)
def test_parity_disjointness(alpha):
    code = build_code(alpha)
    assert np.all(logical_state(code, 0)[1::2] == 0.0)
    assert np.all(logical_state(code, 1)[::2] == 0.0)
    assert np.vdot(logical_state(code, 0), logical_state(code, 1)) == 0.0


@given(alpha=st.floats(0.2, 1.2))
def test_logical_states_unit_norm(alpha):
    code = build_code(alpha, n_max=14)
    assert np.linalg.norm(logical_state(code, 0)) == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.norm(logical_state(code, 1)) == pytest.approx(1.0, abs=1e-10)


def test_build_code_validation():
    with pytest.raises(ValueError):
        build_code(0.5, n_max=0)
    with pytest.raises(ValueError):
        build_code(0.0)


def test_prepare_initial_structure(code, layout5):
    psi = prepare_initial(code, layout5)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)
    rho = np.outer(psi, psi.conj())
    np.testing.assert_allclose(qutrit_populations(layout5, rho), [1, 0, 0],
                               atol=1e-12)
    # each cavity carries equal even and odd parity weight
    occ = np.abs(psi.reshape(layout5.dims)) ** 2
    for axis in (1, 2, 3):
        other = tuple(ax for ax in range(4) if ax != axis)
        per_level = occ.sum(axis=other)
        assert per_level[::2].sum() == pytest.approx(0.5, abs=1e-10)


def test_prepare_initial_rejects_tiny_truncation(code):
    layout = build_layout((1, 1, 1))
    with pytest.raises(ValueError, match="truncation"):
        prepare_initial(code, layout)


def test_code_hadamard_is_unitary_involution(code, layout5):
    u = code_hadamard(layout5, code, 2)
    ident = np.eye(layout5.total_dim)
    assert np.abs((u @ u.conj().T).toarray() - ident).max() < 1e-10
    assert np.abs((u @ u).toarray() - ident).max() < 1e-10


def test_code_hadamard_maps_plus_minus_to_logicals(code, layout5):
    u = code_hadamard(layout5, code, 3).toarray()
    d = layout5.cavity_dims[2]
    qutrit = np.zeros(3)
    qutrit[0] = 1.0

    def embed3(vec):
        full = np.kron(np.kron(np.kron(qutrit, basis_like(layout5, 1)),
                               basis_like(layout5, 2)), vec)
        return full

    def basis_like(layout, cav):
        v = np.zeros(layout.cavity_dims[cav - 1])
        v[0] = 1.0
        return v

    c0 = truncated_logical(code, d, 0)
    c1 = truncated_logical(code, d, 1)
    plus = (c0 + c1) / math.sqrt(2.0)
    minus = (c0 - c1) / math.sqrt(2.0)
    assert np.abs(u @ embed3(plus) - embed3(c0)).max() < 1e-10
    assert np.abs(u @ embed3(minus) - embed3(c1)).max() < 1e-10


def truncated_logical(code, dim, bit):
    vec = logical_state(code, bit)[:dim]
    return vec / np.linalg.norm(vec)


def test_code_hadamard_identity_off_code_subspace(code, layout5):
    u = code_hadamard(layout5, code, 2)
    d = layout5.cavity_dims[1]
    c0 = truncated_logical(code, d, 0)
    c1 = truncated_logical(code, d, 1)
    # a cavity-2 vector orthogonal to both logicals is left untouched
    v = np.zeros(d)
    v[4] = 1.0
    v -= np.vdot(c0, v) * c0 + np.vdot(c1, v) * c1
    v /= np.linalg.norm(v)
    full = np.kron(np.kron(np.array([1.0, 0, 0]), np.eye(d)[0]), np.kron(v, np.eye(d)[0]))
    assert np.abs(u @ full - full).max() < 1e-10


def test_code_hadamard_cavity_validation(code, layout5):
    with pytest.raises(ValueError):
        code_hadamard(layout5, code, 4)


def test_ghz_target_overlaps(code, layout5):
    ghz = ghz_target(code, layout5)
    assert np.linalg.norm(ghz) == pytest.approx(1.0, abs=1e-10)
    d = layout5.cavity_dims[0]
    c0 = truncated_logical(code, d, 0)
    c1 = truncated_logical(code, d, 1)
    qutrit = np.array([1.0, 0, 0])
    s001 = np.kron(qutrit, np.kron(np.kron(c0, c0), c1))
    assert abs(np.vdot(s001, ghz)) < 1e-12
    s000 = np.kron(qutrit, np.kron(np.kron(c0, c0), c0))
    assert abs(np.vdot(s000, ghz)) == pytest.approx(1 / math.sqrt(2), abs=1e-10)
    # equal parity weight on cavity 1
    occ = np.abs(ghz.reshape(layout5.dims)) ** 2
    per_level = occ.sum(axis=(0, 2, 3))
    assert per_level[::2].sum() == pytest.approx(0.5, abs=1e-10)


def test_rotations_turn_pre_rotation_state_into_ghz(code, layout5):
    pre = pre_rotation_target(code, layout5)
    assert np.linalg.norm(pre) == pytest.approx(1.0, abs=1e-10)
    u = code_hadamard(layout5, code, 2) @ code_hadamard(layout5, code, 3)
    overlap = np.vdot(ghz_target(code, layout5), u @ pre)
    assert abs(overlap) == pytest.approx(1.0, abs=1e-10)
