"""Composite-space layout, operator embedding, and state validation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catghz.fock import (annihilation, basis_state, build_layout,
                         cavity_mean_photons, creation, identity,
                         number_operator, qutrit_populations, qutrit_projector,
                         qutrit_sigma, validate_density, validate_state)

from conftest import random_density


def test_layout_dimensions(layout5):
    assert layout5.cavity_dims == (6, 6, 6)
    assert layout5.dims == (3, 6, 6, 6)
    assert layout5.total_dim == 648


def test_flatten_is_row_major(layout5):
    # qutrit slowest, cavity 3 fastest
    assert layout5.flatten(0, 0, 0, 0) == 0
    assert layout5.flatten(0, 0, 0, 1) == 1
    assert layout5.flatten(0, 0, 1, 0) == 6
    assert layout5.flatten(0, 1, 0, 0) == 36
    assert layout5.flatten(1, 0, 0, 0) == 216
    assert layout5.flatten(2, 5, 5, 5) == 647


@given(q=st.integers(0, 2), n1=st.integers(0, 5), n2=st.integers(0, 5),
       n3=st.integers(0, 5))
def test_index_round_trip(q, n1, n2, n3):
    layout = build_layout((5, 5, 5))
    assert layout.unflatten(layout.flatten(q, n1, n2, n3)) == (q, n1, n2, n3)


def test_unflatten_covers_every_index(layout5):
    seen = {layout5.unflatten(i) for i in range(layout5.total_dim)}
    assert len(seen) == layout5.total_dim


def test_flatten_rejects_out_of_range(layout5):
    with pytest.raises(ValueError):
        layout5.flatten(3, 0, 0, 0)
    with pytest.raises(ValueError):
        layout5.flatten(0, 6, 0, 0)
    with pytest.raises(ValueError):
        layout5.unflatten(648)


def test_build_layout_validation():
    with pytest.raises(ValueError):
        build_layout((5, 5))
    with pytest.raises(ValueError):
        build_layout((0, 5, 5))


def test_annihilation_matrix_elements(layout5):
    a2 = annihilation(layout5, 2)
    for n in range(1, 6):
        src = basis_state(layout5, 0, 0, n, 0)
        dst = basis_state(layout5, 0, 0, n - 1, 0)
        amp = complex(np.vdot(dst, a2 @ src))
        assert amp == pytest.approx(np.sqrt(n), abs=1e-14)
    # vacuum is annihilated
    assert np.linalg.norm(a2 @ basis_state(layout5, 0, 0, 0, 0)) == 0.0


def test_creation_is_adjoint_of_annihilation(layout5):
    for cav in (1, 2, 3):
        diff = (creation(layout5, cav) - annihilation(layout5, cav).conj().T)
        assert abs(diff).max() == 0.0


def test_number_operator_diagonal(layout5):
    n3 = number_operator(layout5, 3)
    diag = n3.diagonal()
    expected = np.array([layout5.unflatten(i)[3] for i in range(648)])
    np.testing.assert_allclose(diag, expected, atol=0)
    # n = a†a
    a3 = annihilation(layout5, 3)
    assert abs((a3.conj().T @ a3) - n3).max() < 1e-14


def test_top_level_truncation_has_no_absorber(layout5):
    # raising the top Fock level annihilates instead of wrapping
    adag = creation(layout5, 1)
    top = basis_state(layout5, 0, 5, 0, 0)
    assert np.linalg.norm(adag @ top) == 0.0


def test_operators_on_distinct_factors_commute(layout5):
    pairs = [
        (annihilation(layout5, 1), annihilation(layout5, 2)),
        (annihilation(layout5, 2), number_operator(layout5, 3)),
        (qutrit_sigma(layout5, "g", "e"), annihilation(layout5, 3)),
        (qutrit_projector(layout5, "f"), creation(layout5, 1)),
    ]
    for a, b in pairs:
        comm = a @ b - b @ a
        assert comm.nnz == 0 or abs(comm).max() == 0.0


def test_qutrit_sigma_structure(layout5):
    s_eg = qutrit_sigma(layout5, "g", "e")
    src = basis_state(layout5, 1, 2, 1, 0)
    dst = basis_state(layout5, 0, 2, 1, 0)
    np.testing.assert_allclose((s_eg @ src), dst, atol=0)
    # annihilates the lower level and the bystander level
    assert np.linalg.norm(s_eg @ basis_state(layout5, 0, 0, 0, 0)) == 0.0
    assert np.linalg.norm(s_eg @ basis_state(layout5, 2, 0, 0, 0)) == 0.0


def test_qutrit_sigma_level_validation(layout5):
    with pytest.raises(ValueError):
        qutrit_sigma(layout5, "g", "g")
    with pytest.raises(ValueError):
        qutrit_sigma(layout5, "x", "e")


def test_qutrit_projector_idempotent(layout5):
    for level in ("g", "e", "f"):
        p = qutrit_projector(layout5, level)
        assert abs((p @ p) - p).max() < 1e-15
    total = sum(qutrit_projector(layout5, lv).toarray() for lv in ("g", "e", "f"))
    np.testing.assert_allclose(total, np.eye(648), atol=0)


def test_identity(layout5):
    ident = identity(layout5)
    assert ident.shape == (648, 648)
    assert abs(ident - np.eye(648)).max() == 0.0


def test_qutrit_populations_and_photons(layout5):
    psi_a = basis_state(layout5, 1, 2, 0, 1)
    psi_b = basis_state(layout5, 0, 0, 3, 0)
    rho = 0.25 * np.outer(psi_a, psi_a.conj()) + 0.75 * np.outer(psi_b, psi_b.conj())
    np.testing.assert_allclose(qutrit_populations(layout5, rho),
                               [0.75, 0.25, 0.0], atol=1e-15)
    np.testing.assert_allclose(cavity_mean_photons(layout5, rho),
                               [0.5, 2.25, 0.25], atol=1e-12)


def test_validate_state():
    validate_state(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        validate_state(np.array([1.0, 1.0]))


def test_validate_density_accepts_physical(rng):
    rho = random_density(rng, 12)
    metrics = validate_density(rho)
    assert metrics["trace"] == pytest.approx(1.0, abs=1e-12)
    assert metrics["min_eig"] >= 0.0


def test_validate_density_rejects_defects(rng):
    rho = random_density(rng, 6)
    bad = rho.copy()
    bad[0, 1] += 1e-3
    with pytest.raises(ValueError, match="Hermitian"):
        validate_density(bad)
    with pytest.raises(ValueError, match="trace"):
        validate_density(rho * 1.5)
    flipped = rho - 0.6 * np.eye(6) / 6.0
    flipped /= np.real(np.trace(flipped))
    with pytest.raises(ValueError, match="eigenvalue"):
        validate_density(flipped)
