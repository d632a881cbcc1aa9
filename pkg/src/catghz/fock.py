"""Truncated Fock space and qutrit operator algebra.

The composite Hilbert space is qutrit ⊗ cavity1 ⊗ cavity2 ⊗ cavity3 with the
qutrit levels ordered g=0, e=1, f=2 and each cavity truncated at a maximum
Fock occupation N_max,l.  Basis states are indexed row-major,

    idx = ((q*(N1+1) + n1)*(N2+1) + n2)*(N3+1) + n3,

so the qutrit is the slowest factor.  Operators are built as sparse matrices
(CSR, duplicate-summed, sorted indices) embedded in the full space; states
are plain numpy arrays (vectors or dense density matrices).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

QUTRIT_DIM = 3
LEVELS = {"g": 0, "e": 1, "f": 2}


@dataclass(frozen=True)
class SpaceLayout:
    """Tensor-product structure and flat indexing of the composite space."""

    cavity_truncations: tuple[int, int, int]
    qutrit_dim: int = QUTRIT_DIM

    @property
    def cavity_dims(self) -> tuple[int, int, int]:
        n1, n2, n3 = self.cavity_truncations
        return (n1 + 1, n2 + 1, n3 + 1)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.qutrit_dim,) + self.cavity_dims

    @property
    def total_dim(self) -> int:
        d1, d2, d3 = self.cavity_dims
        return self.qutrit_dim * d1 * d2 * d3

    def flatten(self, q: int, n1: int, n2: int, n3: int) -> int:
        d1, d2, d3 = self.cavity_dims
        if not (0 <= q < self.qutrit_dim):
            raise ValueError(f"qutrit level {q} out of range")
        for n, d, name in ((n1, d1, "n1"), (n2, d2, "n2"), (n3, d3, "n3")):
            if not (0 <= n < d):
                raise ValueError(f"{name}={n} exceeds truncation")
        return ((q * d1 + n1) * d2 + n2) * d3 + n3

    def unflatten(self, idx: int) -> tuple[int, int, int, int]:
        if not (0 <= idx < self.total_dim):
            raise ValueError(f"flat index {idx} out of range")
        d1, d2, d3 = self.cavity_dims
        idx, n3 = divmod(idx, d3)
        idx, n2 = divmod(idx, d2)
        q, n1 = divmod(idx, d1)
        return (q, n1, n2, n3)


def build_layout(truncations) -> SpaceLayout:
    """Build the composite-space layout from the three cavity truncations."""
    truncations = tuple(int(n) for n in truncations)
    if len(truncations) != 3:
        raise ValueError("exactly three cavity truncations required")
    if any(n < 1 for n in truncations):
        raise ValueError(f"truncations must be >= 1, got {truncations}")
    return SpaceLayout(cavity_truncations=truncations)


def _finalize(op) -> sparse.csr_array:
    op = sparse.csr_array(op)
    op.sum_duplicates()
    op.sort_indices()
    return op


def _embed(layout: SpaceLayout, factor_ops: dict[int, np.ndarray]) -> sparse.csr_array:
    """Kronecker-embed single-factor operators; factor 0 is the qutrit."""
    out = None
    for pos, d in enumerate(layout.dims):
        op = factor_ops.get(pos)
        piece = sparse.csr_array(op) if op is not None else sparse.eye_array(d, format="csr")
        out = piece if out is None else sparse.kron(out, piece, format="csr")
    return _finalize(out)


def _check_cavity(cavity: int) -> None:
    if cavity not in (1, 2, 3):
        raise ValueError(f"cavity index must be 1, 2 or 3, got {cavity}")


def _level_index(level) -> int:
    if isinstance(level, str):
        try:
            return LEVELS[level]
        except KeyError:
            raise ValueError(f"unknown qutrit level {level!r}") from None
    level = int(level)
    if not 0 <= level < QUTRIT_DIM:
        raise ValueError(f"qutrit level {level} out of range")
    return level


def annihilation(layout: SpaceLayout, cavity: int) -> sparse.csr_array:
    """Photon annihilation on one cavity: √n |n-1⟩⟨n|, identity elsewhere.

    The top truncated level only lowers; there is no absorbing level.
    """
    _check_cavity(cavity)
    d = layout.cavity_dims[cavity - 1]
    a = np.diag(np.sqrt(np.arange(1.0, d)), k=1).astype(complex)
    return _embed(layout, {cavity: a})


def creation(layout: SpaceLayout, cavity: int) -> sparse.csr_array:
    return _finalize(annihilation(layout, cavity).conj().T)


def number_operator(layout: SpaceLayout, cavity: int) -> sparse.csr_array:
    """Diagonal photon number operator n̂ = a⁺a of one cavity."""
    _check_cavity(cavity)
    d = layout.cavity_dims[cavity - 1]
    return _embed(layout, {cavity: np.diag(np.arange(d, dtype=complex))})


def qutrit_sigma(layout: SpaceLayout, lower, upper) -> sparse.csr_array:
    """Lowering operator |lower⟩⟨upper| on the qutrit, identity on cavities."""
    lo, up = _level_index(lower), _level_index(upper)
    if lo == up:
        raise ValueError("lower and upper levels must differ; use qutrit_projector")
    m = np.zeros((QUTRIT_DIM, QUTRIT_DIM), dtype=complex)
    m[lo, up] = 1.0
    return _embed(layout, {0: m})


def qutrit_projector(layout: SpaceLayout, level) -> sparse.csr_array:
    """Projector |j⟩⟨j| on one qutrit level, identity on cavities."""
    j = _level_index(level)
    m = np.zeros((QUTRIT_DIM, QUTRIT_DIM), dtype=complex)
    m[j, j] = 1.0
    return _embed(layout, {0: m})


def identity(layout: SpaceLayout) -> sparse.csr_array:
    return _finalize(sparse.eye_array(layout.total_dim, format="csr") * (1.0 + 0j))


def basis_state(layout: SpaceLayout, q: int, n1: int, n2: int, n3: int) -> np.ndarray:
    psi = np.zeros(layout.total_dim, dtype=complex)
    psi[layout.flatten(q, n1, n2, n3)] = 1.0
    return psi


def qutrit_populations(layout: SpaceLayout, rho: np.ndarray) -> np.ndarray:
    """Populations (P_g, P_e, P_f) from a density matrix diagonal."""
    diag = np.real(np.diagonal(rho))
    block = layout.total_dim // layout.qutrit_dim
    return np.array([diag[q * block:(q + 1) * block].sum() for q in range(layout.qutrit_dim)])


def cavity_mean_photons(layout: SpaceLayout, rho: np.ndarray) -> np.ndarray:
    """Mean photon number ⟨n̂_l⟩ of each cavity from a density matrix."""
    diag = np.real(np.diagonal(rho))
    occ = diag.reshape(layout.dims)
    out = np.empty(3)
    for cav in range(3):
        n = np.arange(layout.cavity_dims[cav])
        axes = tuple(ax for ax in range(4) if ax != cav + 1)
        out[cav] = float(np.tensordot(occ.sum(axis=axes), n, axes=1))
    return out


def validate_state(psi: np.ndarray, atol: float = 1e-12) -> None:
    """Check unit norm of a state vector."""
    nrm = float(np.linalg.norm(psi))
    if abs(nrm - 1.0) > atol:
        raise ValueError(f"state norm {nrm} deviates from 1 by more than {atol}")


def validate_density(rho: np.ndarray, herm_tol: float = 1e-10,
                     trace_tol: float = 1e-8, eig_floor: float = -1e-8) -> dict:
    """Check Hermiticity, unit trace and approximate positivity of ρ.

    Returns the measured metrics; raises ValueError on violation.
    """
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = float(np.real(np.trace(rho)))
    if herm > herm_tol:
        raise ValueError(f"density matrix not Hermitian: max |rho - rho†| = {herm:.3e}")
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} deviates from 1")
    min_eig = float(np.linalg.eigvalsh(rho).min())
    if min_eig < eig_floor:
        raise ValueError(f"density matrix min eigenvalue {min_eig:.3e} below {eig_floor}")
    return {"hermiticity": herm, "trace": tr, "min_eig": min_eig}
