"""Cat-code logical states, initial product state, GHZ target and code rotations.

A cavity cat qubit encodes logical |0⟩ and |1⟩ in the even and odd cat states

    |0_L⟩ = N_+ (|α⟩ + |−α⟩),   |1_L⟩ = N_− (|α⟩ − |−α⟩),

which have disjoint photon-parity support and are orthogonal for any α > 0.
Fock coefficients follow the coherent-state expansion,

    C_{2m}   = 2 N_+ e^{−α²/2} α^{2m}   / √((2m)!)
    C_{2n+1} = 2 N_− e^{−α²/2} α^{2n+1} / √((2n+1)!)

with normalizations N_± = 1/√(2(1 ± e^{−2α²})).  The rotation maps used
before/after the entangling gate are ideal instantaneous unitaries; decoherence
during them is neglected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .fock import SpaceLayout, _embed, _finalize

_HAD2 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def cat_normalization(alpha: float, sign) -> float:
    """Normalization N_± = 1/√(2(1 ± e^{−2α²})) of the cat states.

    `sign` is '+'/'-' or ±1.  alpha must be positive: at α = 0 the odd cat
    vanishes and the logical states cease to be orthogonal.
    """
    s = {"+": 1, "-": -1, 1: 1, -1: -1}.get(sign)
    if s is None:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    if alpha <= 0:
        raise ValueError(f"cat amplitude must be positive, got {alpha}")
    return 1.0 / math.sqrt(2.0 * (1.0 + s * math.exp(-2.0 * alpha * alpha)))


@dataclass(frozen=True)
class CatCode:
    """Single-cavity cat code at amplitude alpha, truncated at Fock level n_max."""

    alpha: float
    n_max: int
    norm_plus: float = field(init=False)
    norm_minus: float = field(init=False)
    logical0: np.ndarray = field(init=False, repr=False)
    logical1: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        npl = cat_normalization(self.alpha, "+")
        nmi = cat_normalization(self.alpha, "-")
        n = np.arange(self.n_max + 1)
        # e^{−α²/2} α^n / √(n!) evaluated stably in log space
        log_amp = (-0.5 * self.alpha ** 2 + n * math.log(self.alpha)
                   - 0.5 * np.array([math.lgamma(k + 1) for k in n]))
        amp = np.exp(log_amp)
        c0 = np.where(n % 2 == 0, 2.0 * npl * amp, 0.0)
        c1 = np.where(n % 2 == 1, 2.0 * nmi * amp, 0.0)
        object.__setattr__(self, "norm_plus", npl)
        object.__setattr__(self, "norm_minus", nmi)
        object.__setattr__(self, "logical0", c0)
        object.__setattr__(self, "logical1", c1)


def build_code(alpha: float, n_max: int = 10) -> CatCode:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return CatCode(alpha=alpha, n_max=n_max)


def logical_state(code: CatCode, bit: int) -> np.ndarray:
    """Fock coefficient vector of logical |0_L⟩ (even) or |1_L⟩ (odd)."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit}")
    return (code.logical0 if bit == 0 else code.logical1).copy()


def _fit_to_dim(vec: np.ndarray, dim: int, tail_tol: float = 1e-6) -> np.ndarray:
    """Project a coefficient vector onto `dim` Fock levels, renormalized.

    Raises if the discarded tail mass exceeds `tail_tol`: the truncation would
    visibly distort the state.
    """
    if len(vec) <= dim:
        out = np.zeros(dim, dtype=complex)
        out[:len(vec)] = vec
    else:
        tail = float(np.sum(np.abs(vec[dim:]) ** 2))
        if tail > tail_tol:
            raise ValueError(
                f"cavity truncation {dim - 1} too small: dropped tail mass {tail:.3e}")
        out = vec[:dim].astype(complex)
    return out / np.linalg.norm(out)


def _logical_pair(code: CatCode, dim: int) -> tuple[np.ndarray, np.ndarray]:
    return _fit_to_dim(code.logical0, dim), _fit_to_dim(code.logical1, dim)


def prepare_initial(code: CatCode, layout: SpaceLayout) -> np.ndarray:
    """Initial state: qutrit in |g⟩, each cavity in (|0_L⟩ + |1_L⟩)/√2."""
    qutrit = np.zeros(layout.qutrit_dim, dtype=complex)
    qutrit[0] = 1.0
    psi = qutrit
    for d in layout.cavity_dims:
        c0, c1 = _logical_pair(code, d)
        psi = np.kron(psi, (c0 + c1) / math.sqrt(2.0))
    return psi


def code_hadamard(layout: SpaceLayout, code: CatCode, cavity: int) -> sparse.csr_array:
    """Hadamard-like rotation on one cavity's code subspace.

    Maps (|0_L⟩+|1_L⟩)/√2 → |0_L⟩ and (|0_L⟩−|1_L⟩)/√2 → |1_L⟩, acting as the
    identity on the orthogonal complement of span{|0_L⟩, |1_L⟩}, so any leakage
    population is left untouched.  Exactly unitary and self-inverse.
    """
    if cavity not in (1, 2, 3):
        raise ValueError(f"cavity index must be 1, 2 or 3, got {cavity}")
    d = layout.cavity_dims[cavity - 1]
    c0, c1 = _logical_pair(code, d)
    basis = np.column_stack([c0, c1])  # d x 2, orthonormal columns
    u = np.eye(d, dtype=complex) + basis @ (_HAD2 - np.eye(2)) @ basis.conj().T
    return _embed(layout, {cavity: u})


def ghz_target(code: CatCode, layout: SpaceLayout) -> np.ndarray:
    """Ideal output (|0_L 0_L 0_L⟩ + |1_L 1_L 1_L⟩)/√2 with the qutrit in |g⟩."""
    qutrit = np.zeros(layout.qutrit_dim, dtype=complex)
    qutrit[0] = 1.0
    pairs = [_logical_pair(code, d) for d in layout.cavity_dims]
    branch0 = qutrit
    branch1 = qutrit
    for c0, c1 in pairs:
        branch0 = np.kron(branch0, c0)
        branch1 = np.kron(branch1, c1)
    return (branch0 + branch1) / math.sqrt(2.0)


def pre_rotation_target(code: CatCode, layout: SpaceLayout) -> np.ndarray:
    """State after the entangling gate, before the final cavity rotations:

    (1/2√2) [ |0₁⟩(|0₂⟩+|1₂⟩)(|0₃⟩+|1₃⟩) + |1₁⟩(|0₂⟩−|1₂⟩)(|0₃⟩−|1₃⟩) ] ⊗ |g⟩
    """
    qutrit = np.zeros(layout.qutrit_dim, dtype=complex)
    qutrit[0] = 1.0
    d1, d2, d3 = layout.cavity_dims
    c0 = {d: _logical_pair(code, d)[0] for d in {d1, d2, d3}}
    c1 = {d: _logical_pair(code, d)[1] for d in {d1, d2, d3}}
    plus2, minus2 = c0[d2] + c1[d2], c0[d2] - c1[d2]
    plus3, minus3 = c0[d3] + c1[d3], c0[d3] - c1[d3]
    branch0 = np.kron(np.kron(c0[d1], plus2), plus3)
    branch1 = np.kron(np.kron(c1[d1], minus2), minus3)
    psi = np.kron(qutrit, branch0 + branch1) / (2.0 * math.sqrt(2.0))
    return psi
