"""Physical model: parameters, detunings, effective rates and Hamiltonians.

Conventions
-----------
Configuration values carry ν = ω/2π (GHz for frequencies, MHz for couplings),
matching how such parameters are usually reported; decay and dephasing rates
are plain 1/μs.  Everything is converted to angular units (rad/μs) when
operators are assembled, and times are in μs throughout.

The interaction-picture Hamiltonian of the driven qutrit + three-cavity system
is

    H_I = g₁ (e^{+i|δ₁|t} a₁†σ_eg⁻ + h.c.) + Σ_{l=2,3} g_l (e^{−i|δ_l|t} a_l†σ_fe⁻ + h.c.)

with |δ₁| = ω_c1 − ω_eg, |δ_l| = ω_fe − ω_cl.  The error Hamiltonian adds the
unwanted qutrit couplings (strengths g̃) and direct inter-cavity crosstalk
g_kl (e^{−iΔ̃_kl t} a_k a_l† + h.c.) with Δ̃_kl = ω_ck − ω_cl.

Adiabatic elimination of the qutrit in the dispersive regime produces, in
increasing order of simplification,

    stark    : Stark shifts, cavity-cavity λ₂₃ exchange, and the
               a₁†a_l†σ_fg⁻ two-photon terms (rates λ_1l),
    kerr     : Stark shifts plus cross-Kerr terms χ_1l = λ_1l²/Δ_1l,
    diagonal : λ₁ n̂₁ |g⟩⟨g| − Σ_l χ_1l n̂₁ n̂_l |g⟩⟨g|,

and the coupling constraint g_l = (|δ_l|/(|δ₁|+|δ_l|))·√(2 Δ_1l |δ₁|) makes
χ_1l = λ₁/2 exactly, so a single evolution time t = 2π/λ₁ = π/χ_1l realizes
the entangling gate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import sparse

from .fock import (SpaceLayout, annihilation, number_operator, qutrit_projector,
                   qutrit_sigma, _finalize)

TWO_PI = 2.0 * math.pi
GHZ_TO_RAD = TWO_PI * 1.0e3   # GHz -> rad/μs
MHZ_TO_RAD = TWO_PI           # MHz -> rad/μs


@dataclass(frozen=True)
class SystemParams:
    """All physical inputs. Frequencies are ν = ω/2π in GHz, couplings in MHz,
    decoherence rates in 1/μs. g2/g3 left as None are filled from the coupling
    constraint by resolve_couplings (design mode)."""

    nu_c: tuple[float, float, float] = (7.0, 5.69, 5.68)
    nu_eg: float = 6.5
    nu_fe: float = 6.2
    g1: float = 35.0
    g2: float | None = None
    g3: float | None = None
    gt1: float = 49.5
    gt2: float = 35.7
    gt3: float = 41.6
    crosstalk_ratio: float = 0.01
    crosstalk_pairs: str = "all"          # "all" or "23"
    kappa: tuple[float, float, float] = (1.0 / 300, 1.0 / 300, 1.0 / 300)
    gamma_eg: float = 1.0 / 60
    gamma_fe: float = 1.0 / 30
    gamma_fg: float = 1.0 / 150
    gamma_phi_e: float = 1.0 / 20
    gamma_phi_f: float = 1.0 / 20
    alpha: float = 0.5
    truncations: tuple[int, int, int] = (5, 5, 5)

    @property
    def nu_fg(self) -> float:
        return self.nu_eg + self.nu_fe


@dataclass(frozen=True)
class Detunings:
    """All detunings in GHz (ν convention)."""

    delta1: float
    delta2: float
    delta3: float
    Delta12: float
    Delta13: float
    deltat1: float
    deltat2: float
    deltat3: float
    Deltat12: float
    Deltat13: float
    Deltat23: float


@dataclass(frozen=True)
class EffectiveRates:
    """Dispersive rates in MHz (ν convention)."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda12: float
    lambda13: float
    lambda23: float
    chi12: float
    chi13: float


@dataclass(frozen=True)
class Generator:
    """Time-dependent Hamiltonian H(t) = Σ_k (A_k e^{iω_k t} + A_k† e^{−iω_k t}).

    Each term is a one-sided sparse operator A_k (angular units, rad/μs) with
    its phase frequency ω_k in rad/μs; a static Hermitian part H₀ is stored as
    the term (H₀/2, 0).  Immutable; evaluation is pure.
    """

    dim: int
    terms: tuple[tuple[sparse.csr_array, float], ...]

    def value(self, t: float) -> sparse.csr_array:
        h = sparse.csr_array((self.dim, self.dim), dtype=complex)
        for op, omega in self.terms:
            phase = np.exp(1j * omega * t)
            h = h + op * phase + op.conj().T * np.conj(phase)
        return _finalize(h)

    @property
    def max_abs_omega(self) -> float:
        return max((abs(w) for _, w in self.terms), default=0.0)


def validate_params(params: SystemParams) -> None:
    """Check the physics constraints; raises ValueError naming the violated relation."""
    if params.nu_fe >= params.nu_eg:
        raise ValueError(
            f"anharmonicity violation: nu_fe = {params.nu_fe} GHz must be below "
            f"nu_eg = {params.nu_eg} GHz")
    for l, nu in ((2, params.nu_c[1]), (3, params.nu_c[2])):
        d = params.nu_fg - params.nu_c[0] - nu
        if d <= 0:
            raise ValueError(
                f"two-photon detuning violation: Delta_1{l} = nu_fg - nu_c1 - nu_c{l} "
                f"= {d:.6g} GHz must be positive")
    if params.nu_c[0] <= params.nu_eg:
        raise ValueError("detuning sign violation: nu_c1 must exceed nu_eg")
    if not (params.nu_fe > max(params.nu_c[1], params.nu_c[2])):
        raise ValueError("detuning sign violation: nu_fe must exceed nu_c2 and nu_c3")
    rates = (*params.kappa, params.gamma_eg, params.gamma_fe, params.gamma_fg,
             params.gamma_phi_e, params.gamma_phi_f)
    if any(r < 0 for r in rates):
        raise ValueError("decoherence rates must be nonnegative")
    if params.alpha <= 0:
        raise ValueError(f"cat amplitude must be positive, got {params.alpha}")
    if any(n < 1 for n in params.truncations):
        raise ValueError(f"truncations must be >= 1, got {params.truncations}")
    if params.crosstalk_pairs not in ("all", "23"):
        raise ValueError(f"crosstalk_pairs must be 'all' or '23', got {params.crosstalk_pairs!r}")
    for name in ("g1", "gt1", "gt2", "gt3", "crosstalk_ratio"):
        if getattr(params, name) < 0:
            raise ValueError(f"{name} must be nonnegative")


def derive_detunings(params: SystemParams) -> Detunings:
    """All single- and two-photon detunings (GHz) from the bare frequencies."""
    validate_params(params)
    nu_c1, nu_c2, nu_c3 = params.nu_c
    d = Detunings(
        delta1=nu_c1 - params.nu_eg,
        delta2=params.nu_fe - nu_c2,
        delta3=params.nu_fe - nu_c3,
        Delta12=params.nu_fg - nu_c1 - nu_c2,
        Delta13=params.nu_fg - nu_c1 - nu_c3,
        deltat1=nu_c1 - params.nu_fe,
        deltat2=params.nu_eg - nu_c2,
        deltat3=params.nu_eg - nu_c3,
        Deltat12=nu_c1 - nu_c2,
        Deltat13=nu_c1 - nu_c3,
        Deltat23=nu_c2 - nu_c3,
    )
    # consistency of the |δ_l| = |δ₁| + Δ_1l decomposition
    assert abs(d.delta2 - (d.delta1 + d.Delta12)) < 1e-12
    assert abs(d.delta3 - (d.delta1 + d.Delta13)) < 1e-12
    return d


def solve_coupling_constraint(params: SystemParams) -> tuple[float, float]:
    """Couplings g₂, g₃ (MHz) satisfying χ_1l = λ₁/2 for the given detunings."""
    det = derive_detunings(params)
    out = []
    for delta_l, Delta_1l in ((det.delta2, det.Delta12), (det.delta3, det.Delta13)):
        radicand = 2.0 * (Delta_1l * 1e3) * (det.delta1 * 1e3)  # MHz²
        if radicand < 0:
            raise ValueError("coupling constraint has no real solution: negative radicand")
        g = (delta_l / (det.delta1 + delta_l)) * math.sqrt(radicand)
        out.append(g)
    return tuple(out)


def resolve_couplings(params: SystemParams) -> SystemParams:
    """Fill g2/g3 from the coupling constraint when left unset (design mode)."""
    if params.g2 is not None and params.g3 is not None:
        validate_params(params)
        return params
    g2, g3 = solve_coupling_constraint(params)
    return replace(params,
                   g2=params.g2 if params.g2 is not None else g2,
                   g3=params.g3 if params.g3 is not None else g3)


def _couplings(params: SystemParams) -> tuple[float, float, float]:
    p = resolve_couplings(params)
    return (p.g1, p.g2, p.g3)


def effective_rates(params: SystemParams) -> EffectiveRates:
    """Second-order dispersive rates (MHz) from couplings and detunings."""
    det = derive_detunings(params)
    g1, g2, g3 = _couplings(params)
    d1, d2, d3 = det.delta1 * 1e3, det.delta2 * 1e3, det.delta3 * 1e3  # MHz
    D12, D13 = det.Delta12 * 1e3, det.Delta13 * 1e3
    if min(d1, d2, d3) <= 0:
        raise ValueError("zero or negative detuning in effective-rate formulas")
    lam1 = g1 * g1 / d1
    lam2 = g2 * g2 / d2
    lam3 = g3 * g3 / d3
    lam12 = 0.5 * g1 * g2 * (1.0 / d1 + 1.0 / d2)
    lam13 = 0.5 * g1 * g3 * (1.0 / d1 + 1.0 / d3)
    lam23 = 0.5 * g2 * g3 * (1.0 / d2 + 1.0 / d3)
    chi12 = lam12 * lam12 / D12 if g1 * g2 != 0 else 0.0
    chi13 = lam13 * lam13 / D13 if g1 * g3 != 0 else 0.0
    return EffectiveRates(lambda1=lam1, lambda2=lam2, lambda3=lam3,
                          lambda12=lam12, lambda13=lam13, lambda23=lam23,
                          chi12=chi12, chi13=chi13)


def gate_time(rates: EffectiveRates) -> float:
    """Entangling time t = 2π/λ₁ in μs; warns when π/χ_1l disagrees by > 2%."""
    if rates.lambda1 <= 0:
        raise ValueError("gate time undefined: lambda1 must be positive")
    t = 1.0 / rates.lambda1  # 2π/(2π·λ₁[MHz]) μs
    for name, chi in (("chi12", rates.chi12), ("chi13", rates.chi13)):
        if chi <= 0:
            warnings.warn(f"gate-time consistency: {name} is zero, π/χ undefined")
            continue
        t_chi = 0.5 / chi
        if abs(t_chi - t) / t > 0.02:
            warnings.warn(
                f"gate-time consistency: π/{name} = {t_chi:.4f} μs deviates from "
                f"2π/lambda1 = {t:.4f} μs by more than 2%")
    return t


def _dispersive_validity_check(params: SystemParams) -> None:
    det = derive_detunings(params)
    g1, g2, g3 = _couplings(params)
    ratios = (g1 / (det.delta1 * 1e3), g2 / (det.delta2 * 1e3), g3 / (det.delta3 * 1e3))
    worst = max(ratios)
    if worst >= 0.15:
        warnings.warn(
            f"dispersive validity: max g/|δ| = {worst:.3f} >= 0.15; "
            "effective Hamiltonians may be inaccurate")


def _crosstalk_terms(params: SystemParams, layout: SpaceLayout) -> list:
    """Inter-cavity crosstalk g_kl (a_k a_l† e^{−iΔ̃_kl t} + h.c.), one term per
    unordered pair k < l."""
    det = derive_detunings(params)
    g1, g2, g3 = _couplings(params)
    g_kl = params.crosstalk_ratio * max(g1, g2, g3) * MHZ_TO_RAD
    if g_kl == 0.0:
        return []
    a = {l: annihilation(layout, l) for l in (1, 2, 3)}
    pairs = {
        (1, 2): det.Deltat12, (1, 3): det.Deltat13, (2, 3): det.Deltat23,
    }
    if params.crosstalk_pairs == "23":
        pairs = {(2, 3): det.Deltat23}
    terms = []
    for (k, l), dt_ghz in pairs.items():
        op = _finalize((a[k] @ a[l].conj().T) * g_kl)
        terms.append((op, -dt_ghz * GHZ_TO_RAD))
    return terms


def hamiltonian_full(params: SystemParams, layout: SpaceLayout,
                     include_errors: bool = True) -> Generator:
    """Interaction-picture Hamiltonian H_I, optionally with the error terms
    (unwanted qutrit couplings g̃ and inter-cavity crosstalk)."""
    det = derive_detunings(params)
    g1, g2, g3 = _couplings(params)
    a1 = annihilation(layout, 1)
    a2 = annihilation(layout, 2)
    a3 = annihilation(layout, 3)
    s_eg = qutrit_sigma(layout, "g", "e")   # |g⟩⟨e|
    s_fe = qutrit_sigma(layout, "e", "f")   # |e⟩⟨f|

    terms: list = []

    def add(op, coeff_mhz, omega_ghz):
        if coeff_mhz != 0.0:
            terms.append((_finalize(op * (coeff_mhz * MHZ_TO_RAD)), omega_ghz * GHZ_TO_RAD))

    add(a1.conj().T @ s_eg, g1, +det.delta1)
    add(a2.conj().T @ s_fe, g2, -det.delta2)
    add(a3.conj().T @ s_fe, g3, -det.delta3)

    if include_errors:
        add(a1 @ s_fe.conj().T, params.gt1, -det.deltat1)
        add(a2 @ s_eg.conj().T, params.gt2, +det.deltat2)
        add(a3 @ s_eg.conj().T, params.gt3, +det.deltat3)
        terms.extend(_crosstalk_terms(params, layout))

    return Generator(dim=layout.total_dim, terms=tuple(terms))


def hamiltonian_effective(params: SystemParams, layout: SpaceLayout,
                          level: str = "diagonal",
                          include_crosstalk: bool = False) -> Generator:
    """Effective dispersive Hamiltonian at the requested simplification level.

    level = "stark" keeps the Stark shifts, the λ₂₃ cavity exchange and the
    two-photon a₁†a_l†σ_fg⁻ terms; "kerr" keeps the Stark shifts and the
    cross-Kerr χ_1l terms; "diagonal" is the ground-manifold form
    λ₁ n̂₁|g⟩⟨g| − Σ χ_1l n̂₁n̂_l|g⟩⟨g| (the |g⟩⟨g| projector is retained so
    qutrit dissipators still act in the same space).  include_crosstalk adds
    the inter-cavity crosstalk error line.
    """
    if level not in ("stark", "kerr", "diagonal"):
        raise ValueError(f"unknown effective level {level!r}")
    _dispersive_validity_check(params)
    det = derive_detunings(params)
    rates = effective_rates(params)
    lam1 = rates.lambda1 * MHZ_TO_RAD
    lam2 = rates.lambda2 * MHZ_TO_RAD
    lam3 = rates.lambda3 * MHZ_TO_RAD
    lam23 = rates.lambda23 * MHZ_TO_RAD
    lam12 = rates.lambda12 * MHZ_TO_RAD
    lam13 = rates.lambda13 * MHZ_TO_RAD
    chi12 = rates.chi12 * MHZ_TO_RAD
    chi13 = rates.chi13 * MHZ_TO_RAD

    n1 = number_operator(layout, 1)
    n2 = number_operator(layout, 2)
    n3 = number_operator(layout, 3)
    pg = qutrit_projector(layout, "g")
    pe = qutrit_projector(layout, "e")
    pf = qutrit_projector(layout, "f")

    terms: list = []
    if level == "diagonal":
        static = lam1 * (n1 @ pg) - chi12 * (n1 @ n2 @ pg) - chi13 * (n1 @ n3 @ pg)
    else:
        a1 = annihilation(layout, 1)
        a2 = annihilation(layout, 2)
        a3 = annihilation(layout, 3)
        aad1 = a1 @ a1.conj().T
        static = lam1 * (n1 @ pg - aad1 @ pe)
        static = static - lam2 * (n2 @ pe - (a2 @ a2.conj().T) @ pf)
        static = static - lam3 * (n3 @ pe - (a3 @ a3.conj().T) @ pf)
        # λ₂₃ cavity exchange rotates at the cavity 2-3 frequency difference
        ex = (a2.conj().T @ a3) @ (pf - pe) * lam23
        terms.append((_finalize(ex), det.Deltat23 * GHZ_TO_RAD))
        if level == "stark":
            s_fg = qutrit_sigma(layout, "g", "f")  # |g⟩⟨f|
            for lam_1l, a_l, D_1l in ((lam12, a2, det.Delta12), (lam13, a3, det.Delta13)):
                op = (a1.conj().T @ a_l.conj().T @ s_fg) * lam_1l
                terms.append((_finalize(op), -D_1l * GHZ_TO_RAD))
        else:  # kerr
            static = static + chi12 * (aad1 @ (a2 @ a2.conj().T) @ pf - n1 @ n2 @ pg)
            static = static + chi13 * (aad1 @ (a3 @ a3.conj().T) @ pf - n1 @ n3 @ pg)
    terms.insert(0, (_finalize(static * 0.5), 0.0))

    if include_crosstalk:
        terms.extend(_crosstalk_terms(params, layout))

    return Generator(dim=layout.total_dim, terms=tuple(terms))


def analytic_unitary(rates: EffectiveRates, layout: SpaceLayout, t: float) -> sparse.csr_array:
    """Diagonal gate unitary exp(−iλ₁n̂₁t + iχ₁₂n̂₁n̂₂t + iχ₁₃n̂₁n̂₃t) on the
    |g⟩ manifold, identity on the e and f manifolds."""
    lam1 = rates.lambda1 * MHZ_TO_RAD
    chi12 = rates.chi12 * MHZ_TO_RAD
    chi13 = rates.chi13 * MHZ_TO_RAD
    d1, d2, d3 = layout.cavity_dims
    n1 = np.arange(d1)[:, None, None]
    n2 = np.arange(d2)[None, :, None]
    n3 = np.arange(d3)[None, None, :]
    phase = np.exp(1j * (-lam1 * n1 + chi12 * n1 * n2 + chi13 * n1 * n3) * t).ravel()
    diag = np.concatenate([phase, np.ones(2 * d1 * d2 * d3, dtype=complex)])
    return _finalize(sparse.diags_array(diag, format="csr"))
