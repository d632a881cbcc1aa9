"""Deterministic three-cat-qubit GHZ preparation in a lossy qutrit-cavity system.

Builds the full and effective interaction-picture Hamiltonians of one
superconducting qutrit dispersively coupled to three cat-encoded cavities,
integrates the master equation with cavity decay, qutrit relaxation and
dephasing, applies the ideal cat-code rotations, and reports the GHZ
fidelity as a function of the cavity decay time.
"""

from .fock import (SpaceLayout, annihilation, basis_state, build_layout,
                   cavity_mean_photons, creation, identity, number_operator,
                   qutrit_populations, qutrit_projector, qutrit_sigma,
                   validate_density, validate_state)
from .catcode import (CatCode, build_code, cat_normalization, code_hadamard,
                      ghz_target, logical_state, pre_rotation_target,
                      prepare_initial)
from .model import (Detunings, EffectiveRates, Generator, SystemParams,
                    analytic_unitary, derive_detunings, effective_rates,
                    gate_time, hamiltonian_effective, hamiltonian_full,
                    resolve_couplings, solve_coupling_constraint,
                    validate_params)
from .lindblad import (DissipatorSet, IntegrationConfig, IntegrationError,
                       SimulationResult, build_dissipators, evolve,
                       evolve_state, expm_oracle, rhs)
from .analysis import (MODELS, ScenarioSpec, SweepResult, SweepRow, fidelity,
                       qutrit_leakage, run_protocol, scenario_generator,
                       sweep_kappa)

__version__ = "0.1.0"

__all__ = [
    "SpaceLayout", "build_layout", "annihilation", "creation",
    "number_operator", "qutrit_sigma", "qutrit_projector", "identity",
    "basis_state", "qutrit_populations", "cavity_mean_photons",
    "validate_state", "validate_density",
    "CatCode", "build_code", "cat_normalization", "logical_state",
    "prepare_initial", "code_hadamard", "ghz_target", "pre_rotation_target",
    "SystemParams", "Detunings", "EffectiveRates", "Generator",
    "validate_params", "derive_detunings", "solve_coupling_constraint",
    "resolve_couplings", "effective_rates", "gate_time",
    "hamiltonian_full", "hamiltonian_effective", "analytic_unitary",
    "DissipatorSet", "IntegrationConfig", "IntegrationError",
    "SimulationResult", "build_dissipators", "rhs", "evolve", "evolve_state",
    "expm_oracle",
    "MODELS", "ScenarioSpec", "SweepRow", "SweepResult", "fidelity",
    "scenario_generator", "qutrit_leakage", "run_protocol", "sweep_kappa",
    "__version__",
]
