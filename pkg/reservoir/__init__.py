"""
Quantum reservoir simulation.

Density-matrix algebra, reservoir Hamiltonians, the four input protocols and
seeded random streams.
"""

from .core import (
    DensityMatrix,
    QubitLayout,
    SpectralPropagator,
    check_density_matrix,
    encode_input,
    expectation,
    inject_and_evolve,
    partial_trace_first,
    pauli_on,
    sigma_z_expectations,
    tensor_product,
    unitary_from_hamiltonian,
)
from .hamiltonians import (
    DrivenTfimSpec,
    TfimSpec,
    build_driven_tfim,
    build_tfim,
    driven_tfim_terms,
    sample_couplings,
    sample_driven_spec,
    spectral_radius,
)
from .protocols import (
    ClockConfig,
    ProtocolConfig,
    ReadoutTrace,
    backaction_matrix,
    lindblad_rhs,
    liouvillian,
    run_dsp,
    run_frp,
    run_mrp,
    run_protocol,
    run_wmp,
)
from .rng import derive_seed, make_rng

__all__ = [
    'DensityMatrix',
    'QubitLayout',
    'SpectralPropagator',
    'check_density_matrix',
    'encode_input',
    'expectation',
    'inject_and_evolve',
    'partial_trace_first',
    'pauli_on',
    'sigma_z_expectations',
    'tensor_product',
    'unitary_from_hamiltonian',
    'DrivenTfimSpec',
    'TfimSpec',
    'build_driven_tfim',
    'build_tfim',
    'driven_tfim_terms',
    'sample_couplings',
    'sample_driven_spec',
    'spectral_radius',
    'ClockConfig',
    'ProtocolConfig',
    'ReadoutTrace',
    'backaction_matrix',
    'lindblad_rhs',
    'liouvillian',
    'run_dsp',
    'run_frp',
    'run_mrp',
    'run_protocol',
    'run_wmp',
    'derive_seed',
    'make_rng',
]
