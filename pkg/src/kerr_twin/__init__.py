"""Exactly soluble two-mode Kerr-coupled oscillators: closed forms and a brute-force oracle."""

__version__ = "0.1.0"

from .errors import AccuracyError, InvalidInputError, KerrTwinError, NumericalError, ResourceError
from .fock import (
    ModelParams,
    PhasePoint,
    ReducedDensity,
    SingleModeAmplitudes,
    TwoModeState,
    coherent_amplitudes,
    fidelity,
    mode_operator_matrix,
    partial_trace,
    tensor_product,
    trace_distance,
)
from .dynamics import (
    CoherentProduct,
    NumberProduct,
    basis_change_coeffs,
    beta_t,
    evolve_coherent_product,
    evolve_number_product,
    reduced_density_coherent,
)
from .entropy import (
    number_entropy_spectrum,
    purity_and_linear_entropy,
    sle_coherent_closed,
    von_neumann_entropy,
)
from .oracle import OraclePropagator, block_hamiltonian_eigensystem, oracle_evolve
