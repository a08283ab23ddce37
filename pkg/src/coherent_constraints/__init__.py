"""Coherent-state quantization of constrained systems on truncated Fock spaces."""
from .bessel import bessel_i0
from .coherent import (
    CANONICAL, WEYL, AnnihilatedStateError, CoherentLabel, LabelPath, RescaledState,
    circular_path, coherent_state, geometric_one_form_check, linear_path, overlap_closed_form,
    rescaled_state, unity_resolution_residual, upper_symbol,
)
from .dynamics import (
    KernelReport, TrotterPlan, evolve_projected_exact, evolve_projected_trotter,
    evolve_with_multipliers, example1_closed_form, example2_factorization, kernel_grid,
    lattice_equivalence_check, trotter_convergence, vacuum_normalization,
)
from .fock import (
    FockSpace, OperatorMatrix, StateVector, angular_momentum, annihilation, build_space,
    commutator, creation, displacement_matrix, hermitian_eigendecomposition, identity,
    interior_mask, matrix_exponential, number_operator, quadrature_operators, spectral_norm,
)
from .projectors import (
    AliasingError, ConstraintSet, Projector, QuadratureError, check_closed_first_class,
    gaussian_weight, projector_diagnostics, projector_group_average_u1, projector_spectral,
    projector_weighted_integral, uniform_weight, vacuum_projector,
)
from .quadrature import QuadratureRule, gauss_legendre, periodic, trapezoid

__version__ = "0.1.0"
