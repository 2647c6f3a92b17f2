"""Explicit K-symplectic splitting integrators in extended phase space.

Build a model (three built in), extend it, and integrate:

    >>> import ksplit
    >>> model = ksplit.make_model1()
    >>> spec = ksplit.make_extension(model, omega=20.0)
    >>> traj = ksplit.integrate(model, spec, "ksym2", model.default_initial,
    ...                         tau=0.01, t_final=10.0)
"""

from .baselines import (
    ButcherTableau,
    METHOD_NAMES,
    integrate_method,
    integrate_rk,
    make_rk3_heun,
    make_rk5_butcher,
    reference_solution,
    rk_step,
    subflow_oracle_check,
)
from .diagnostics import (
    Trajectory,
    bounded_two_halves,
    convergence_order,
    convergence_study,
    copy_divergence_series,
    orbit_radius_growth,
    orbit_radius_stats,
    poisson_residual,
    relative_energy_error_series,
    two_half_maxima,
)
from .errors import (
    ConfigurationError,
    DiagnosticError,
    DomainError,
    IntegrationError,
    KsplitError,
)
from .extension import (
    ConstraintTerm,
    DEFAULT_OMEGA,
    ExtensionSpec,
    MixupAssignment,
    augmented_gradient,
    augmented_hamiltonian,
    constraint_value,
    extend,
    extended_structure_inverse,
    extended_vector_field,
    make_extension,
    mixup_copy_index,
    readout,
)
from .flows import (
    CompositionScheme,
    SCHEME_KSYM1,
    SCHEME_KSYM2,
    SCHEME_KSYM4,
    SubFlow,
    adjoint_first_order_step,
    apply_subflow,
    build_subflows,
    first_order_step,
    fourth_order_step,
    integrate,
    strang_composition,
    strang_step,
    suzuki_gammas,
)
from .models import (
    ALParams,
    ExtensionStrategy,
    GyroParams,
    ModelSpec,
    PairTable,
    SpecialPairStructure,
    gradient_fd_oracle,
    hamiltonian_gradient,
    hamiltonian_value,
    make_ablowitz_ladik,
    make_gyrocenter,
    make_model,
    make_model1,
    sample_states,
    structure_inverse,
    vector_field,
)

__version__ = "0.1.0"
