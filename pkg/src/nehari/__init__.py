"""Ground states of the discrete nonlinear Schroedinger equation on weighted graphs."""

__version__ = "0.1.0"

from .errors import AuditError, ConfigError, GraphError, NehariError, SolverError, SpectralError
from .graph import (
    GraphFunction,
    TruncationFamily,
    WeightedGraph,
    check_potential_growth,
    check_summability,
    diameter,
    ell1_embedding_constant,
    example_line_graph,
    line_graph_family,
    path_graph,
    path_metric,
    poincare_check,
    random_connected_graph,
    single_vertex_graph,
    validate_graph,
)
from .nonlinearity import (
    Nonlinearity,
    PowerParams,
    custom_nonlinearity,
    nonlinear_energy,
    nonlinear_gradient,
    power_nonlinearity,
    validate_assumptions,
)
from .spectral import (
    FormMatrices,
    SpectralData,
    Splitting,
    assemble,
    eigensolve,
    project,
    projector_lp_bound,
    shifted_form,
    split,
    verify_form_bounds,
)
from .solver import (
    GroundStateResult,
    SolverConfig,
    check_critical_value_bounds,
    energy,
    energy_gradient,
    ground_state,
    inner_maximize,
    verify_no_solution,
)
from .experiments import (
    SweepResult,
    audit_inequalities,
    bifurcation_sweep,
    fit_scaling,
)
