"""Simulation of u_t = -(-d^2/dx^2)^alpha u + u^p and its blow-up.

Submodules:

- ``spectral``: cosine grid, DCT-I analysis/synthesis, matrices of -A^alpha
  and (1 + tau A^alpha)^-1.
- ``fracpow``: fractional powers, fractional resolvents and semigroups from
  an arbitrary resolvent map by quadrature.
- ``kernels``: Green's-function resolvents on the line, circle and unit
  interval, and the singular-integral form of A^alpha.
- ``timestepper``: explicit/implicit marching with adaptive steps.
- ``analysis``: Levine and Jensen predictors, sweeps and scans.
- ``cli``: the ``fracblow`` command.
"""

from .analysis import (
    EigenPair,
    LevineReport,
    alpha_sweep,
    dichotomy_scan,
    jensen_projection_trace,
    levine_check,
    max_ordering_check,
    periodic_eigenpair,
)
from .fracpow import (
    QuadratureSpec,
    ResolventMap,
    frac_power_apply,
    frac_resolvent_apply,
    hille_semigroup_apply,
    neg_frac_power_apply,
    scalar_frac_power,
)
from .kernels import (
    KernelDomain,
    resolvent_dirichlet,
    resolvent_neumann,
    resolvent_periodic,
    resolvent_whole_line,
    singular_integral_frac,
)
from .spectral import (
    CosineSpectrum,
    FractionalOperator,
    Grid,
    GridFunction,
    analyze,
    apply_implicit_resolvent,
    apply_operator,
    assemble_S,
    assemble_T,
    make_grid,
    synthesize,
)
from .timestepper import (
    NumericalFailure,
    SimulationResult,
    SolverConfig,
    StepRecord,
    adaptive_tau,
    monotone_time_check,
    run_simulation,
    step_explicit,
    step_implicit,
)

__version__ = "0.1.0"
