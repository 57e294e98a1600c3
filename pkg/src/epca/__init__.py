"""Asymptotically periodic mild solutions of equations with piecewise constant argument."""

from .evolution import (
    EvolutionProcess,
    Nonlinearity,
    certify_process,
    diagonal_process,
    scalar_process,
)
from .function_space import (
    DefectProfile,
    SampledPath,
    compose_nonlinearity,
    floor_compose,
    lipschitz_estimate,
    stepanov_defect_profile,
    stepanov_norm,
    sup_defect_profile,
)
from .heat import HeatInstance, build_heat_process, project_initial, run_heat_demo
from .kernels import BACKEND
from .solver import (
    ConvergenceError,
    DivergenceError,
    MildSolution,
    SolverConfig,
    SolverError,
    certify_sap,
    lambda_transform,
    march,
    picard_solve,
)

__version__ = "0.1.0"
