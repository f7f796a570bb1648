"""approxred: approximate reduction of ODE systems.

Build reduced models by slicing out fiber coordinates, measure how far the
projected full dynamics drift from the reduced ones, test exact reducibility,
and falsify incremental-stability Lyapunov certificates by quasi-random
sampling.
"""

__version__ = "0.1.0"

from .core import (
    Box,
    ComparisonFunction,
    ControlSystemDef,
    Decomposition,
    DivergenceError,
    InputError,
    KLFunction,
    NumericalError,
    StepBudgetError,
    Trajectory,
    VectorFieldDef,
    eval_comparison,
    project,
)
from .integrate import (
    InputSignal,
    IntegratorConfig,
    integrate_control,
    integrate_field,
    resample,
)
from .reduction import (
    DeviationReport,
    ReducedField,
    ReducibilityReport,
    SmoothMap,
    check_exact_reducible,
    check_phi_related,
    construct_reduced,
    estimate_delta,
    measure_deviation,
)
from .stability import (
    CertificateReport,
    FiberwiseCertificate,
    IISSCertificate,
    IUBIBSSCertificate,
    ScalarFunctionDef,
    check_fiberwise,
    check_iiss,
    check_iubibss,
    estimate_lipschitz,
    vdot,
)
from .systems import SystemEntry, lookup, make_ball_in_hoop, make_cart_pendulum

__all__ = [
    "__version__",
    "Box",
    "ComparisonFunction",
    "ControlSystemDef",
    "Decomposition",
    "DivergenceError",
    "InputError",
    "KLFunction",
    "NumericalError",
    "StepBudgetError",
    "Trajectory",
    "VectorFieldDef",
    "eval_comparison",
    "project",
    "InputSignal",
    "IntegratorConfig",
    "integrate_control",
    "integrate_field",
    "resample",
    "DeviationReport",
    "ReducedField",
    "ReducibilityReport",
    "SmoothMap",
    "check_exact_reducible",
    "check_phi_related",
    "construct_reduced",
    "estimate_delta",
    "measure_deviation",
    "CertificateReport",
    "FiberwiseCertificate",
    "IISSCertificate",
    "IUBIBSSCertificate",
    "ScalarFunctionDef",
    "check_fiberwise",
    "check_iiss",
    "check_iubibss",
    "estimate_lipschitz",
    "vdot",
    "SystemEntry",
    "lookup",
    "make_ball_in_hoop",
    "make_cart_pendulum",
]
