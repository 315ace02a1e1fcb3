"""bootstab: desk-scale stability experiments for bootstrap estimators.

Bounded-Lipschitz distances between discrete measures by exact LP,
kernel machines with shifted Lipschitz losses, resampling laws of their
outputs, and seeded robustness probes comparing those laws across
contaminated data-generating measures.
"""

__version__ = "0.1.0"

from .bl import (BLProblem, BLResult, bl_ball_seminorm, bl_distance,
                 bl_distance_line, bl_distance_oracle)
from .bootstrap import (PREDICTOR, RISK, BootstrapLaw, SolverConfig,
                        bootstrap_law_exact, bootstrap_law_mc, law_distance)
from .exceptions import (BootstabError, ConfigError, DataFormatError,
                         InvariantViolation, SolverError)
from .harness import (GC_EPS_LEVELS, GcRow, ProbeRow, RobustnessConfig,
                      bootstrap_qr_probe, estimator_law, gc_decay_probe,
                      uqr_probe)
from .kernels import KernelSpec, gaussian_rbf, kernel_from_name, linear_on_box
from .losses import (LossSpec, absolute, eps_insensitive, hinge,
                     logistic, loss_from_name, pinball)
from .measures import DiscreteMeasure, contaminate, empirical, sample
from .rng import derive_rng
from .space import (DistanceMatrix, Points, build_euclidean_space,
                    load_points_csv, validate_metric)
from .svm import (RiskContinuityReport, ShiftedLossSVM, SvmProblem,
                  SvmSolution, risk, risk_continuity_check, rkhs_distance,
                  solve)

__all__ = [
    "__version__",
    "BLProblem", "BLResult", "bl_ball_seminorm", "bl_distance",
    "bl_distance_line", "bl_distance_oracle",
    "PREDICTOR", "RISK", "BootstrapLaw", "SolverConfig",
    "bootstrap_law_exact", "bootstrap_law_mc", "law_distance",
    "BootstabError", "ConfigError", "DataFormatError",
    "InvariantViolation", "SolverError",
    "GC_EPS_LEVELS", "GcRow", "ProbeRow", "RobustnessConfig",
    "bootstrap_qr_probe", "estimator_law", "gc_decay_probe", "uqr_probe",
    "KernelSpec", "gaussian_rbf", "kernel_from_name", "linear_on_box",
    "LossSpec", "absolute", "eps_insensitive", "hinge", "logistic",
    "loss_from_name", "pinball",
    "DiscreteMeasure", "contaminate", "empirical", "sample",
    "derive_rng",
    "DistanceMatrix", "Points", "build_euclidean_space", "load_points_csv",
    "validate_metric",
    "RiskContinuityReport", "ShiftedLossSVM", "SvmProblem", "SvmSolution",
    "risk", "risk_continuity_check", "rkhs_distance", "solve",
]
