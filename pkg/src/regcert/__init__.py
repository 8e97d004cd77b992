"""regcert: exact computation and certification of design-matrix regularity
constants (spark, incoherence, restricted isometry, restricted eigenvalue,
compatibility, lq sensitivity), a rational-arithmetic spark reduction, seeded
ensembles and Monte Carlo validation, and l1-minimizing linear IV estimators.
"""

from .checkers import (
    BudgetExceeded,
    Decision,
    RegularityReport,
    compatibility_constant,
    decide,
    incoherence_constant,
    l1_sensitivity,
    linf_sensitivity,
    lq_sensitivity,
    re_constant,
    rip_constant,
    rip_constant_from_gram,
    spark,
)
from .ensembles import (
    PopulationModel,
    SamplerSpec,
    build_s_comprehensive,
    covariance_sqrt,
    population_psi,
    sample,
    verify_s_comprehensive,
)
from .estimators import (
    DantzigSelector,
    RegressionInstance,
    StivEstimator,
    dantzig,
    error_vs_n_study,
    generate,
    stiv,
)
from .hardness import ReductionParams, reduction_params, spark_via_oracle
from .harness import ExperimentConfig, TrialRecord, deviation_tail_check, mixture_study, run
from .lp import LinearProgram, LpError, LpSolution, solve
from .types import ConeSpec, CrossCovariance, DesignMatrix, InstrumentMatrix

__version__ = "1.0.0"

__all__ = [
    "BudgetExceeded", "Decision", "RegularityReport", "compatibility_constant",
    "decide", "incoherence_constant", "l1_sensitivity", "linf_sensitivity",
    "lq_sensitivity", "re_constant", "rip_constant", "rip_constant_from_gram",
    "spark", "PopulationModel", "SamplerSpec", "build_s_comprehensive", "covariance_sqrt",
    "population_psi", "sample", "verify_s_comprehensive", "DantzigSelector",
    "RegressionInstance", "StivEstimator", "dantzig", "error_vs_n_study",
    "generate", "stiv", "ReductionParams", "reduction_params", "spark_via_oracle",
    "ExperimentConfig", "TrialRecord", "deviation_tail_check", "mixture_study",
    "run", "LinearProgram", "LpError", "LpSolution", "solve", "ConeSpec",
    "CrossCovariance", "DesignMatrix", "InstrumentMatrix", "__version__",
]
