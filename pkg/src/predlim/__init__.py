"""Estimative and bias-corrected prediction limits/intervals for Gaussian AR(1).

The heavy lifting (counter-based random streams and conditional path
simulation) runs in a compiled Cython kernel when it is available and in a
numpy fallback otherwise; ``predlim.BACKEND`` says which one was loaded.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .ar1_model import (
    Ar1Params,
    PredictiveDist,
    SeedSpec,
    TimeSeries,
    conditional_predictive,
    predictive_cdf,
    predictive_pdf,
    predictive_quantile,
    simulate_backward,
    simulate_forward,
)
from .correction import (
    Correction,
    Source,
    Target,
    closed_form_c_interval,
    closed_form_c_limit,
    d_from_c,
    delta_from_c,
    simulated_c,
    simulated_corrections,
)
from .errors import DegenerateSeriesError, NumericError, ParameterError, UnsupportedBiasError
from .estimators import (
    ConditionalBias,
    EstimatorKind,
    conditional_bias,
    estimate,
    inverse_information,
)
from .harness import (
    CoverageReport,
    EfficiencyReport,
    Method,
    ScalingReport,
    conditional_coverage,
    efficiency_study,
    scaling_study,
)
from .prediction import (
    CentralInterval,
    Flavor,
    UpperLimit,
    equal_density_interval,
    estimative_upper_limit,
    improved_interval,
    improved_upper_limit,
)
