"""Rank-based testing for longitudinal semicontinuous outcomes.

The core test maximizes a smoothed maximum-rank-correlation objective
over the unit sphere and draws inference from subject-level
perturbation resampling. Comes with a two-part synthetic data
generator, random-intercept Tobit and mixed logistic comparators, and
a Monte Carlo study harness.
"""

from .comparators import (
    ComparatorFit,
    QuadratureRule,
    fit_logistic,
    fit_tobit,
    logistic_loglik,
    tobit_loglik,
    wald_p_value,
)
from .data import (
    Observation,
    PanelDataset,
    group_city_weeks,
    load_csv,
    load_rainfall_csv,
    write_csv,
)
from .objective import (
    ObjectiveContext,
    PerturbationWeights,
    SmoothedObjective,
    exact_objective,
    smoothed_gradient,
    smoothed_objective,
)
from .rank_test import (
    BandwidthState,
    TestConfig,
    TestResult,
    fit_point_estimate,
    p_values,
    perturbation_resample,
    run_test,
)
from .simulate import ScenarioConfig, simulate_dataset
from .sphere import Angles, MultistartConfig, multistart_maximize, polar_to_rect
from .study import StudyConfig, StudyResult, power_study, rainfall_study

__version__ = "0.1.0"

__all__ = [
    "Angles",
    "BandwidthState",
    "ComparatorFit",
    "MultistartConfig",
    "Observation",
    "ObjectiveContext",
    "PanelDataset",
    "PerturbationWeights",
    "QuadratureRule",
    "ScenarioConfig",
    "SmoothedObjective",
    "StudyConfig",
    "StudyResult",
    "TestConfig",
    "TestResult",
    "exact_objective",
    "fit_logistic",
    "fit_point_estimate",
    "fit_tobit",
    "group_city_weeks",
    "load_csv",
    "load_rainfall_csv",
    "logistic_loglik",
    "multistart_maximize",
    "p_values",
    "perturbation_resample",
    "polar_to_rect",
    "power_study",
    "rainfall_study",
    "run_test",
    "simulate_dataset",
    "smoothed_gradient",
    "smoothed_objective",
    "tobit_loglik",
    "wald_p_value",
    "write_csv",
]
