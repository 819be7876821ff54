"""Nonparametric volatility-function estimation toolkit.

Local linear estimation of the conditional variance of a return series with
a data-driven plug-in bandwidth built from a sigmoid-network pilot, plus
confidence bands, a symmetry test, GARCH benchmark machinery (simulators,
quasi-MLE, the one-lag representation oracle) and a Monte Carlo harness.
"""

__version__ = "0.1.0"

from .bandwidth import (GLOBAL, LOCAL, BandwidthPlan, FunctionalEstimates,
                        IntervalWindow, bandwidth_plan, bias_functional,
                        default_local_width, plugin_bandwidth, support_bounds,
                        support_window, variance_functional)
from .errors import (ConfigError, DataError, EstimationError, ExperimentError,
                     GasvolError, PilotFitError)
from .garch import (ConditionalVarianceTable, GarchParams, NewsImpactCurves,
                    conditional_variance_oracle, innovation_correction,
                    news_impact_comparison, transformed_innovation,
                    write_oracle_csv)
from .inference import (SymmetryTestResult, VolatilityCurve, confidence_band,
                        interval_averaged_estimate, normal_quantile,
                        symmetry_test)
from .kernels import (EPANECHNIKOV, DesignPairs, KernelSpec, ReturnSeries,
                      design_pairs, effective_weights, epanechnikov,
                      get_kernel, kernel_constants, local_linear_fit)
from .mle import MleFit, fit_garch_mle, garch_loglik, mle_sigma2_curve
from .pilot import (PilotFitReport, PilotNetwork, estimate_m4eps, fit_pilot,
                    load_pilot, pilot_eval, pilot_second_derivative,
                    save_pilot)
from .simulate import (HT, Arch1, ArchEpsTilde, Garch11, SimSpec,
                       read_series_csv, simulate, substream_seed, true_sigma2,
                       write_series_csv)
from .experiments import (AnalyzeConfig, AnalyzeResult, ExperimentConfig,
                          IseRow, IseSummary, SymmetryExperimentResult,
                          analyze_returns, run_ise_experiment,
                          run_symmetry_experiment)

__all__ = [
    "__version__",
    # kernels / smoothing
    "EPANECHNIKOV", "KernelSpec", "ReturnSeries", "DesignPairs",
    "design_pairs", "epanechnikov", "get_kernel", "kernel_constants",
    "effective_weights", "local_linear_fit",
    # pilot
    "PilotNetwork", "PilotFitReport", "fit_pilot", "pilot_eval",
    "pilot_second_derivative", "estimate_m4eps", "save_pilot", "load_pilot",
    # bandwidth
    "GLOBAL", "LOCAL", "IntervalWindow", "FunctionalEstimates",
    "BandwidthPlan", "bias_functional", "variance_functional",
    "plugin_bandwidth", "bandwidth_plan", "default_local_width",
    "support_bounds", "support_window",
    # inference
    "VolatilityCurve", "SymmetryTestResult", "confidence_band",
    "interval_averaged_estimate", "symmetry_test", "normal_quantile",
    # garch representation
    "GarchParams", "transformed_innovation", "innovation_correction",
    "ConditionalVarianceTable", "conditional_variance_oracle",
    "write_oracle_csv", "NewsImpactCurves", "news_impact_comparison",
    # simulators
    "Arch1", "Garch11", "HT", "ArchEpsTilde", "SimSpec", "simulate",
    "true_sigma2", "substream_seed", "write_series_csv", "read_series_csv",
    # mle
    "MleFit", "fit_garch_mle", "garch_loglik", "mle_sigma2_curve",
    # harness
    "ExperimentConfig", "IseRow", "IseSummary", "SymmetryExperimentResult",
    "run_ise_experiment", "run_symmetry_experiment", "AnalyzeConfig",
    "AnalyzeResult", "analyze_returns",
    # errors
    "GasvolError", "ConfigError", "DataError", "EstimationError",
    "PilotFitError", "ExperimentError",
]
