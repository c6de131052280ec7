"""
sharedvol: AR models for a panel of series that share one GARCH volatility
process, estimated by residual averaging in two passes.
"""

from ._errors import DegenerateInputError, FitFailureError, PipelineError
from .ar import ARFit, ARSpec, fit_ar, fit_identified, identify_ar_order, simulate_ar
from .core import Panel, cross_correlation_matrix, sample_acf, sample_pacf, significance_limit
from .diagnostics import DiagnosticResult, QQData, li_mak, ljung_box, mcleod_li, qq_normal
from .garch import (
    GARCHFit,
    GARCHOrderSelection,
    GARCHSpec,
    fit_garch,
    garch_log_likelihood,
    identify_garch_order,
    simulate_garch,
)
from .pipeline import PipelineConfig, PipelineReport, run_pipeline
from .studies import PRESETS, StudyScenario, StudySummary, generate_panel, get_preset, run_study

__version__ = "0.1.0"

__all__ = [
    "ARFit",
    "ARSpec",
    "DegenerateInputError",
    "DiagnosticResult",
    "FitFailureError",
    "GARCHFit",
    "GARCHOrderSelection",
    "GARCHSpec",
    "PRESETS",
    "Panel",
    "PipelineConfig",
    "PipelineError",
    "PipelineReport",
    "QQData",
    "StudyScenario",
    "StudySummary",
    "cross_correlation_matrix",
    "fit_ar",
    "fit_garch",
    "fit_identified",
    "garch_log_likelihood",
    "generate_panel",
    "get_preset",
    "identify_ar_order",
    "identify_garch_order",
    "li_mak",
    "ljung_box",
    "mcleod_li",
    "qq_normal",
    "run_pipeline",
    "run_study",
    "sample_acf",
    "sample_pacf",
    "significance_limit",
    "simulate_ar",
    "simulate_garch",
]
