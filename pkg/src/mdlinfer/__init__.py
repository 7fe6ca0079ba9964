"""Minimum-description-length inference for a medium number of features.

Each feature's two-group measurements are reduced to a t statistic whose
distribution depends only on a standardised effect size theta. The
statistics are coded under the null (theta0) and under a universal code for
the alternative chosen across features, giving per-feature information for
discrimination, model selection, and a mixture-based local false discovery
rate.
"""
from .coding import ApproxCode, CodingInput, ExactCode, FeatureCode, approx_code, exact_code, prepare
from .data import Dataset, IngestConfig, generate_synthetic, ingest_csv, preprocess
from .mixture import LfdrResult, MixtureFit, fit_mixture, fit_mixture_loo, lfdr, mixture_loglik
from .report import AnalysisReport, RunConfig, emit, run
from .selection import Scheme, SelectionResult, Smoothing, run_selection, select
from .statistics import (
    FOLDED_T,
    SIGNED_T,
    FeatureSample,
    ReducedStatistic,
    StatFamily,
    abs_two_sample_t,
    log_density,
    reduce,
    two_sample_t,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxCode", "CodingInput", "ExactCode", "FeatureCode", "approx_code", "exact_code", "prepare",
    "Dataset", "IngestConfig", "generate_synthetic", "ingest_csv", "preprocess",
    "LfdrResult", "MixtureFit", "fit_mixture", "fit_mixture_loo", "lfdr", "mixture_loglik",
    "AnalysisReport", "RunConfig", "emit", "run",
    "Scheme", "SelectionResult", "Smoothing", "run_selection", "select",
    "FOLDED_T", "SIGNED_T", "FeatureSample", "ReducedStatistic", "StatFamily",
    "abs_two_sample_t", "log_density", "reduce", "two_sample_t",
]
