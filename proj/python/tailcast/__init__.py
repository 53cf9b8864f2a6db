"""Threshold-exceedance forecasting and verification for daily temperature anomalies."""

from ._core import (
    ARModel,
    Climatology,
    Series,
    TailcastError,
    ar1_expected_brier,
    auc,
    auc_delong_ci,
    autocorrelation,
    brier,
    bss,
    cebr_expected_brier,
    compute_anomalies,
    dressed_exceedance_prob,
    empirical_cebr,
    exceedance_prob,
    fit_ar,
    fit_ar1,
    fit_climatology,
    load_series,
    roc_curve,
    run_cli,
    simulate_ar1,
    theoretical_bss,
    theoretical_cebr,
    threshold_from_quantile,
    wang_kernel_width,
)

__version__ = "0.1.0"
