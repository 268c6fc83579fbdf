"""Effective-connectivity EEG channel selection (C++ core)."""

from ._core import (
    ConfigError,
    EcselectError,
    EpochSet,
    FormatError,
    NumericalError,
    VarModel,
    band_presets,
    bandpass_filter,
    ensemble_normalize,
    evaluate_channels,
    fit_var,
    gen_labeled_csp_dataset,
    icec,
    load_epochs,
    load_tensor,
    metric_spectrum,
    save_epochs,
    select_order,
    simulate_var,
)

__all__ = [
    "ConfigError",
    "EcselectError",
    "EpochSet",
    "FormatError",
    "NumericalError",
    "VarModel",
    "band_presets",
    "bandpass_filter",
    "ensemble_normalize",
    "evaluate_channels",
    "fit_var",
    "gen_labeled_csp_dataset",
    "icec",
    "load_epochs",
    "load_tensor",
    "metric_spectrum",
    "save_epochs",
    "select_order",
    "simulate_var",
]
