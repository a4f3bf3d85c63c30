"""Nonlinear modal interval regression."""

from ._mir import (
    Band,
    FitResult,
    FormatError,
    InvalidArgument,
    ModalInterval,
    NumericalError,
    detect_rhythms,
    fit,
    generate,
    load_model,
    mcwc,
    select_bandwidth,
    select_lambda,
    shortest_interval,
    true_mi_lognormal,
    true_mi_normal,
)

__all__ = [
    "Band",
    "FitResult",
    "FormatError",
    "InvalidArgument",
    "ModalInterval",
    "NumericalError",
    "detect_rhythms",
    "fit",
    "generate",
    "load_model",
    "mcwc",
    "select_bandwidth",
    "select_lambda",
    "shortest_interval",
    "true_mi_lognormal",
    "true_mi_normal",
]
