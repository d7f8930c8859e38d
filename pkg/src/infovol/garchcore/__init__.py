"""GARCH-family volatility models with an optional exogenous regressor."""
from .estimation import (
    FilterState,
    FitOptions,
    FitResult,
    VariancePath,
    filter,
    fit,
    forecast_oos,
    gaussian_nllh,
    nllh,
    predictive_nllh,
    simulate,
)
from .models import FAMILIES, ModelSpec, ParamVector, check_constraints
from .optimize import nelder_mead

__all__ = [
    "FAMILIES", "FilterState", "FitOptions", "FitResult", "ModelSpec", "ParamVector",
    "VariancePath", "check_constraints", "filter", "fit", "forecast_oos", "gaussian_nllh",
    "nelder_mead", "nllh", "predictive_nllh", "simulate",
]
