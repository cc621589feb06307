"""McDonald-normal distribution: exact evaluation, series expansions, shape
analysis, order statistics and maximum-likelihood inference."""

from .core import (McNParams, ModelKind, cdf, hazard, log_cdf, log_hazard, log_pdf,
                   log_sf, make_submodel, pdf, quantile, sample, survival)
from .errors import (DomainError, IngestionError, McNError, NumericError,
                     ParameterError, UnsupportedOrderError)
from .special_fn import SeriesConfig

__all__ = [
    "McNParams", "ModelKind", "SeriesConfig",
    "pdf", "log_pdf", "cdf", "log_cdf", "log_sf", "survival", "quantile",
    "sample", "hazard", "log_hazard", "make_submodel",
    "McNError", "DomainError", "ParameterError", "NumericError",
    "UnsupportedOrderError", "IngestionError",
]

__version__ = "0.1.0"
