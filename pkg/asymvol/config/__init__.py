"""
Configuration package
"""

from .config import (
    Config, DevelopmentConfig, ProductionConfig, config,
    RunConfig, SUBCOMMANDS, parse_bandwidth
)
from .exceptions import (
    AsymVolError,
    UsageError,
    ValidationError,
    DataError,
    ParseError,
    InsufficientDataError,
    UnavailableFieldError,
    RowRejectionError,
    UnpairedForecastsError,
    NumericalError,
    RankDeficiencyError,
    IdenticalForecastsError,
    ExplosiveDGPError
)

__all__ = [
    'Config', 'DevelopmentConfig', 'ProductionConfig', 'config',
    'RunConfig', 'SUBCOMMANDS', 'parse_bandwidth',
    'AsymVolError', 'UsageError', 'ValidationError', 'DataError',
    'ParseError', 'InsufficientDataError', 'UnavailableFieldError',
    'RowRejectionError', 'UnpairedForecastsError', 'NumericalError',
    'RankDeficiencyError', 'IdenticalForecastsError', 'ExplosiveDGPError'
]
