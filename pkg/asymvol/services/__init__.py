"""
Volatility measurement, modelling and evaluation services
"""

from .ingest import (
    Dataset, IntradaySession, PriceTick, load_measures, parse_ticks, sessions_from_ticks, ticks_frame
)
from .measures import DailyMeasures, compute_daily, compute_dataset
from .features import MODEL_IDS, MODEL_SPECS, ModelSpec, aggregate, build_design, build_rows, leverage_vector
from .estimation import FitResult, adjusted_r2, newey_west_cov, ols, significance_stars
from .models import FitOptions, SuiteResult, fit_model, fit_suite
from .forecast import ForecastPanel, ForecastRecord, rolling_forecast, rolling_forecast_suite
from .evaluation import DmResult, LossReport, dm_matrix, dm_test, losses
from .diagnostics import DescriptiveRow, describe, ljung_box
from .simulator import SimConfig, SimTruth, simulate, simulate_har_dgp

__all__ = [
    'Dataset', 'IntradaySession', 'PriceTick', 'load_measures', 'parse_ticks', 'sessions_from_ticks',
    'ticks_frame',
    'DailyMeasures', 'compute_daily', 'compute_dataset',
    'MODEL_IDS', 'MODEL_SPECS', 'ModelSpec', 'aggregate', 'build_design', 'build_rows', 'leverage_vector',
    'FitResult', 'adjusted_r2', 'newey_west_cov', 'ols', 'significance_stars',
    'FitOptions', 'SuiteResult', 'fit_model', 'fit_suite',
    'ForecastPanel', 'ForecastRecord', 'rolling_forecast', 'rolling_forecast_suite',
    'DmResult', 'LossReport', 'dm_matrix', 'dm_test', 'losses',
    'DescriptiveRow', 'describe', 'ljung_box',
    'SimConfig', 'SimTruth', 'simulate', 'simulate_har_dgp',
]
