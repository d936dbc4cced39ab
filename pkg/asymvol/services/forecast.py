"""
Rolling-window one-day-ahead forecasts of ln RV
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..config.config import Config
from ..config.exceptions import (
    DataError, InsufficientDataError, RankDeficiencyError, ValidationError
)
from .estimation import COND_LIMIT, ols
from .features import MODEL_IDS, DesignMatrix, ModelSpec, build_design
from .ingest import data_lines, raise_first_failure, read_frame
from .measures import DailyMeasures
from .models import FitOptions, build_suite_designs

logger = logging.getLogger(__name__)

WINDOW_UNITS = ('rows', 'days')
FORECAST_HEADER = 'date,model,predicted_lnrv,realized_lnrv'


@dataclass(frozen=True)
class ForecastRecord:
    date: date
    model_id: str
    predicted: float
    realized: float
    window_start: Optional[date] = None
    window_end: Optional[date] = None

    @property
    def error(self) -> float:
        return self.predicted - self.realized


@dataclass
class ForecastPanel:
    """Forecast records of several models on paired target dates"""
    records: Dict[str, List[ForecastRecord]] = field(default_factory=dict)
    skipped: List[Tuple[date, str, str]] = field(default_factory=list)
    window: int = Config.WINDOW
    unit: str = Config.WINDOW_UNIT

    @property
    def model_ids(self) -> List[str]:
        known = [m for m in MODEL_IDS if m in self.records]
        return known + sorted(m for m in self.records if m not in MODEL_IDS)

    def dates(self) -> List[date]:
        first = self.model_ids[0] if self.records else None
        return [r.date for r in self.records.get(first, [])]

    def __getitem__(self, model_id: str) -> List[ForecastRecord]:
        return self.records[model_id]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {'date': r.date.isoformat(), 'model': m, 'predicted_lnrv': r.predicted,
             'realized_lnrv': r.realized, '_order': i}
            for i, m in enumerate(self.model_ids) for r in self.records[m]
        ]
        frame = pd.DataFrame(rows, columns=['date', 'model', 'predicted_lnrv', 'realized_lnrv', '_order'])
        frame = frame.sort_values(['date', '_order'], kind='mergesort')
        return frame.drop(columns='_order').reset_index(drop=True)


def _window_bounds(design: DesignMatrix, window: int, unit: str) -> List[Tuple[int, int, int]]:
    """
    (first fit row, last fit row, target row) per origin.

    `rows` counts regression rows; `days` counts trading days of the
    measures calendar ending the day before the target.
    """
    if unit not in WINDOW_UNITS:
        raise ValidationError(f"Window unit must be one of {WINDOW_UNITS}, got {unit}")
    nobs = design.nobs
    if unit == 'rows':
        return [(o - window + 1, o, o + 1) for o in range(window - 1, nobs - 1)]

    days = design.day_index if design.day_index is not None else np.arange(nobs)
    bounds = []
    for target in range(1, nobs):
        first_day = days[target] - window
        if first_day < days[0]:
            continue
        start = int(np.searchsorted(days, first_day, side='left'))
        bounds.append((start, target - 1, target))
    return bounds


def rolling_forecast_rows(design: DesignMatrix, window: int = Config.WINDOW,
                          unit: str = Config.WINDOW_UNIT, cond_limit: float = COND_LIMIT,
                          progress: bool = False) -> Tuple[List[ForecastRecord], List[Tuple[date, str, str]]]:
    """
    Refit OLS on every window and predict the next row's target.

    Returns:
        Tuple of (records in target-date order, skipped (date, model, reason))
    """
    if window < 2:
        raise ValidationError(f"Window must be >= 2, got {window}")
    if design.nobs < window + 1:
        raise InsufficientDataError(
            f"{design.model_id}: {design.nobs} usable rows, rolling window {window} needs {window + 1}")
    if unit == 'rows' and window <= design.k:
        raise InsufficientDataError(
            f"{design.model_id}: window {window} must exceed the {design.k} regressors")

    records, skipped = [], []
    bounds = _window_bounds(design, window, unit)
    for start, end, target in tqdm(bounds, desc=design.model_id, disable=not progress, leave=False):
        try:
            b, _ = ols(design.X[start:end + 1], design.y[start:end + 1], design.names, cond_limit)
        except (RankDeficiencyError, InsufficientDataError) as e:
            skipped.append((design.dates[target], design.model_id, e.message))
            logger.warning(f"{design.model_id}: skipped window ending {design.dates[end]}: {e.message}")
            continue
        records.append(ForecastRecord(
            date=design.dates[target],
            model_id=design.model_id,
            predicted=float(design.X[target] @ b),
            realized=float(design.y[target]),
            window_start=design.dates[start],
            window_end=design.dates[end]
        ))
        logger.debug(f"{design.model_id}: forecast {design.dates[target]} from {design.dates[start]}..{design.dates[end]}")
    return records, skipped


def rolling_forecast(measures: Sequence[DailyMeasures], spec: ModelSpec,
                     window: int = Config.WINDOW, unit: str = Config.WINDOW_UNIT,
                     options: Optional[FitOptions] = None) -> List[ForecastRecord]:
    """One-step-ahead rolling forecasts of a single model"""
    options = options or FitOptions()
    design = build_design(measures, spec, options.max_reject_fraction)
    records, _ = rolling_forecast_rows(design, window, unit, options.cond_limit)
    logger.info(f"{spec.id}: {len(records)} rolling forecasts (window {window} {unit})")
    return records


def rolling_forecast_suite(measures: Sequence[DailyMeasures], window: int = Config.WINDOW,
                           unit: str = Config.WINDOW_UNIT, options: Optional[FitOptions] = None,
                           progress: bool = False) -> ForecastPanel:
    """
    Rolling forecasts of every available model on the common row set.

    A target date skipped by any model is dropped from every model.
    """
    options = options or FitOptions()
    designs, _ = build_suite_designs(measures, options)

    with ThreadPoolExecutor(max_workers=options.threads) as executor:
        futures = {
            m: executor.submit(rolling_forecast_rows, d, window, unit, options.cond_limit, progress)
            for m, d in designs.items()
        }
        results = {m: futures[m].result() for m in MODEL_IDS if m in futures}

    skipped = [s for m in results for s in results[m][1]]
    bad_dates = {s[0] for s in skipped}
    if bad_dates:
        logger.warning(f"Dropping {len(bad_dates)} target dates skipped by at least one model")
    records = {m: [r for r in recs if r.date not in bad_dates] for m, (recs, _) in results.items()}

    panel = ForecastPanel(records=records, skipped=skipped, window=window, unit=unit)
    logger.info(f"Rolling forecasts: {len(panel.dates())} dates x {len(records)} models")
    return panel


def write_forecasts(path: str, panel: ForecastPanel):
    with open(path, 'w') as f:
        f.write(f"# one-day-ahead forecasts in ln RV units (raw RV, no scaling); "
                f"window {panel.window} {panel.unit}\n")
        panel.to_frame().to_csv(f, index=False, float_format='%.17g')


def load_forecasts(stream: Union[str, Iterable[str]]) -> ForecastPanel:
    """Parse a forecast CSV back into a panel"""
    text, lines = data_lines(stream)
    if not lines:
        raise DataError("Forecast file is empty")
    frame = read_frame(text, lines, 'forecast', dtype={'date': str, 'model': str},
                       float_precision='round_trip')
    missing = [c for c in FORECAST_HEADER.split(',') if c not in frame.columns]
    if missing:
        raise DataError(f"Forecast file is missing columns: {missing}")

    raw_day = frame['date'].str.strip()
    days = pd.to_datetime(raw_day, format='%Y-%m-%d', errors='coerce')
    checks = [(days.isna(), 'Malformed date', raw_day),
              (frame['model'].isna(), 'Missing model', frame['model'])]
    for col in ('predicted_lnrv', 'realized_lnrv'):
        values = pd.to_numeric(frame[col], errors='coerce')
        checks.append((values.isna(), f"Malformed {col}", frame[col]))
        frame[col] = values.astype(np.float64)
    raise_first_failure(checks, lines)

    records: Dict[str, List[ForecastRecord]] = {}
    for day, row in zip(days, frame.itertuples(index=False)):
        model_id = row.model.strip()
        records.setdefault(model_id, []).append(ForecastRecord(
            date=day.date(),
            model_id=model_id,
            predicted=float(row.predicted_lnrv),
            realized=float(row.realized_lnrv)
        ))
    for recs in records.values():
        recs.sort(key=lambda r: r.date)
    return ForecastPanel(records=records)


def read_forecasts(path: str) -> ForecastPanel:
    with open(path) as f:
        return load_forecasts(f.read())
