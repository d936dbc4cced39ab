"""
Feature construction for asymvol
Daily/weekly/monthly aggregates, leverage variables and per-model design matrices
"""

import logging
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from ..config.exceptions import (
    InsufficientDataError, RowRejectionError, UnavailableFieldError, UsageError
)
from .measures import DailyMeasures, measures_to_frame

logger = logging.getLogger(__name__)

WEEK = 5
MONTH = 22
# First regression target is the 24th trading day: its lag aggregates cover days 2-23
FIRST_TARGET = MONTH + 1

BASE_VARIABLES = ('rv', 'j', 'j_plus', 'j_minus', 'rsv_plus', 'rsv_minus', 'abs_r', 'r')
HORIZONS = (('d', 1), ('w', WEEK), ('m', MONTH))

# Block layouts: (regressor name, source base variable, transform)
_VOL_BLOCKS = {
    'RV': [('ln_rv', 'rv')],
    'RSV': [('ln_rsv_plus', 'rsv_plus'), ('ln_rsv_minus', 'rsv_minus')],
}
_JUMP_BLOCKS = {
    'J': [('ln1p_j', 'j')],
    'AJ': [('ln1p_j_plus', 'j_plus'), ('ln1p_j_minus', 'j_minus')],
}
_REQUIRED = {
    'RV': ('rv',),
    'RSV': ('rsv_plus', 'rsv_minus'),
    'J': ('j',),
    'AJ': ('j_plus', 'j_minus'),
    'LE': ('ret',),
}


@dataclass(frozen=True)
class ModelSpec:
    id: str
    vol: str
    jump: str
    leverage: bool

    def __post_init__(self):
        if self.vol not in _VOL_BLOCKS or self.jump not in _JUMP_BLOCKS:
            raise UsageError(f"Invalid model blocks: {self.vol}/{self.jump}")

    @property
    def blocks(self) -> Tuple[str, ...]:
        return (self.vol, self.jump) + (('LE',) if self.leverage else ())

    @property
    def vol_dim(self) -> int:
        return 3 * len(_VOL_BLOCKS[self.vol])

    @property
    def jump_dim(self) -> int:
        return 3 * len(_JUMP_BLOCKS[self.jump])

    @property
    def dimension(self) -> int:
        """Regressor count including the intercept"""
        return 1 + self.vol_dim + self.jump_dim + (6 if self.leverage else 0)

    @property
    def coefficient_names(self) -> List[str]:
        names = ['c']
        names += [f'alpha{i}' for i in range(1, self.vol_dim + 1)]
        names += [f'beta{i}' for i in range(1, self.jump_dim + 1)]
        if self.leverage:
            names += [f'delta{i}' for i in range(1, 7)]
        return names

    @property
    def regressor_names(self) -> List[str]:
        names = ['const']
        for prefix, _ in _VOL_BLOCKS[self.vol] + _JUMP_BLOCKS[self.jump]:
            names += [f'{prefix}_{h}' for h, _ in HORIZONS]
        if self.leverage:
            names += [f'abs_r_{h}' for h, _ in HORIZONS]
            names += [f'neg_abs_r_{h}' for h, _ in HORIZONS]
        return names

    @property
    def required_fields(self) -> Tuple[str, ...]:
        fields_ = ['rv']
        for block in self.blocks:
            fields_ += [f for f in _REQUIRED[block] if f not in fields_]
        return tuple(fields_)

    def to_dict(self) -> Dict[str, object]:
        return {'id': self.id, 'blocks': list(self.blocks), 'dimension': self.dimension}


MODEL_SPECS: Dict[str, ModelSpec] = {
    spec.id: spec for spec in (
        ModelSpec('HAR-J', 'RV', 'J', False),
        ModelSpec('HAR-AJ', 'RV', 'AJ', False),
        ModelSpec('HAR-J-LE', 'RV', 'J', True),
        ModelSpec('HAR-AJ-LE', 'RV', 'AJ', True),
        ModelSpec('RSV-J', 'RSV', 'J', False),
        ModelSpec('RSV-AJ', 'RSV', 'AJ', False),
        ModelSpec('RSV-J-LE', 'RSV', 'J', True),
        ModelSpec('RSV-AJ-LE', 'RSV', 'AJ', True),
    )
}
MODEL_IDS = tuple(MODEL_SPECS)


def get_spec(model_id: str) -> ModelSpec:
    try:
        return MODEL_SPECS[model_id.upper()]
    except KeyError:
        raise UsageError(f"Unknown model: {model_id}. Known models: {list(MODEL_IDS)}")


@dataclass
class AggregatedSeries:
    """
    Daily values with trailing 5- and 22-trading-day means per base variable.

    Columns are `<var>_d`, `<var>_w`, `<var>_m`; NaN marks insufficient
    history or an unavailable variable.
    """
    frame: pd.DataFrame
    available: Tuple[str, ...]

    @property
    def dates(self) -> List[date]:
        return list(self.frame.index)


@dataclass(frozen=True)
class FeatureRow:
    date: date
    target: float
    regressors: np.ndarray
    names: Tuple[str, ...]


@dataclass
class DesignMatrix:
    """Stacked regression rows of one model"""
    model_id: str
    dates: List[date]
    X: np.ndarray
    y: np.ndarray
    names: List[str]
    regressor_names: List[str]
    rejected: List[Tuple[date, str]] = field(default_factory=list)
    day_index: Optional[np.ndarray] = None

    @property
    def nobs(self) -> int:
        return int(self.X.shape[0])

    @property
    def k(self) -> int:
        return int(self.X.shape[1])

    def to_rows(self) -> List[FeatureRow]:
        names = tuple(self.regressor_names)
        return [FeatureRow(d, float(t), self.X[i].copy(), names)
                for i, (d, t) in enumerate(zip(self.dates, self.y))]

    def subset(self, keep: Sequence[date]) -> 'DesignMatrix':
        """Rows whose date is in `keep`, order preserved"""
        wanted = set(keep)
        mask = np.array([d in wanted for d in self.dates], dtype=bool)
        return DesignMatrix(
            model_id=self.model_id,
            dates=[d for d, m in zip(self.dates, mask) if m],
            X=self.X[mask],
            y=self.y[mask],
            names=list(self.names),
            regressor_names=list(self.regressor_names),
            rejected=list(self.rejected),
            day_index=None if self.day_index is None else self.day_index[mask]
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.X[:, 1:], columns=self.regressor_names[1:])
        frame.insert(0, 'target', self.y)
        frame.insert(0, 'date', [d.isoformat() for d in self.dates])
        return frame


def _trailing_mean(values: np.ndarray, window: int) -> np.ndarray:
    out = np.full(values.shape, np.nan)
    if len(values) >= window:
        out[window - 1:] = sliding_window_view(values, window).mean(axis=1)
    return out


def aggregate(measures: Sequence[DailyMeasures]) -> AggregatedSeries:
    """Trailing 5/22 trading-day means of every base variable"""
    for prev, cur in zip(measures, measures[1:]):
        if cur.date <= prev.date:
            raise InsufficientDataError(f"Measures must be strictly increasing by date ({cur.date})")

    base = measures_to_frame(measures)
    base['r'] = base['ret']
    base['abs_r'] = base['ret'].abs()

    columns = {}
    available = []
    for var in BASE_VARIABLES:
        values = base[var].to_numpy(dtype=np.float64)
        if len(values) and not np.isnan(values).any():
            available.append(var)
        columns[f'{var}_d'] = values
        columns[f'{var}_w'] = _trailing_mean(values, WEEK)
        columns[f'{var}_m'] = _trailing_mean(values, MONTH)

    frame = pd.DataFrame(columns, index=base.index)
    return AggregatedSeries(frame=frame, available=tuple(available))


def _leverage_block(abs_r: Sequence[float], signed: Sequence[float]) -> List[float]:
    """|r| magnitudes followed by the same magnitudes gated on a negative signed mean"""
    mags = list(abs_r)
    return mags + [m if s < 0 else 0.0 for m, s in zip(mags, signed)]


def leverage_vector(measures: Sequence[DailyMeasures], t: date) -> np.ndarray:
    """
    Return variables for target date t, built from days up to t-1:
    (|r|, |r|^w, |r|^m, |r| I{r<0}, |r|^w I{r^w<0}, |r|^m I{r^m<0}).
    """
    dates = [m.date for m in measures]
    try:
        idx = dates.index(t)
    except ValueError:
        raise InsufficientDataError(f"Date {t} not in measures")
    if idx < MONTH:
        raise InsufficientDataError(f"Leverage vector for {t} needs {MONTH} prior days, have {idx}")
    history = measures[idx - MONTH:idx]
    if any(m.ret is None for m in history):
        raise UnavailableFieldError("Daily returns are unavailable")
    r = np.array([m.ret for m in history], dtype=np.float64)
    abs_r = np.abs(r)
    return np.array(_leverage_block(
        (abs_r[-1], abs_r[-WEEK:].mean(), abs_r.mean()),
        (r[-1], r[-WEEK:].mean(), r.mean())
    ))


def lagged_regressors(history: Dict[str, np.ndarray], spec: ModelSpec) -> np.ndarray:
    """
    Regressor vector (intercept included) from the last 22 daily values of
    each base variable, oldest first.
    """
    def three(var):
        x = history[var]
        return x[-1], x[-WEEK:].mean(), x[-MONTH:].mean()

    out = [1.0]
    for _, var in _VOL_BLOCKS[spec.vol]:
        out += [np.log(v) for v in three(var)]
    for _, var in _JUMP_BLOCKS[spec.jump]:
        out += [np.log1p(v) for v in three(var)]
    if spec.leverage:
        abs_r = np.abs(history['r'])
        out += _leverage_block(
            (abs_r[-1], abs_r[-WEEK:].mean(), abs_r[-MONTH:].mean()),
            three('r')
        )
    return np.array(out, dtype=np.float64)


def check_available(measures: Sequence[DailyMeasures], spec: ModelSpec):
    missing = [f for f in spec.required_fields if any(getattr(m, f) is None for m in measures)]
    if missing:
        raise UnavailableFieldError(f"{spec.id} needs unavailable fields: {missing}",
                                    payload={'model': spec.id, 'fields': missing})


def build_design(measures: Sequence[DailyMeasures],
                 spec: ModelSpec,
                 max_reject_fraction: float = 0.01,
                 aggregated: Optional[AggregatedSeries] = None) -> DesignMatrix:
    """
    Regression rows of one model: target ln RV_t, regressors from day t-1 aggregates.

    Rows needing the log of a zero RV/RSV quantity are rejected and reported;
    more than `max_reject_fraction` rejected rows is an error.
    """
    if len(measures) < FIRST_TARGET + 1:
        raise InsufficientDataError(
            f"{spec.id}: need at least {FIRST_TARGET + 1} days of measures, got {len(measures)}")
    check_available(measures, spec)

    agg = aggregated if aggregated is not None else aggregate(measures)
    lag = agg.frame.shift(1).iloc[FIRST_TARGET:]
    cur = agg.frame.iloc[FIRST_TARGET:]

    log_args = [cur['rv_d'].to_numpy()[:, None]]
    cols = []
    for _, var in _VOL_BLOCKS[spec.vol]:
        block = lag[[f'{var}_{h}' for h, _ in HORIZONS]].to_numpy()
        log_args.append(block)
        with np.errstate(divide='ignore'):
            cols.append(np.log(block))
    for _, var in _JUMP_BLOCKS[spec.jump]:
        cols.append(np.log1p(lag[[f'{var}_{h}' for h, _ in HORIZONS]].to_numpy()))
    if spec.leverage:
        abs_block = lag[[f'abs_r_{h}' for h, _ in HORIZONS]].to_numpy()
        signed = lag[[f'r_{h}' for h, _ in HORIZONS]].to_numpy()
        cols.append(abs_block)
        cols.append(np.where(signed < 0, abs_block, 0.0))

    nrows = len(cur)
    X = np.column_stack([np.ones(nrows)] + cols)
    with np.errstate(divide='ignore'):
        y = np.log(cur['rv_d'].to_numpy())

    zero_log = (np.column_stack(log_args) <= 0).any(axis=1)
    non_finite = ~np.isfinite(X).all(axis=1) | ~np.isfinite(y)
    bad = zero_log | non_finite

    all_dates = list(cur.index)
    rejected = []
    for i in np.flatnonzero(bad):
        reason = 'log of zero RV/RSV' if zero_log[i] else 'non-finite regressor'
        rejected.append((all_dates[i], reason))
        logger.warning(f"{spec.id}: rejected row {all_dates[i]}: {reason}")

    if nrows and len(rejected) > max_reject_fraction * nrows:
        raise RowRejectionError(
            f"{spec.id}: {len(rejected)} of {nrows} rows rejected (limit {max_reject_fraction:.1%})",
            payload={'model': spec.id, 'rejected': len(rejected), 'rows': nrows})

    keep = ~bad
    design = DesignMatrix(
        model_id=spec.id,
        dates=[d for d, k in zip(all_dates, keep) if k],
        X=X[keep],
        y=y[keep],
        names=spec.coefficient_names,
        regressor_names=spec.regressor_names,
        rejected=rejected,
        day_index=np.arange(FIRST_TARGET, FIRST_TARGET + nrows)[keep]
    )
    logger.info(f"Built {design.nobs} rows for {spec.id} ({len(rejected)} rejected)")
    return design


def build_rows(measures: Sequence[DailyMeasures], spec: ModelSpec) -> List[FeatureRow]:
    """One FeatureRow per date with full history"""
    return build_design(measures, spec).to_rows()


def write_design(path: str, design: DesignMatrix):
    """Design-matrix CSV dump: date,target,<named regressors>"""
    with open(path, 'w') as f:
        f.write(f"# {design.model_id} design matrix; target ln RV_t; RV/RSV in raw squared-return units before logs\n")
        design.to_frame().to_csv(f, index=False, float_format='%.17g')
