"""
Forecast evaluation for asymvol
Loss functions on ln RV forecasts and Diebold-Mariano comparisons
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Sequence

import numpy as np
from scipy import special, stats

from ..config.config import Config
from ..config.exceptions import (
    DataError, IdenticalForecastsError, InsufficientDataError,
    UnpairedForecastsError, ValidationError
)
from .estimation import STAR_MARKS
from .forecast import ForecastPanel, ForecastRecord

logger = logging.getLogger(__name__)

LOSS_KINDS = ('mse', 'mae', 'hmse', 'hmae')
RATIO_LOSSES = ('hmse', 'hmae')


@dataclass
class LossReport:
    model_id: str
    mse: float
    mae: float
    hmse: float
    hmae: float
    m: int
    excluded: int = 0

    def get(self, kind: str) -> float:
        return getattr(self, _check_kind(kind))

    def to_dict(self) -> Dict[str, object]:
        return {'model': self.model_id, 'mse': self.mse, 'mae': self.mae,
                'hmse': self.hmse, 'hmae': self.hmae, 'm': self.m, 'excluded': self.excluded}


@dataclass
class DmResult:
    benchmark: str
    comparison: str
    loss: str
    statistic: float
    p_value: float
    m: int
    lrv_lag: int
    infinite: bool = False
    hln: bool = False

    @property
    def significance(self) -> str:
        if self.infinite:
            return '1%'
        for level, alpha in (('1%', 0.01), ('5%', 0.05), ('10%', 0.10)):
            if self.p_value <= alpha:
                return level
        return 'none'

    @property
    def stars(self) -> str:
        return STAR_MARKS[self.significance]

    def to_dict(self) -> Dict[str, object]:
        return {
            'benchmark': self.benchmark,
            'comparison': self.comparison,
            'loss': self.loss,
            'statistic': self.statistic,
            'p_value': self.p_value,
            'm': self.m,
            'lrv_lag': self.lrv_lag,
            'significance': self.significance,
            'infinite': self.infinite,
            'hln': self.hln
        }


def _check_kind(kind: str) -> str:
    kind = kind.lower()
    if kind not in LOSS_KINDS:
        raise ValidationError(f"Unknown loss: {kind}. Known losses: {list(LOSS_KINDS)}")
    return kind


def loss_series(records: Sequence[ForecastRecord], kind: str) -> np.ndarray:
    """
    Per-record loss; ratio losses are NaN where the realized ln RV is 0.
    """
    kind = _check_kind(kind)
    p = np.array([r.predicted for r in records], dtype=np.float64)
    a = np.array([r.realized for r in records], dtype=np.float64)
    if kind == 'mse':
        return (p - a) ** 2
    if kind == 'mae':
        return np.abs(p - a)
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(a != 0.0, 1.0 - p / a, np.nan)
    return ratio ** 2 if kind == 'hmse' else np.abs(ratio)


def losses(records: Sequence[ForecastRecord],
           max_exclude_fraction: float = Config.MAX_REJECT_FRACTION) -> LossReport:
    """MSE, MAE, HMSE and HMAE of one model's forecasts"""
    m = len(records)
    if m < 1:
        raise InsufficientDataError("No forecast records to evaluate")
    model_id = records[0].model_id

    excluded = sum(1 for r in records if r.realized == 0.0)
    if excluded:
        logger.warning(f"{model_id}: {excluded} records with realized ln RV = 0 excluded from ratio losses")
        if excluded > max_exclude_fraction * m:
            raise DataError(f"{model_id}: {excluded} of {m} records have realized ln RV = 0",
                            payload={'model': model_id, 'excluded': excluded})

    values = {}
    for kind in LOSS_KINDS:
        series = loss_series(records, kind)
        series = series[~np.isnan(series)]
        values[kind] = math.fsum(series) / len(series) if len(series) else math.nan
    return LossReport(model_id=model_id, m=m, excluded=excluded, **values)


def loss_table(panel: ForecastPanel) -> List[LossReport]:
    return [losses(panel[m]) for m in panel.model_ids]


def best_models(reports: Sequence[LossReport]) -> Dict[str, str]:
    """Model with the smallest value of each loss; first in model order on ties"""
    return {kind: min(reports, key=lambda r: r.get(kind)).model_id for kind in LOSS_KINDS}


def long_run_variance(d: np.ndarray, lag: int = 0) -> float:
    """
    Bartlett long-run variance with T-denominator autocovariances.
    Lag 0 is the plain (biased) sample variance.
    """
    d = np.asarray(d, dtype=np.float64)
    T = len(d)
    u = d - d.mean()
    lrv = float(np.dot(u, u)) / T
    for l in range(1, lag + 1):
        gamma = float(np.dot(u[l:], u[:-l])) / T
        lrv += 2.0 * (1.0 - l / (lag + 1.0)) * gamma
    return lrv


def _paired(bench: Sequence[ForecastRecord], comp: Sequence[ForecastRecord]):
    b_dates = [r.date for r in bench]
    c_dates = [r.date for r in comp]
    if b_dates != c_dates:
        unmatched = sorted(set(b_dates).symmetric_difference(c_dates))
        raise UnpairedForecastsError(
            f"Forecast dates are not paired ({len(b_dates)} vs {len(c_dates)}, "
            f"{len(unmatched)} unmatched)",
            payload={'unmatched': [d.isoformat() for d in unmatched[:10]]})


def dm_test(bench: Sequence[ForecastRecord], comp: Sequence[ForecastRecord],
            loss: str = 'mse', lrv_lag: int = Config.DM_LAG, hln: bool = Config.DM_HLN,
            min_obs: int = Config.MIN_DM_OBS) -> DmResult:
    """
    Diebold-Mariano test of equal predictive accuracy.

    d_t = L(bench_t) - L(comp_t); a positive statistic means the comparison
    model has the smaller loss.

    Args:
        bench: Benchmark model records
        comp: Comparison model records on the same dates
        loss: One of mse, mae, hmse, hmae
        lrv_lag: Bartlett lag of the long-run variance
        hln: Apply the Harvey-Leybourne-Newbold correction with Student-t p-values
        min_obs: Minimum number of paired forecasts

    Returns:
        DmResult
    """
    loss = _check_kind(loss)
    if lrv_lag < 0:
        raise ValidationError(f"DM lag must be >= 0, got {lrv_lag}")
    _paired(bench, comp)
    bench_id = bench[0].model_id if bench else ''
    comp_id = comp[0].model_id if comp else ''

    d = loss_series(bench, loss) - loss_series(comp, loss)
    d = d[~np.isnan(d)]
    m = len(d)
    if m < min_obs:
        raise InsufficientDataError(f"DM test needs at least {min_obs} paired forecasts, got {m}")

    mean = float(np.mean(d))
    lrv = long_run_variance(d, lrv_lag)
    if lrv <= 0.0:
        if mean == 0.0:
            raise IdenticalForecastsError(
                f"identical losses for {bench_id} and {comp_id} ({loss}): DM statistic undefined")
        logger.warning(f"DM {bench_id} vs {comp_id} ({loss}): zero loss-differential variance")
        return DmResult(bench_id, comp_id, loss, math.copysign(math.inf, mean), 0.0, m,
                        lrv_lag, infinite=True, hln=hln)

    statistic = mean / math.sqrt(lrv / m)
    if hln:
        h = lrv_lag + 1
        statistic *= math.sqrt((m + 1 - 2 * h + h * (h - 1) / m) / m)
        p_value = float(2.0 * stats.t.sf(abs(statistic), m - 1))
    else:
        p_value = float(special.erfc(abs(statistic) / math.sqrt(2.0)))
    return DmResult(bench_id, comp_id, loss, statistic, min(p_value, 1.0), m, lrv_lag, hln=hln)


def dm_matrix(panel: ForecastPanel, loss_kinds: Sequence[str] = LOSS_KINDS,
              lrv_lag: int = Config.DM_LAG, hln: bool = Config.DM_HLN,
              threads: int = Config.THREADS) -> List[DmResult]:
    """
    Upper-triangle benchmark x comparison grid in model order, per loss.
    """
    models = panel.model_ids
    reference = [r.date for r in panel[models[0]]]
    for m in models[1:]:
        if [r.date for r in panel[m]] != reference:
            raise UnpairedForecastsError(f"{m} forecasts are not paired with {models[0]}")

    cells = [(kind, b, c) for kind in map(_check_kind, loss_kinds)
             for b, c in combinations(models, 2)]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [executor.submit(dm_test, panel[b], panel[c], kind, lrv_lag, hln)
                   for kind, b, c in cells]
        results = [f.result() for f in futures]
    logger.info(f"Computed {len(results)} DM statistics over {len(models)} models")
    return results
