"""
Descriptive statistics and Ljung-Box tests over daily measures
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from statsmodels.stats.diagnostic import acorr_ljungbox

from ..config.config import Config
from ..config.exceptions import InsufficientDataError, NumericalError
from .measures import DailyMeasures

logger = logging.getLogger(__name__)

KURTOSIS_CONVENTION = 'excess'


@dataclass
class DescriptiveRow:
    name: str
    mean: float
    median: float
    max: float
    min: float
    std_dev: float
    skewness: float
    kurtosis: float
    q20: Optional[float]
    q20_pvalue: Optional[float]
    n: int
    degenerate: bool = False
    scale: float = 1.0

    def scaled(self, factor: float) -> 'DescriptiveRow':
        """Location and dispersion multiplied by factor; shape and Q unchanged"""
        return replace(self, mean=self.mean * factor, median=self.median * factor,
                       max=self.max * factor, min=self.min * factor,
                       std_dev=self.std_dev * factor, scale=self.scale * factor)

    def to_dict(self) -> Dict[str, object]:
        return {
            'variable': self.name, 'mean': self.mean, 'median': self.median,
            'max': self.max, 'min': self.min, 'std_dev': self.std_dev,
            'skewness': self.skewness, 'kurtosis': self.kurtosis,
            'q20': self.q20, 'q20_pvalue': self.q20_pvalue, 'n': self.n,
            'degenerate': self.degenerate, 'scale': self.scale
        }


def ljung_box(series: Sequence[float], max_lag: int = Config.LJUNG_BOX_LAGS) -> Tuple[float, float]:
    """
    Ljung-Box Q = T(T+2) sum rho_k^2/(T-k) over biased sample autocorrelations,
    with a chi-square(max_lag) p-value.

    Returns:
        Tuple of (q, p_value)
    """
    T = len(series)
    if max_lag < 1:
        raise InsufficientDataError(f"Ljung-Box needs max_lag >= 1, got {max_lag}")
    if T <= max_lag + 1:
        raise InsufficientDataError(f"Ljung-Box with {max_lag} lags needs more than {max_lag + 1} points, got {T}")
    x = np.asarray(series, dtype=np.float64)
    if np.ptp(x) == 0.0:
        raise NumericalError("Autocorrelations undefined for a constant series")
    result = acorr_ljungbox(x, lags=[max_lag]).iloc[0]
    return float(result['lb_stat']), float(result['lb_pvalue'])


def describe(series: Sequence[float], name: str, max_lag: int = Config.LJUNG_BOX_LAGS) -> DescriptiveRow:
    """
    Moments (sample sd, skewness m3/m2^1.5, excess kurtosis) and Q(max_lag).

    Q is None when the series is too short. A constant series is flagged
    degenerate with NaN skewness and kurtosis.
    """
    x = np.asarray(series, dtype=np.float64)
    n = len(x)
    if n < 2:
        raise InsufficientDataError(f"{name}: describe needs at least 2 values, got {n}")

    degenerate = bool(np.all(x == x[0]))
    if degenerate:
        logger.warning(f"{name}: zero variance, skewness and kurtosis undefined")
        skewness = kurtosis = math.nan
        q = p = None
    else:
        skewness = float(stats.skew(x, bias=True))
        kurtosis = float(stats.kurtosis(x, fisher=True, bias=True))
        q = p = None
        if n > max_lag + 1:
            q, p = ljung_box(x, max_lag)

    return DescriptiveRow(
        name=name,
        mean=float(np.mean(x)),
        median=float(np.median(x)),
        max=float(np.max(x)),
        min=float(np.min(x)),
        std_dev=float(np.std(x, ddof=1)),
        skewness=skewness,
        kurtosis=kurtosis,
        q20=q,
        q20_pvalue=p,
        n=n,
        degenerate=degenerate
    )


def table_variables(measures: Sequence[DailyMeasures]) -> List[Tuple[str, np.ndarray, bool]]:
    """
    The fifteen descriptive-table variables that the measures support.

    Returns:
        List of (name, values, scaled-for-display) in table order
    """
    def column(attr):
        values = [getattr(m, attr) for m in measures]
        if any(v is None for v in values):
            return None
        return np.array(values, dtype=np.float64)

    rv, rsv_p, rsv_m = column('rv'), column('rsv_plus'), column('rsv_minus')
    j, j_p, j_m = column('j'), column('j_plus'), column('j_minus')
    r = column('ret')

    candidates = [
        ('RV', rv, True), ('RSV+', rsv_p, True), ('RSV-', rsv_m, True),
        ('J', j, True), ('J+', j_p, True), ('J-', j_m, True),
        ('r', r, False),
    ]
    with np.errstate(divide='ignore'):
        candidates += [
            ('ln RV', None if rv is None else np.log(rv), False),
            ('ln RSV+', None if rsv_p is None else np.log(rsv_p), False),
            ('ln RSV-', None if rsv_m is None else np.log(rsv_m), False),
        ]
    candidates += [
        ('ln(J+1)', None if j is None else np.log1p(j), True),
        ('ln(J++1)', None if j_p is None else np.log1p(j_p), True),
        ('ln(J-+1)', None if j_m is None else np.log1p(j_m), True),
        ('|r|', None if r is None else np.abs(r), False),
        ('|r|I{r<0}', None if r is None else np.where(r < 0, np.abs(r), 0.0), False),
    ]
    out = []
    for name, values, scaled in candidates:
        if values is None:
            logger.info(f"Descriptive table: {name} unavailable")
            continue
        if not np.all(np.isfinite(values)):
            logger.warning(f"Descriptive table: {name} has non-finite values, dropping them")
            values = values[np.isfinite(values)]
        out.append((name, values, scaled))
    return out


def describe_measures(measures: Sequence[DailyMeasures], display_scale: Optional[float] = Config.DISPLAY_SCALE,
                      max_lag: int = Config.LJUNG_BOX_LAGS) -> List[DescriptiveRow]:
    """Descriptive table; RV, RSV, jump and ln(J+1) rows multiplied by display_scale"""
    rows = []
    for name, values, scaled in table_variables(measures):
        row = describe(values, name, max_lag)
        if scaled and display_scale:
            row = row.scaled(display_scale)
        rows.append(row)
    return rows
