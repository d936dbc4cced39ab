"""
Realized measures for asymvol
RV, bipower variation, jump components, realized semivariances and signed jumps
"""

import logging
import math
from dataclasses import dataclass, asdict
from datetime import date
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..config.exceptions import DataError, InsufficientDataError

if TYPE_CHECKING:
    from .ingest import Dataset, IntradaySession

logger = logging.getLogger(__name__)

# mu_1 = E|Z| = sqrt(2/pi), so mu_1^-2 = pi/2
BV_SCALE = math.pi / 2.0

MEASURES_HEADER = ('date', 'rv', 'rsv_plus', 'rsv_minus', 'bv', 'ret', 'j', 'j_plus', 'j_minus', 'n')


@dataclass(frozen=True)
class DailyMeasures:
    """
    Per-day realized quantities in raw squared-return units.

    Optional fields are None when the source did not provide them.
    """
    date: date
    rv: float
    bv: Optional[float] = None
    rsv_plus: Optional[float] = None
    rsv_minus: Optional[float] = None
    j: Optional[float] = None
    j_plus: Optional[float] = None
    j_minus: Optional[float] = None
    ret: Optional[float] = None
    n: Optional[int] = None

    def has(self, *names: str) -> bool:
        return all(getattr(self, name) is not None for name in names)

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def _as_array(returns: Sequence[float]) -> np.ndarray:
    return np.asarray(returns, dtype=np.float64)


def realized_volatility(returns: Sequence[float]) -> float:
    """Sum of squared intraday returns"""
    r = _as_array(returns)
    if r.size == 0:
        raise InsufficientDataError("realized_volatility needs at least one return")
    return math.fsum(r * r)


def bipower_variation(returns: Sequence[float]) -> float:
    """(pi/2) * sum_{j>=2} |r_j| |r_{j-1}|"""
    r = _as_array(returns)
    if r.size < 2:
        raise InsufficientDataError("bipower_variation needs at least two returns")
    a = np.abs(r)
    return BV_SCALE * math.fsum(a[1:] * a[:-1])


def jump_component(rv: float, bv: float) -> float:
    """max(RV - BV, 0)"""
    if rv < 0 or bv < 0:
        raise DataError(f"jump_component needs non-negative inputs, got rv={rv}, bv={bv}")
    return max(rv - bv, 0.0)


def semivariances(returns: Sequence[float]) -> Tuple[float, float]:
    """
    Upside and downside realized semivariance.

    A zero return counts toward the upside part.
    """
    r = _as_array(returns)
    if r.size == 0:
        raise InsufficientDataError("semivariances needs at least one return")
    sq = r * r
    up = r >= 0
    return math.fsum(sq[up]), math.fsum(sq[~up])


def signed_jumps(rsv_plus: float, rsv_minus: float, bv: float) -> Tuple[float, float]:
    """(max(RSV+ - BV/2, 0), max(RSV- - BV/2, 0))"""
    if rsv_plus < 0 or rsv_minus < 0 or bv < 0:
        raise DataError("signed_jumps needs non-negative inputs")
    half = bv / 2.0
    return max(rsv_plus - half, 0.0), max(rsv_minus - half, 0.0)


def compute_daily(session: 'IntradaySession') -> DailyMeasures:
    """All realized quantities of one session"""
    if session.n < 2:
        raise InsufficientDataError(f"{session.date}: need at least 2 intraday returns, got {session.n}")

    r = _as_array(session.returns)
    rsv_plus, rsv_minus = semivariances(r)
    rv = realized_volatility(r)
    bv = bipower_variation(r)
    j_plus, j_minus = signed_jumps(rsv_plus, rsv_minus, bv)

    return DailyMeasures(
        date=session.date,
        rv=rv,
        bv=bv,
        rsv_plus=rsv_plus,
        rsv_minus=rsv_minus,
        j=jump_component(rv, bv),
        j_plus=j_plus,
        j_minus=j_minus,
        ret=math.fsum(r),
        n=session.n
    )


def compute_dataset(dataset: 'Dataset') -> List[DailyMeasures]:
    """compute_daily over every session, in date order"""
    measures = [compute_daily(s) for s in dataset.sessions]
    logger.info(f"Computed measures for {len(measures)} days ({dataset.market})")
    return measures


def measures_to_frame(measures: Iterable[DailyMeasures]) -> pd.DataFrame:
    """Date-indexed frame; unavailable fields become NaN"""
    rows = [m.to_dict() for m in measures]
    frame = pd.DataFrame(rows, columns=list(MEASURES_HEADER))
    frame = frame.set_index('date')
    float_cols = [c for c in MEASURES_HEADER if c not in ('date', 'n')]
    frame[float_cols] = frame[float_cols].astype(np.float64)
    return frame


def write_measures(path: str, measures: Iterable[DailyMeasures], header_comment: Optional[str] = None):
    """
    Write the measures CSV.

    Floats use 17 significant digits so the reader recovers them bit for bit.
    """
    frame = measures_to_frame(measures)
    frame['n'] = frame['n'].astype('Int64')
    with open(path, 'w') as f:
        f.write(f"# {header_comment or 'variances in raw squared log-return units (not scaled); ret in log-return units'}\n")
        frame.to_csv(f, index_label='date', float_format='%.17g', na_rep='')
