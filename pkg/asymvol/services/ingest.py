"""
Ingest service for asymvol
Parses intraday tick files and realized-measure files into calendar-ordered data
"""

import io
import logging
import math
import re
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..config.exceptions import DataError, ParseError, ValidationError
from .measures import DailyMeasures, jump_component, signed_jumps

logger = logging.getLogger(__name__)

TICK_HEADER = ('timestamp', 'price')
TICK_COLUMNS = ('timestamp', 'price', 'session_date')
MEASURE_COLUMNS = ('date', 'rv')
OPTIONAL_MEASURE_COLUMNS = ('rsv_plus', 'rsv_minus', 'bv', 'ret', 'j', 'j_plus', 'j_minus', 'n')
RSV_SUM_TOLERANCE = 1e-6
_TOKENIZER_LINE = re.compile(r'line (\d+)')


@dataclass(frozen=True)
class PriceTick:
    timestamp: datetime
    price: float
    trading_date: Optional[date] = None

    @property
    def session_date(self) -> date:
        return self.trading_date if self.trading_date is not None else self.timestamp.date()


@dataclass(frozen=True)
class IntradaySession:
    """One trading day of within-day log returns"""
    date: date
    returns: np.ndarray

    @property
    def n(self) -> int:
        return int(len(self.returns))


@dataclass
class Dataset:
    sessions: List[IntradaySession]
    market: str = 'market'
    dropped: List[Tuple[date, int]] = field(default_factory=list)

    def __post_init__(self):
        for prev, cur in zip(self.sessions, self.sessions[1:]):
            if cur.date <= prev.date:
                raise DataError(f"Sessions not strictly increasing by date at {cur.date}")
        for s in self.sessions:
            if s.n < 1:
                raise DataError(f"Session {s.date} has no intraday returns")

    def __len__(self):
        return len(self.sessions)

    def day_counts(self) -> Dict[date, int]:
        """Ticks per retained day (returns + 1)"""
        return {s.date: s.n + 1 for s in self.sessions}

    def regimes(self) -> List[Dict[str, object]]:
        """Consecutive runs of equal per-day return counts"""
        runs = []
        for s in self.sessions:
            if runs and runs[-1]['n'] == s.n:
                runs[-1]['last'] = s.date
                runs[-1]['days'] += 1
            else:
                runs.append({'n': s.n, 'first': s.date, 'last': s.date, 'days': 1})
        return runs


def data_lines(stream: Union[str, Iterable[str]]) -> Tuple[str, List[int]]:
    """
    Drop comment and blank lines.

    Returns:
        Tuple of (remaining CSV text, 1-based file line number of each kept
        line); the first kept line is the header
    """
    raw = stream.splitlines() if isinstance(stream, str) else stream
    kept, lines = [], []
    for lineno, line in enumerate(raw, start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith('#'):
            kept.append(stripped)
            lines.append(lineno)
    return '\n'.join(kept) + '\n', lines


def read_frame(text: str, lines: List[int], what: str, **kwargs) -> pd.DataFrame:
    """pd.read_csv over data_lines output, tokenizer errors mapped to file lines"""
    try:
        return pd.read_csv(io.StringIO(text), comment='#', **kwargs)
    except pd.errors.EmptyDataError:
        raise DataError(f"{what} file is empty")
    except pd.errors.ParserError as e:
        match = _TOKENIZER_LINE.search(str(e))
        line = None
        if match and 0 < int(match.group(1)) <= len(lines):
            line = lines[int(match.group(1)) - 1]
        raise ParseError(f"Malformed {what} CSV: {e}", line=line)


def raise_first_failure(checks: Sequence[Tuple[pd.Series, str, pd.Series]], lines: List[int]):
    """
    Raise ParseError for the earliest failing row.

    checks: (failure mask, message, raw column) per check; ties on a row go to
    the earlier check. Row i of the frame sits on file line lines[i + 1].
    """
    failures = []
    for order, (mask, message, raw) in enumerate(checks):
        flags = mask.to_numpy(dtype=bool)
        if flags.any():
            failures.append((int(np.argmax(flags)), order, message, raw))
    if failures:
        pos, _, message, raw = min(failures, key=lambda f: (f[0], f[1]))
        raise ParseError(f"{message} {raw.iloc[pos]!r}", line=lines[pos + 1])


def parse_ticks(stream: Union[str, Iterable[str]]) -> pd.DataFrame:
    """
    Parse tick CSV text (`timestamp,price[,trading_date]`).

    The first non-comment line must be the header. Equal timestamps are
    accepted here and collapsed later; a decreasing timestamp is an error.

    Returns:
        DataFrame with columns timestamp, price, session_date (midnight of the
        trading day: the trading_date stamp when given, else the calendar day)
    """
    text, lines = data_lines(stream)
    if not lines:
        raise ParseError("Missing header line", line=1)

    header_line = text.split('\n', 1)[0]
    names = tuple(p.strip().lower() for p in header_line.split(','))
    if names[:2] != TICK_HEADER or len(names) > 3 or (len(names) == 3 and names[2] != 'trading_date'):
        raise ParseError(f"Expected header 'timestamp,price[,trading_date]', got {header_line!r}",
                         line=lines[0])

    frame = read_frame(text, lines, 'tick', dtype=str)
    frame.columns = list(names)

    raw_ts = frame['timestamp'].str.strip()
    raw_price = frame['price'].str.strip()
    ts = pd.to_datetime(raw_ts, format='ISO8601', errors='coerce')
    price = pd.to_numeric(raw_price, errors='coerce').astype(np.float64)
    session = ts.dt.normalize()

    checks = [
        (ts.isna(), 'Malformed timestamp', raw_ts),
        (price.isna(), 'Malformed price', raw_price),
        (~np.isfinite(price) | (price <= 0), 'Price must be strictly positive, got', raw_price),
    ]
    if 'trading_date' in frame.columns:
        raw_day = frame['trading_date'].str.strip().replace('', np.nan)
        stamped = pd.to_datetime(raw_day, format='%Y-%m-%d', errors='coerce')
        checks.append((raw_day.notna() & stamped.isna(), 'Malformed trading_date', raw_day))
        session = stamped.where(stamped.notna(), session)
    checks.append((ts.diff() < pd.Timedelta(0), 'Timestamp is earlier than the previous tick:', raw_ts))
    raise_first_failure(checks, lines)

    ticks = pd.DataFrame({'timestamp': ts, 'price': price, 'session_date': session})
    logger.debug(f"Parsed {len(ticks)} ticks")
    return ticks


def load_ticks(path: str) -> pd.DataFrame:
    """Parse a tick CSV file"""
    with open(path, 'r') as f:
        return parse_ticks(f)


def ticks_frame(ticks: Iterable[PriceTick]) -> pd.DataFrame:
    """Tick frame (as parse_ticks returns) from PriceTick records"""
    ticks = list(ticks)
    return pd.DataFrame({
        'timestamp': pd.to_datetime([t.timestamp for t in ticks]),
        'price': np.array([t.price for t in ticks], dtype=np.float64),
        'session_date': pd.to_datetime([t.session_date for t in ticks]),
    }, columns=list(TICK_COLUMNS))


def sessions_from_ticks(ticks: Union[pd.DataFrame, Sequence[PriceTick]],
                        min_obs: int = 10,
                        market: str = 'market') -> Dataset:
    """
    Group ticks by trading date and compute within-day log returns.

    No return crosses a session boundary. Equal timestamps keep the last tick.
    Days with fewer than `min_obs` ticks are dropped and reported.
    """
    if min_obs < 2:
        raise ValidationError("min_obs must be at least 2")

    frame = ticks if isinstance(ticks, pd.DataFrame) else ticks_frame(ticks)
    frame = frame.drop_duplicates(subset=['session_date', 'timestamp'], keep='last')

    sessions = []
    dropped = []
    for day, prices in frame.groupby('session_date', sort=True)['price']:
        day = day.date()
        if len(prices) < min_obs:
            dropped.append((day, len(prices)))
            logger.warning(f"Dropped {day.isoformat()}: {len(prices)} ticks < min_obs {min_obs}")
            continue
        sessions.append(IntradaySession(day, np.diff(np.log(prices.to_numpy(dtype=np.float64)))))

    logger.info(f"Built {len(sessions)} sessions for {market}, dropped {len(dropped)} days")
    return Dataset(sessions=sessions, market=market, dropped=dropped)


def write_ticks(path: str, ticks: pd.DataFrame, header_comment: Optional[str] = None):
    """Write a tick frame in the tick CSV format"""
    out = pd.DataFrame({
        'timestamp': ticks['timestamp'].dt.strftime('%Y-%m-%dT%H:%M:%S'),
        'price': ticks['price'],
    })
    with open(path, 'w') as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        out.to_csv(f, index=False, float_format='%.17g')


def load_measures(stream: Union[str, Iterable[str]]) -> List[DailyMeasures]:
    """
    Read a realized-measures CSV (`date,rv[,rsv_plus,rsv_minus,bv,ret,...]`).

    Absent optional columns leave the matching fields as None. Derived fields
    (j, j_plus, j_minus) are computed when their inputs are present and the
    file does not carry them.
    """
    text, lines = data_lines(stream)
    if not lines:
        raise DataError("Measures file is empty")
    frame = read_frame(text, lines, 'measures', dtype={'date': str}, float_precision='round_trip')

    frame.columns = [c.strip().lower() for c in frame.columns]
    missing = [c for c in MEASURE_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"Measures file is missing mandatory columns: {missing}")
    unknown = [c for c in frame.columns if c not in MEASURE_COLUMNS + OPTIONAL_MEASURE_COLUMNS]
    if unknown:
        logger.warning(f"Ignoring unknown measures columns: {unknown}")

    raw_day = frame['date'].str.strip()
    days = pd.to_datetime(raw_day, format='%Y-%m-%d', errors='coerce')
    checks = [(days.isna(), 'Malformed date', raw_day)]
    numeric_cols = [c for c in MEASURE_COLUMNS[1:] + OPTIONAL_MEASURE_COLUMNS if c in frame.columns]
    for col in numeric_cols:
        values = pd.to_numeric(frame[col], errors='coerce')
        checks.append((values.isna() & frame[col].notna(), f"Malformed {col}", frame[col]))
        frame[col] = values.astype(np.float64)
    raise_first_failure(checks, lines)

    unordered = (days.diff() <= pd.Timedelta(0)).to_numpy(dtype=bool)
    if unordered.any():
        pos = int(np.argmax(unordered))
        raise DataError(f"line {lines[pos + 1]}: measures not strictly increasing by date at {raw_day.iloc[pos]}",
                        payload={'line': lines[pos + 1]})

    def optional(values, col) -> Optional[float]:
        value = values.get(col)
        return None if value is None or math.isnan(value) else float(value)

    records: List[DailyMeasures] = []
    for pos, (day, row) in enumerate(zip(days, frame.itertuples(index=False))):
        values = row._asdict()
        day = day.date()
        line = lines[pos + 1]

        rv = optional(values, 'rv')
        if rv is None or rv < 0:
            raise DataError(f"line {line}: {day}: rv must be a non-negative number, got {values['rv']}",
                            payload={'line': line})

        rsv_plus = optional(values, 'rsv_plus')
        rsv_minus = optional(values, 'rsv_minus')
        bv = optional(values, 'bv')
        ret = optional(values, 'ret')
        for name, v in (('rsv_plus', rsv_plus), ('rsv_minus', rsv_minus), ('bv', bv)):
            if v is not None and v < 0:
                raise DataError(f"line {line}: {day}: {name} must be non-negative, got {v}",
                                payload={'line': line})

        if rsv_plus is not None and rsv_minus is not None:
            total = rsv_plus + rsv_minus
            if abs(total - rv) > RSV_SUM_TOLERANCE * max(abs(rv), abs(total)):
                raise DataError(f"line {line}: {day}: rsv_plus + rsv_minus = {total!r} deviates from rv = {rv!r}",
                                payload={'line': line})

        j = optional(values, 'j')
        if j is None and bv is not None:
            j = jump_component(rv, bv)

        j_plus = optional(values, 'j_plus')
        j_minus = optional(values, 'j_minus')
        if (j_plus is None or j_minus is None) and None not in (rsv_plus, rsv_minus, bv):
            j_plus, j_minus = signed_jumps(rsv_plus, rsv_minus, bv)

        n = optional(values, 'n')

        records.append(DailyMeasures(
            date=day, rv=rv, bv=bv, rsv_plus=rsv_plus, rsv_minus=rsv_minus,
            j=j, j_plus=j_plus, j_minus=j_minus, ret=ret, n=None if n is None else int(n)
        ))

    logger.info(f"Loaded {len(records)} days of measures")
    return records


def read_measures(path: str) -> List[DailyMeasures]:
    """Load a measures CSV file"""
    with open(path, 'r') as f:
        return load_measures(f)
