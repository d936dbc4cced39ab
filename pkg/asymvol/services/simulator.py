"""
Synthetic data for asymvol
Jump-diffusion intraday paths with known truth, and HAR-type daily DGPs
"""

import logging
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import signal

from ..config.exceptions import ExplosiveDGPError, ValidationError
from .features import MONTH, ModelSpec, lagged_regressors
from .ingest import Dataset, IntradaySession, ticks_frame
from .measures import DailyMeasures

logger = logging.getLogger(__name__)

VOL_MODELS = ('constant', 'log_ou')
JUMP_SIGNS = ('both', 'positive', 'negative')
START_DATE = '2000-01-03'
BURN_IN = 500
SECONDS_PER_SESSION = 86399


@dataclass
class SimConfig:
    """
    Parameters of dp = mu dt + sigma dW + k dq on the log price, one day = unit time.

    `sigma` is the constant daily volatility; with vol_model 'log_ou' the
    log volatility mean-reverts to `ou_mean` at speed `ou_persistence` per day
    with volatility `ou_vol`, and `rho` correlates its shocks with price shocks.
    """
    days: int = 1000
    n_per_day: int = 288
    mu: float = 0.0
    sigma: float = 0.01
    vol_model: str = 'constant'
    ou_mean: float = math.log(0.01)
    ou_persistence: float = 0.05
    ou_vol: float = 0.3
    rho: float = 0.0
    jump_intensity: float = 0.0
    jump_mean: float = 0.0
    jump_sd: float = 0.02
    jump_sign: str = 'both'
    seed: int = 0
    start: str = START_DATE
    p0: float = 100.0

    def validate(self):
        if self.days < 1:
            raise ValidationError(f"days must be >= 1, got {self.days}")
        if self.n_per_day < 2:
            raise ValidationError(f"n_per_day must be >= 2, got {self.n_per_day}")
        if self.vol_model not in VOL_MODELS:
            raise ValidationError(f"vol_model must be one of {VOL_MODELS}")
        if self.sigma < 0 or self.ou_vol < 0 or self.jump_sd < 0:
            raise ValidationError("Volatility parameters must be non-negative")
        if not 0.0 <= self.ou_persistence * (1.0 / self.n_per_day) < 1.0:
            raise ValidationError("ou_persistence must be >= 0 and below the step rate")
        if not -1.0 <= self.rho <= 1.0:
            raise ValidationError(f"rho must lie in [-1, 1], got {self.rho}")
        if self.jump_intensity < 0:
            raise ValidationError(f"jump_intensity must be >= 0, got {self.jump_intensity}")
        if self.jump_sign not in JUMP_SIGNS:
            raise ValidationError(f"jump_sign must be one of {JUMP_SIGNS}")
        if self.p0 <= 0:
            raise ValidationError("p0 must be positive")


@dataclass
class SimTruth:
    """Per-day integrated variance and squared jump sums"""
    dates: List[date]
    iv: np.ndarray
    jump2_plus: np.ndarray
    jump2_minus: np.ndarray
    jump_sizes: List[np.ndarray] = field(default_factory=list)

    @property
    def jump2(self) -> np.ndarray:
        return self.jump2_plus + self.jump2_minus

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'date': [d.isoformat() for d in self.dates],
            'iv': self.iv,
            'jump2_plus': self.jump2_plus,
            'jump2_minus': self.jump2_minus
        })


def trading_dates(days: int, start: str = START_DATE) -> List[date]:
    return [ts.date() for ts in pd.bdate_range(start=start, periods=days)]


def _step_volatility(config: SimConfig, rng: np.random.Generator,
                     z_price: np.ndarray) -> np.ndarray:
    """Per-step sigma_i (daily units) for every step of the path"""
    if config.vol_model == 'constant':
        return np.full(z_price.shape, config.sigma)

    dt = 1.0 / config.n_per_day
    phi = 1.0 - config.ou_persistence * dt
    z_other = rng.standard_normal(z_price.shape)
    z_vol = config.rho * z_price + math.sqrt(1.0 - config.rho ** 2) * z_other
    drive = config.ou_persistence * config.ou_mean * dt + config.ou_vol * math.sqrt(dt) * z_vol
    # h_{i+1} = phi h_i + drive_i with h_0 at the long-run mean
    h_next, _ = signal.lfilter([1.0], [1.0, -phi], drive, zi=[phi * config.ou_mean])
    h = np.concatenate(([config.ou_mean], h_next[:-1]))
    return np.exp(h)


def simulate(config: SimConfig) -> Tuple[Dataset, SimTruth]:
    """
    Euler path at step 1/n_per_day with compound-Poisson jumps in the log price.

    Returns:
        Tuple of (Dataset of intraday returns, SimTruth)
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n = config.n_per_day
    dt = 1.0 / n
    steps = config.days * n

    z = rng.standard_normal(steps)
    sigma = _step_volatility(config, rng, z)
    returns = (config.mu * dt + sigma * math.sqrt(dt) * z).reshape(config.days, n)
    iv = np.array([math.fsum(row) for row in (sigma ** 2 * dt).reshape(config.days, n)])

    counts = rng.poisson(config.jump_intensity, size=config.days)
    jump2_plus = np.zeros(config.days)
    jump2_minus = np.zeros(config.days)
    jump_sizes = []
    for d, count in enumerate(counts):
        sizes = rng.normal(config.jump_mean, config.jump_sd, size=count)
        if config.jump_sign == 'positive':
            sizes = np.abs(sizes)
        elif config.jump_sign == 'negative':
            sizes = -np.abs(sizes)
        positions = rng.integers(0, n, size=count)
        np.add.at(returns[d], positions, sizes)
        jump2_plus[d] = math.fsum(sizes[sizes >= 0] ** 2)
        jump2_minus[d] = math.fsum(sizes[sizes < 0] ** 2)
        jump_sizes.append(sizes)

    dates = trading_dates(config.days, config.start)
    sessions = [IntradaySession(dt_, returns[i].copy()) for i, dt_ in enumerate(dates)]
    dataset = Dataset(sessions=sessions, market='simulated')
    truth = SimTruth(dates=dates, iv=iv, jump2_plus=jump2_plus,
                     jump2_minus=jump2_minus, jump_sizes=jump_sizes)

    rv = np.sum(returns ** 2, axis=1)
    mean_iv = float(iv.mean())
    ratio = float(rv.mean() / mean_iv) if mean_iv > 0 else math.nan
    logger.info(f"Simulated {config.days} days x {n} steps: mean IV {mean_iv:.4e}, "
                f"mean jump^2 {float(truth.jump2.mean()):.4e}, mean RV/IV {ratio:.4f}")
    return dataset, truth


def dataset_ticks(dataset: Dataset, p0: float = 100.0) -> pd.DataFrame:
    """
    Tick frame of a dataset: each day opens at the previous close, ticks
    spread evenly from 00:00:00 within the day.
    """
    frames = []
    log_price = math.log(p0)
    for session in dataset.sessions:
        step = SECONDS_PER_SESSION // session.n
        start = pd.Timestamp(session.date)
        path = log_price + np.concatenate(([0.0], np.cumsum(session.returns)))
        frames.append(pd.DataFrame({
            'timestamp': start + pd.to_timedelta(np.arange(len(path)) * step, unit='s'),
            'price': np.exp(path),
            'session_date': start,
        }))
        log_price = float(path[-1])
    if not frames:
        return ticks_frame([])
    return pd.concat(frames, ignore_index=True)


def write_truth(path: str, truth: SimTruth):
    with open(path, 'w') as f:
        f.write("# simulation truth per day; iv and squared jump sums in raw log-return units\n")
        truth.to_frame().to_csv(f, index=False, float_format='%.17g')


def _coefficient_vector(coeffs: Union[Mapping[str, float], Sequence[float]], spec: ModelSpec) -> np.ndarray:
    names = spec.coefficient_names
    if isinstance(coeffs, Mapping):
        unknown = sorted(set(coeffs) - set(names))
        if unknown:
            raise ValidationError(f"{spec.id} has no coefficients {unknown}")
        return np.array([float(coeffs.get(name, 0.0)) for name in names])
    vector = np.asarray(coeffs, dtype=np.float64)
    if vector.shape != (len(names),):
        raise ValidationError(f"{spec.id} needs {len(names)} coefficients, got {vector.shape}")
    return vector


def _auxiliary_day(ln_rv: float, rng: np.random.Generator, jump_probability: float) -> Dict[str, float]:
    """
    Semivariances, bipower variation and return of one day given ln RV.

    RSV+ = s RV with s ~ U(0.3, 0.7); with probability `jump_probability`
    BV = RV (1 - u), u ~ U(0, 0.5), otherwise BV = RV; r ~ N(0, RV).
    """
    rv = math.exp(ln_rv)
    share = rng.uniform(0.3, 0.7)
    rsv_plus = share * rv
    rsv_minus = rv - rsv_plus
    bv = rv * (1.0 - rng.uniform(0.0, 0.5)) if rng.uniform() < jump_probability else rv
    j = max(rv - bv, 0.0)
    return {
        'rv': rv, 'bv': bv, 'rsv_plus': rsv_plus, 'rsv_minus': rsv_minus, 'j': j,
        'j_plus': max(rsv_plus - bv / 2.0, 0.0), 'j_minus': max(rsv_minus - bv / 2.0, 0.0),
        'r': float(rng.normal(0.0, math.sqrt(rv)))
    }


def simulate_har_dgp(coeffs: Union[Mapping[str, float], Sequence[float]], spec: ModelSpec,
                     days: int, noise_sd: float, seed: int = 0,
                     jump_probability: float = 0.3, burn_in: int = BURN_IN) -> List[DailyMeasures]:
    """
    Daily measures whose ln RV follows the model equation of `spec`.

    The first `burn_in` days are discarded. Auxiliary variables (semivariance
    shares, jump shares and returns) are drawn as in `_auxiliary_day`.
    """
    b = _coefficient_vector(coeffs, spec)
    persistence = float(np.sum(b[1:1 + spec.vol_dim]))
    if persistence >= 1.0:
        raise ExplosiveDGPError(f"{spec.id}: volatility coefficients sum to {persistence:.4f} >= 1")
    if days < 1 or noise_sd < 0:
        raise ValidationError("days must be >= 1 and noise_sd >= 0")

    rng = np.random.default_rng(seed)
    level = b[0] / (1.0 - persistence)
    keys = ('rv', 'rsv_plus', 'rsv_minus', 'j', 'j_plus', 'j_minus', 'r')
    history = {k: [] for k in keys}
    days_out = []

    for t in range(MONTH + burn_in + days):
        if t < MONTH:
            ln_rv = level
        else:
            window = {k: np.array(v[-MONTH:]) for k, v in history.items()}
            ln_rv = float(lagged_regressors(window, spec) @ b) + rng.normal(0.0, noise_sd)
            if not math.isfinite(ln_rv) or ln_rv > 0.0:
                raise ExplosiveDGPError(f"{spec.id}: ln RV left the admissible range at day {t}")
        day = _auxiliary_day(ln_rv, rng, jump_probability)
        for k in keys:
            history[k].append(day[k])
            del history[k][:-MONTH]
        if t >= MONTH + burn_in:
            days_out.append(day)

    dates = trading_dates(days)
    return [
        DailyMeasures(date=d, rv=day['rv'], bv=day['bv'], rsv_plus=day['rsv_plus'],
                      rsv_minus=day['rsv_minus'], j=day['j'], j_plus=day['j_plus'],
                      j_minus=day['j_minus'], ret=day['r'])
        for d, day in zip(dates, days_out)
    ]
