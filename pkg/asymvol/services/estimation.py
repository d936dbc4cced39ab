"""
OLS estimation with Newey-West HAC standard errors
"""

import logging
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from ..config.exceptions import (
    InsufficientDataError, NumericalError, RankDeficiencyError, ValidationError
)

logger = logging.getLogger(__name__)

COND_LIMIT = 1e10
# Two-sided standard normal critical values, strongest level first
CRITICAL_VALUES = (('1%', 2.576), ('5%', 1.960), ('10%', 1.645))
STAR_MARKS = {'1%': '***', '5%': '**', '10%': '*', 'none': ''}


@dataclass
class HACCovariance:
    matrix: np.ndarray
    bandwidth: int
    psd_ok: bool = True

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.matrix), 0.0, None))


@dataclass
class FitResult:
    """Fitted coefficients of one model with HAC inference"""
    model_id: str
    names: List[str]
    coefficients: np.ndarray
    hac_se: np.ndarray
    t_stats: np.ndarray
    adj_r2: float
    r2: float
    residuals: np.ndarray
    nobs: int
    bandwidth_used: int
    classical_se: Optional[np.ndarray] = None
    psd_ok: bool = True
    dates: List[date] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def stars(self) -> List[str]:
        return [significance_stars(t, self.nobs, self.k) for t in self.t_stats]

    def to_dict(self) -> Dict[str, object]:
        rows = []
        for name, b, se, t, level in zip(self.names, self.coefficients, self.hac_se,
                                         self.t_stats, self.stars()):
            rows.append({
                'name': name,
                'estimate': float(b),
                'hac_se': float(se),
                't': float(t),
                'significance': level
            })
        return {
            'model': self.model_id,
            'coefficients': rows,
            'adj_r2': self.adj_r2,
            'r2': self.r2,
            'nobs': self.nobs,
            'bandwidth': self.bandwidth_used,
            'hac_psd': self.psd_ok
        }


def condition_number(X: np.ndarray) -> float:
    """Condition number of X after scaling every column to unit norm"""
    norms = np.linalg.norm(X, axis=0)
    if np.any(norms == 0):
        return math.inf
    return float(np.linalg.cond(X / norms))


def check_rank(X: np.ndarray, names: Optional[Sequence[str]] = None,
               cond_limit: float = COND_LIMIT):
    """
    Raise RankDeficiencyError when the column-equilibrated design is too
    ill-conditioned. Offending columns come from a pivoted QR: the columns
    pivoted last are the ones spanned by the others.
    """
    k = X.shape[1]
    names = list(names) if names is not None else [f'x{i}' for i in range(k)]
    cond = condition_number(X)
    if cond <= cond_limit:
        return

    norms = np.linalg.norm(X, axis=0)
    zero = [names[i] for i in np.flatnonzero(norms == 0)]
    if zero:
        raise RankDeficiencyError(f"Design has all-zero columns: {zero}", columns=zero)

    _, R, perm = linalg.qr(X / norms, mode='economic', pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > diag[0] / cond_limit))
    rank = min(rank, k - 1)
    offending = [names[i] for i in perm[rank:]]
    raise RankDeficiencyError(
        f"Design is rank deficient (condition number {cond:.3g} > {cond_limit:.0e}); "
        f"offending columns: {offending}",
        columns=offending,
        payload={'condition_number': cond}
    )


def _qr(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    Q, R = np.linalg.qr(X, mode='reduced')
    return Q, R


def ols(X: np.ndarray, y: np.ndarray, names: Optional[Sequence[str]] = None,
        cond_limit: float = COND_LIMIT) -> Tuple[np.ndarray, np.ndarray]:
    """
    Least squares through a QR decomposition of X.

    Args:
        X: nobs x k design, intercept column included
        y: Target vector
        names: Column names used in rank-deficiency reports
        cond_limit: Condition-number threshold

    Returns:
        Tuple of (coefficients, residuals)
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nobs, k = X.shape
    if len(y) != nobs:
        raise ValidationError(f"X has {nobs} rows but y has {len(y)}")
    if nobs <= k:
        raise InsufficientDataError(f"OLS needs nobs > k (nobs={nobs}, k={k})")
    check_rank(X, names, cond_limit)

    Q, R = _qr(X)
    coefficients = linalg.solve_triangular(R, Q.T @ y)
    residuals = y - X @ coefficients
    return coefficients, residuals


def _xtx_inv(X: np.ndarray) -> np.ndarray:
    _, R = _qr(X)
    R_inv = linalg.solve_triangular(R, np.eye(R.shape[0]))
    return R_inv @ R_inv.T


def auto_bandwidth(nobs: int) -> int:
    """Newey-West plug-in truncation floor(4 (T/100)^(2/9))"""
    return int(math.floor(4.0 * (nobs / 100.0) ** (2.0 / 9.0)))


def bartlett_weights(bandwidth: int) -> np.ndarray:
    """w_l = 1 - l/(L+1) for l = 1..L"""
    lags = np.arange(1, bandwidth + 1, dtype=np.float64)
    return 1.0 - lags / (bandwidth + 1.0)


def newey_west_cov(X: np.ndarray, residuals: np.ndarray,
                   bandwidth: Union[int, str, None] = 'auto',
                   small_sample: bool = False) -> HACCovariance:
    """
    Newey-West HAC covariance of OLS coefficients (Bartlett kernel).

    Args:
        X: Design used in the fit
        residuals: OLS residuals
        bandwidth: Lag truncation L, or 'auto'/None for the plug-in rule
        small_sample: Scale by nobs/(nobs-k)

    Returns:
        HACCovariance with the k x k matrix, the bandwidth used and a PSD flag
    """
    X = np.asarray(X, dtype=np.float64)
    e = np.asarray(residuals, dtype=np.float64)
    nobs, k = X.shape

    if bandwidth is None or bandwidth == 'auto':
        lag = auto_bandwidth(nobs)
    else:
        lag = int(bandwidth)
        if lag < 0:
            raise ValidationError(f"Bandwidth must be >= 0, got {lag}")
    if lag >= nobs:
        raise ValidationError(f"Bandwidth {lag} must be smaller than nobs {nobs}")

    xe = X * e[:, None]
    S = xe.T @ xe
    for l, w in enumerate(bartlett_weights(lag), start=1):
        gamma = xe[l:].T @ xe[:-l]
        S += w * (gamma + gamma.T)

    psd_ok = True
    eig = np.linalg.eigvalsh((S + S.T) / 2.0)
    scale = max(np.max(np.abs(eig)), np.finfo(float).tiny)
    if eig.min() < -1e-12 * scale:
        psd_ok = False
        logger.warning(f"HAC sandwich core is not positive semi-definite (min eigenvalue {eig.min():.3e})")

    bread = _xtx_inv(X)
    V = bread @ S @ bread
    V = (V + V.T) / 2.0
    if small_sample:
        V *= nobs / (nobs - k)
    if np.any(np.diag(V) < 0):
        psd_ok = False
        logger.warning("HAC covariance has negative diagonal entries")
    return HACCovariance(matrix=V, bandwidth=lag, psd_ok=psd_ok)


def classical_se(X: np.ndarray, residuals: np.ndarray) -> np.ndarray:
    """Homoscedastic OLS standard errors"""
    nobs, k = X.shape
    sigma2 = float(np.dot(residuals, residuals)) / (nobs - k)
    return np.sqrt(sigma2 * np.diag(_xtx_inv(X)))


def _sst(y: np.ndarray) -> float:
    y = np.asarray(y, dtype=np.float64)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise NumericalError("Target is constant: R-squared undefined")
    return sst


def r_squared(y: np.ndarray, residuals: np.ndarray) -> float:
    return 1.0 - float(np.dot(residuals, residuals)) / _sst(y)


def adjusted_r2(y: np.ndarray, residuals: np.ndarray, k: int) -> float:
    """1 - (SSR/(n-k)) / (SST/(n-1))"""
    n = len(y)
    if n <= k:
        raise InsufficientDataError(f"Adjusted R-squared needs nobs > k (nobs={n}, k={k})")
    ssr = float(np.dot(residuals, residuals))
    return 1.0 - (ssr / (n - k)) / (_sst(y) / (n - 1))


def significance_stars(t_stat: float, nobs: Optional[int] = None, k: Optional[int] = None) -> str:
    """
    Two-sided significance level against normal critical values.

    Returns one of 'none', '10%', '5%', '1%'; boundaries count as rejections.
    """
    if t_stat is None or not np.isfinite(t_stat):
        return 'none' if t_stat is None or np.isnan(t_stat) else '1%'
    for level, critical in CRITICAL_VALUES:
        if abs(t_stat) >= critical:
            return level
    return 'none'


def fit_ols(X: np.ndarray, y: np.ndarray, names: Sequence[str], model_id: str = '',
            bandwidth: Union[int, str, None] = 'auto', small_sample: bool = False,
            cond_limit: float = COND_LIMIT, dates: Optional[Sequence[date]] = None) -> FitResult:
    """ols -> newey_west_cov -> FitResult"""
    coefficients, residuals = ols(X, y, names, cond_limit)
    hac = newey_west_cov(X, residuals, bandwidth, small_sample)
    hac_se = hac.se
    with np.errstate(divide='ignore', invalid='ignore'):
        t_stats = coefficients / hac_se
    k = X.shape[1]
    return FitResult(
        model_id=model_id,
        names=list(names),
        coefficients=coefficients,
        hac_se=hac_se,
        t_stats=t_stats,
        adj_r2=adjusted_r2(y, residuals, k),
        r2=r_squared(y, residuals),
        residuals=residuals,
        nobs=len(y),
        bandwidth_used=hac.bandwidth,
        classical_se=classical_se(X, residuals),
        psd_ok=hac.psd_ok,
        dates=list(dates or [])
    )
