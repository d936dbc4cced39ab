"""
Model suite for asymvol
Fits the eight HAR/RSV jump and leverage models on a shared row set
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

from ..config.config import Config
from ..config.exceptions import InsufficientDataError, UnavailableFieldError
from .estimation import FitResult, fit_ols, significance_stars
from .features import (
    MODEL_IDS, MODEL_SPECS, DesignMatrix, ModelSpec, aggregate, build_design, check_available
)
from .measures import DailyMeasures

logger = logging.getLogger(__name__)


@dataclass
class FitOptions:
    bandwidth: Union[int, str, None] = Config.NW_BANDWIDTH
    small_sample: bool = Config.HAC_SMALL_SAMPLE
    cond_limit: float = Config.COND_LIMIT
    max_reject_fraction: float = Config.MAX_REJECT_FRACTION
    min_rows: int = Config.MIN_SUITE_ROWS
    threads: int = Config.THREADS

    @classmethod
    def from_run_config(cls, run_config) -> 'FitOptions':
        return cls(
            bandwidth=run_config.nw_bandwidth,
            small_sample=run_config.hac_small_sample,
            cond_limit=float(run_config.cond_limit),
            max_reject_fraction=float(run_config.max_reject_fraction),
            min_rows=run_config.min_rows,
            threads=run_config.threads
        )


@dataclass
class LeverageReading:
    """How the daily leverage coefficients of an LE model read"""
    model_id: str
    delta1: float
    delta4: float
    delta4_significance: str
    clear: bool
    magnitude_only: bool

    def to_dict(self) -> Dict[str, object]:
        return {
            'model': self.model_id,
            'delta1': self.delta1,
            'delta4': self.delta4,
            'delta4_significance': self.delta4_significance,
            'clear_leverage': self.clear,
            'magnitude_only': self.magnitude_only
        }


@dataclass
class SuiteResult:
    market: str
    fits: Dict[str, FitResult] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)
    rows: int = 0
    rejected: Dict[str, int] = field(default_factory=dict)

    @property
    def model_ids(self) -> List[str]:
        return [m for m in MODEL_IDS if m in self.fits]

    def leverage_readings(self) -> List[LeverageReading]:
        return [leverage_reading(self.fits[m]) for m in self.model_ids
                if MODEL_SPECS[m].leverage]

    def to_dict(self) -> Dict[str, object]:
        return {
            'market': self.market,
            'rows': self.rows,
            'models': {m: self.fits[m].to_dict() for m in self.model_ids},
            'skipped': dict(self.skipped),
            'rejected': dict(self.rejected),
            'leverage': [r.to_dict() for r in self.leverage_readings()]
        }


def leverage_reading(fit: FitResult) -> LeverageReading:
    """
    Clear daily leverage: delta1 > 0 and delta4 > 0, or delta4 > 0 and delta4 > delta1.
    Magnitude only: delta4 insignificant while delta1 > 0.
    """
    d1 = fit.coefficient('delta1')
    d4 = fit.coefficient('delta4')
    level = significance_stars(float(fit.t_stats[fit.names.index('delta4')]), fit.nobs, fit.k)
    clear = (d1 > 0 and d4 > 0) or (d4 > 0 and d4 > d1)
    return LeverageReading(
        model_id=fit.model_id,
        delta1=d1,
        delta4=d4,
        delta4_significance=level,
        clear=clear,
        magnitude_only=(level == 'none' and d1 > 0)
    )


def fit_design(design: DesignMatrix, options: Optional[FitOptions] = None) -> FitResult:
    options = options or FitOptions()
    return fit_ols(
        design.X, design.y, design.names,
        model_id=design.model_id,
        bandwidth=options.bandwidth,
        small_sample=options.small_sample,
        cond_limit=options.cond_limit,
        dates=design.dates
    )


def fit_model(measures: Sequence[DailyMeasures], spec: ModelSpec,
              options: Optional[FitOptions] = None) -> FitResult:
    """build rows -> ols -> Newey-West -> FitResult for one model"""
    options = options or FitOptions()
    design = build_design(measures, spec, options.max_reject_fraction)
    result = fit_design(design, options)
    logger.info(f"Fitted {spec.id}: nobs={result.nobs}, adj R2={result.adj_r2:.4f}")
    return result


def build_suite_designs(measures: Sequence[DailyMeasures],
                        options: Optional[FitOptions] = None,
                        specs: Optional[Sequence[ModelSpec]] = None):
    """
    Designs of every available model restricted to their common dates.

    Returns:
        Tuple of (designs keyed by model id, skip reasons keyed by model id)
    """
    options = options or FitOptions()
    specs = list(specs or MODEL_SPECS.values())
    agg = aggregate(measures)

    designs: Dict[str, DesignMatrix] = {}
    skipped: Dict[str, str] = {}
    for spec in specs:
        try:
            check_available(measures, spec)
        except UnavailableFieldError as e:
            skipped[spec.id] = e.message
            logger.warning(f"Skipping {spec.id}: {e.message}")
            continue
        designs[spec.id] = build_design(measures, spec, options.max_reject_fraction, agg)

    if not designs:
        raise UnavailableFieldError("No model can be built from the available measures")

    common = set.intersection(*(set(d.dates) for d in designs.values()))
    designs = {m: d.subset(common) for m, d in designs.items()}
    return designs, skipped


def fit_suite(measures: Sequence[DailyMeasures], options: Optional[FitOptions] = None,
              market: str = Config.MARKET) -> SuiteResult:
    """
    Fit all eight models on the intersection of their usable rows.

    Models whose blocks need unavailable fields are reported as skips.
    """
    options = options or FitOptions()
    designs, skipped = build_suite_designs(measures, options)

    rows = next(iter(designs.values())).nobs
    if rows < options.min_rows:
        raise InsufficientDataError(
            f"Only {rows} common rows; the suite needs at least {options.min_rows}",
            payload={'rows': rows})

    logger.info(f"Fitting {len(designs)} models on {rows} common rows "
                f"({len(skipped)} skipped, {options.threads} threads)")

    with ThreadPoolExecutor(max_workers=options.threads) as executor:
        futures = {m: executor.submit(fit_design, d, options) for m, d in designs.items()}
        fits = {m: futures[m].result() for m in MODEL_IDS if m in futures}

    return SuiteResult(
        market=market,
        fits=fits,
        skipped=skipped,
        rows=rows,
        rejected={m: len(d.rejected) for m, d in designs.items()}
    )
