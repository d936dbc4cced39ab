"""
Configuration settings for asymvol
"""

import json
import logging
import os
from dataclasses import dataclass, field, fields, asdict
from typing import Any, Dict, List, Optional, Union

from .exceptions import UsageError, ValidationError

logger = logging.getLogger(__name__)


class Config:
    # Rolling forecasts
    WINDOW = 1000
    WINDOW_UNIT = 'rows'

    # Ingest
    MIN_OBS = 10

    # Estimation
    NW_BANDWIDTH = 'auto'
    HAC_SMALL_SAMPLE = False
    COND_LIMIT = 1e10
    MIN_SUITE_ROWS = 100
    MAX_REJECT_FRACTION = 0.01

    # Evaluation
    DM_LAG = 0
    DM_HLN = False
    MIN_DM_OBS = 30

    # Reporting
    DISPLAY_SCALE = 1000.0
    LJUNG_BOX_LAGS = 20
    MARKET = 'market'

    # Execution
    THREADS = 1

    # Paths
    BASE_DIR = os.path.dirname(os.path.abspath(__file__))
    DEFAULTS_FILE = os.path.join(BASE_DIR, 'defaults.json')

    # Logging
    LOG_LEVEL = 'INFO'
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class ProductionConfig(Config):
    LOG_LEVEL = 'WARNING'


class DevelopmentConfig(Config):
    LOG_LEVEL = 'DEBUG'


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'default': Config
}


SUBCOMMANDS = (
    'compute-measures', 'describe', 'fit', 'forecast',
    'evaluate', 'dm-test', 'simulate', 'pipeline',
)


@dataclass
class RunConfig:
    """Resolved configuration of one CLI invocation"""
    subcommand: str = 'pipeline'
    inputs: List[str] = field(default_factory=list)
    output_dir: str = 'output'
    market: str = Config.MARKET
    window: int = Config.WINDOW
    window_unit: str = Config.WINDOW_UNIT
    nw_bandwidth: Union[str, int] = Config.NW_BANDWIDTH
    hac_small_sample: bool = Config.HAC_SMALL_SAMPLE
    cond_limit: float = Config.COND_LIMIT
    max_reject_fraction: float = Config.MAX_REJECT_FRACTION
    min_rows: int = Config.MIN_SUITE_ROWS
    dm_lag: int = Config.DM_LAG
    dm_hln: bool = Config.DM_HLN
    min_obs: int = Config.MIN_OBS
    display_scale: bool = True
    threads: int = Config.THREADS
    seed: int = 0
    log_level: str = Config.LOG_LEVEL
    extra: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_sources(cls,
                     subcommand: str,
                     flags: Dict[str, Any],
                     config_path: Optional[str] = None,
                     profile: str = 'default') -> 'RunConfig':
        """
        Build a RunConfig: class defaults, then the JSON file, then flags.

        Flags whose value is None are treated as "not given".
        """
        base = config.get(profile)
        if base is None:
            raise UsageError(f"Unknown config profile: {profile}")

        rc = cls(subcommand=subcommand, log_level=base.LOG_LEVEL)
        known = {f.name for f in fields(cls)} - {'subcommand', 'extra'}

        if config_path is not None:
            if not os.path.exists(config_path):
                raise UsageError(f"Config file not found: {config_path}")
            with open(config_path, 'r') as f:
                try:
                    file_values = json.load(f)
                except json.JSONDecodeError as e:
                    raise UsageError(f"Config file {config_path} is not valid JSON: {e}")
            unknown = sorted(set(file_values) - known)
            if unknown:
                raise UsageError(f"Unknown keys in {config_path}: {unknown}")
            for key, value in file_values.items():
                setattr(rc, key, value)
            logger.info(f"Loaded run configuration from {config_path}")

        for key, value in flags.items():
            if value is None:
                continue
            if key in known:
                setattr(rc, key, value)
            else:
                rc.extra[key] = value

        rc.nw_bandwidth = parse_bandwidth(rc.nw_bandwidth)
        rc.validate()
        return rc

    def validate(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ValidationError(f"Unknown subcommand: {self.subcommand}")
        if not isinstance(self.window, int) or self.window < 2:
            raise ValidationError("window must be an integer >= 2")
        if self.window_unit not in ('rows', 'days'):
            raise ValidationError("window_unit must be 'rows' or 'days'")
        if not isinstance(self.min_obs, int) or self.min_obs < 3:
            raise ValidationError("min_obs must be an integer >= 3")
        if self.nw_bandwidth != 'auto' and self.nw_bandwidth < 0:
            raise ValidationError("nw_bandwidth must be 'auto' or >= 0")
        if isinstance(self.cond_limit, bool) or not isinstance(self.cond_limit, (int, float)) or self.cond_limit <= 1:
            raise ValidationError("cond_limit must be a number > 1")
        if isinstance(self.max_reject_fraction, bool) or not isinstance(self.max_reject_fraction, (int, float)) \
                or not 0 <= self.max_reject_fraction < 1:
            raise ValidationError("max_reject_fraction must be in [0, 1)")
        if isinstance(self.min_rows, bool) or not isinstance(self.min_rows, int) or self.min_rows < 2:
            raise ValidationError("min_rows must be an integer >= 2")
        if not isinstance(self.dm_lag, int) or self.dm_lag < 0:
            raise ValidationError("dm_lag must be an integer >= 0")
        if not isinstance(self.threads, int) or self.threads < 1:
            raise ValidationError("threads must be an integer >= 1")
        if self.log_level.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR'):
            raise ValidationError(f"Unknown log level: {self.log_level}")
        try:
            os.makedirs(self.output_dir, exist_ok=True)
        except OSError as e:
            raise ValidationError(f"Output directory {self.output_dir} is not writable: {e}")
        if not os.access(self.output_dir, os.W_OK):
            raise ValidationError(f"Output directory {self.output_dir} is not writable")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def parse_bandwidth(value: Union[str, int, None]) -> Union[str, int]:
    """'auto' or a non-negative integer lag"""
    if value is None:
        return 'auto'
    if isinstance(value, int):
        return value
    text = str(value).strip().lower()
    if text == 'auto':
        return 'auto'
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"Bandwidth must be 'auto' or an integer, got {value!r}")
