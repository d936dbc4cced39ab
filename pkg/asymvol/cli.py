"""
Command-line entry point for asymvol

Subcommands: compute-measures, describe, fit, forecast, evaluate, dm-test,
simulate, pipeline. Exit codes: 0 success, 2 usage error, 3 data error,
4 numerical error.
"""

import argparse
import logging
import os
import sys
from dataclasses import fields
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .config.config import Config, RunConfig, config
from .config.exceptions import AsymVolError, UsageError
from .services import reporting
from .services.diagnostics import describe_measures
from .services.evaluation import LOSS_KINDS, dm_matrix, dm_test, loss_table
from .services.features import get_spec, write_design
from .services.forecast import ForecastPanel, read_forecasts, rolling_forecast_suite, write_forecasts
from .services.ingest import load_ticks, read_measures, sessions_from_ticks, write_ticks
from .services.measures import DailyMeasures, compute_dataset, write_measures
from .services.models import FitOptions, build_suite_designs, fit_suite
from .services.simulator import SimConfig, dataset_ticks, simulate, write_truth

logger = logging.getLogger(__name__)

RV_UNITS = 'raw daily realized variance (sum of squared intraday log returns), unscaled'
LN_UNITS = 'natural log of raw daily realized variance'
SIM_FIELDS = tuple(f.name for f in fields(SimConfig) if f.name not in ('seed', 'start'))
EXIT_USAGE = 2


def setup_logging(log_level: str):
    """Setup logging configuration"""
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=Config.LOG_FORMAT
    )
    logging.getLogger().setLevel(getattr(logging, log_level.upper()))


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument('--config', dest='config_path', help='JSON file of run defaults (flags win)')
    parser.add_argument('--profile', choices=sorted(config), default='default', help='Configuration profile')
    parser.add_argument('--output-dir', help='Directory for all outputs')
    parser.add_argument('--market', help='Market label used in output file names')
    parser.add_argument('--threads', type=int, help='Worker threads for model fits and forecasts')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], type=str.upper)


def _add_data(parser: argparse.ArgumentParser):
    parser.add_argument('inputs', nargs='+', help='Tick CSV or measures CSV')
    parser.add_argument('--min-obs', type=int, help='Minimum ticks for a day to be kept')


def _add_fit(parser: argparse.ArgumentParser):
    parser.add_argument('--nw-bandwidth', help="Newey-West lag truncation: 'auto' or an integer")
    parser.add_argument('--hac-small-sample', action='store_true', default=None,
                        help='Scale the HAC covariance by nobs/(nobs-k)')
    parser.add_argument('--cond-limit', type=float,
                        help='Largest accepted condition number of the equilibrated design')
    parser.add_argument('--max-reject-fraction', type=float,
                        help='Largest share of design rows that may be rejected as non-finite')
    parser.add_argument('--min-rows', type=int, help='Fewest common rows the model suite accepts')


def _add_forecast(parser: argparse.ArgumentParser):
    parser.add_argument('--window', type=int, help='Rolling estimation window')
    parser.add_argument('--window-unit', choices=['rows', 'days'], help='Unit of the rolling window')


def _add_dm(parser: argparse.ArgumentParser):
    parser.add_argument('--dm-lag', type=int, help='Bartlett lag of the DM long-run variance')
    parser.add_argument('--dm-hln', action='store_true', default=None,
                        help='Harvey-Leybourne-Newbold small-sample correction')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='asymvol', description='Asymmetric HAR realized-volatility toolkit')
    sub = parser.add_subparsers(dest='subcommand', required=True)

    p = sub.add_parser('compute-measures', help='Daily realized measures from tick CSVs')
    _add_common(p)
    _add_data(p)

    p = sub.add_parser('describe', help='Descriptive statistics table')
    _add_common(p)
    _add_data(p)
    p.add_argument('--no-scale', dest='display_scale', action='store_false', default=None,
                   help='Do not multiply RV-type rows by 1,000')

    p = sub.add_parser('fit', help='Fit the eight-model suite')
    _add_common(p)
    _add_data(p)
    _add_fit(p)
    p.add_argument('--dump-design', action='store_true', default=None, help='Write per-model design CSVs')

    p = sub.add_parser('forecast', help='Rolling one-day-ahead forecasts')
    _add_common(p)
    _add_data(p)
    _add_fit(p)
    _add_forecast(p)

    p = sub.add_parser('evaluate', help='Losses and DM matrix of a forecast CSV')
    _add_common(p)
    p.add_argument('inputs', nargs=1, help='Forecast CSV')
    _add_dm(p)

    p = sub.add_parser('dm-test', help='One Diebold-Mariano comparison')
    _add_common(p)
    p.add_argument('inputs', nargs=1, help='Forecast CSV')
    p.add_argument('--benchmark', required=True)
    p.add_argument('--comparison', required=True)
    p.add_argument('--loss', choices=LOSS_KINDS, default='mse')
    _add_dm(p)

    p = sub.add_parser('simulate', help='Simulate a jump-diffusion tick file')
    _add_common(p)
    p.add_argument('--seed', type=int)
    p.add_argument('--days', type=int)
    p.add_argument('--n-per-day', type=int)
    p.add_argument('--mu', type=float)
    p.add_argument('--sigma', type=float)
    p.add_argument('--vol-model', choices=['constant', 'log_ou'])
    p.add_argument('--ou-mean', type=float)
    p.add_argument('--ou-persistence', type=float)
    p.add_argument('--ou-vol', type=float)
    p.add_argument('--rho', type=float)
    p.add_argument('--jump-intensity', type=float)
    p.add_argument('--jump-mean', type=float)
    p.add_argument('--jump-sd', type=float)
    p.add_argument('--jump-sign', choices=['both', 'positive', 'negative'])

    p = sub.add_parser('pipeline', help='measures -> describe -> fit -> forecast -> evaluate')
    _add_common(p)
    _add_data(p)
    _add_fit(p)
    _add_forecast(p)
    _add_dm(p)
    p.add_argument('--no-scale', dest='display_scale', action='store_false', default=None)

    return parser


def emit_plot_series(measures: Sequence[DailyMeasures], output_dir: str, market: str) -> Tuple[str, str]:
    """
    Write `<market>_rv.csv` (date,rv) and `<market>_ln_rv.csv` (date,ln_rv).

    Returns:
        Tuple of the two paths
    """
    rv_path = os.path.join(output_dir, f"{market}_rv.csv")
    ln_path = os.path.join(output_dir, f"{market}_ln_rv.csv")
    dates = [m.date.isoformat() for m in measures]
    rv = np.array([m.rv for m in measures], dtype=np.float64)
    with np.errstate(divide='ignore'):
        ln_rv = np.log(rv)
    for path, units, frame in ((rv_path, RV_UNITS, pd.DataFrame({'date': dates, 'rv': rv})),
                               (ln_path, LN_UNITS, pd.DataFrame({'date': dates, 'ln_rv': ln_rv}))):
        with open(path, 'w') as f:
            f.write(f"# {units}\n")
            frame.to_csv(f, index=False, float_format='%.17g', na_rep='')
    return rv_path, ln_path


def _first_data_line(path: str) -> str:
    with open(path) as f:
        for line in f:
            if line.strip() and not line.lstrip().startswith('#'):
                return line.strip()
    return ''


class CommandRunner:
    """Executes one subcommand; `stage` names the module currently running"""

    def __init__(self, run_config: RunConfig):
        self.rc = run_config
        self.stage = 'cli'
        self.written: List[str] = []

    def _path(self, market: str, name: str) -> str:
        path = os.path.join(self.rc.output_dir, f"{market}_{name}")
        self.written.append(path)
        return path

    def _market_for(self, path: str) -> str:
        """The --market label for a single input, otherwise the file stem"""
        if len(self.rc.inputs) == 1:
            return self.rc.market
        return os.path.splitext(os.path.basename(path))[0]

    def _fit_options(self) -> FitOptions:
        return FitOptions.from_run_config(self.rc)

    def load(self, path: str, market: str) -> List[DailyMeasures]:
        """Measures from a tick CSV (computed) or a measures CSV (read)"""
        if not os.path.exists(path):
            raise UsageError(f"Input file not found: {path}")
        self.stage = 'ingest'
        if _first_data_line(path).startswith('timestamp'):
            dataset = sessions_from_ticks(load_ticks(path), self.rc.min_obs, market)
            for regime in dataset.regimes():
                logger.info(f"{market}: n={regime['n']} from {regime['first']} to {regime['last']} "
                            f"({regime['days']} days)")
            self.stage = 'measures'
            return compute_dataset(dataset)
        return read_measures(path)

    def compute_measures(self, measures: List[DailyMeasures], market: str):
        self.stage = 'measures'
        write_measures(self._path(market, 'measures.csv'), measures)
        rv_path, ln_path = emit_plot_series(measures, self.rc.output_dir, market)
        self.written += [rv_path, ln_path]
        print(f"{market}: {len(measures)} days of measures")

    def describe(self, measures: List[DailyMeasures], market: str):
        self.stage = 'diagnostics'
        scale = Config.DISPLAY_SCALE if self.rc.display_scale else None
        rows = describe_measures(measures, scale)
        text = reporting.format_descriptive_report(rows, market)
        reporting.write_text(self._path(market, 'describe.txt'), text,
                             f"RV, RSV, J and ln(J+1) rows multiplied by {scale:g}" if scale else 'unscaled')
        reporting.write_json(self._path(market, 'describe.json'), {'rows': [r.to_dict() for r in rows]},
                             'location/dispersion of RV-type rows scaled by the row "scale" field')
        print(text)

    def fit(self, measures: List[DailyMeasures], market: str):
        self.stage = 'models'
        options = self._fit_options()
        suite = fit_suite(measures, options, market)
        text = reporting.format_fit_report(suite)
        units = 'coefficients on ln RV targets; HAC standard errors; regressors in raw RV units'
        reporting.write_text(self._path(market, 'fit.txt'), text, units)
        reporting.write_json(self._path(market, 'fit.json'), suite.to_dict(), units)
        if self.rc.extra.get('dump_design'):
            self.stage = 'features'
            designs, _ = build_suite_designs(measures, options)
            for model_id, design in designs.items():
                write_design(self._path(market, f"design_{model_id}.csv"), design)
        print(text)

    def forecast(self, measures: List[DailyMeasures], market: str) -> ForecastPanel:
        self.stage = 'forecast'
        panel = rolling_forecast_suite(measures, self.rc.window, self.rc.window_unit,
                                       self._fit_options(), progress=self.rc.log_level in ('DEBUG', 'INFO'))
        write_forecasts(self._path(market, 'forecasts.csv'), panel)
        print(f"{market}: {len(panel.dates())} forecasts per model for {len(panel.model_ids)} models")
        return panel

    def evaluate(self, panel: ForecastPanel, market: str):
        self.stage = 'evaluation'
        reports = loss_table(panel)
        loss_text = reporting.format_loss_report(reports)
        reporting.write_text(self._path(market, 'losses.txt'), loss_text, 'losses on ln RV forecasts')
        reporting.write_json(self._path(market, 'losses.json'),
                             {'losses': [r.to_dict() for r in reports]}, 'losses on ln RV forecasts')

        results = dm_matrix(panel, LOSS_KINDS, self.rc.dm_lag, self.rc.dm_hln, self.rc.threads)
        dm_text = reporting.format_dm_report(results)
        units = f"DM statistics, d = L(benchmark) - L(comparison), LRV lag {self.rc.dm_lag}"
        reporting.write_text(self._path(market, 'dm.txt'), dm_text, units)
        reporting.write_json(self._path(market, 'dm.json'), {'results': [r.to_dict() for r in results]}, units)
        print(loss_text)
        print(dm_text)

    def dm_test(self, panel: ForecastPanel, market: str):
        self.stage = 'evaluation'
        bench = get_spec(self.rc.extra['benchmark']).id
        comp = get_spec(self.rc.extra['comparison']).id
        for model_id in (bench, comp):
            if model_id not in panel.records:
                raise UsageError(f"No forecasts for {model_id} in the forecast file")
        result = dm_test(panel[bench], panel[comp], self.rc.extra.get('loss', 'mse'),
                         self.rc.dm_lag, self.rc.dm_hln)
        units = f"DM statistic, d = L(benchmark) - L(comparison), LRV lag {self.rc.dm_lag}"
        reporting.write_json(self._path(market, f"dm_{bench}_{comp}_{result.loss}.json"), result.to_dict(), units)
        stat = 'inf' if result.infinite else f"{result.statistic:.4f}"
        print(f"{bench} vs {comp} [{result.loss}]: DM = {stat}{result.stars} "
              f"(p = {result.p_value:.4g}, m = {result.m})")

    def simulate(self):
        self.stage = 'simulator'
        sim_values = {k: self.rc.extra[k] for k in SIM_FIELDS if k in self.rc.extra}
        sim_config = SimConfig(seed=self.rc.seed, **sim_values)
        dataset, truth = simulate(sim_config)
        market = self.rc.market
        write_ticks(self._path(market, 'ticks.csv'), dataset_ticks(dataset, sim_config.p0),
                    f"simulated prices, seed {sim_config.seed}, {sim_config.n_per_day} returns per day")
        write_truth(self._path(market, 'truth.csv'), truth)
        self.compute_measures(compute_dataset(dataset), market)

    def execute(self) -> int:
        sub = self.rc.subcommand
        if sub == 'simulate':
            self.simulate()
            return 0
        if sub in ('evaluate', 'dm-test'):
            path = self.rc.inputs[0]
            if not os.path.exists(path):
                raise UsageError(f"Input file not found: {path}")
            self.stage = 'forecast'
            panel = read_forecasts(path)
            market = self._market_for(path)
            if sub == 'evaluate':
                self.evaluate(panel, market)
            else:
                self.dm_test(panel, market)
            return 0

        for path in self.rc.inputs:
            market = self._market_for(path)
            measures = self.load(path, market)
            if sub == 'compute-measures':
                self.compute_measures(measures, market)
            elif sub == 'describe':
                self.describe(measures, market)
            elif sub == 'fit':
                self.fit(measures, market)
            elif sub == 'forecast':
                self.forecast(measures, market)
            elif sub == 'pipeline':
                self.compute_measures(measures, market)
                self.describe(measures, market)
                self.fit(measures, market)
                panel = self.forecast(measures, market)
                self.evaluate(panel, market)
        return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run the subcommand and return its exit status"""
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code or 0)

    values: Dict[str, object] = vars(args).copy()
    subcommand = values.pop('subcommand')
    config_path = values.pop('config_path')
    profile = values.pop('profile')
    setup_logging(values.get('log_level') or config[profile].LOG_LEVEL)

    runner = None
    try:
        run_config = RunConfig.from_sources(subcommand, values, config_path, profile)
        setup_logging(run_config.log_level)
        runner = CommandRunner(run_config)
        status = runner.execute()
        logger.info(f"{subcommand}: wrote {len(runner.written)} files to {run_config.output_dir}")
        return status
    except AsymVolError as e:
        stage = runner.stage if runner else 'cli'
        logger.error(f"{stage}: {e.message}")
        logger.debug(f"{stage}: {e.to_dict()}")
        return e.exit_code
    except OSError as e:
        stage = runner.stage if runner else 'cli'
        logger.error(f"{stage}: {e}")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
