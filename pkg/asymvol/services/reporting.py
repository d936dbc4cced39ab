"""
Report writers shared by the asymvol services
Aligned-text tables, JSON documents and commented CSV files
"""

import json
import logging
import math
from datetime import date
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .diagnostics import KURTOSIS_CONVENTION, DescriptiveRow
from .estimation import STAR_MARKS
from .evaluation import LOSS_KINDS, DmResult, LossReport, best_models
from .features import MODEL_IDS
from .models import SuiteResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '{:.4f}'.format


def to_builtin(value: Any) -> Any:
    """JSON-safe copy: numpy scalars/arrays unwrapped, non-finite floats to None"""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_builtin(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, date):
        return value.isoformat()
    return value


def write_json(path: str, document: Dict[str, Any], units: str):
    payload = {'units': units}
    payload.update(to_builtin(document))
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=False)
        f.write('\n')
    logger.debug(f"Wrote {path}")


def write_text(path: str, text: str, header: str):
    with open(path, 'w') as f:
        f.write(f"# {header}\n")
        f.write(text)
        if not text.endswith('\n'):
            f.write('\n')
    logger.debug(f"Wrote {path}")


def _cell(estimate: float, stars: str) -> str:
    return f"{estimate:.4f}{stars}"


def fit_table(suite: SuiteResult) -> pd.DataFrame:
    """
    Coefficient rows by model columns; each estimate followed by its HAC
    standard error in parentheses on the next row.
    """
    models = suite.model_ids
    all_names: List[str] = []
    for m in models:
        all_names += [n for n in suite.fits[m].names if n not in all_names]

    index, rows = [], []
    for name in all_names:
        est, se = {}, {}
        for m in models:
            fit = suite.fits[m]
            if name in fit.names:
                i = fit.names.index(name)
                est[m] = _cell(fit.coefficients[i], STAR_MARKS[fit.stars()[i]])
                se[m] = f"({fit.hac_se[i]:.4f})"
        index += [name, '']
        rows += [est, se]
    index += ['Adj.R2', 'R2', 'nobs', 'bandwidth']
    rows += [
        {m: f"{suite.fits[m].adj_r2:.4f}" for m in models},
        {m: f"{suite.fits[m].r2:.4f}" for m in models},
        {m: str(suite.fits[m].nobs) for m in models},
        {m: str(suite.fits[m].bandwidth_used) for m in models},
    ]
    return pd.DataFrame(rows, index=index, columns=models).fillna('')


def format_fit_report(suite: SuiteResult) -> str:
    lines = [f"Estimation results ({suite.market}); HAC standard errors in parentheses; "
             f"*** 1%, ** 5%, * 10%", '']
    lines.append(fit_table(suite).to_string())
    for model_id, reason in suite.skipped.items():
        lines.append(f"{model_id}: skipped ({reason})")
    readings = suite.leverage_readings()
    if readings:
        lines += ['', 'Leverage:']
        for r in readings:
            verdict = 'clear daily leverage' if r.clear else (
                'magnitude only' if r.magnitude_only else 'no clear leverage')
            lines.append(f"  {r.model_id}: delta1={r.delta1:.4f} delta4={r.delta4:.4f} "
                         f"({r.delta4_significance}) -> {verdict}")
    return '\n'.join(lines) + '\n'


def descriptive_frame(rows: Sequence[DescriptiveRow]) -> pd.DataFrame:
    frame = pd.DataFrame([{
        'Variable': r.name + (f" (x{r.scale:g})" if r.scale != 1.0 else ''),
        'Mean': r.mean, 'Median': r.median, 'Maximum': r.max, 'Minimum': r.min,
        'Std.Dev.': r.std_dev, 'Skewness': r.skewness, 'Kurtosis': r.kurtosis,
        'Q(20)': r.q20, 'p': r.q20_pvalue
    } for r in rows])
    return frame.set_index('Variable') if len(frame) else frame


def format_descriptive_report(rows: Sequence[DescriptiveRow], market: str) -> str:
    header = (f"Descriptive statistics ({market}); kurtosis is {KURTOSIS_CONVENTION}; "
              f"Q(20) is the Ljung-Box statistic with its chi-square p-value")
    return header + '\n\n' + descriptive_frame(rows).to_string(float_format=FLOAT_FORMAT, na_rep='-') + '\n'


def loss_frame(reports: Sequence[LossReport]) -> pd.DataFrame:
    best = best_models(reports) if reports else {}
    frame = pd.DataFrame(
        {kind.upper(): [f"{r.get(kind):.6f}" + (' <' if best.get(kind) == r.model_id else '')
                        for r in reports] for kind in LOSS_KINDS},
        index=[r.model_id for r in reports]
    )
    frame['m'] = [r.m for r in reports]
    return frame


def format_loss_report(reports: Sequence[LossReport]) -> str:
    return ("Out-of-sample losses on ln RV; '<' marks the smallest loss\n\n"
            + loss_frame(reports).to_string() + '\n')


def dm_grid(results: Sequence[DmResult], loss: str) -> pd.DataFrame:
    """Benchmark rows by comparison columns for one loss"""
    cells = [r for r in results if r.loss == loss]
    order = [m for m in MODEL_IDS if any(m in (r.benchmark, r.comparison) for r in cells)]
    order += sorted({x for r in cells for x in (r.benchmark, r.comparison)} - set(order))
    grid = pd.DataFrame('', index=order[:-1], columns=order[1:])
    for r in cells:
        stat = 'inf' if r.infinite else f"{r.statistic:.3f}"
        grid.loc[r.benchmark, r.comparison] = stat + r.stars
    return grid


def format_dm_report(results: Sequence[DmResult], loss_kinds: Optional[Sequence[str]] = None) -> str:
    kinds = loss_kinds or [k for k in LOSS_KINDS if any(r.loss == k for r in results)]
    lines = ["Diebold-Mariano statistics; rows are benchmarks, columns comparisons; "
             "positive favours the comparison model; *** 1%, ** 5%, * 10%"]
    for kind in kinds:
        lines += ['', f"[{kind.upper()}]", dm_grid(results, kind).to_string()]
    return '\n'.join(lines) + '\n'

