"""Backtests: run the policy over ingested price history and report metrics.

Reporting conventions, fixed here on purpose and surfaced in the docs:

* "variance" is the sample variance (ddof=1) of the per-period account
  returns r(k) = V(k+1)/V(k) - 1, not of the price returns;
* "sharpe" is mean(r)/sd(r) with a zero riskless rate, sample standard
  deviation, not annualized;
* a zero standard deviation makes the ratio degenerate: it is reported
  as 0.0 with degenerate_sharpe set, so batch runs never abort on a
  flat series.

Weights are evaluated causally: the weight holding over return X(k)
is computed from information up to and including S(k).
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import PurePath
from typing import Optional, Sequence

import numpy as np

from .policy import MarketBounds, PolicyConfig, evolve
from .simulate import prices_to_returns
from .weights import WeightSpec, eval_schedule

__all__ = [
    "PriceSeries",
    "BacktestReport",
    "ingest_csv",
    "run_backtest",
    "buy_and_hold_report",
    "batch_backtest",
    "sharpe_ratio",
]


@dataclass(frozen=True)
class PriceSeries:
    """Validated price history: positive prices at strictly increasing times."""

    timestamps: np.ndarray
    prices: np.ndarray
    symbol: str = ""

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        px = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)
        if ts.ndim != 1 or px.ndim != 1 or ts.size != px.size:
            raise ValueError("timestamps and prices must be equally long 1-d sequences")
        if ts.size == 0:
            raise ValueError("empty series")
        if np.any(px <= 0.0):
            raise ValueError("nonpositive price")
        if ts.size > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError("nonmonotone timestamps")

    def __len__(self) -> int:
        return int(self.prices.size)


@dataclass(frozen=True)
class BacktestReport:
    """Metrics of one policy run over one series."""

    gain_loss: float
    variance: float
    sharpe: float
    degenerate_sharpe: bool
    n_periods: int
    curve: np.ndarray  # shape (n_periods+1, 2): stage, cumulative gain
    weights_used: np.ndarray
    symbol: str = ""

    def to_dict(self) -> dict:
        """JSON-shaped summary; the curve travels separately as CSV."""
        return {
            "gain_loss": self.gain_loss,
            "variance": self.variance,
            "sharpe": self.sharpe,
            "degenerate_sharpe": self.degenerate_sharpe,
            "n_periods": self.n_periods,
        }


def ingest_csv(source, symbol: Optional[str] = None) -> PriceSeries:
    """Parse a `timestamp,price` CSV into a validated PriceSeries.

    timestamp is an integer (epoch seconds or a plain ordinal), price a
    positive decimal.  Lines starting with '#' are skipped.  Bad rows
    are rejected with their 1-based row number, the header being row 1.
    """
    if hasattr(source, "read"):
        fh, owned = source, False
        name = getattr(source, "name", "")
    else:
        fh, owned = open(source, newline=""), True
        name = str(source)
    try:
        reader = csv.reader(fh)
        header = None
        timestamps: list[int] = []
        prices: list[float] = []
        for row in reader:
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                # first surviving line; '#' preambles may precede it
                header = row
                if [c.strip().lower() for c in header[:2]] != ["timestamp", "price"]:
                    raise ValueError(
                        f"expected header 'timestamp,price', got {','.join(header)!r}"
                    )
                continue
            rownum = reader.line_num
            if len(row) < 2:
                raise ValueError(f"row {rownum}: expected 2 columns, got {len(row)}")
            try:
                ts = int(row[0])
                price = float(row[1])
            except ValueError:
                raise ValueError(f"row {rownum}: could not parse {row[:2]!r}") from None
            if price <= 0.0:
                raise ValueError(f"row {rownum}: nonpositive price {price}")
            timestamps.append(ts)
            prices.append(price)
        if header is None:
            raise ValueError("empty file")
        if not timestamps:
            raise ValueError("no data rows")
        label = symbol if symbol is not None else (PurePath(name).stem if name else "")
        # PriceSeries re-validates; duplicated/regressing times surface here
        # as "nonmonotone timestamps".
        return PriceSeries(np.array(timestamps, np.int64), np.array(prices), label)
    finally:
        if owned:
            fh.close()


def sharpe_ratio(period_returns: Sequence[float]) -> float:
    """mean/sd of per-period returns: rf = 0, sample sd, unannualized.

    A zero sd would divide by zero; that degenerate case maps to 0.0
    (run_backtest additionally flags it).
    """
    r = np.asarray(period_returns, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise ValueError("need at least two period returns")
    sd = float(r.std(ddof=1))
    if sd == 0.0:
        return 0.0
    return float(r.mean()) / sd


def _bounds_covering(base: MarketBounds, returns: np.ndarray) -> MarketBounds:
    # Widen, never shrink: x_min stays < 0 and x_max > 0 because the base
    # bounds satisfy that already; observed returns exceed -1 by construction.
    lo = min(base.x_min, float(np.min(returns)))
    hi = max(base.x_max, float(np.max(returns)))
    return MarketBounds(lo, hi)


def run_backtest(
    config: PolicyConfig,
    spec: WeightSpec,
    series: PriceSeries,
    *,
    bounds_from_data: bool = False,
) -> BacktestReport:
    """Trade the schedule over the series and summarize.

    Strict by default: any observed return outside the configured market
    bounds aborts the run (the survivability guarantees are tied to the
    bounds).  bounds_from_data widens the bounds to cover the observed
    returns instead; note that an observed return above 1 then lowers
    w_max below 1, and a schedule exceeding it is still rejected.
    """
    if len(series) < 2:
        raise ValueError("series must contain at least two prices")
    x = prices_to_returns(series.prices)
    n = int(x.size)
    cfg = config
    if bounds_from_data:
        cfg = dataclasses.replace(config, bounds=_bounds_covering(config.bounds, x))
    w = eval_schedule(spec, n, prices=series.prices if spec.price_driven else None)

    trajectory = evolve(cfg, w, x)
    values = trajectory.values
    r = values[1:] / values[:-1] - 1.0
    if n >= 2:
        sd = float(r.std(ddof=1))
        variance = sd * sd
        degenerate = sd == 0.0
        sharpe = 0.0 if degenerate else float(r.mean()) / sd
    else:
        # one period: no spread to measure
        variance, sharpe, degenerate = 0.0, 0.0, True

    curve = np.column_stack([np.arange(n + 1, dtype=float), trajectory.gains])
    return BacktestReport(
        gain_loss=float(trajectory.gains[-1]),
        variance=variance,
        sharpe=sharpe,
        degenerate_sharpe=degenerate,
        n_periods=n,
        curve=curve,
        weights_used=w,
        symbol=series.symbol,
    )


def buy_and_hold_report(config: PolicyConfig, series: PriceSeries) -> BacktestReport:
    """Long-only baseline: the whole account rides the price, v(k) = v0*S(k)/S(0).

    This is the policy at alpha = 1 with w = 1 at every stage.  The
    short leg then holds nothing, so the short-side cap w <= 1/x_max is
    vacuous; computing the curve directly from price relatives lets the
    baseline run on any ingested series, including ones with a
    single-period return above +100%.  On data where w = 1 passes the
    generic admissibility check, run_backtest(alpha=1, constant w=1)
    reproduces this report to floating-point accuracy.
    """
    if len(series) < 2:
        raise ValueError("series must contain at least two prices")
    values = config.v0 * series.prices / series.prices[0]
    r = values[1:] / values[:-1] - 1.0
    n = int(r.size)
    if n >= 2:
        sd = float(r.std(ddof=1))
        variance = sd * sd
        degenerate = sd == 0.0
        sharpe = 0.0 if degenerate else float(r.mean()) / sd
    else:
        variance, sharpe, degenerate = 0.0, 0.0, True
    curve = np.column_stack([np.arange(n + 1, dtype=float), values - config.v0])
    return BacktestReport(
        gain_loss=float(values[-1] - config.v0),
        variance=variance,
        sharpe=sharpe,
        degenerate_sharpe=degenerate,
        n_periods=n,
        curve=curve,
        weights_used=np.ones(n),
        symbol=series.symbol,
    )


def batch_backtest(
    config: PolicyConfig,
    specs: dict[str, WeightSpec],
    series: PriceSeries,
    *,
    include_buy_hold: bool = False,
    bounds_from_data: bool = False,
) -> dict[str, BacktestReport]:
    """One report per named spec, in input order; optional buy-and-hold column."""
    reports: dict[str, BacktestReport] = {}
    if include_buy_hold:
        reports["buy_and_hold"] = buy_and_hold_report(config, series)
    for name, spec in specs.items():
        reports[name] = run_backtest(
            config, spec, series, bounds_from_data=bounds_from_data
        )
    return reports
