"""Account dynamics of the double linear long-short policy.

An account of initial value v0 is split once, at stage 0, into a long
sub-account alpha*v0 and a short sub-account (1-alpha)*v0.  At every
stage both sub-accounts scale linearly in the realized per-period
return x: the long leg by (1 + w*x), plus riskless accrual on its
uninvested fraction, and the short leg by (1 - w*x).  As long as the
weight w stays inside [0, w_max] with w_max = min(1, 1/x_max) and the
return stays inside the market bounds, the long leg remains strictly
positive and the short leg nonnegative, so the total account value
never reaches zero (survivability).

Inadmissible inputs are rejected, never clamped; an explicit clamp
utility lives in the weights module.  This keeps the hypotheses of the
positive-expectation results auditable: a run that completed was a run
whose inputs satisfied them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "AdmissibilityError",
    "MarketBounds",
    "PolicyConfig",
    "AccountState",
    "Trajectory",
    "derive_w_max",
    "initial_state",
    "step_account",
    "evolve",
    "survivability_bound",
]


class AdmissibilityError(ValueError):
    """A weight or return fell outside the admissible set."""


@dataclass(frozen=True)
class MarketBounds:
    """Per-period return bounds, -1 < x_min < 0 < x_max < inf."""

    x_min: float
    x_max: float

    def __post_init__(self):
        if not -1.0 < self.x_min < 0.0:
            raise ValueError(f"x_min must lie in (-1, 0), got {self.x_min}")
        if not 0.0 < self.x_max < np.inf:
            raise ValueError(f"x_max must lie in (0, inf), got {self.x_max}")


def derive_w_max(bounds: MarketBounds) -> float:
    """Largest admissible weight, min(1, 1/x_max)."""
    return min(1.0, 1.0 / bounds.x_max)


@dataclass(frozen=True)
class PolicyConfig:
    """Split fraction, market bounds, initial capital and riskless rate.

    alpha = 1 is a pure long position, alpha = 0 pure short; both are
    allowed here, although the positive-expectation guarantees in the
    analytics module only concern alpha strictly inside (0, 1).
    """

    alpha: float
    bounds: MarketBounds
    v0: float = 1.0
    rf: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.v0 > 0.0:
            raise ValueError(f"v0 must be positive, got {self.v0}")
        if self.rf < 0.0:
            raise ValueError(f"rf must be nonnegative, got {self.rf}")

    @property
    def w_max(self) -> float:
        return derive_w_max(self.bounds)


@dataclass(frozen=True)
class AccountState:
    """Long and short sub-account values after `stage` completed periods."""

    v_long: float
    v_short: float
    stage: int = 0

    @property
    def total(self) -> float:
        return self.v_long + self.v_short


@dataclass(frozen=True)
class Trajectory:
    """States and cumulative gains for stages 0..k."""

    states: tuple[AccountState, ...]
    gains: np.ndarray  # gains[j] = V(j) - v0

    @property
    def values(self) -> np.ndarray:
        """Total account value per stage."""
        return np.array([s.v_long + s.v_short for s in self.states])

    @property
    def horizon(self) -> int:
        return len(self.states) - 1

    @property
    def final_gain(self) -> float:
        return float(self.gains[-1])


def initial_state(config: PolicyConfig) -> AccountState:
    """The stage-0 split: alpha*v0 long, (1-alpha)*v0 short."""
    return AccountState(config.alpha * config.v0, (1.0 - config.alpha) * config.v0, 0)


def _check_weight(w: float, w_max: float, stage=None) -> None:
    if not 0.0 <= w <= w_max:
        where = "" if stage is None else f" at stage {stage}"
        raise AdmissibilityError(f"weight {w} outside [0, {w_max}]{where}")


def _check_return(x: float, bounds: MarketBounds, stage=None) -> None:
    if not bounds.x_min <= x <= bounds.x_max:
        where = "" if stage is None else f" at stage {stage}"
        raise AdmissibilityError(
            f"return {x} outside [{bounds.x_min}, {bounds.x_max}]{where}"
        )


def _advance(state: AccountState, w: float, x: float, rf: float) -> AccountState:
    # The recursion itself, shared by step_account and evolve so the two
    # agree bit for bit.
    v_long = state.v_long * (1.0 + w * x) + state.v_long * (1.0 - w) * rf
    v_short = state.v_short * (1.0 - w * x)
    return AccountState(v_long, v_short, state.stage + 1)


def step_account(
    state: AccountState, w: float, x: float, config: PolicyConfig
) -> AccountState:
    """Advance one stage.

    Long leg: v*(1 + w*x) + v*(1 - w)*rf, the second term being the
    riskless rate earned on the uninvested fraction of the long capital.
    Short leg: v*(1 - w*x); short proceeds earn nothing here.

    Raises AdmissibilityError when w falls outside [0, w_max] or x
    outside the market bounds.
    """
    _check_weight(w, derive_w_max(config.bounds))
    _check_return(x, config.bounds)
    return _advance(state, w, x, config.rf)


def evolve(
    config: PolicyConfig,
    weights: Sequence[float],
    returns: Sequence[float],
) -> Trajectory:
    """Run the policy over a full return path.

    weights[k] is applied to returns[k]; both sequences must have equal
    length.  Every element is validated up front so rejection errors
    cite the offending stage.  With rf = 0 the terminal value equals
    v0*(alpha*prod(1 + w*x) + (1-alpha)*prod(1 - w*x)) up to
    floating-point accumulation.
    """
    w = np.asarray(weights, dtype=float)
    x = np.asarray(returns, dtype=float)
    if w.ndim != 1 or x.ndim != 1 or w.size != x.size:
        raise ValueError(
            f"weights and returns must be equally long 1-d sequences, "
            f"got lengths {w.size} and {x.size}"
        )
    w_max = derive_w_max(config.bounds)
    bad = np.flatnonzero((w < 0.0) | (w > w_max))
    if bad.size:
        _check_weight(float(w[bad[0]]), w_max, stage=int(bad[0]))
    bad = np.flatnonzero((x < config.bounds.x_min) | (x > config.bounds.x_max))
    if bad.size:
        _check_return(float(x[bad[0]]), config.bounds, stage=int(bad[0]))

    state = initial_state(config)
    states = [state]
    for wk, xk in zip(w.tolist(), x.tolist()):
        state = _advance(state, wk, xk, config.rf)
        states.append(state)
    gains = np.array([s.v_long + s.v_short for s in states]) - config.v0
    return Trajectory(states=tuple(states), gains=gains)


def survivability_bound(config: PolicyConfig, k: int) -> tuple[float, float]:
    """Worst-case lower bounds (long leg, short leg) after k stages.

    Long: v0*alpha*(1 + w_max*x_min)^k, strictly positive because
    w_max <= 1 and x_min > -1.  Short: v0*(1-alpha)*(1 - w_max*x_max)^k,
    which is >= 0 and touches 0 exactly when w_max = 1/x_max.
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    w_max = derive_w_max(config.bounds)
    lo_long = config.v0 * config.alpha * (1.0 + w_max * config.bounds.x_min) ** k
    lo_short = config.v0 * (1.0 - config.alpha) * (1.0 - w_max * config.bounds.x_max) ** k
    return lo_long, lo_short
