"""Closed-form moments of the cumulative gain-loss, plus verification tools.

Setting: per-period returns are independent with a common mean mu (and,
where variances appear, a common variance sigma2), the riskless rate is
zero, and the weight schedule is admissible.  Expectations then factor
across stages, so the mean and variance of the terminal gain-loss
reduce to products over the schedule.

Every operation here rejects configs with rf != 0 rather than silently
ignoring the rate: the formulas are only valid in the frictionless
setting.

The module also carries its own independent oracle, brute_force_moments,
which enumerates every path of a two-point return distribution and
touches none of the closed forms; triangulating the formulas against it
is the basis of the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .policy import AdmissibilityError, PolicyConfig, derive_w_max

__all__ = [
    "ReturnMoments",
    "GainLossStats",
    "TwoPointModel",
    "RpeScanReport",
    "expected_gain_loss",
    "expected_gain_loss_constant",
    "variance_gain_loss",
    "second_moment_gain_loss",
    "gain_loss_stats",
    "brute_force_moments",
    "rpe_scan",
    "sign_condition_gain",
]

BRUTE_FORCE_MAX_K = 25  # 2^k paths are enumerated; keep the tree sane


@dataclass(frozen=True)
class ReturnMoments:
    """Common per-period mean and variance of the returns."""

    mu: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class GainLossStats:
    """Mean and variance of the terminal gain-loss at a given horizon."""

    mean: float
    variance: float
    horizon: int


@dataclass(frozen=True)
class TwoPointModel:
    """Two-point return distribution: x_up with probability p_up, else x_down.

    The minimal bounded-support model with freely matchable first and
    second moments:

        mu     = p_up*x_up + (1 - p_up)*x_down
        sigma2 = p_up*(1 - p_up)*(x_up - x_down)^2

    p_up may sit at 0 or 1 (degenerate, sigma2 = 0); the closed-form
    variance comparisons need an interior p_up, the generators do not.
    """

    x_up: float
    x_down: float
    p_up: float

    def __post_init__(self):
        if not -1.0 < self.x_down < 0.0 < self.x_up:
            raise ValueError(
                f"need -1 < x_down < 0 < x_up, got x_down={self.x_down}, x_up={self.x_up}"
            )
        if not 0.0 <= self.p_up <= 1.0:
            raise ValueError(f"p_up must lie in [0, 1], got {self.p_up}")

    @property
    def mu(self) -> float:
        return self.p_up * self.x_up + (1.0 - self.p_up) * self.x_down

    @property
    def sigma2(self) -> float:
        return self.p_up * (1.0 - self.p_up) * (self.x_up - self.x_down) ** 2

    def moments(self) -> ReturnMoments:
        return ReturnMoments(mu=self.mu, sigma2=self.sigma2)


def _require_frictionless(config: PolicyConfig) -> None:
    if config.rf != 0.0:
        raise ValueError(
            f"closed-form gain-loss analytics assume rf = 0, got rf={config.rf}"
        )


def _check_mu(mu: float) -> None:
    if not abs(mu) < 1.0:
        raise ValueError(f"|mu| must be < 1, got {mu}")


def _schedule_head(config: PolicyConfig, weights: Sequence[float], k: int) -> np.ndarray:
    """First k weights, validated admissible under the config bounds."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise ValueError("weights must be one-dimensional")
    if k < 1:
        raise ValueError(f"horizon k must be >= 1, got {k}")
    if w.size < k:
        raise ValueError(f"horizon k={k} exceeds schedule length {w.size}")
    head = w[:k]
    w_max = derive_w_max(config.bounds)
    bad = np.flatnonzero((head < 0.0) | (head > w_max))
    if bad.size:
        raise AdmissibilityError(
            f"weight {head[bad[0]]} outside [0, {w_max}] at stage {int(bad[0])}"
        )
    return head


def expected_gain_loss(
    config: PolicyConfig, weights: Sequence[float], mu: float, k: int
) -> float:
    """Expected terminal gain-loss at horizon k.

        v0 * (alpha*prod(1 + w_j*mu) + (1-alpha)*prod(1 - w_j*mu) - 1)

    over the first k schedule entries.  With alpha = 1/2, k > 1, mu != 0
    and at least two strictly positive weights among the first k, the
    value is strictly positive regardless of the sign of mu.
    """
    _require_frictionless(config)
    _check_mu(mu)
    w = _schedule_head(config, weights, k)
    up = np.multiply.reduce(1.0 + w * mu)
    down = np.multiply.reduce(1.0 - w * mu)
    return float(config.v0 * (config.alpha * up + (1.0 - config.alpha) * down - 1.0))


def expected_gain_loss_constant(
    config: PolicyConfig, w: float, mu: float, k: int
) -> float:
    """Constant-weight reduction: v0*(alpha*(1+w*mu)^k + (1-alpha)*(1-w*mu)^k - 1)."""
    _require_frictionless(config)
    _check_mu(mu)
    if k < 1:
        raise ValueError(f"horizon k must be >= 1, got {k}")
    w_max = derive_w_max(config.bounds)
    if not 0.0 <= w <= w_max:
        raise AdmissibilityError(f"weight {w} outside [0, {w_max}]")
    a = config.alpha
    return float(
        config.v0 * (a * (1.0 + w * mu) ** k + (1.0 - a) * (1.0 - w * mu) ** k - 1.0)
    )


def variance_gain_loss(
    config: PolicyConfig, weights: Sequence[float], moments: ReturnMoments, k: int
) -> float:
    """Variance of the terminal gain-loss from the six-product identity.

        v0^2 * [ alpha^2     * prod(w^2 s2 + (1+w mu)^2)
               + (1-alpha)^2 * prod(w^2 s2 + (1-w mu)^2)
               + 2 alpha(1-alpha) * prod(1 - w^2 (s2 + mu^2))
               - 2 alpha(1-alpha) * prod(1 - w^2 mu^2)
               - alpha^2     * prod(1+w mu)^2
               - (1-alpha)^2 * prod(1-w mu)^2 ]

    The six terms nearly cancel for small exposures, so the result can
    carry an absolute floating-point residue of order 1e-16*v0^2; values
    below -1e-12*v0^2 indicate a bug, not roundoff.  At k = 1 the whole
    expression collapses to v0^2 * w^2 * s2 * (2 alpha - 1)^2.
    """
    _require_frictionless(config)
    _check_mu(moments.mu)
    w = _schedule_head(config, weights, k)
    a = config.alpha
    mu, s2 = moments.mu, moments.sigma2
    up = 1.0 + w * mu
    down = 1.0 - w * mu
    ws2 = w * w * s2
    p_up2 = np.multiply.reduce(ws2 + up * up)
    p_down2 = np.multiply.reduce(ws2 + down * down)
    p_cross = np.multiply.reduce(1.0 - w * w * (s2 + mu * mu))
    p_mu = np.multiply.reduce(1.0 - (w * mu) ** 2)
    p_up = np.multiply.reduce(up)
    p_down = np.multiply.reduce(down)
    value = (
        a * a * p_up2
        + (1.0 - a) ** 2 * p_down2
        + 2.0 * a * (1.0 - a) * p_cross
        - 2.0 * a * (1.0 - a) * p_mu
        - a * a * p_up * p_up
        - (1.0 - a) ** 2 * p_down * p_down
    )
    return float(config.v0 * config.v0 * value)


def second_moment_gain_loss(
    config: PolicyConfig, weights: Sequence[float], moments: ReturnMoments, k: int
) -> float:
    """E[gain^2] at horizon k.

        v0^2 * [ alpha^2     * prod(w^2 s2 + (1+w mu)^2)
               + (1-alpha)^2 * prod(w^2 s2 + (1-w mu)^2)
               + 1
               + 2 alpha(1-alpha) * prod(1 - w^2 (s2 + mu^2))
               - 2 alpha     * prod(1+w mu)
               - 2 (1-alpha) * prod(1-w mu) ]

    Satisfies variance == second_moment - mean^2 (an identity the test
    suite checks against variance_gain_loss, which is evaluated from a
    different grouping of the same products).
    """
    _require_frictionless(config)
    _check_mu(moments.mu)
    w = _schedule_head(config, weights, k)
    a = config.alpha
    mu, s2 = moments.mu, moments.sigma2
    up = 1.0 + w * mu
    down = 1.0 - w * mu
    ws2 = w * w * s2
    p_up2 = np.multiply.reduce(ws2 + up * up)
    p_down2 = np.multiply.reduce(ws2 + down * down)
    p_cross = np.multiply.reduce(1.0 - w * w * (s2 + mu * mu))
    p_up = np.multiply.reduce(up)
    p_down = np.multiply.reduce(down)
    value = (
        a * a * p_up2
        + (1.0 - a) ** 2 * p_down2
        + 1.0
        + 2.0 * a * (1.0 - a) * p_cross
        - 2.0 * a * p_up
        - 2.0 * (1.0 - a) * p_down
    )
    return float(config.v0 * config.v0 * value)


def gain_loss_stats(
    config: PolicyConfig, weights: Sequence[float], moments: ReturnMoments, k: int
) -> GainLossStats:
    """Mean and variance bundled for reporting."""
    return GainLossStats(
        mean=expected_gain_loss(config, weights, moments.mu, k),
        variance=variance_gain_loss(config, weights, moments, k),
        horizon=k,
    )


def brute_force_moments(
    config: PolicyConfig, weights: Sequence[float], model: TwoPointModel, k: int
) -> tuple[float, float]:
    """Exact (mean, variance) of the terminal gain by path enumeration.

    Walks all 2^k return paths of the two-point model: path i assigns
    x_up to stage j when bit j of i is set, and carries probability
    p_up^(#up) * (1-p_up)^(k-#up).  Only the account recursion is used,
    none of the closed forms above, so agreement with them is evidence,
    not circularity.  Exponential in k; capped at k = 25.
    """
    _require_frictionless(config)
    if k > BRUTE_FORCE_MAX_K:
        raise ValueError(f"k={k} exceeds the 2^k enumeration cap of {BRUTE_FORCE_MAX_K}")
    w = _schedule_head(config, weights, k)
    n = 1 << k
    idx = np.arange(n, dtype=np.uint32)
    growth_long = np.ones(n)
    growth_short = np.ones(n)
    ups = np.zeros(n, dtype=np.int64)
    for j in range(k):
        bit = (idx >> j) & np.uint32(1)
        x = np.where(bit == 1, model.x_up, model.x_down)
        growth_long *= 1.0 + w[j] * x
        growth_short *= 1.0 - w[j] * x
        ups += bit
    prob = model.p_up ** ups * (1.0 - model.p_up) ** (k - ups)
    gains = config.v0 * (
        config.alpha * growth_long + (1.0 - config.alpha) * growth_short - 1.0
    )
    mean = float(prob @ gains)
    second = float(prob @ (gains * gains))
    return mean, second - mean * mean


@dataclass(frozen=True)
class RpeScanReport:
    """Outcome of a positivity scan of the expected gain-loss.

    certifiable: the hypotheses hold (alpha = 1/2 and every horizon in
    [2, k_max] sees at least two strictly positive weights); when they
    do not, `reason` says why and `certified` is necessarily False.
    certified: certifiable and the minimum over mu != 0 grid entries is
    strictly positive.  Entries at mu = 0 are evaluated (they are
    exactly 0) but never count toward the certificate.
    """

    certifiable: bool
    reason: Optional[str]
    certified: bool
    min_gain: Optional[float]
    argmin: Optional[tuple[float, int]]  # (mu, k) of the minimum, mu != 0 only
    mu_grid: tuple[float, ...]
    k_range: tuple[int, int]
    entries: np.ndarray  # shape (len(mu_grid), k_max - 1); [i, j] = gain at (mu_i, k=j+2)


def rpe_scan(
    config: PolicyConfig,
    weights: Sequence[float],
    mu_grid: Sequence[float],
    k_max: int,
) -> RpeScanReport:
    """Evaluate the expected gain-loss over a (mu, k) grid and certify positivity.

    The certificate covers every k in [2, k_max] and every nonzero mu in
    the grid.  Hypothesis violations (alpha != 1/2, or a horizon whose
    weight prefix has fewer than two strictly positive entries) are
    reported as "not certifiable", which is a different statement from a
    positivity failure: the grid is still evaluated and reported either
    way.  Grid entries are mutually independent, so evaluation order
    cannot change the result.
    """
    _require_frictionless(config)
    if k_max < 2:
        raise ValueError(f"k_max must be >= 2, got {k_max}")
    grid = tuple(float(m) for m in mu_grid)
    if not grid:
        raise ValueError("mu_grid must be nonempty")
    for m in grid:
        _check_mu(m)
    w = _schedule_head(config, weights, k_max)

    reason = None
    if config.alpha != 0.5:
        reason = f"alpha must equal 1/2 for the certificate, got {config.alpha}"
    else:
        positives = np.cumsum(w > 0.0)
        lacking = np.flatnonzero(positives[1:] < 2)  # index j <-> horizon j+2
        if lacking.size:
            reason = (
                f"fewer than two strictly positive weights among the first "
                f"{int(lacking[0]) + 2} stages"
            )

    entries = np.empty((len(grid), k_max - 1))
    for i, mu in enumerate(grid):
        up = np.cumprod(1.0 + w * mu)
        down = np.cumprod(1.0 - w * mu)
        totals = config.v0 * (
            config.alpha * up + (1.0 - config.alpha) * down - 1.0
        )
        entries[i] = totals[1:]  # horizons 2..k_max

    nonzero_rows = [i for i, mu in enumerate(grid) if mu != 0.0]
    min_gain = None
    argmin = None
    if nonzero_rows:
        sub = entries[nonzero_rows]
        flat = int(np.argmin(sub))
        row, col = divmod(flat, sub.shape[1])
        min_gain = float(sub[row, col])
        argmin = (grid[nonzero_rows[row]], col + 2)

    certifiable = reason is None
    certified = certifiable and min_gain is not None and min_gain > 0.0
    return RpeScanReport(
        certifiable=certifiable,
        reason=reason,
        certified=certified,
        min_gain=min_gain,
        argmin=argmin,
        mu_grid=grid,
        k_range=(2, k_max),
        entries=entries,
    )


def sign_condition_gain(
    config: PolicyConfig, weights: Sequence[float], mu: float, k: int
) -> bool:
    """Whether (2*alpha - 1)*mu > 0 strictly.

    The boolean depends only on alpha and mu; weights and k are accepted
    so the guarantee can be exercised on the same inputs: whenever the
    condition holds and some weight among the first k is strictly
    positive, expected_gain_loss is positive for every horizon from 1 on
    (both product terms sit on the profitable side).
    """
    return (2.0 * config.alpha - 1.0) * mu > 0.0
