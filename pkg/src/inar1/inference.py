"""Estimators of the local parameter h and unit-root tests.

The efficient estimator counts downward moves: near the unit root the
down-move count is approximately sufficient for h, and rescaling it by
2/(g(0)*mu) gives an asymptotically unbiased estimator whose variance
attains the bound 2h/(g(0)*mu). Plug-in versions of g(0) and mu make the
estimator adaptive when the innovation distribution is unknown. The OLS
estimator of h and the Dickey-Fuller t-statistic are provided for
comparison; both lose against the n^2 localizing rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import DegeneratePathError, ParameterError
from .process import Path, down_moves


@dataclass(frozen=True)
class TestOutcome:
    """Decision of a (possibly randomized) test.

    rejection_probability is 1 or alpha for the randomized down-move test
    and 1 or 0 for the deterministic Dickey-Fuller decision.
    """

    test: str
    statistic: float
    rejection_probability: float
    alpha: float

    def decide(self, rng) -> bool:
        """Draw the randomized decision (deterministic when probability is 0 or 1)."""
        p = self.rejection_probability
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        return rng.uniform() < p


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def efficient_estimate(path: Path, g0: float, mu: float) -> float:
    """2 * (down moves) / (g0 * mu): efficient when g0 and mu are the truth."""
    if not (0.0 < g0 < 1.0):
        raise ParameterError(f"g0 must lie in (0, 1), got {g0}")
    if not (math.isfinite(mu) and mu > 0.0):
        raise ParameterError(f"mu must be a positive finite real, got {mu}")
    return 2.0 * down_moves(path) / (g0 * mu)


def plugin_estimates(path: Path):
    """(g0_hat, mu_hat): fraction of flat steps and X_n / n."""
    values = path.values
    n = path.n
    g0_hat = int(np.count_nonzero(np.diff(values) == 0)) / n
    mu_hat = int(values[-1]) / n
    return g0_hat, mu_hat


def semiparam_estimate(path: Path) -> float:
    """Efficient estimate with plug-in g0_hat and mu_hat (adaptive to unknown G)."""
    g0_hat, mu_hat = plugin_estimates(path)
    if g0_hat == 0.0 or mu_hat == 0.0:
        raise DegeneratePathError(
            f"plug-in denominator vanishes (g0_hat={g0_hat}, mu_hat={mu_hat}); "
            "the semiparametric estimator is undefined for this path"
        )
    return 2.0 * down_moves(path) / (g0_hat * mu_hat)


def ols_estimates(path: Path, mu: float):
    """(theta_hat, h_hat_ols) from the least-squares autoregression slope.

    theta_hat = sum X_{t-1} (X_t - mu) / sum X_{t-1}^2 and
    h_hat_ols = n^2 (1 - theta_hat); the latter explodes under n^2-local
    alternatives and can take either sign.
    """
    if not math.isfinite(mu):
        raise ParameterError(f"mu must be finite, got {mu}")
    values = path.values
    prev = values[:-1].astype(np.float64)
    nxt = values[1:].astype(np.float64)
    denom = float(np.dot(prev, prev))
    if denom == 0.0:
        raise DegeneratePathError("all regressor states are zero; OLS slope is undefined")
    theta_hat = float(np.dot(prev, nxt - mu)) / denom
    n = path.n
    return theta_hat, float(n * n) * (1.0 - theta_hat)


def df_statistic(path: Path, mu: float, sigma2: float) -> float:
    """Dickey-Fuller t-statistic (theta_hat - 1) / sqrt(sigma2 / sum X_{t-1}^2)."""
    if not (math.isfinite(sigma2) and sigma2 > 0.0):
        raise ParameterError(f"sigma2 must be a positive finite real, got {sigma2}")
    theta_hat, _ = ols_estimates(path, mu)
    prev = path.values[:-1].astype(np.float64)
    ssq = float(np.dot(prev, prev))
    return (theta_hat - 1.0) / math.sqrt(sigma2 / ssq)


def df_test(tau: float, alpha: float) -> TestOutcome:
    """One-sided lower-tail decision: reject the unit root when tau < z_alpha."""
    alpha = _check_alpha(alpha)
    crit = NormalDist().inv_cdf(alpha)
    return TestOutcome(
        test="df",
        statistic=float(tau),
        rejection_probability=1.0 if tau < crit else 0.0,
        alpha=alpha,
    )


def efficient_test(path: Path, alpha: float) -> TestOutcome:
    """Reject whenever the path ever moves down; randomize at level alpha otherwise.

    The rejection probability is reported exactly (1 or alpha), which lets
    callers aggregate expected power without extra randomization noise;
    TestOutcome.decide draws the auxiliary coin when an actual decision is
    needed.
    """
    alpha = _check_alpha(alpha)
    d = down_moves(path)
    return TestOutcome(
        test="efficient",
        statistic=float(d),
        rejection_probability=1.0 if d >= 1 else alpha,
        alpha=alpha,
    )
