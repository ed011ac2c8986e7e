"""The Poisson limit of the nearly unstable experiments.

Locally to the unit root, inference about the parameter h collapses to a
single Poisson observation Z with mean h * lambda_unit, where
lambda_unit = g(0) * mu / 2 is built from the innovation distribution.
This module evaluates that limit experiment exactly: likelihood ratios
between parameter values, the efficient (unbiased, minimum-variance)
estimator and its variance bound, the power of the uniformly most powerful
test, and Poisson-approximation oracles (exact total variation against a
finite law, the Poisson-binomial distribution, and the first/second-moment
bound for sums of indicator variables).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import InnovationSpec, moments, pmf
from .errors import ParameterError, UndefinedRatioError


@dataclass(frozen=True)
class LimitExperiment:
    """One Poisson observation with mean h * lambda_unit."""

    lambda_unit: float

    def __post_init__(self):
        if not (math.isfinite(self.lambda_unit) and self.lambda_unit >= 0.0):
            raise ParameterError(f"lambda_unit must be a finite non-negative real, got {self.lambda_unit}")


def limit_experiment(spec: InnovationSpec) -> LimitExperiment:
    """Limit experiment of the innovation distribution: lambda_unit = g(0)*mu/2."""
    mu, _ = moments(spec)
    return LimitExperiment(lambda_unit=pmf(spec, 0) * mu / 2.0)


def _check_h(value, name):
    if not (math.isfinite(value) and value >= 0.0):
        raise ParameterError(f"{name} must be a finite non-negative real, got {value}")
    return float(value)


def limit_lr(exp: LimitExperiment, z: int, h: float, h0: float) -> float:
    """Likelihood ratio dQ_h/dQ_h0 at observation z in the limit experiment.

    For h0 > 0 this is exp(-(h - h0) * lambda_unit) * (h/h0)**z, with
    (0/h0)**z read as the indicator of z = 0. For h0 = 0 the reference
    measure sits at z = 0 and the ratio is exp(-h * lambda_unit) * 1{z = 0}.
    h = h0 = 0 with z >= 1 is undefined (both measures vanish) and raises.
    """
    h = _check_h(h, "h")
    h0 = _check_h(h0, "h0")
    z = int(z)
    if z < 0:
        raise ParameterError(f"z must be a non-negative integer, got {z}")
    lam = exp.lambda_unit
    if h0 == 0.0:
        if z >= 1 and h == 0.0:
            raise UndefinedRatioError("h = h0 = 0 with z >= 1: both measures assign probability zero")
        return math.exp(-h * lam) if z == 0 else 0.0
    base = math.exp(-(h - h0) * lam)
    if h == 0.0:
        return base if z == 0 else 0.0
    return base * (h / h0) ** z


def limit_efficient_estimator(exp: LimitExperiment, z: int) -> float:
    """The unbiased minimum-variance estimate of h from one observation: z / lambda_unit."""
    z = int(z)
    if z < 0:
        raise ParameterError(f"z must be a non-negative integer, got {z}")
    if exp.lambda_unit <= 0.0:
        raise ParameterError("the efficient estimator needs lambda_unit > 0")
    return z / exp.lambda_unit


def limit_variance_bound(exp: LimitExperiment, h: float) -> float:
    """Variance of the efficient estimator at h, also the lower bound: h / lambda_unit."""
    h = _check_h(h, "h")
    if exp.lambda_unit <= 0.0:
        raise ParameterError("the variance bound needs lambda_unit > 0")
    return h / exp.lambda_unit


def limit_test_power(exp: LimitExperiment, h: float, alpha: float) -> float:
    """Power of the level-alpha UMP test (reject when z >= 1, randomize at z = 0).

    Closed form 1 - (1 - alpha) * exp(-h * lambda_unit); equals alpha at h = 0.
    """
    h = _check_h(h, "h")
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return 1.0 - (1.0 - alpha) * math.exp(-h * exp.lambda_unit)


def serfling_bound(indicator_means, dependence_terms=()) -> float:
    """First/second-moment bound on the Poisson approximation error of an
    indicator sum: sum of squared means plus the supplied mean absolute
    conditional-mean deviations (zero for independent indicators).
    """
    means = [float(p) for p in indicator_means]
    deps = [float(d) for d in dependence_terms]
    if any(not (0.0 <= p <= 1.0) for p in means):
        raise ParameterError("indicator means must lie in [0, 1]")
    if any(d < 0.0 or math.isnan(d) for d in deps):
        raise ParameterError("dependence terms must be non-negative")
    return math.fsum(p * p for p in means) + math.fsum(deps)


def poisson_pmf(z: int, lam: float) -> float:
    """Poisson pmf, evaluated in log space."""
    if lam < 0.0 or math.isnan(lam):
        raise ParameterError(f"lam must be >= 0, got {lam}")
    z = int(z)
    if z < 0:
        return 0.0
    if lam == 0.0:
        return 1.0 if z == 0 else 0.0
    return math.exp(-lam + z * math.log(lam) - math.lgamma(z + 1.0))


def poisson_binomial_pmf(probabilities) -> np.ndarray:
    """Exact pmf of a sum of independent Bernoulli(p_i) by convolution."""
    probs = [float(p) for p in probabilities]
    if any(not (0.0 <= p <= 1.0) for p in probs):
        raise ParameterError("Bernoulli probabilities must lie in [0, 1]")
    out = np.ones(1, dtype=np.float64)
    for p in probs:
        nxt = np.zeros(len(out) + 1, dtype=np.float64)
        nxt[:-1] = out * (1.0 - p)
        nxt[1:] += out * p
        out = nxt
    return out


def exact_tv_vs_poisson(dist, lam: float) -> float:
    """Exact total variation between a finite law on {0, 1, ...} and Poisson(lam).

    Uses the positive-part identity sum_z max(0, p_z - q_z), which needs no
    Poisson tail truncation because the Poisson excess off the finite
    support never enters the positive part.
    """
    p = np.asarray(dist, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ParameterError("dist must be a non-empty vector of probabilities indexed from 0")
    if np.any(p < 0.0) or not np.all(np.isfinite(p)):
        raise ParameterError("dist entries must be finite and non-negative")
    total = math.fsum(p.tolist())
    if abs(total - 1.0) > 1e-12:
        raise ParameterError(f"dist must sum to 1 within 1e-12, got {total!r}")
    if lam < 0.0 or math.isnan(lam):
        raise ParameterError(f"lam must be >= 0, got {lam}")
    tv = 0.0
    for z in range(p.size):
        diff = p[z] - poisson_pmf(z, lam)
        if diff > 0.0:
            tv += diff
    return tv
