"""Reproducible Monte Carlo harness for the near-unit-root limit claims.

Each experiment cell (experiment name, local parameter h, sample size n)
runs `replications` independent paths. Replication r of a cell draws its
seed from a fixed mixing function of (master_seed, experiment, h index,
n index, r), so results are identical across runs, execution orders and
worker counts; workers only produce per-replication arrays, and all
aggregation happens afterwards in replication order.

Experiments
-----------
down_move_law    law of the down-move count against its Poisson limit
lr_law           exact/leading/approximate log likelihood ratios, data at h0
estimator_risk   bias/variance of the down-move estimator and its adaptive twin
ols_explosion    growth of |h_ols| across n at a fixed alternative
df_size          Dickey-Fuller rejection rate and null normality
efficient_power  expected power of the randomized down-move test
moment_check     scaled path sums, moments of X_n, multi-death frequency
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from .backend import kernels as _k
from .dist import InnovationSpec, moments, pmf, spec_from_dict, spec_to_dict
from .errors import ConfigError, ParameterError
from .limitexp import LimitExperiment, limit_test_power, limit_variance_bound, poisson_pmf
from .process import theoretical_moments

EXPERIMENTS = (
    "down_move_law",
    "lr_law",
    "estimator_risk",
    "ols_explosion",
    "df_size",
    "efficient_power",
    "moment_check",
)

_MASK64 = (1 << 64) - 1


# -- deterministic seed derivation ------------------------------------------

def _mix64(x: int) -> int:
    """splitmix64 finalizer: advance by the golden-ratio constant and scramble."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & _MASK64
    return h


def derive_seed(master_seed: int, experiment: str, h_index: int, n_index: int, replication: int) -> int:
    """Platform-independent 64-bit stream seed for one replication.

    Chains the splitmix64 finalizer over (master_seed, FNV-1a hash of the
    experiment tag, h index, n index, replication index), xor-ing each
    component in before mixing. Deterministic and order-free by
    construction: the seed depends only on the five coordinates.
    """
    x = _mix64(int(master_seed) & _MASK64)
    for part in (_fnv1a64(experiment.encode("utf-8")), h_index, n_index, replication):
        x = _mix64(x ^ (int(part) & _MASK64))
    return x


def _cell_seeds(master_seed, experiment, h_index, n_index, replications):
    return [derive_seed(master_seed, experiment, h_index, n_index, r) for r in range(replications)]


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class Threshold:
    """Acceptance bound checked against summary rows after a run.

    metric is "estimate" or the name of an extras entry; h and n restrict
    the match when given. A row breaches when its value exceeds max, falls
    below min, or is NaN.
    """

    experiment: str
    metric: str = "estimate"
    max: float | None = None
    min: float | None = None
    h: float | None = None
    n: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Full specification of a harness run."""

    spec: InnovationSpec
    h_grid: tuple
    h0: float
    n_grid: tuple
    replications: int
    alpha: float
    master_seed: int
    targets: tuple
    thresholds: tuple = ()

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.h_grid:
            raise ConfigError("h_grid must be non-empty")
        if not self.n_grid:
            raise ConfigError("n_grid must be non-empty")
        if not self.targets:
            raise ConfigError("targets must name at least one experiment")
        for t in self.targets:
            if t not in EXPERIMENTS:
                raise ConfigError(f"unknown experiment {t!r}; known: {', '.join(EXPERIMENTS)}")
        for n in self.n_grid:
            if int(n) < 1:
                raise ConfigError(f"n must be positive, got {n}")
            for h in self.h_grid:
                if h < 0 or h > n * n:
                    raise ConfigError(f"need 0 <= h/n^2 <= 1 for every cell (h={h}, n={n})")
            if self.h0 < 0 or self.h0 > n * n:
                raise ConfigError(f"need 0 <= h0/n^2 <= 1 (h0={self.h0}, n={n})")


def config_to_dict(config: ExperimentConfig) -> dict:
    out = {
        "dist": spec_to_dict(config.spec),
        "h_grid": list(config.h_grid),
        "h0": config.h0,
        "n_grid": list(config.n_grid),
        "replications": config.replications,
        "alpha": config.alpha,
        "master_seed": config.master_seed,
        "targets": list(config.targets),
    }
    if config.thresholds:
        out["thresholds"] = [
            {k: v for k, v in vars(t).items() if v is not None} for t in config.thresholds
        ]
    return out


def config_from_dict(data: dict) -> ExperimentConfig:
    try:
        spec = spec_from_dict(data["dist"])
        thresholds = tuple(
            Threshold(
                experiment=t["experiment"],
                metric=t.get("metric", "estimate"),
                max=t.get("max"),
                min=t.get("min"),
                h=t.get("h"),
                n=t.get("n"),
            )
            for t in data.get("thresholds", ())
        )
        return ExperimentConfig(
            spec=spec,
            h_grid=tuple(float(h) for h in data["h_grid"]),
            h0=float(data.get("h0", 0.0)),
            n_grid=tuple(int(n) for n in data["n_grid"]),
            replications=int(data["replications"]),
            alpha=float(data.get("alpha", 0.05)),
            master_seed=int(data["master_seed"]),
            targets=tuple(data["targets"]),
            thresholds=thresholds,
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed experiment config: {exc!r}") from None


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as f:
        return config_from_dict(json.load(f))


def default_config(spec: InnovationSpec, master_seed: int = 1) -> ExperimentConfig:
    """Desk-scale defaults: every experiment over a small (h, n) grid.

    Sized so a full run finishes in minutes on the compiled backend.
    """
    return ExperimentConfig(
        spec=spec,
        h_grid=(0.0, 2.0, 4.0),
        h0=1.0,
        n_grid=(200, 500, 1000, 1600),
        replications=10000,
        alpha=0.05,
        master_seed=master_seed,
        targets=EXPERIMENTS,
    )


# -- summary rows -------------------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    """Aggregated result of one experiment cell.

    estimate/theory/discrepancy/mc_se describe the cell's headline metric;
    secondary metrics live in extras and are emitted as suffixed CSV rows.
    """

    experiment: str
    h: float
    n: int
    replications: int
    failures: int
    estimate: float
    theory: float | None
    discrepancy: float | None
    mc_se: float | None
    extras: dict = field(default_factory=dict)


def _row(experiment, h, n, reps, failures, estimate, theory, mc_se, extras):
    disc = abs(estimate - theory) if theory is not None else None
    return SummaryRow(
        experiment=experiment,
        h=float(h),
        n=int(n),
        replications=int(reps),
        failures=int(failures),
        estimate=float(estimate),
        theory=theory,
        discrepancy=disc,
        mc_se=mc_se,
        extras=extras,
    )


def _mc_se(samples) -> float:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size <= 1:
        return 0.0
    return float(np.std(samples, ddof=1) / math.sqrt(samples.size))


def empirical_tv(histogram, lam: float) -> float:
    """Total variation between an observed count histogram and Poisson(lam).

    Accepts counts indexed from 0 (sequence) or a {value: count} mapping;
    uses the positive-part sum, so the Poisson tail beyond the observed
    support needs no truncation.
    """
    if isinstance(histogram, dict):
        if not histogram:
            raise ParameterError("empty histogram")
        top = max(histogram)
        counts = np.zeros(int(top) + 1, dtype=np.float64)
        for z, c in histogram.items():
            if z < 0 or c < 0:
                raise ParameterError("histogram needs non-negative values and counts")
            counts[int(z)] = c
    else:
        counts = np.asarray(histogram, dtype=np.float64)
        if counts.ndim != 1 or counts.size == 0 or np.any(counts < 0):
            raise ParameterError("histogram must be a non-empty vector of non-negative counts")
    total = counts.sum()
    if total < 1:
        raise ParameterError("histogram must contain at least one observation")
    if lam < 0 or math.isnan(lam):
        raise ParameterError(f"lam must be >= 0, got {lam}")
    tv = 0.0
    for z in range(counts.size):
        diff = counts[z] / total - poisson_pmf(z, lam)
        if diff > 0.0:
            tv += diff
    return tv


def summarize_estimator(samples, true_h: float, variance_bound: float, *,
                        experiment: str = "estimator_summary", h: float | None = None,
                        n: int = 0, failures: int = 0) -> SummaryRow:
    """Summary row for estimator draws: mean, variance, bias, bound ratio, errors."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ParameterError("no estimator samples to summarize (all replications failed?)")
    mean = float(samples.mean())
    var = float(samples.var(ddof=1)) if samples.size > 1 else 0.0
    centered = samples - mean
    m4 = float(np.mean(centered**4))
    var_se = math.sqrt(max(m4 - var * var, 0.0) / samples.size) if samples.size > 1 else 0.0
    extras = {
        "variance": var,
        "bias": mean - true_h,
        "variance_bound": variance_bound,
        "variance_mc_se": var_se,
    }
    if variance_bound > 0.0:
        extras["variance_over_bound"] = var / variance_bound
    return _row(
        experiment, true_h if h is None else h, n, samples.size + failures, failures,
        mean, float(true_h), _mc_se(samples), extras,
    )


# -- parallel batch execution -------------------------------------------------

def _resolve_workers(workers) -> int:
    cap = os.environ.get("INAR1_MAX_WORKERS")
    if workers is None:
        workers = 1
    workers = max(1, int(workers))
    if cap:
        workers = min(workers, max(1, int(cap)))
    return workers


def _stats_task(args):
    kind, param, table, theta, n, seeds = args
    return _k.batch_stats(kind, param, table, theta, n, seeds)


def _loglr_task(args):
    kind, param, table, n, h_values, h0, seeds = args
    return _k.batch_loglr(kind, param, table, n, h_values, h0, seeds)


def _split_seeds(seeds, workers):
    chunk = (len(seeds) + workers - 1) // workers
    return [seeds[i: i + chunk] for i in range(0, len(seeds), chunk)]


def _run_stats(spec, theta, n, seeds, workers):
    kind, param, table = spec.kernel_args()
    if workers <= 1 or len(seeds) < 2 * workers:
        return _stats_task((kind, param, table, theta, n, seeds))
    parts = _split_seeds(seeds, workers)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(_stats_task, [(kind, param, table, theta, n, s) for s in parts]))
    return {key: np.concatenate([r[key] for r in results]) for key in results[0]}


def _run_loglr(spec, n, h_values, h0, seeds, workers):
    kind, param, table = spec.kernel_args()
    if workers <= 1 or len(seeds) < 2 * workers:
        return _loglr_task((kind, param, table, n, h_values, h0, seeds))
    parts = _split_seeds(seeds, workers)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        results = list(ex.map(_loglr_task, [(kind, param, table, n, h_values, h0, s) for s in parts]))
    exact = np.concatenate([r[0] for r in results], axis=0)
    leading = np.concatenate([r[1] for r in results], axis=0)
    down = np.concatenate([r[2] for r in results], axis=0)
    return exact, leading, down


# -- experiment runners ---------------------------------------------------------

def _run_down_move_law(config, h, n, seeds, workers):
    stats = _run_stats(config.spec, 1.0 - h / float(n * n), n, seeds, workers)
    down = stats["down"]
    g0 = pmf(config.spec, 0)
    mu, _ = moments(config.spec)
    lam = h * g0 * mu / 2.0
    tv = empirical_tv(np.bincount(down), lam)
    extras = {
        "mean_down": float(down.mean()),
        "theory_mean_down": lam,
        "frac_down_positive": float(np.count_nonzero(down) / down.size),
    }
    return _row("down_move_law", h, n, len(seeds), 0, tv, 0.0, _mc_se(down), extras)


def _run_lr_law(config, h, n, seeds, workers):
    h0 = config.h0
    exact, leading, down = _run_loglr(config.spec, n, [float(h)], h0, seeds, workers)
    exact = exact[:, 0]
    leading = leading[:, 0]
    failures = int(np.count_nonzero(np.isnan(exact)))
    ok = ~np.isnan(exact)
    exact = exact[ok]
    leading = leading[ok]
    down_ok = down[ok]

    g0 = pmf(config.spec, 0)
    mu, _ = moments(config.spec)
    lam_unit = g0 * mu / 2.0
    drift = -(h - h0) * g0 * mu / 2.0
    if h > 0.0 and h0 > 0.0:
        approx = drift + math.log(h / h0) * down_ok
    elif h0 == 0.0:
        # log(h/0) * D read as 0 when D = 0; +inf otherwise (h > 0).
        approx = np.where(down_ok == 0, drift, np.inf if h > 0.0 else np.nan)
    else:  # h == 0, h0 > 0
        approx = np.where(down_ok == 0, drift, -np.inf)

    lr = np.exp(exact)
    mean_lr = float(lr.mean())
    both_finite = np.isfinite(exact) & np.isfinite(leading)
    gap_lead = np.abs(exact[both_finite] - leading[both_finite])
    af = np.isfinite(exact) & np.isfinite(approx)
    gap_approx = np.abs(exact[af] - approx[af])
    extras = {
        "mean_loglr": float(exact.mean()),
        "mean_abs_exact_minus_leading": float(gap_lead.mean()) if gap_lead.size else float("nan"),
        "mean_abs_exact_minus_approx": float(gap_approx.mean()) if gap_approx.size else float("nan"),
        "n_nonfinite_loglr": float(np.count_nonzero(~np.isfinite(exact))),
        "se_exp_loglr": _mc_se(lr),
    }
    if h > 0.0 and h0 > 0.0 and h != h0:
        # Bin exp(loglr) on the atoms c * (h/h0)**z of the limit law.
        lr_log_ratio = math.log(h / h0)
        z_star = np.rint((exact - drift) / lr_log_ratio).astype(np.int64)
        z_star = np.clip(z_star, 0, None)
        extras["tv_exp_lr"] = empirical_tv(np.bincount(z_star), h0 * lam_unit)
    return _row("lr_law", h, n, len(seeds), failures, mean_lr, 1.0, _mc_se(lr), extras)


def _run_estimator_risk(config, h, n, seeds, workers):
    stats = _run_stats(config.spec, 1.0 - h / float(n * n), n, seeds, workers)
    down = stats["down"].astype(np.float64)
    g0 = pmf(config.spec, 0)
    mu, _ = moments(config.spec)
    hhat = 2.0 * down / (g0 * mu)

    g0_hat = stats["eq"].astype(np.float64) / n
    mu_hat = stats["x_n"].astype(np.float64) / n
    valid = (g0_hat > 0.0) & (mu_hat > 0.0)
    failures = int(np.count_nonzero(~valid))
    htilde = 2.0 * down[valid] / (g0_hat[valid] * mu_hat[valid])
    gap = np.abs(htilde - hhat[valid])

    bound = limit_variance_bound(LimitExperiment(g0 * mu / 2.0), h) if h > 0 else 0.0
    row = summarize_estimator(
        hhat, h, bound, experiment="estimator_risk", h=h, n=n, failures=0,
    )
    extras = dict(row.extras)
    extras["mean_abs_semiparam_gap"] = float(gap.mean()) if gap.size else float("nan")
    extras["semiparam_failures"] = float(failures)
    return _row("estimator_risk", h, n, len(seeds), failures, row.estimate, row.theory,
                row.mc_se, extras)


def _ols_arrays(config, stats, n):
    mu, _ = moments(config.spec)
    prev_sq = stats["sum_prev_sq"].astype(np.float64)
    cross = stats["sum_cross"].astype(np.float64)
    sum_prev = stats["sum_prev"].astype(np.float64)
    valid = prev_sq > 0.0
    theta_hat = np.full(prev_sq.shape, np.nan)
    theta_hat[valid] = (cross[valid] - mu * sum_prev[valid]) / prev_sq[valid]
    return theta_hat, prev_sq, valid


def _run_ols_explosion(config, h, n, seeds, workers):
    stats = _run_stats(config.spec, 1.0 - h / float(n * n), n, seeds, workers)
    theta_hat, _, valid = _ols_arrays(config, stats, n)
    failures = int(np.count_nonzero(~valid))
    h_ols = float(n * n) * (1.0 - theta_hat[valid])
    abs_h = np.abs(h_ols)
    med = float(np.median(abs_h)) if abs_h.size else float("nan")
    extras = {
        "q25_abs_h_ols": float(np.percentile(abs_h, 25)) if abs_h.size else float("nan"),
        "q75_abs_h_ols": float(np.percentile(abs_h, 75)) if abs_h.size else float("nan"),
        "mean_h_ols": float(h_ols.mean()) if abs_h.size else float("nan"),
    }
    return _row("ols_explosion", h, n, len(seeds), failures, med, None, _mc_se(abs_h), extras)


def _run_df_size(config, h, n, seeds, workers):
    stats = _run_stats(config.spec, 1.0 - h / float(n * n), n, seeds, workers)
    theta_hat, prev_sq, valid = _ols_arrays(config, stats, n)
    failures = int(np.count_nonzero(~valid))
    _, sig2 = moments(config.spec)
    tau = (theta_hat[valid] - 1.0) * np.sqrt(prev_sq[valid] / sig2)
    crit = scipy.stats.norm.ppf(config.alpha)
    reject = tau < crit
    freq = float(reject.mean()) if tau.size else float("nan")
    ks = scipy.stats.kstest(tau, "norm") if tau.size else None
    extras = {
        "ks_pvalue": float(ks.pvalue) if ks is not None else float("nan"),
        "ks_statistic": float(ks.statistic) if ks is not None else float("nan"),
        "mean_tau": float(tau.mean()) if tau.size else float("nan"),
        "sd_tau": float(tau.std(ddof=1)) if tau.size > 1 else float("nan"),
    }
    return _row("df_size", h, n, len(seeds), failures, freq, config.alpha, _mc_se(reject), extras)


def _run_efficient_power(config, h, n, seeds, workers):
    stats = _run_stats(config.spec, 1.0 - h / float(n * n), n, seeds, workers)
    down = stats["down"]
    alpha = config.alpha
    frac_down = np.count_nonzero(down >= 1) / down.size
    # Expected power via the rejection-probability representation:
    # mean of (alpha or 1) equals alpha + (1 - alpha) * frac_down exactly.
    power = alpha + (1.0 - alpha) * frac_down
    g0 = pmf(config.spec, 0)
    mu, _ = moments(config.spec)
    theory = limit_test_power(LimitExperiment(g0 * mu / 2.0), h, alpha)
    rp = np.where(down >= 1, 1.0, alpha)
    extras = {"frac_down_positive": float(frac_down)}
    return _row("efficient_power", h, n, len(seeds), 0, power, theory, _mc_se(rp), extras)


def _run_moment_check(config, h, n, seeds, workers):
    theta = 1.0 - h / float(n * n)
    stats = _run_stats(config.spec, theta, n, seeds, workers)
    mu, _ = moments(config.spec)
    scaled = stats["sum_x"].astype(np.float64) / float(n * n)
    xn = stats["x_n"].astype(np.float64)
    mean_th, var_th = theoretical_moments(config.spec, theta, n)
    multi_freq = float(np.count_nonzero(stats["multi_death"] >= 1) / len(seeds))
    extras = {
        "mean_x_n": float(xn.mean()),
        "theory_mean_x_n": mean_th,
        "var_x_n": float(xn.var(ddof=1)) if xn.size > 1 else 0.0,
        "theory_var_x_n": var_th,
        "mean_x_n_mc_se": _mc_se(xn),
        "multi_death_freq": multi_freq,
    }
    return _row("moment_check", h, n, len(seeds), 0, float(scaled.mean()), mu / 2.0,
                _mc_se(scaled), extras)


_RUNNERS = {
    "down_move_law": _run_down_move_law,
    "lr_law": _run_lr_law,
    "estimator_risk": _run_estimator_risk,
    "ols_explosion": _run_ols_explosion,
    "df_size": _run_df_size,
    "efficient_power": _run_efficient_power,
    "moment_check": _run_moment_check,
}


def run_replications(config: ExperimentConfig, workers: int | None = None):
    """Run every (target, h, n) cell; one SummaryRow per cell, in grid order."""
    workers = _resolve_workers(workers)
    rows = []
    for target in config.targets:
        runner = _RUNNERS[target]
        for h_index, h in enumerate(config.h_grid):
            for n_index, n in enumerate(config.n_grid):
                seeds = _cell_seeds(config.master_seed, target, h_index, n_index,
                                    config.replications)
                rows.append(runner(config, float(h), int(n), seeds, workers))
    return rows


# -- threshold checking and emission -------------------------------------------

def _row_metric(row: SummaryRow, metric: str):
    if metric == "estimate":
        return row.estimate
    if metric == "discrepancy":
        return row.discrepancy
    return row.extras.get(metric)


def check_thresholds(rows, thresholds):
    """Breach messages for every (row, threshold) violation; empty when clean."""
    breaches = []
    for th in thresholds:
        matched = False
        for row in rows:
            if row.experiment != th.experiment:
                continue
            if th.h is not None and row.h != th.h:
                continue
            if th.n is not None and row.n != th.n:
                continue
            value = _row_metric(row, th.metric)
            if value is None:
                continue
            matched = True
            where = f"{row.experiment}[h={row.h:g}, n={row.n}].{th.metric}"
            if math.isnan(value):
                breaches.append(f"{where} is NaN")
            elif th.max is not None and value > th.max:
                breaches.append(f"{where} = {value:.6g} exceeds max {th.max:g}")
            elif th.min is not None and value < th.min:
                breaches.append(f"{where} = {value:.6g} below min {th.min:g}")
        if not matched:
            breaches.append(f"threshold matched no rows: {th}")
    return breaches


_CSV_COLUMNS = ("experiment", "h", "n", "reps", "failures", "estimate", "theory",
                "discrepancy", "mc_se")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def rows_to_csv(rows) -> str:
    """CSV table with one line per headline metric plus suffixed extras lines."""
    lines = [",".join(_CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in (
            row.experiment, row.h, row.n, row.replications, row.failures,
            row.estimate, row.theory, row.discrepancy, row.mc_se,
        )))
        for key in sorted(row.extras):
            lines.append(",".join(_fmt(v) for v in (
                f"{row.experiment}.{key}", row.h, row.n, row.replications,
                row.failures, row.extras[key], None, None, None,
            )))
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> list:
    out = []
    for row in rows:
        out.append({
            "experiment": row.experiment,
            "h": row.h,
            "n": row.n,
            "reps": row.replications,
            "failures": row.failures,
            "estimate": row.estimate,
            "theory": row.theory,
            "discrepancy": row.discrepancy,
            "mc_se": row.mc_se,
            "extras": dict(sorted(row.extras.items())),
        })
    return out


def write_outputs(rows, outdir) -> tuple:
    """Write summary.csv and summary.json under outdir; returns the two paths."""
    os.makedirs(outdir, exist_ok=True)
    csv_path = os.path.join(outdir, "summary.csv")
    json_path = os.path.join(outdir, "summary.json")
    with open(csv_path, "w", encoding="utf-8") as f:
        f.write(rows_to_csv(rows))
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(rows_to_json(rows), f, indent=2, allow_nan=True)
        f.write("\n")
    return csv_path, json_path
