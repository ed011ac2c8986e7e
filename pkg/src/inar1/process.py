"""Integer-valued AR(1) paths: binomial thinning, simulation, moments.

A path records the observed states X_0, ..., X_n with X_0 = 0. Each step
thins the previous state with survival probability theta and adds a fresh
innovation draw, so conditionally on X_{t-1} the survivor count is
Binomial(X_{t-1}, theta).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels_py as _pyk
from .backend import kernels as _k
from .dist import InnovationSpec, moments
from .errors import ParameterError


class Path:
    """Observed trajectory X_0, ..., X_n; immutable, X_0 = 0, entries >= 0."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values)
        if arr.ndim != 1 or arr.size < 2:
            raise ParameterError("a path needs at least one transition (length >= 2)")
        if not np.issubdtype(arr.dtype, np.integer):
            rounded = np.rint(arr)
            if not np.all(arr == rounded):
                raise ParameterError("path values must be integers")
            arr = rounded
        arr = arr.astype(np.int64)
        if arr[0] != 0:
            raise ParameterError(f"paths start at 0, got X_0 = {arr[0]}")
        if np.any(arr < 0):
            raise ParameterError("path values must be non-negative")
        arr.setflags(write=False)
        self.values = arr

    @property
    def n(self) -> int:
        """Number of transitions."""
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __eq__(self, other):
        return isinstance(other, Path) and np.array_equal(self.values, other.values)

    def __repr__(self):
        head = ", ".join(str(v) for v in self.values[:6])
        tail = ", ..." if len(self.values) > 6 else ""
        return f"Path([{head}{tail}], n={self.n})"


@dataclass(frozen=True)
class LocalParam:
    """Local parametrization (h, n) of the autoregression parameter.

    theta = 1 - h/n^2, so h = 0 is the unit root and h grows with the
    distance from it at the n^2 localizing rate.
    """

    h: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h >= 0.0):
            raise ParameterError(f"local parameter h must be >= 0, got {self.h}")
        if self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n}")
        if self.h > self.n * self.n:
            raise ParameterError(f"h/n^2 must not exceed 1 (h={self.h}, n={self.n})")

    @property
    def theta(self) -> float:
        return 1.0 - self.h / float(self.n * self.n)


def _check_theta(theta) -> float:
    theta = float(theta)
    if not (0.0 <= theta <= 1.0) or math.isnan(theta):
        raise ParameterError(f"theta must lie in [0, 1], got {theta}")
    return theta


def thin(x: int, theta: float, rng) -> int:
    """Binomial thinning: survivors of x trials at success probability theta."""
    theta = _check_theta(theta)
    x = int(x)
    if x < 0:
        raise ParameterError(f"thinning needs a non-negative count, got {x}")
    return _pyk.binomial_draw(x, theta, rng)


def simulate_path(spec: InnovationSpec, theta: float, n: int, seed: int) -> Path:
    """Simulate n transitions from X_0 = 0; deterministic given the seed."""
    theta = _check_theta(theta)
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    kind, param, table = spec.kernel_args()
    return Path(_k.simulate_path(kind, param, table, theta, int(n), int(seed)))


@dataclass(frozen=True)
class SimulationRecord:
    """Path plus the latent draws behind it (innovations and death counts)."""

    path: Path
    innovations: np.ndarray
    deaths: np.ndarray


def simulate_path_recorded(spec: InnovationSpec, theta: float, n: int, seed: int) -> SimulationRecord:
    """simulate_path variant that also records the latent draws.

    Reproduces simulate_path(spec, theta, n, seed) draw for draw, so the
    returned path is identical to the unrecorded one.
    """
    theta = _check_theta(theta)
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    kind, param, table = spec.kernel_args()
    path, innov, deaths = _k.simulate_recorded(kind, param, table, theta, int(n), int(seed))
    innov = np.asarray(innov)
    deaths = np.asarray(deaths)
    innov.setflags(write=False)
    deaths.setflags(write=False)
    return SimulationRecord(Path(path), innov, deaths)


def theoretical_moments(spec: InnovationSpec, theta: float, t: int):
    """Exact (mean, variance) of X_t started from 0.

    Closed forms for theta < 1; at theta = 1 the continuity limits
    mean = mu*t and variance = sigma^2*t apply.
    """
    theta = _check_theta(theta)
    if t < 1:
        raise ParameterError(f"t must be a positive integer, got {t}")
    mu, sig2 = moments(spec)
    if theta == 1.0:
        return mu * t, sig2 * t
    tt = math.pow(theta, t)
    mean = mu * (1.0 - tt) / (1.0 - theta)
    one_m_t2 = 1.0 - theta * theta
    var = (1.0 - tt * tt) / one_m_t2 * sig2 + (theta - tt) * (1.0 - tt) / one_m_t2 * mu
    return mean, var


def expected_path_sum(spec: InnovationSpec, theta: float, n: int) -> float:
    """Exact E[X_1 + ... + X_n] for theta < 1."""
    theta = _check_theta(theta)
    if theta == 1.0:
        raise ParameterError("theta = 1 has its own branch; use expected_path_sum_at_unit_root")
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    mu, _ = moments(spec)
    om = 1.0 - theta
    return mu * (n / om - (theta - math.pow(theta, n + 1)) / (om * om))


def expected_path_sum_at_unit_root(spec: InnovationSpec, n: int) -> float:
    """E[X_1 + ... + X_n] at theta = 1, where X_t has mean mu*t."""
    if n < 1:
        raise ParameterError(f"n must be a positive integer, got {n}")
    mu, _ = moments(spec)
    return mu * n * (n + 1) / 2.0


def stability_event(path: Path, h: float) -> bool:
    """True iff h*(X_t + 1)/n^2 < 1/2 for every t in {0, ..., n-1}."""
    if h < 0:
        raise ParameterError(f"h must be >= 0, got {h}")
    n = path.n
    head = path.values[:-1]
    bound = float(n * n)
    return bool(np.all(h * (head + 1.0) < 0.5 * bound))


def down_moves(path: Path) -> int:
    """Number of strictly downward steps; 0 for every unit-root realization."""
    return int(np.count_nonzero(np.diff(path.values) < 0))


# -- path files -------------------------------------------------------------

def save_path(path: Path, file, fmt: str = "txt") -> None:
    """Write a path as plain integers (one per line) or CSV with columns t, x."""
    if fmt == "txt":
        file.write("\n".join(str(int(v)) for v in path.values))
        file.write("\n")
    elif fmt == "csv":
        writer = csv.writer(file)
        writer.writerow(["t", "x"])
        for t, v in enumerate(path.values):
            writer.writerow([t, int(v)])
    else:
        raise ParameterError(f"unknown path format {fmt!r} (use 'txt' or 'csv')")


def load_path(file) -> Path:
    """Read a path written by save_path; the format is sniffed from line one."""
    lines = [ln.strip() for ln in file.read().splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty path file")
    if "," in lines[0] or lines[0].lower().startswith("t"):
        rows = list(csv.reader(lines))
        if rows and not rows[0][0].lstrip("-").isdigit():
            rows = rows[1:]
        try:
            values = [int(r[1]) for r in rows]
        except (IndexError, ValueError) as exc:
            raise ParameterError(f"malformed CSV path file: {exc}") from None
    else:
        try:
            values = [int(ln) for ln in lines]
        except ValueError as exc:
            raise ParameterError(f"malformed path file: {exc}") from None
    return Path(values)
