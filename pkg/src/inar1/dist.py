"""Innovation (immigration) distributions on the non-negative integers.

Three families are supported: Poisson(rate), Geometric(p) with pmf
``p * (1 - p)**k``, and finite probability tables with support
``{0, ..., M}``. Table weights are normalized at construction and must be
strictly positive at every index so that the support has no holes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels_py as _pyk
from .errors import InvalidSpecError

KIND_CODES = {"poisson": _pyk.KIND_POISSON, "geometric": _pyk.KIND_GEOMETRIC, "table": _pyk.KIND_TABLE}

_EMPTY_TABLE = np.empty(0, dtype=np.float64)
_EMPTY_TABLE.setflags(write=False)


@dataclass(frozen=True)
class InnovationSpec:
    """Immutable innovation distribution; build via poisson/geometric/table."""

    kind: str
    rate: float = 0.0
    p: float = 0.0
    weights: tuple = ()

    def __post_init__(self):
        if self.kind == "poisson":
            if not (math.isfinite(self.rate) and self.rate > 0.0):
                raise InvalidSpecError(f"Poisson rate must be a positive finite real, got {self.rate}")
        elif self.kind == "geometric":
            if not (math.isfinite(self.p) and 0.0 < self.p < 1.0):
                raise InvalidSpecError(f"geometric success probability must lie in (0, 1), got {self.p}")
        elif self.kind == "table":
            w = self.weights
            if len(w) == 0:
                raise InvalidSpecError("probability table must be non-empty")
            if any(not math.isfinite(v) or v <= 0.0 for v in w):
                raise InvalidSpecError(
                    "table weights must be strictly positive at every index 0..M "
                    "(support must be exactly {0, ..., M})"
                )
            total = math.fsum(w)
            if abs(total - 1.0) > 1e-12:
                raise InvalidSpecError(f"table weights must be normalized (sum = {total!r})")
        else:
            raise InvalidSpecError(f"unknown innovation kind {self.kind!r}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def poisson(cls, rate: float) -> "InnovationSpec":
        return cls("poisson", rate=float(rate))

    @classmethod
    def geometric(cls, p: float) -> "InnovationSpec":
        return cls("geometric", p=float(p))

    @classmethod
    def table(cls, weights) -> "InnovationSpec":
        w = [float(v) for v in weights]
        if any(not math.isfinite(v) or v < 0.0 for v in w):
            raise InvalidSpecError("table weights must be finite and non-negative")
        while w and w[-1] == 0.0:
            w.pop()
        if not w:
            raise InvalidSpecError("probability table must have positive total mass")
        if any(v == 0.0 for v in w):
            raise InvalidSpecError(
                "table has a zero weight below its maximum; support must be exactly {0, ..., M}"
            )
        total = math.fsum(w)
        return cls("table", weights=tuple(v / total for v in w))

    # -- kernel plumbing ---------------------------------------------------

    @property
    def kind_code(self) -> int:
        return KIND_CODES[self.kind]

    @property
    def param(self) -> float:
        return self.rate if self.kind == "poisson" else self.p

    def kernel_args(self):
        """(kind_code, param, table) as consumed by the compute kernels."""
        if self.kind == "table":
            return self.kind_code, 0.0, _table_array(self.weights)
        return self.kind_code, self.param, _EMPTY_TABLE


@lru_cache(maxsize=64)
def _table_array(weights: tuple) -> np.ndarray:
    arr = np.asarray(weights, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def pmf(spec: InnovationSpec, k: int) -> float:
    """Innovation pmf g(k); 0 outside the support (including k < 0)."""
    kind, param, table = spec.kernel_args()
    return _pyk._g(kind, param, table, int(k))


def log_pmf(spec: InnovationSpec, k: int) -> float:
    """log g(k), -inf off the support."""
    kind, param, table = spec.kernel_args()
    return _pyk._log_g(kind, param, table, int(k))


def moments(spec: InnovationSpec):
    """(mean, variance) of the innovation distribution."""
    if spec.kind == "poisson":
        return spec.rate, spec.rate
    if spec.kind == "geometric":
        q = 1.0 - spec.p
        return q / spec.p, q / (spec.p * spec.p)
    w = spec.weights
    mean = math.fsum(k * wk for k, wk in enumerate(w))
    var = math.fsum((k - mean) ** 2 * wk for k, wk in enumerate(w))
    return mean, var


@dataclass(frozen=True)
class ValidationReport:
    """Which regularity clause the distribution satisfies.

    clause 1: finite support {0, ..., M} with strictly positive weights;
    clause 2: full support, finite variance, and pmf non-increasing from
    ``decreasing_from`` onward.
    """

    clause: int
    decreasing_from: int
    notes: str = ""


def validate_regularity(spec: InnovationSpec) -> ValidationReport:
    """Check the regularity condition the near-unit-root analysis needs.

    Built-in families always satisfy it; the check still rejects
    hand-constructed table specs whose support has holes.
    """
    if spec.kind == "table":
        if any(v <= 0.0 for v in spec.weights):
            raise InvalidSpecError(
                "finite-support innovation with an interior zero weight; "
                "support must be exactly {0, ..., M}"
            )
        return ValidationReport(clause=1, decreasing_from=len(spec.weights) - 1)
    if spec.kind == "geometric":
        return ValidationReport(
            clause=2,
            decreasing_from=0,
            notes="pmf strictly decreasing; g(k+1)/g(k) = 1 - p is bounded",
        )
    # Poisson: g(k+1)/g(k) = rate/(k+1) <= 1 iff k >= rate - 1.
    m_index = max(0, math.ceil(spec.rate - 1.0))
    return ValidationReport(
        clause=2,
        decreasing_from=m_index,
        notes="g(k+1)/g(k) = rate/(k+1) is bounded and eventually <= 1",
    )


def sample(spec: InnovationSpec, rng) -> int:
    """One exact draw from the innovation distribution, advancing rng.

    Sequential CDF inversion throughout; the Poisson sampler searches from
    k = 0 and is intended for the small rates used here.
    """
    kind, param, table = spec.kernel_args()
    return _pyk.innovation_draw(kind, param, table, rng)


# -- serialization ---------------------------------------------------------

def spec_to_dict(spec: InnovationSpec) -> dict:
    """Tagged-object form, e.g. {"kind": "geometric", "p": 0.5}."""
    if spec.kind == "poisson":
        return {"kind": "poisson", "rate": spec.rate}
    if spec.kind == "geometric":
        return {"kind": "geometric", "p": spec.p}
    return {"kind": "table", "weights": list(spec.weights)}


def spec_from_dict(data: dict) -> InnovationSpec:
    try:
        kind = data["kind"]
    except (TypeError, KeyError):
        raise InvalidSpecError(f"innovation spec must be a tagged object, got {data!r}") from None
    if kind == "poisson":
        return InnovationSpec.poisson(data["rate"])
    if kind == "geometric":
        return InnovationSpec.geometric(data["p"])
    if kind == "table":
        return InnovationSpec.table(data["weights"])
    raise InvalidSpecError(f"unknown innovation kind {kind!r}")


def spec_from_flag(text: str) -> InnovationSpec:
    """Parse the CLI mini-grammar kind:params.

    Examples: "poisson:1.0", "geometric:0.5", "table:1,2,1".
    """
    kind, sep, params = text.partition(":")
    kind = kind.strip().lower()
    if not sep or not params:
        raise InvalidSpecError(f"expected kind:params, got {text!r}")
    try:
        if kind == "poisson":
            return InnovationSpec.poisson(float(params))
        if kind == "geometric":
            return InnovationSpec.geometric(float(params))
        if kind == "table":
            return InnovationSpec.table([float(v) for v in params.split(",")])
    except ValueError as exc:
        if isinstance(exc, InvalidSpecError):
            raise
        raise InvalidSpecError(f"could not parse distribution flag {text!r}: {exc}") from None
    raise InvalidSpecError(f"unknown innovation kind {kind!r}")
