"""Domain types shared by every other module: link parameters, diagonal
power allocations, channel realizations, Monte Carlo estimates, and the
majorization partial order on power vectors.

Conventions used throughout the package:

* rates are in bits per channel use (bpcu), powers in Watts;
* ``rho = 1/sigma2`` is the SNR scale, ``c = sigma2*(2**rate - 1)`` and
  ``d = n_t*c`` are the auxiliary outage thresholds;
* a precoder is always a diagonal matrix ``Diag(p_1..p_nt)`` -- for
  i.i.d. channel entries nothing is lost by that restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Relative tolerance for structural predicates (UPA / beamforming / budget).
STRUCT_RTOL = 1e-12
# Relative tolerance when comparing user-supplied totals (majorization).
TOTAL_RTOL = 1e-9


class NonPositiveFieldError(ValueError):
    """A parameter that must be strictly positive is zero or negative."""

    def __init__(self, name, value=None):
        self.field_name = name
        super().__init__(f"field '{name}' must be > 0, got {value!r}")


class LengthMismatchError(ValueError):
    """Two power vectors that should have equal length do not."""


class DimensionMismatchError(ValueError):
    """A channel matrix does not match the configured antenna counts."""


class ZeroPowerError(ValueError):
    """An operation that divides by the total transmit power got zero."""


class NotMisoError(ValueError):
    """Operation requires a single receive antenna (n_r = 1)."""


class NotSimoError(ValueError):
    """Operation requires a single transmit antenna (n_t = 1)."""


class BracketFailureError(RuntimeError):
    """A root finder could not bracket a sign change (formula bug, not
    user error)."""


class GridTooLargeError(ValueError):
    """Exhaustive search request exceeds the combinatorial guard."""


class NoWitnessError(RuntimeError):
    """A counter-example construction did not produce the expected strict
    inequality (parameter misconfiguration)."""


@dataclass(frozen=True)
class SystemParams:
    """Channel and link constants shared by every formula.

    n_t, n_r  -- transmit / receive antenna counts,
    sigma2    -- noise power (Watts),
    rate      -- target rate R (bpcu),
    p_max     -- total transmit power budget (Watts).
    """

    n_t: int
    n_r: int
    sigma2: float
    rate: float
    p_max: float

    def __post_init__(self):
        for name in ("n_t", "n_r"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise TypeError(f"field '{name}' must be an integer, got {value!r}")
            if value <= 0:
                raise NonPositiveFieldError(name, value)
        for name in ("sigma2", "rate", "p_max"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise NonPositiveFieldError(name, value)

    @property
    def rho(self) -> float:
        """Inverse noise power 1/sigma2 (linear SNR scale)."""
        return 1.0 / self.sigma2

    @property
    def c(self) -> float:
        """Outage threshold sigma2*(2**R - 1) for a single-antenna link."""
        return self.sigma2 * (2.0 ** self.rate - 1.0)

    @property
    def d(self) -> float:
        """n_t * c, the threshold seen by a UPA over all n_t antennas."""
        return self.n_t * self.c

    @classmethod
    def from_rho_db(cls, n_t, n_r, rho_db, rate, p_max) -> "SystemParams":
        """Build params from an SNR scale quoted in dB: sigma2 = 10**(-rho_db/10)."""
        return cls(n_t=n_t, n_r=n_r, sigma2=10.0 ** (-rho_db / 10.0),
                   rate=rate, p_max=p_max)


def validate_params(raw) -> SystemParams:
    """Validate a SystemParams-shaped record (mapping or SystemParams).

    Returns a frozen SystemParams with derived rho, c, d available, or
    raises NonPositiveFieldError naming the offending field.
    """
    if isinstance(raw, SystemParams):
        return raw  # already validated in __post_init__
    return SystemParams(
        n_t=raw["n_t"], n_r=raw["n_r"], sigma2=raw["sigma2"],
        rate=raw["rate"], p_max=raw["p_max"],
    )


@dataclass(frozen=True)
class PowerAllocation:
    """A diagonal precoder: per-antenna powers (Watts).

    Entries must be nonnegative; when ``p_max`` is given the total may not
    exceed it beyond a 1e-12 relative tolerance.
    """

    powers: tuple

    def __init__(self, powers, p_max=None):
        arr = np.asarray(powers, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("powers must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError(f"powers must be finite and >= 0, got {arr}")
        total = float(np.sum(arr))
        if p_max is not None and total > p_max * (1.0 + STRUCT_RTOL):
            raise ValueError(f"total power {total} exceeds budget {p_max}")
        object.__setattr__(self, "powers", tuple(float(x) for x in arr))

    def total(self) -> float:
        return float(math.fsum(self.powers))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.powers, dtype=float)

    def is_upa(self) -> bool:
        """True when every entry is equal within 1e-12 relative."""
        arr = self.as_array()
        scale = np.max(np.abs(arr))
        if scale == 0.0:
            return True
        return bool(np.max(arr) - np.min(arr) <= STRUCT_RTOL * scale)

    def is_beamforming(self) -> bool:
        """True when exactly one entry is nonzero."""
        return int(np.count_nonzero(self.as_array())) == 1

    @classmethod
    def upa(cls, total, n_t) -> "PowerAllocation":
        return cls([total / n_t] * n_t)

    @classmethod
    def beamforming(cls, total, n_t, antenna=0) -> "PowerAllocation":
        powers = [0.0] * n_t
        powers[antenna] = total
        return cls(powers)


@dataclass(frozen=True)
class ChannelSample:
    """One realization of the n_r x n_t complex Gaussian channel matrix."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"expected a 2-D matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "entries", arr)

    @property
    def n_r(self) -> int:
        return self.entries.shape[0]

    @property
    def n_t(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class McEstimate:
    """A Monte Carlo estimate: sample mean, standard error, trial count."""

    mean: float
    std_error: float
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise NonPositiveFieldError("trials", self.trials)
        if self.std_error < 0:
            raise ValueError("std_error must be >= 0")


@dataclass(frozen=True)
class GprCurve:
    """Sampled (power, efficiency) pairs plus the located maximizer.

    ``extra_peak_indices`` is non-empty when the grid scan saw more than
    one strict local maximum beyond the caller's noise band (a unimodality
    violation); the reported (p_star, gamma_star) is then the global grid
    maximizer.
    """

    powers: np.ndarray
    gammas: np.ndarray
    p_star: float
    gamma_star: float
    extra_peak_indices: tuple = field(default=())

    def __post_init__(self):
        p = np.asarray(self.powers, dtype=float)
        g = np.asarray(self.gammas, dtype=float)
        if p.shape != g.shape or p.ndim != 1:
            raise ValueError("powers and gammas must be 1-D arrays of equal length")
        if np.any(np.diff(p) <= 0):
            raise ValueError("powers must be strictly increasing")
        object.__setattr__(self, "powers", p)
        object.__setattr__(self, "gammas", g)


# ---------------------------------------------------------------------------
# Majorization partial order
# ---------------------------------------------------------------------------

def majorizes(p, q) -> str:
    """Tri-state majorization test between two nonnegative power vectors.

    Returns "yes" when sorted-descending prefix sums of ``p`` dominate
    those of ``q`` (with equal grand totals), "no" for the reverse strict
    order, and "incomparable" when neither dominates or the totals differ
    by more than 1e-9 relative.  The beamforming vector majorizes every
    vector of the same total; the uniform vector is majorized by every one.
    """
    pa = p.as_array() if isinstance(p, PowerAllocation) else np.asarray(p, dtype=float)
    qa = q.as_array() if isinstance(q, PowerAllocation) else np.asarray(q, dtype=float)
    if pa.shape != qa.shape:
        raise LengthMismatchError(f"lengths differ: {pa.size} vs {qa.size}")
    tp, tq = math.fsum(pa), math.fsum(qa)
    scale = max(abs(tp), abs(tq), 1e-300)
    if abs(tp - tq) > TOTAL_RTOL * scale:
        return "incomparable"
    cp = np.cumsum(np.sort(pa)[::-1])
    cq = np.cumsum(np.sort(qa)[::-1])
    tol = TOTAL_RTOL * scale
    p_dominates = bool(np.all(cp >= cq - tol))
    q_dominates = bool(np.all(cq >= cp - tol))
    if p_dominates:
        return "yes"
    if q_dominates:
        return "no"
    return "incomparable"
