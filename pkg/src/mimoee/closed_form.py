"""Closed-form outage and energy-efficiency formulas.

For a single receive antenna the squared channel norm is a sum of unit-mean
exponentials, so outage probabilities reduce to Erlang CDFs and the
goodput-to-power ratio (GPR) has the explicit form

    Gamma(p) = R * exp(-x) * sum_{k<K} x**k / k!  / p,      x = threshold/p,

with K the number of exponential summands.  The same survival series,
truncated at K = n_r*n_t, is the low-power approximation for general MIMO.
Static and fast-fading links have no outage events; their efficiency is
maximized in the zero-power limit and the suprema are given in closed form.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc, logsumexp

from .core import (
    ChannelSample,
    NotMisoError,
    NotSimoError,
    PowerAllocation,
    SystemParams,
    ZeroPowerError,
)
from .montecarlo import mutual_information

LN2 = math.log(2.0)

# Above this argument exp(-x) leaves the normal double range; the survival
# series switches to log-space evaluation.
_LOG_SPACE_THRESHOLD = 700.0


def erlang_cdf(k: int, x) -> float:
    """CDF of the Erlang distribution with integer shape k and unit rate:
    1 - exp(-x) * sum_{j=0}^{k-1} x**j / j!   (regularized lower incomplete
    gamma).  Nondecreasing in x, 0 at x = 0, -> 1 as x -> infinity.
    """
    if k < 1 or k != int(k):
        raise ValueError(f"shape must be a positive integer, got {k!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be >= 0")
    out = gammainc(int(k), x)
    return float(out) if out.ndim == 0 else out


def erlang_survival(k: int, x: float) -> float:
    """exp(-x) * sum_{j<k} x**j / j!, the Erlang upper tail.

    Summed in ascending order with compensated accumulation; for x > 700
    the product is assembled in log space so the tail underflows to 0 only
    when it truly falls below the double range.
    """
    if k < 1:
        raise ValueError("shape must be >= 1")
    if x < 0:
        raise ValueError("x must be >= 0")
    if x <= _LOG_SPACE_THRESHOLD:
        terms = []
        term = 1.0
        for j in range(k):
            if j > 0:
                term *= x / j
            terms.append(term)
        return math.exp(-x) * math.fsum(terms)
    log_terms = [j * math.log(x) - math.lgamma(j + 1) for j in range(k)]
    return float(math.exp(-x + logsumexp(log_terms)))


# ---------------------------------------------------------------------------
# Slow fading: Erlang-form outage and GPR
# ---------------------------------------------------------------------------

def siso_outage(p: float, params: SystemParams) -> float:
    """1 - exp(-c/p) for a 1x1 link at total power p."""
    if p <= 0:
        raise ZeroPowerError("outage at p = 0 is 1 by convention")
    return -math.expm1(-params.c / p)


def simo_outage(p: float, params: SystemParams) -> float:
    """Outage of a single-transmit-antenna link: erlang_cdf(n_r, c/p).

    Also the outage of a beamforming allocation with total p on any MIMO
    link, since only one channel column is excited.
    """
    if p <= 0:
        raise ZeroPowerError("outage at p = 0 is 1 by convention")
    return erlang_cdf(params.n_r, params.c / p)


def miso_outage(powers, params: SystemParams) -> float:
    """Outage of an arbitrary diagonal allocation on an n_r = 1 link.

    Pr[sum_i p_i X_i < c] with X_i i.i.d. unit-mean exponentials: Erlang
    when the active powers are equal, otherwise the phase-type
    (hypoexponential) CDF evaluated through a matrix exponential, which
    handles repeated powers without special-casing near-ties.
    """
    if params.n_r != 1:
        raise NotMisoError(f"need n_r = 1, got {params.n_r}")
    pw = powers.as_array() if isinstance(powers, PowerAllocation) else np.asarray(powers, float)
    active = pw[pw > 0]
    if active.size == 0:
        return 1.0
    c = params.c
    if np.max(active) - np.min(active) <= 1e-12 * np.max(active):
        return erlang_cdf(active.size, c / float(np.mean(active)))
    rates = 1.0 / active
    n = active.size
    gen = np.diag(-rates)
    gen[np.arange(n - 1), np.arange(1, n)] = rates[:-1]
    tail = expm(gen * c)[0].sum()
    return float(min(1.0, max(0.0, 1.0 - tail)))


def siso_gpr(p: float, params: SystemParams) -> float:
    """R * exp(-c/p) / p for the 1x1 link; maximized at p = c."""
    if p <= 0:
        raise ZeroPowerError("GPR at p = 0 is 0 by convention")
    return params.rate * erlang_survival(1, params.c / p) / p


def miso_upa_gpr(p: float, params: SystemParams) -> float:
    """GPR of a UPA over all n_t antennas of an n_r = 1 link at total p:

        R * exp(-d/p) * sum_{i=0}^{n_t-1} d**i / (p**(i+1) i!),   d = n_t*c.

    Identical to R*(1 - erlang_cdf(n_t, d/p))/p.
    """
    if params.n_r != 1:
        raise NotMisoError(f"need n_r = 1, got {params.n_r}")
    if p <= 0:
        raise ZeroPowerError("GPR at p = 0 is 0 by convention")
    return params.rate * erlang_survival(params.n_t, params.d / p) / p


def simo_gpr(p: float, params: SystemParams) -> float:
    """GPR of a single-transmit-antenna link with n_r receive antennas:
    R * exp(-c/p) * sum_{k<n_r} (c/p)**k / k!  / p.
    """
    if params.n_t != 1:
        raise NotSimoError(f"need n_t = 1, got {params.n_t}")
    if p <= 0:
        raise ZeroPowerError("GPR at p = 0 is 0 by convention")
    return params.rate * erlang_survival(params.n_r, params.c / p) / p


def mimo_upa_gpr_smallp(p: float, params: SystemParams) -> float:
    """Low-power approximation of the UPA GPR for a general MIMO link:

        R * exp(-d/p) * sum_{k<n_r*n_t} d**k / (k! p**(k+1)),   d = n_t*c.

    Replaces the log-determinant by its trace equivalent, so it is only
    meaningful as p -> 0 (and exact at every p when n_r = 1).
    """
    if p <= 0:
        raise ZeroPowerError("GPR at p = 0 is 0 by convention")
    return params.rate * erlang_survival(params.n_r * params.n_t, params.d / p) / p


# ---------------------------------------------------------------------------
# Static and fast fading: no outage, supremum at zero power
# ---------------------------------------------------------------------------

def static_efficiency(h, alloc, params: SystemParams) -> float:
    """log2 det(I + rho H Diag(p) H^H) / total power, bits per Joule."""
    pw = alloc.as_array() if isinstance(alloc, PowerAllocation) else np.asarray(alloc, float)
    total = math.fsum(pw)
    if total == 0.0:
        raise ZeroPowerError("use static_efficiency_sup for the p -> 0 supremum")
    return mutual_information(h, alloc, params) / total


def static_efficiency_sup(h, params: SystemParams) -> float:
    """Supremum of the static efficiency, attained as the precoder
    vanishes: Tr(H H^H) / (n_t sigma2 ln 2).
    """
    hm = h.entries if isinstance(h, ChannelSample) else np.asarray(h, dtype=complex)
    trace = float(np.sum(np.abs(hm) ** 2))
    return trace / (params.n_t * params.sigma2 * LN2)


def fast_efficiency_sup(params: SystemParams) -> float:
    """Supremum of the ergodic (fast fading) efficiency.

    E[Tr(H H^H)] = n_t*n_r for unit-variance entries, so the supremum is
    n_r / (sigma2 ln 2), independent of n_t.
    """
    return params.n_r / (params.sigma2 * LN2)
