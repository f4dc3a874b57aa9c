"""Gaussian large-system approximations of the expected goodput
R*(1 - P_out) for a uniform power allocation, in three antenna-growth
regimes, together with their inflection points and limiting optima.

In each regime the mutual information of the UPA link is asymptotically
normal, so the goodput numerator becomes R*Q((R - mean)/std) with Q the
standard normal tail.  The numerator is sigmoidal in p (unique inflection
point), which transfers quasi-concavity to the goodput-to-power ratio.

Regimes:
  (a) n_t fixed, n_r -> inf:  mean n_t*log2(1 + (n_r/n_t)*rho*p),
      variance (n_t/n_r)*log2(e); the inflection point vanishes as n_r
      grows (channel hardening) so the optimum collapses to p = 0.
  (b) n_t -> inf, n_r fixed:  mean n_r*log2(1 + rho*p); the inflection
      point sigma2*(2**(R/n_r) - 1) persists, the numerator approaches a
      unit step there, and the optimal power and efficiency converge to
      closed-form limits.
  (c) n_t, n_r -> inf with n_r/n_t -> beta: mean n_t*mu(p) and variance
      from the Marchenko-Pastur resolvent parameter gamma; the inflection
      condition degenerates to mu(p) = 0 whose only root is p = 0.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from .core import SystemParams, ZeroPowerError

LOG2E = math.log2(math.e)


def q_function(x):
    """Standard normal tail Q(x) = erfc(x/sqrt(2))/2, full double accuracy."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Regime (a): receive antennas grow
# ---------------------------------------------------------------------------

def goodput_regime_a(p, params: SystemParams) -> float:
    """R * Q((R - n_t log2(1 + (n_r/n_t) rho p)) / sqrt((n_t/n_r) log2 e))."""
    if p < 0:
        raise ValueError("p must be >= 0")
    n_t, n_r = params.n_t, params.n_r
    mean = n_t * math.log1p((n_r / n_t) * params.rho * p) / math.log(2.0)
    std = math.sqrt((n_t / n_r) * LOG2E)
    return params.rate * q_function((params.rate - mean) / std)


def inflection_regime_a(params: SystemParams) -> float:
    """Inflection point of the regime-(a) numerator,

        (n_t/(n_r rho)) * (2**((R - (n_t log2(e)/n_r)**1.5 / n_t) / n_t) - 1),

    which tends to 0 as n_r grows (channel hardening)."""
    n_t, n_r = params.n_t, params.n_r
    exponent = (params.rate - (n_t * LOG2E / n_r) ** 1.5 / n_t) / n_t
    return (n_t / (n_r * params.rho)) * (2.0 ** exponent - 1.0)


# ---------------------------------------------------------------------------
# Regime (b): transmit antennas grow
# ---------------------------------------------------------------------------

def _alpha_regime_b(p, params: SystemParams) -> float:
    rp = params.rho * p
    bracket = params.rate - params.n_r * math.log1p(rp) / math.log(2.0)
    return math.sqrt(params.n_t / params.n_r) * LOG2E * (1.0 + rp) / rp * bracket


def goodput_regime_b(p, params: SystemParams) -> float:
    """R * Q(alpha_b(p)) with
    alpha_b = sqrt(n_t/n_r) log2(e) (1+rho p)/(rho p) [R - n_r log2(1+rho p)].

    alpha_b is singular at p = 0; the limit value 0 is returned there.
    As n_t grows the numerator approaches a unit step at the inflection
    point sigma2*(2**(R/n_r) - 1).
    """
    if p < 0:
        raise ZeroPowerError("p must be >= 0")
    if p == 0:
        return 0.0
    return params.rate * q_function(_alpha_regime_b(p, params))


def inflection_regime_b(params: SystemParams) -> float:
    """sigma2 * (2**(R/n_r) - 1), where the rate bracket changes sign."""
    return params.sigma2 * (2.0 ** (params.rate / params.n_r) - 1.0)


def regime_b_limits(params: SystemParams) -> tuple:
    """(p_star, gamma_star) limits as n_t -> inf with n_r fixed:

        p_star     -> sigma2 * (2**(R/n_r) - 1),
        gamma_star -> 1 / (2 sigma2 (2**(R/n_r) - 1)).
    """
    p_star = inflection_regime_b(params)
    return p_star, 1.0 / (2.0 * p_star)


# ---------------------------------------------------------------------------
# Regime (c): both dimensions grow at ratio beta
# ---------------------------------------------------------------------------

def _gamma_mp(beta: float, rho_p: float) -> float:
    """Marchenko-Pastur resolvent parameter

        gamma = (1 + beta + 1/(rho p) - sqrt((1 + beta + 1/(rho p))**2
                - 4 beta)) / 2,

    clamped to [0, min(1, beta)] against floating-point excursions."""
    s = 1.0 + beta + 1.0 / rho_p
    g = 0.5 * (s - math.sqrt(max(s * s - 4.0 * beta, 0.0)))
    return min(max(g, 0.0), min(1.0, beta))


def mu_regime_c(p, params: SystemParams, beta: float,
                log2e_correction: bool = False) -> float:
    """Per-transmit-antenna mean of the mutual information,

        mu = beta log2(1 + rho p (1-gamma)) - gamma
             + log2(1 + rho p (beta-gamma)).

    The bare ``-gamma`` term mixes a natural-log quantity into a base-2
    expression; ``log2e_correction=True`` multiplies it by log2(e), which
    is what matches Monte Carlo goodput (see tests).  The uncorrected form
    is the default.
    """
    if p <= 0:
        raise ZeroPowerError("mu is defined for p > 0 (its p -> 0 limit is 0)")
    rp = params.rho * p
    g = _gamma_mp(beta, rp)
    gamma_term = g * LOG2E if log2e_correction else g
    return (beta * math.log1p(rp * (1.0 - g)) / math.log(2.0)
            - gamma_term
            + math.log1p(rp * (beta - g)) / math.log(2.0))


def sigma_regime_c(p, params: SystemParams, beta: float) -> float:
    """Standard deviation sqrt(-log2(1 - gamma**2/beta)) of the mutual
    information; positive whenever gamma**2 < beta."""
    if p <= 0:
        raise ZeroPowerError("sigma is defined for p > 0")
    g = _gamma_mp(beta, params.rho * p)
    return math.sqrt(-math.log2(max(1.0 - g * g / beta, 1e-300)))


def goodput_regime_c(p, params: SystemParams, beta: float,
                     log2e_correction: bool = False) -> float:
    """R * Q((R - n_t mu(p)) / sigma(p)) for n_r/n_t -> beta."""
    if p < 0:
        raise ZeroPowerError("p must be >= 0")
    if p == 0:
        return 0.0
    mu = mu_regime_c(p, params, beta, log2e_correction)
    sd = sigma_regime_c(p, params, beta)
    return params.rate * q_function((params.rate - params.n_t * mu) / sd)


def inflection_regime_c(params: SystemParams, beta: float) -> float:
    """0.0: for large n_t the inflection condition reduces to mu(p) = 0,
    and mu vanishes only at p = 0 (mu is increasing in p).  Provided for
    API symmetry with the other regimes."""
    return 0.0
