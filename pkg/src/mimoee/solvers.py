"""Root solvers for the characteristic equations behind the optimal
single-receive-antenna precoder, and the precoder assembly itself.

Two families of roots are needed:

* ``nu_n``: the unique positive root of
  phi_n(y) = y**n/(n-1)! - sum_{i<n} y**i/i!,
  which sets the interior UPA optimum at total power d/nu_n;
* ``c_l`` for l = 1..n_t-1: the unique positive root of
  erlang_cdf(l+1, (l+1)x) - erlang_cdf(l, l*x),
  the power thresholds at which one more transmit antenna becomes worth
  activating.

Both equations have simple roots with analytically known brackets
(phi_n(0) = -1 < 0 and phi_n(n) > 0; the CDF gap is negative near 0 and
positive for large x), so plain bisection is used everywhere: robustness
beats speed at these sizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .core import BracketFailureError, NotMisoError, SystemParams
from .closed_form import erlang_cdf

_BISECT_STEPS = 200  # drives the bracket down to adjacent floats


def _bisect(f, lo, hi):
    """Bisection for f(lo) < 0 < f(hi); returns the endpoint with the
    smaller residual once the bracket cannot shrink further."""
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise BracketFailureError(f"not a sign-change bracket: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(f(lo)) <= abs(f(hi)) else hi


def phi(n: int, y: float) -> float:
    """y**n/(n-1)! - sum_{i=0}^{n-1} y**i/i!, compensated summation."""
    terms = []
    term = 1.0
    for i in range(n):
        if i > 0:
            term *= y / i
        terms.append(term)
    lead = term * y  # y**n/(n-1)! = y * y**(n-1)/(n-1)!
    return lead - math.fsum(terms)


@lru_cache(maxsize=None)
def solve_nu(n: int) -> float:
    """Unique positive root of phi_n, bisected on [0, n].

    phi_n(0) = -1 and phi_n(n) > 0, so the root never exceeds n.
    nu_1 = 1 exactly; nu_2 is the golden ratio.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return _bisect(lambda y: phi(n, y), 0.0, float(n))


# ---------------------------------------------------------------------------
# Antenna-count switching thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdTable:
    """Switching thresholds c_1 > c_2 > ... > c_{n_t-1} (all > 1), with the
    conventions c_0 = +inf and c_{n_t} = 0.

    An l-antenna uniform allocation is optimal for budgets in
    [c/c_{l-1}, c/c_l); the intervals tile (0, inf) in increasing order.
    """

    c_values: tuple

    def c(self, ell: int) -> float:
        """c_ell with boundary conventions; ell in {0, ..., n_t}."""
        n_t = len(self.c_values) + 1
        if ell == 0:
            return math.inf
        if ell == n_t:
            return 0.0
        return self.c_values[ell - 1]


def _cdf_gap(ell: int, x: float) -> float:
    return erlang_cdf(ell + 1, (ell + 1) * x) - erlang_cdf(ell, ell * x)


_SCAN_LO, _SCAN_HI = 1e-9, 1e3


@lru_cache(maxsize=None)
def solve_c_thresholds(n_t: int) -> ThresholdTable:
    """Thresholds c_1..c_{n_t-1} by bisection with bracket expansion.

    The CDF gap is negative just above zero and positive for large x; if
    no sign change is found inside [1e-9, 1e3] the formulas are wrong and
    BracketFailureError is raised.
    """
    if n_t < 2:
        raise ValueError(f"thresholds need n_t >= 2, got {n_t}")
    values = []
    for ell in range(1, n_t):
        f = lambda x, ell=ell: _cdf_gap(ell, x)
        lo, hi = 0.5, 2.0
        while f(lo) > 0 and lo > _SCAN_LO:
            lo = max(lo / 2, _SCAN_LO)
        while f(hi) < 0 and hi < _SCAN_HI:
            hi = min(hi * 2, _SCAN_HI)
        if f(lo) > 0 or f(hi) < 0:
            raise BracketFailureError(
                f"no sign change for threshold l={ell} within [{_SCAN_LO}, {_SCAN_HI}]")
        values.append(_bisect(f, lo, hi))
    return ThresholdTable(c_values=tuple(values))


# ---------------------------------------------------------------------------
# Optimal precoders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MisoPrecoderSolution:
    """GPR-optimal diagonal precoder for an n_r = 1 link: uniform power
    over ``active_antennas`` of the n_t available.  ``saturated`` is True
    when the power budget binds (total equals p_max)."""

    active_antennas: int
    per_antenna_power: float
    saturated: bool

    def total(self) -> float:
        return self.active_antennas * self.per_antenna_power


def siso_optimal_power(params: SystemParams) -> float:
    """min{c, p_max}: the 1x1 GPR peaks at p = sigma2*(2**R - 1)."""
    return min(params.c, params.p_max)


def miso_upa_optimal_power(params: SystemParams) -> float:
    """min{d/nu_{n_t}, p_max}: total power maximizing the all-antenna UPA
    GPR on an n_r = 1 link."""
    if params.n_r != 1:
        raise NotMisoError(f"need n_r = 1, got {params.n_r}")
    return min(params.d / solve_nu(params.n_t), params.p_max)


def miso_optimal_precoder(params: SystemParams) -> MisoPrecoderSolution:
    """Optimal diagonal precoder for an n_r = 1 link.

    Locates the budget in the threshold partition: for
    p_max in [c/c_{l-1}, c/c_l) the solution spreads the full budget over
    l antennas; for p_max >= c/c_{n_t-1} it is a UPA over all antennas at
    per-antenna power min{c/nu_{n_t}, p_max/n_t}, where using the whole
    budget stops being optimal once p_max exceeds d/nu_{n_t}.  At an exact
    boundary the larger antenna count wins (half-open intervals).
    """
    if params.n_r != 1:
        raise NotMisoError(f"need n_r = 1, got {params.n_r}")
    n_t, c, p_bar = params.n_t, params.c, params.p_max
    if n_t == 1:
        p_star = siso_optimal_power(params)
        return MisoPrecoderSolution(1, p_star, saturated=not (c < p_bar))
    table = solve_c_thresholds(n_t)
    for ell in range(1, n_t):
        if c / table.c(ell - 1) <= p_bar < c / table.c(ell):
            return MisoPrecoderSolution(ell, p_bar / ell, saturated=True)
    interior = params.d / solve_nu(n_t)
    per_antenna = min(interior, p_bar) / n_t
    return MisoPrecoderSolution(n_t, per_antenna, saturated=not (interior < p_bar))
