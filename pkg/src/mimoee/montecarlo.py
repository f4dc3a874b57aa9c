"""Deterministic complex Gaussian channel sampling and Monte Carlo
estimation of outage probability and goodput-to-power ratio (GPR).

Randomness contract
-------------------
Channel draws are keyed by ``(seed, trial_index, n_t, n_r)`` and nothing
else.  Trial ``t`` owns a fixed, block-aligned window of the Philox-4x64
counter space under key ``seed``: with ``w = 2*n_r*n_t`` 64-bit words per
matrix, padded up to whole 4-word Philox blocks, the draw for trial ``t``
starts at counter ``t * ceil(w/4)``.  Uniforms are taken from the top 53
bits of each word (offset to the open interval (0,1)) and mapped through
the inverse normal CDF; real and imaginary parts interleave word-by-word,
each scaled to variance 1/2 so every entry has unit total variance.

Consequences: a trial's matrix is bitwise identical no matter how trials
are partitioned into batches or across workers, and estimates over
``[0, N)`` trials equal the merge of ``[0, k)`` and ``[k, N)`` for any k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .core import (
    ChannelSample,
    DimensionMismatchError,
    McEstimate,
    NonPositiveFieldError,
    PowerAllocation,
    SystemParams,
    ZeroPowerError,
)

_U53 = 2.0 ** -53
_HALF_U53 = 2.0 ** -54


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run configuration: 64-bit seed and trial count."""

    seed: int
    trials: int

    def __post_init__(self):
        if self.trials < 1:
            raise NonPositiveFieldError("trials", self.trials)


# ---------------------------------------------------------------------------
# Counter-based channel sampling
# ---------------------------------------------------------------------------

def _blocks_per_trial(n_r, n_t) -> int:
    # One Philox block yields 4 uint64 words; each matrix needs 2*n_r*n_t.
    return (2 * n_r * n_t + 3) // 4


def sample_channel_batch(params: SystemParams, seed: int, start: int,
                         count: int) -> np.ndarray:
    """Channels for trials [start, start+count) as a (count, n_r, n_t) array.

    Equals stacking ``sample_channel`` over the same trial indices, bit for
    bit, but amortizes the generator setup over the whole batch.
    """
    if start < 0 or count < 1:
        raise ValueError("need start >= 0 and count >= 1")
    n_r, n_t = params.n_r, params.n_t
    words = 2 * n_r * n_t
    bpt = _blocks_per_trial(n_r, n_t)
    bg = Philox(key=seed, counter=start * bpt)
    raw = bg.random_raw(count * bpt * 4).reshape(count, bpt * 4)[:, :words]
    u = (raw >> np.uint64(11)) * _U53 + _HALF_U53
    g = ndtri(u) * math.sqrt(0.5)
    re = g[:, 0::2].reshape(count, n_r, n_t)
    im = g[:, 1::2].reshape(count, n_r, n_t)
    return re + 1j * im


def sample_channel(params: SystemParams, seed: int, trial_index: int) -> ChannelSample:
    """One channel draw, a pure function of (seed, trial_index, n_t, n_r)."""
    return ChannelSample(sample_channel_batch(params, seed, trial_index, 1)[0])


# ---------------------------------------------------------------------------
# Mutual information
# ---------------------------------------------------------------------------

def mutual_information(h, alloc, params: SystemParams) -> float:
    """log2 det(I + rho * H Diag(p) H^H) in bpcu.

    Computed from the Cholesky factor of the Hermitian positive-definite
    pencil, so it stays finite for n = 8 at high SNR where the raw
    determinant would overflow.
    """
    hm = h.entries if isinstance(h, ChannelSample) else np.asarray(h, dtype=complex)
    pw = alloc.as_array() if isinstance(alloc, PowerAllocation) else np.asarray(alloc, float)
    if hm.shape != (params.n_r, params.n_t):
        raise DimensionMismatchError(
            f"channel is {hm.shape}, params say ({params.n_r}, {params.n_t})")
    if pw.shape != (params.n_t,):
        raise DimensionMismatchError(
            f"allocation has {pw.size} entries for n_t = {params.n_t}")
    return float(_mutual_information_batch(hm[np.newaxis], pw, params.rho)[0])


def _mutual_information_batch(channels, powers, rho) -> np.ndarray:
    """Vectorized log2 det(I + rho H D H^H) over a (m, n_r, n_t) stack."""
    g = channels * np.sqrt(rho * np.asarray(powers, dtype=float))
    n_r = channels.shape[1]
    pencil = np.eye(n_r) + g @ g.conj().transpose(0, 2, 1)
    chol = np.linalg.cholesky(pencil)
    diag = np.diagonal(chol, axis1=1, axis2=2).real
    return 2.0 * np.sum(np.log2(diag), axis=1)


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------

_BATCH = 50_000


def outage_probability_mc(alloc, params: SystemParams, cfg: McConfig,
                          trial_offset: int = 0) -> McEstimate:
    """Fraction of trials whose mutual information falls below the rate
    target, with binomial standard error sqrt(m(1-m)/trials).

    Zero total power is an outage with certainty (the p -> 0 limit), so
    it returns exactly 1 without sampling.
    """
    pw = alloc.as_array() if isinstance(alloc, PowerAllocation) else np.asarray(alloc, float)
    if math.fsum(pw) == 0.0:
        return McEstimate(mean=1.0, std_error=0.0, trials=cfg.trials)
    failures = 0
    done = 0
    while done < cfg.trials:
        count = min(_BATCH, cfg.trials - done)
        ch = sample_channel_batch(params, cfg.seed, trial_offset + done, count)
        mi = _mutual_information_batch(ch, pw, params.rho)
        failures += int(np.count_nonzero(mi < params.rate))
        done += count
    mean = failures / cfg.trials
    return McEstimate(mean=mean,
                      std_error=math.sqrt(mean * (1.0 - mean) / cfg.trials),
                      trials=cfg.trials)


def gpr_mc(alloc, params: SystemParams, cfg: McConfig,
           trial_offset: int = 0) -> McEstimate:
    """Goodput-to-power ratio R*(1 - P_out)/total in bits per Joule."""
    pw = alloc.as_array() if isinstance(alloc, PowerAllocation) else np.asarray(alloc, float)
    total = math.fsum(pw)
    if total == 0.0:
        raise ZeroPowerError("GPR is undefined at zero power (limit is 0)")
    out = outage_probability_mc(alloc, params, cfg, trial_offset)
    scale = params.rate / total
    return McEstimate(mean=scale * (1.0 - out.mean),
                      std_error=scale * out.std_error,
                      trials=out.trials)


def upa_gpr_curve_mc(params: SystemParams, cfg: McConfig, p_grid) -> tuple:
    """UPA GPR means and standard errors over a grid of total powers.

    Shares one channel set across the whole grid: per trial the Gram
    eigenvalues of H are computed once and reused, so the point at power p
    is identical to ``gpr_mc`` with the same (seed, trials) up to the
    factorization route.  Returns (gammas, std_errors) arrays.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    if np.any(p_grid < 0):
        raise ValueError("grid powers must be >= 0")
    n_t = params.n_t
    scale_small = params.n_r <= params.n_t  # eigendecompose the smaller Gram side
    successes = np.zeros(p_grid.size, dtype=np.int64)
    done = 0
    threshold = 2.0 ** params.rate
    while done < cfg.trials:
        count = min(_BATCH, cfg.trials - done)
        ch = sample_channel_batch(params, cfg.seed, done, count)
        if scale_small:
            gram = ch @ ch.conj().transpose(0, 2, 1)
        else:
            gram = ch.conj().transpose(0, 2, 1) @ ch
        lam = np.linalg.eigvalsh(gram)
        # det(I + a HH^H) = prod(1 + a lam_i); success when >= 2^R
        a = (params.rho / n_t) * p_grid
        dets = np.prod(1.0 + a[:, np.newaxis, np.newaxis] * lam[np.newaxis], axis=2)
        successes += np.count_nonzero(dets >= threshold, axis=1)
        done += count
    succ = successes / cfg.trials
    gammas = np.where(p_grid > 0, params.rate * succ / np.where(p_grid > 0, p_grid, 1.0), 0.0)
    errs = np.where(
        p_grid > 0,
        params.rate * np.sqrt(succ * (1.0 - succ) / cfg.trials) / np.where(p_grid > 0, p_grid, 1.0),
        0.0,
    )
    return gammas, errs


class UpaGprMcEvaluator:
    """Callable UPA GPR estimator that eigendecomposes one channel set up
    front and then prices any total power in milliseconds.

    Draws the same trials as ``gpr_mc`` under the same (seed, trials), so
    repeated calls see a smooth curve in p (common random numbers), which
    keeps bracketing searches stable.
    """

    def __init__(self, params: SystemParams, cfg: McConfig):
        self.params = params
        self.cfg = cfg
        blocks = []
        done = 0
        while done < cfg.trials:
            count = min(_BATCH, cfg.trials - done)
            ch = sample_channel_batch(params, cfg.seed, done, count)
            if params.n_r <= params.n_t:
                gram = ch @ ch.conj().transpose(0, 2, 1)
            else:
                gram = ch.conj().transpose(0, 2, 1) @ ch
            blocks.append(np.linalg.eigvalsh(gram))
            done += count
        self._lam = np.concatenate(blocks, axis=0)

    def success_probability(self, p: float) -> float:
        if p < 0:
            raise ValueError("p must be >= 0")
        if p == 0.0:
            return 0.0
        a = (self.params.rho / self.params.n_t) * p
        det = np.prod(1.0 + a * self._lam, axis=1)
        hits = int(np.count_nonzero(det >= 2.0 ** self.params.rate))
        return hits / self.cfg.trials

    def __call__(self, p: float) -> float:
        if p == 0.0:
            return 0.0
        return self.params.rate * self.success_probability(p) / p

    def std_error(self, p: float) -> float:
        if p == 0.0:
            return 0.0
        s = self.success_probability(p)
        return self.params.rate * math.sqrt(s * (1.0 - s) / self.cfg.trials) / p


def merge_estimates(parts) -> McEstimate:
    """Merge partition estimates of the same probability (counter addition)."""
    parts = list(parts)
    trials = sum(e.trials for e in parts)
    count = math.fsum(e.mean * e.trials for e in parts)
    mean = count / trials
    return McEstimate(mean=mean,
                      std_error=math.sqrt(mean * (1.0 - mean) / trials),
                      trials=trials)


# ---------------------------------------------------------------------------
# Determinant polynomial coefficients (exhaustive-search backend)
# ---------------------------------------------------------------------------

def precoder_det_coefficients(channels, rho) -> dict:
    """Principal-minor coefficients of det(I + rho * H Diag(p) H^H).

    For every subset S of transmit antennas the determinant expands as
    ``sum_S m_S * prod_{i in S} p_i`` with ``m_S = det(rho * G_S^H G_S)``,
    G_S the channel columns in S.  Returns {subset tuple: (m,) array of
    per-trial coefficients}; evaluating any diagonal allocation is then a
    dot product, which makes small exhaustive searches cheap and exact.
    """
    channels = np.asarray(channels)
    m, n_r, n_t = channels.shape
    if n_t > 8:
        raise ValueError("coefficient table grows as 2**n_t; n_t > 8 refused")
    gram = (channels.conj().transpose(0, 2, 1) @ channels) * rho
    coeffs = {(): np.ones(m)}
    for size in range(1, n_t + 1):
        for subset in _subsets(n_t, size):
            idx = np.asarray(subset)
            sub = gram[:, idx[:, None], idx[None, :]]
            coeffs[subset] = np.linalg.det(sub).real
    return coeffs


def eval_det_polynomial(coeffs, powers) -> np.ndarray:
    """Per-trial det(I + rho H Diag(p) H^H) from minor coefficients."""
    powers = np.asarray(powers, dtype=float)
    total = None
    for subset, m_s in coeffs.items():
        weight = float(np.prod(powers[list(subset)])) if subset else 1.0
        if weight == 0.0:
            continue
        term = m_s * weight
        total = term if total is None else total + term
    return total


def _subsets(n, size):
    from itertools import combinations
    return combinations(range(n), size)
