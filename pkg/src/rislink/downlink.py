"""Real-domain linear model of the downlink: equivalent channel, least-squares
training, joint minimum-distance detection, and zero-forcing precoding.

The equivalent channel relates bipolar symbols to the magnitude-difference
observation and is real by construction, so a common Doppler rotation of the
underlying complex channel leaves it unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .waveform import ComplementarySymbol

JOINT_SEARCH_CAP = 2 ** 16

# Relative singular-value floor below which a channel is treated as rank
# deficient instead of being silently regularized.
RANK_RTOL = 1e-10


class RankDeficientChannel(np.linalg.LinAlgError):
    """Equivalent channel Gram matrix is singular beyond tolerance."""


class RankDeficientPilots(np.linalg.LinAlgError):
    """Pilot Gram matrix is singular; pilots cannot support LS estimation."""


class SearchTooLarge(ValueError):
    """Joint detection constellation exceeds the exhaustive-search cap."""


@dataclass(frozen=True)
class Precoder:
    """Zero-forcing precoder with its amplitude gain under a power budget."""

    p: np.ndarray
    rho: float
    power_budget: float = 1.0


@dataclass
class PilotBlock:
    """Equivalent pilot symbols (rows = transmit elements) and the received
    real observations (rows = users)."""

    x_bar_t: np.ndarray
    z_t: np.ndarray


def equivalent_channel(h: np.ndarray) -> np.ndarray:
    """Real equivalent channel: row m equals Re(conj(sum(h_m)) * h_m].

    The output dtype is real by construction; row sums are the squared
    magnitudes of the per-row complex sums and therefore nonnegative.
    """
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ValueError("channel matrix must be finite")
    lam = np.conj(h.sum(axis=-1, keepdims=True))
    return np.real(lam * h)


def hadamard_pilots(n_rows: int, length: int | None = None) -> np.ndarray:
    """Bipolar pilot matrix from a Hadamard matrix of order >= n_rows.

    Rows are mutually orthogonal, so the pilot Gram matrix is length * I.
    """
    order = 1
    target = max(n_rows, length or 0)
    while order < target:
        order *= 2
    return hadamard(order)[:n_rows].astype(float)


def ls_estimate(pilots: PilotBlock) -> np.ndarray:
    """Least-squares estimate z_t x_t^T (x_t x_t^T)^{-1} of the equivalent
    channel, one row per user."""
    x = np.asarray(pilots.x_bar_t, dtype=float)
    z = np.atleast_2d(np.asarray(pilots.z_t, dtype=float))
    gram = x @ x.T
    sv = np.linalg.svd(gram, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        raise RankDeficientPilots("pilot Gram matrix is rank deficient")
    return np.linalg.solve(gram, (z @ x.T).T).T


def bipolar_candidates(n: int, levels: int = 2) -> np.ndarray:
    """All bipolar symbol rows x_bar for an n-element alphabet of size
    ``levels``, enumerated in lexicographic order of s (element 0 most
    significant).  Capped at JOINT_SEARCH_CAP candidates."""
    total = levels ** n
    if total > JOINT_SEARCH_CAP:
        raise SearchTooLarge(f"{levels}**{n} candidates exceed the search cap")
    idx = np.arange(total)
    digits = np.empty((total, n), dtype=int)
    for j in range(n - 1, -1, -1):
        digits[:, j] = idx % levels
        idx //= levels
    return (2.0 * digits - (levels - 1)) / (levels - 1)


def joint_detect(z: np.ndarray, h_bar: np.ndarray,
                 levels: int = 2) -> ComplementarySymbol:
    """Exhaustive minimum-Euclidean-norm detection over the full symbol set.

    Ties break toward the lexicographically smallest s. Exponential in the
    element count; intended for small-array experiments only.
    """
    z = np.asarray(z, dtype=float)
    h_bar = np.asarray(h_bar, dtype=float)
    cands = bipolar_candidates(h_bar.shape[1], levels)
    resid = z[:, None] - h_bar @ cands.T
    best = int(np.argmin(np.einsum("ij,ij->j", resid, resid)))
    s = ((cands[best] * (levels - 1) + (levels - 1)) / 2.0).round().astype(int)
    return ComplementarySymbol(s, levels=levels)


def zf_precoder(h_bar: np.ndarray, power_budget: float = 1.0) -> Precoder:
    """Zero-forcing precoder P = H^T (H H^T)^{-1} with amplitude gain
    rho = power_budget / (2 tr((H H^T)^{-1})).

    With unit-power symbol streams on both tones the scaled average transmit
    power equals the budget.  Raises RankDeficientChannel when the smallest
    singular value of H falls below RANK_RTOL times the largest.
    """
    h_bar = np.asarray(h_bar, dtype=float)
    n_k, n_t = h_bar.shape
    if n_t < n_k:
        raise RankDeficientChannel("need at least as many transmit elements as users")
    sv = np.linalg.svd(h_bar, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        raise RankDeficientChannel("equivalent channel is rank deficient")
    gram = h_bar @ h_bar.T
    p = np.linalg.solve(gram, h_bar).T
    # tr((H H^T)^{-1}) equals tr(P^T P) for the pseudoinverse precoder
    trace_rinv = float(np.sum(1.0 / sv ** 2))
    rho = power_budget / (2.0 * trace_rinv)
    return Precoder(p=p, rho=rho, power_budget=power_budget)


def precoded_roundtrip(h_bar: np.ndarray, precoder: Precoder,
                       sym: ComplementarySymbol) -> np.ndarray:
    """Noiseless magnitude-difference output of the precoded linear model:
    |HP (1+x)/2|^2 - |HP (1-x)/2|^2 elementwise, which recovers the bipolar
    symbol exactly when HP = I."""
    if sym.levels != 2:
        raise ValueError("roundtrip contract is defined for the binary alphabet")
    w = np.asarray(h_bar, dtype=float) @ precoder.p
    a = w @ sym.s
    b = w @ sym.s_bar
    return a * a - b * b


def output_snr_exact(h_bar: np.ndarray, sigma2: float,
                     power_budget: float = 1.0) -> float:
    """Closed-form precoded output SNR rho / (2 sigma^2 + 3 sigma^4 / 4).

    The denominator constants are taken as printed in the source analysis;
    the Monte Carlo harness cross-checks them rather than assuming them.
    """
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    rho = zf_precoder(h_bar, power_budget).rho
    return rho / (2.0 * sigma2 + 0.75 * sigma2 ** 2)


def output_snr_asymptotic(n_t: int, n_k: int, sigma2: float) -> float:
    """Large-array output SNR (N_t - N_k - 1) / (4 N_k sigma^2); valid for
    unit-variance equivalent-channel entries and N_t > N_k + 1."""
    if n_t <= n_k + 1:
        raise ValueError("asymptotic form requires n_t > n_k + 1")
    if sigma2 <= 0:
        raise ValueError("sigma2 must be > 0")
    return (n_t - n_k - 1) / (4.0 * n_k * sigma2)
