"""Improved uplink linear model: per-antenna magnitude observations, the
antenna-averaged scalar, its per-user gain decomposition, pilot estimation,
and decision-region / ML detection on the scalar observation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .waveform import ComplementarySymbol

CONSTELLATION_CAP = 16  # users; 2**16 enumerable points


@dataclass
class UplinkChannelSet:
    """Cascaded user-to-array rows c = a + b + o.

    ``a`` is the pure-LoS term, ``b`` collects the two single-NLoS cross
    terms, and ``o`` is the double-NLoS term (all Rician weights and path
    gains applied), so the three parts sum to the cascade exactly.
    """

    a: np.ndarray
    b: np.ndarray
    o: np.ndarray

    def __post_init__(self):
        if not (self.a.shape == self.b.shape == self.o.shape):
            raise ValueError("component shapes must agree")

    @property
    def c(self) -> np.ndarray:
        return self.a + self.b + self.o

    @property
    def n_antennas(self) -> int:
        return self.a.shape[0]

    @property
    def n_users(self) -> int:
        return self.a.shape[1]


@dataclass
class LinearGains:
    """Per-user linear gains of the averaged observation and their four
    component parts, stacked parts-first (4, n_users); part 0 is the pure-LoS
    contribution, parts 1..3 carry increasing NLoS order."""

    parts: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.parts.sum(axis=0)


@dataclass
class DecisionRegions:
    """Midpoint partition of the real line separating sorted noiseless means.

    ``representatives[r]`` is the lowest constellation index whose mean falls
    in region r; ``symbol_region[i]`` maps constellation index i to its
    region; ``region_sizes[r]`` > 1 marks indistinguishable points.
    """

    boundaries: np.ndarray
    region_means: np.ndarray
    representatives: np.ndarray
    symbol_region: np.ndarray
    region_sizes: np.ndarray

    @property
    def degenerate(self) -> bool:
        return bool(np.any(self.region_sizes > 1))

    def locate(self, xi) -> np.ndarray | int:
        """Region index with d_{r-1} <= xi < d_r (boundary goes up)."""
        idx = np.searchsorted(self.boundaries, xi, side="right")
        return idx if np.ndim(xi) else int(idx)


def antenna_observation(chan_row: np.ndarray, sym: ComplementarySymbol,
                        noise: tuple = (0.0, 0.0)):
    """Per-antenna observation |c s + v1|^2 - |c s_bar + v2|^2 for one
    cascaded row; equals the linear form Re(c* 1 c) x_bar without noise."""
    if sym.levels != 2:
        raise ValueError("observation contract is defined for the binary alphabet")
    c = np.asarray(chan_row)
    return (np.abs(c @ sym.s + noise[0]) ** 2
            - np.abs(c @ sym.s_bar + noise[1]) ** 2)


def array_average(z_tilde: np.ndarray) -> float:
    """Arithmetic mean of the per-antenna observations."""
    z = np.asarray(z_tilde, dtype=float)
    if z.size < 1:
        raise ValueError("need at least one antenna")
    return float(z.mean())


def _pair_gain(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    # (1/N_t) sum_m Re(conj(sum_j u_mj) * w_mn), vector over n
    return np.real(np.conj(u.sum(axis=1))[:, None] * w).mean(axis=0)


def exact_linear_gains(chans: UplinkChannelSet) -> LinearGains:
    """Per-user gains from the channel components, grouped by NLoS order.

    Part 0 uses only the LoS term; part 1 the LoS/single-NLoS crosses; part 2
    the terms quadratic in one NLoS factor; part 3 everything of higher NLoS
    order, which vanishes with many antennas since the NLoS mean is zero.
    The parts sum to the exact gains: the noiseless averaged observation
    equals total . x_bar for every bipolar symbol.
    """
    a, b, o = chans.a, chans.b, chans.o
    xi1 = _pair_gain(a, a)
    xi2 = _pair_gain(a, b) + _pair_gain(b, a)
    xi3 = _pair_gain(b, b) + _pair_gain(a, o) + _pair_gain(o, a)
    xi4 = _pair_gain(b, o) + _pair_gain(o, b) + _pair_gain(o, o)
    return LinearGains(np.stack([xi1, xi2, xi3, xi4]))


def pilot_gain_estimate(chans: UplinkChannelSet, user: int,
                        noise_sigma2: float = 0.0,
                        rng: np.random.Generator | None = None,
                        repeats: int = 1) -> float:
    """Estimate one user's gain from the half-amplitude pilot pattern.

    The probed user transmits amplitude 1 and every other user 1/2, so the
    interferers' bipolar equivalents vanish and the noiseless averaged
    observation equals the probed gain exactly.  The pilot amplitudes live
    outside the binary data alphabet; complements are still 1 - s.
    """
    c = chans.c
    n_t, n_k = c.shape
    s = np.full(n_k, 0.5)
    s[user] = 1.0
    cs = c @ s
    cbar = c @ (1.0 - s)
    if noise_sigma2 == 0.0 or rng is None:
        z = np.abs(cs) ** 2 - np.abs(cbar) ** 2
        return float(z.mean())
    scale = np.sqrt(noise_sigma2 / 2.0)
    total = 0.0
    for _ in range(repeats):
        v = scale * (rng.standard_normal((2, n_t)) + 1j * rng.standard_normal((2, n_t)))
        z = np.abs(cs + v[0]) ** 2 - np.abs(cbar + v[1]) ** 2
        total += z.mean()
    return float(total / repeats)


def bipolar_constellation(n_users: int) -> np.ndarray:
    """All 2**n bipolar rows in lexicographic order of the amplitude vector
    (user 0 most significant)."""
    if n_users > CONSTELLATION_CAP:
        raise ValueError(f"constellation enumeration capped at {CONSTELLATION_CAP} users")
    idx = np.arange(2 ** n_users)
    bits = (idx[:, None] >> np.arange(n_users - 1, -1, -1)) & 1
    return 2.0 * bits - 1.0


def build_regions(gains: LinearGains | np.ndarray,
                  constellation: np.ndarray) -> DecisionRegions:
    """Decision regions from the noiseless means of every constellation point.

    Means are sorted ascending and consecutive duplicates collapse into one
    region whose representative is the lowest constellation index; boundaries
    sit at midpoints of consecutive distinct means.
    """
    total = gains.total if isinstance(gains, LinearGains) else np.asarray(gains)
    constellation = np.asarray(constellation, dtype=float)
    means = constellation @ total
    order = np.argsort(means, kind="stable")
    tol = 1e-12 * max(1.0, float(np.ptp(means)) if means.size else 1.0)

    region_means, reps, sizes = [], [], []
    symbol_region = np.empty(means.shape[0], dtype=int)
    for pos in order:
        if region_means and means[pos] - region_means[-1] <= tol:
            symbol_region[pos] = len(region_means) - 1
            sizes[-1] += 1
            reps[-1] = min(reps[-1], int(pos))
        else:
            symbol_region[pos] = len(region_means)
            region_means.append(float(means[pos]))
            reps.append(int(pos))
            sizes.append(1)
    region_means = np.asarray(region_means)
    boundaries = 0.5 * (region_means[:-1] + region_means[1:])
    return DecisionRegions(boundaries=boundaries,
                           region_means=region_means,
                           representatives=np.asarray(reps, dtype=int),
                           symbol_region=symbol_region,
                           region_sizes=np.asarray(sizes, dtype=int))


def region_detect(xi, regions: DecisionRegions):
    """Symbol index for the region containing xi (half-open intervals with
    boundary values assigned upward); scalar in, scalar out."""
    idx = regions.locate(xi)
    return regions.representatives[idx] if np.ndim(xi) else int(regions.representatives[idx])


def ml_detect(xi: float, mu: np.ndarray, sigma2: np.ndarray) -> int:
    """Gaussian ML detection: argmin ln(sigma^2) + (xi - mu)^2 / sigma^2,
    ties broken toward the lowest candidate index."""
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(sigma2 <= 0):
        raise ValueError("candidate variances must be > 0")
    return int(np.argmin(np.log(sigma2) + (xi - mu) ** 2 / sigma2))
