"""Geometric Rician channel synthesis for RIS-assisted links.

Builds steering vectors for the base-station ULA and the RIS UPA, rank-one
line-of-sight matrices, Rician mixtures with seeded NLoS draws, a
sum-of-sinusoids fading process whose block-to-block autocorrelation follows
the classical Doppler spectrum, and cascaded source-RIS-destination products
with their four-term LoS/NLoS decomposition.

All randomness flows through explicit ``numpy.random.Generator`` streams, so
every function is pure given its stream and safe to use concurrently as long
as each caller owns its generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 3.0e8  # m/s

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Angles:
    """Elevation/azimuth pair in radians: theta in [0, pi], phi in [0, 2*pi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (np.isfinite(self.theta) and np.isfinite(self.phi)):
            raise ValueError("angles must be finite")
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta {self.theta} outside [0, pi]")
        if not 0.0 <= self.phi < _TWO_PI:
            raise ValueError(f"phi {self.phi} outside [0, 2*pi)")


@dataclass(frozen=True)
class ArrayGeometry:
    """Antenna array description.

    ``kind`` is "ula" (counts = (n,)) or "upa" (counts = (nx, ny)).
    Spacing and wavelength are in meters; half-wavelength spacing is the
    usual configuration.
    """

    kind: str
    counts: tuple
    element_spacing: float
    wavelength: float

    def __post_init__(self):
        if self.kind not in ("ula", "upa"):
            raise ValueError(f"unknown array kind {self.kind!r}")
        want = 1 if self.kind == "ula" else 2
        if len(self.counts) != want or any(int(c) < 1 for c in self.counts):
            raise ValueError(f"bad element counts {self.counts} for {self.kind}")
        if self.element_spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")

    @property
    def n_elements(self) -> int:
        return int(np.prod(self.counts))


@dataclass
class RicianLink:
    """One Rician-faded link.

    ``los`` holds the deterministic component with unit-magnitude entries
    (up to the steering-vector normalization used to build it), so that the
    Rician mixture preserves per-entry power.  ``nlos_state`` optionally
    carries a time-correlated fading process for block evolution; snapshot
    draws use a fresh i.i.d. complex Gaussian instead.
    """

    los: np.ndarray
    rician_factor: float
    path_gain: float = 1.0
    nlos_state: "JakesFading | None" = None

    def __post_init__(self):
        if self.rician_factor < 0:
            raise ValueError("rician_factor must be >= 0")
        if self.path_gain < 0:
            raise ValueError("path_gain must be >= 0")

    def mix_weights(self) -> tuple[float, float]:
        """(LoS, NLoS) amplitude weights sqrt(K/(1+K)), sqrt(1/(1+K))."""
        k = self.rician_factor
        return np.sqrt(k / (1.0 + k)), np.sqrt(1.0 / (1.0 + k))

    def realize(self, nlos: np.ndarray) -> np.ndarray:
        """Combine the stored LoS with a given unit-variance NLoS draw."""
        w_los, w_nlos = self.mix_weights()
        return self.path_gain * (w_los * self.los + w_nlos * nlos)


@dataclass(frozen=True)
class ReflectionPattern:
    """Per-element RIS phase shifts; realized matrix is diag(exp(j*phases))."""

    phases: np.ndarray

    def __post_init__(self):
        if np.ndim(self.phases) != 1 or not np.all(np.isfinite(self.phases)):
            raise ValueError("phases must be a finite 1-D vector")

    @property
    def diagonal(self) -> np.ndarray:
        return np.exp(1j * np.asarray(self.phases, dtype=float))


@dataclass
class DopplerState:
    """Common phase rotation induced by receiver mobility.

    max_shift = speed * carrier_freq / c; the phase advances by
    2*pi*max_shift*dt per elapsed interval.
    """

    speed: float
    carrier_freq: float
    current_phase: float = 0.0

    @property
    def max_shift(self) -> float:
        return self.speed * self.carrier_freq / SPEED_OF_LIGHT

    def advance(self, dt: float) -> float:
        """Advance the deterministic phase by dt seconds and return it."""
        self.current_phase += _TWO_PI * self.max_shift * dt
        return self.current_phase


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. circular complex Gaussian entries with unit total variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def ula_steering(theta: float, n: int, spacing: float, wavelength: float) -> np.ndarray:
    """Array response of an n-element ULA; element k carries phase
    2*pi*k*(spacing/wavelength)*sin(theta) and element 0 equals 1."""
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)
    return np.exp(1j * _TWO_PI * k * (spacing / wavelength) * np.sin(theta))


def upa_steering(angles: Angles, geom: ArrayGeometry) -> np.ndarray:
    """Unit-norm UPA response as the Kronecker product of two 1-D responses.

    Element (m, n) carries phase (2*pi/lambda)*d*(m*sin(phi)*sin(theta)
    + n*cos(theta)); the 1/sqrt(nx*ny) factor makes the Euclidean norm 1.
    """
    if geom.kind != "upa":
        raise ValueError("upa_steering requires a UPA geometry")
    nx, ny = (int(c) for c in geom.counts)
    scale = _TWO_PI * geom.element_spacing / geom.wavelength
    u = np.exp(1j * scale * np.arange(nx) * np.sin(angles.phi) * np.sin(angles.theta))
    v = np.exp(1j * scale * np.arange(ny) * np.cos(angles.theta))
    return np.kron(u, v) / np.sqrt(nx * ny)


def los_component(rx_steering: np.ndarray, tx_steering: np.ndarray) -> np.ndarray:
    """Rank-one LoS matrix: outer product rx * tx^H."""
    rx = np.asarray(rx_steering)
    tx = np.asarray(tx_steering)
    if rx.size == 0 or tx.size == 0:
        raise ValueError("steering vectors must be non-empty")
    return np.outer(rx, tx.conj())


def draw_rician(link: RicianLink, rng: np.random.Generator) -> np.ndarray:
    """Snapshot draw: path_gain * (sqrt(K/(1+K))*los + sqrt(1/(1+K))*nlos)
    with i.i.d. zero-mean unit-variance complex Gaussian NLoS entries."""
    nlos = complex_normal(rng, np.shape(link.los))
    return link.realize(nlos)


@dataclass
class JakesFading:
    """Sum-of-sinusoids fading with the classical Doppler autocorrelation.

    Each entry sums ``oscillators`` sinusoids whose arrival angles tile a
    quarter circle with a per-entry random offset, so the ensemble
    autocorrelation at lag tau equals J0(2*pi*f_max*tau) exactly in
    expectation while the marginal stays zero-mean unit-variance complex
    Gaussian (by the CLT over oscillators).
    """

    f_max: float
    alpha: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    time: float = 0.0

    @classmethod
    def create(cls, shape, f_max: float, rng: np.random.Generator,
               oscillators: int = 16) -> "JakesFading":
        if f_max < 0:
            raise ValueError("f_max must be >= 0")
        shape = tuple(np.atleast_1d(shape).astype(int))
        m = np.arange(1, oscillators + 1)
        theta = rng.uniform(-np.pi, np.pi, size=shape + (1,))
        alpha = (_TWO_PI * m - np.pi + theta) / (4.0 * oscillators)
        phi = rng.uniform(-np.pi, np.pi, size=shape + (oscillators,))
        psi = rng.uniform(-np.pi, np.pi, size=shape + (oscillators,))
        return cls(f_max=float(f_max), alpha=alpha, phi=phi, psi=psi)

    def sample_at(self, t: float) -> np.ndarray:
        """Fading matrix at absolute time t seconds."""
        wd_t = _TWO_PI * self.f_max * t
        m = self.alpha.shape[-1]
        re = np.cos(wd_t * np.cos(self.alpha) + self.phi).sum(axis=-1)
        im = np.cos(wd_t * np.sin(self.alpha) + self.psi).sum(axis=-1)
        return (re + 1j * im) / np.sqrt(m)

    def evolve(self, dt: float) -> np.ndarray:
        """Advance internal time by dt and return the new entries."""
        if dt <= 0:
            raise ValueError("dt must be > 0")
        self.time += dt
        return self.sample_at(self.time)


def evolve_nlos(state: JakesFading, dt: float) -> np.ndarray:
    """Advance a Jakes fading state by dt seconds; see JakesFading.evolve."""
    return state.evolve(dt)


def cascade(g: np.ndarray, pattern: ReflectionPattern, q: np.ndarray) -> np.ndarray:
    """Cascaded link g * diag(exp(j*phases)) * Q as an exact matrix product."""
    g = np.asarray(g)
    q = np.asarray(q)
    n = pattern.phases.shape[0]
    if g.shape[-1] != n or q.shape[0] != n:
        raise ValueError(
            f"dimension mismatch: g has {g.shape[-1]} columns, pattern has "
            f"{n} elements, Q has {q.shape[0]} rows")
    return (g * pattern.diagonal) @ q


def cascade_decomposition(g_los: np.ndarray, g_nlos: np.ndarray,
                          pattern: ReflectionPattern,
                          q_los: np.ndarray, q_nlos: np.ndarray):
    """Four cascade terms (LoS*LoS, LoS*NLoS, NLoS*LoS, NLoS*NLoS).

    Inputs are the already weighted link components (Rician weights and path
    gains applied), so the four terms sum to the full cascade exactly.
    """
    return (
        cascade(g_los, pattern, q_los),
        cascade(g_los, pattern, q_nlos),
        cascade(g_nlos, pattern, q_los),
        cascade(g_nlos, pattern, q_nlos),
    )


def align_phases_to_los(q_los: np.ndarray, big_los: np.ndarray,
                        target_col: int = 0) -> ReflectionPattern:
    """Reflection phases that co-phase every term of the cascaded LoS sum
    for one destination column, maximizing its magnitude.

    Stands in for an offline AoA-indexed coefficient database: with a
    rank-one LoS on both sides the same phases co-phase every column.
    """
    q_los = np.asarray(q_los).reshape(-1)
    big_los = np.asarray(big_los)
    if big_los.shape[0] != q_los.shape[0]:
        raise ValueError("q_los length must match big_los row count")
    phases = -np.angle(q_los * big_los[:, target_col])
    return ReflectionPattern(phases)
