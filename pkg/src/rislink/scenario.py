"""Channel synthesis from a scenario configuration.

Angles of arrival/departure are drawn uniformly and frozen per frame; user
positions are drawn along a road segment in front of the RIS and drive the
monomial path-loss amplitudes d^(-alpha/2) (reference distance 1 m).  The
BS-RIS hop is static within a frame while the RIS-user hops evolve with the
time-correlated fading process; the common mobility-induced phase rotation is
applied per symbol on top.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel as ch
from .config import ScenarioConfig

# Road in front of the RIS: along x at fixed lateral offset and antenna height.
ROAD_Y = 55.0
ROAD_Z = 1.5


def stream(*key) -> np.random.Generator:
    """Deterministic generator from an integer key tuple."""
    return np.random.default_rng(np.random.SeedSequence([int(k) & (2 ** 63 - 1) for k in key]))


def path_amplitude(distance: float, exponent: float) -> float:
    """Monomial path-loss amplitude d^(-alpha/2) with 1 m reference."""
    return float(max(distance, 1.0) ** (-exponent / 2.0))


@dataclass
class LinkSet:
    """Weighted LoS/NLoS pieces of the BS-RIS and RIS-user hops plus the
    reflection pattern, shared by both link directions via reciprocity."""

    q_los_w: np.ndarray      # (N, N_t) BS->RIS LoS, weights and gain applied
    q_nlos_weight: float     # multiplies a unit-variance NLoS draw
    g_los_w: np.ndarray      # (N_k, N) RIS->user LoS rows, weighted
    g_nlos_weight: np.ndarray  # (N_k, 1) per-user NLoS amplitude weight
    pattern: ch.ReflectionPattern
    direct_rows: np.ndarray | None  # (N_k, N_t) optional direct BS-user rows


def _draw_links(cfg: ScenarioConfig, rng_geo: np.random.Generator,
                k_bs_ris: float, v_ris_user: float) -> LinkSet:
    n = cfg.n_ris_elements
    nx, ny = cfg.ris_grid
    lam = cfg.wavelength
    spacing = lam / 2.0
    geom = ch.ArrayGeometry("upa", (nx, ny), spacing, lam)

    users_x = rng_geo.uniform(-cfg.coverage_length / 2.0,
                              cfg.coverage_length / 2.0, size=cfg.n_users)
    ris = np.asarray(cfg.ris_position, dtype=float)
    bs = np.asarray(cfg.bs_position, dtype=float)
    user_pos = np.stack([ris[0] + users_x,
                         np.full(cfg.n_users, ROAD_Y),
                         np.full(cfg.n_users, ROAD_Z)], axis=1)

    alpha_bu, alpha_br, alpha_ru = cfg.pathloss_exponents
    pg_q = path_amplitude(np.linalg.norm(bs - ris), alpha_br)
    pg_g = np.array([path_amplitude(np.linalg.norm(user_pos[m] - ris), alpha_ru)
                     for m in range(cfg.n_users)])

    # LoS factors with unit-magnitude entries so the Rician mix preserves
    # per-entry power; angles uniform over their ranges, frozen per frame.
    theta_bs = rng_geo.uniform(0.0, np.pi)
    a_bs = ch.ula_steering(theta_bs, cfg.n_bs_antennas, spacing, lam)
    ris_in = ch.Angles(rng_geo.uniform(0.0, np.pi), rng_geo.uniform(0.0, 2.0 * np.pi))
    a_ris_in = ch.upa_steering(ris_in, geom) * np.sqrt(n)
    q_los = ch.los_component(a_ris_in, a_bs)

    g_los = np.empty((cfg.n_users, n), dtype=complex)
    for m in range(cfg.n_users):
        out = ch.Angles(rng_geo.uniform(0.0, np.pi), rng_geo.uniform(0.0, 2.0 * np.pi))
        g_los[m] = ch.los_component(np.ones(1), ch.upa_steering(out, geom) * np.sqrt(n))[0]

    wk_los = np.sqrt(k_bs_ris / (1.0 + k_bs_ris))
    wk_nlos = np.sqrt(1.0 / (1.0 + k_bs_ris))
    wv_los = np.sqrt(v_ris_user / (1.0 + v_ris_user))
    wv_nlos = np.sqrt(1.0 / (1.0 + v_ris_user))

    q_los_w = pg_q * wk_los * q_los
    g_los_w = (pg_g * wv_los)[:, None] * g_los

    if cfg.ris_phase_mode == "aligned":
        pattern = ch.align_phases_to_los(g_los[0], q_los, target_col=0)
    elif cfg.ris_phase_mode == "random":
        pattern = ch.ReflectionPattern(rng_geo.uniform(0.0, 2.0 * np.pi, size=n))
    else:
        pattern = ch.ReflectionPattern(np.zeros(n))

    direct = None
    if cfg.direct_link:
        pg_d = np.array([path_amplitude(np.linalg.norm(user_pos[m] - bs), alpha_bu)
                         for m in range(cfg.n_users)])
        direct = pg_d[:, None] * ch.complex_normal(rng_geo, (cfg.n_users, cfg.n_bs_antennas))

    return LinkSet(q_los_w=q_los_w,
                   q_nlos_weight=pg_q * wk_nlos,
                   g_los_w=g_los_w,
                   g_nlos_weight=(pg_g * wv_nlos)[:, None],
                   pattern=pattern,
                   direct_rows=direct)


@dataclass
class DownlinkFrame:
    """Per-block cascaded channels of one frame, normalized so every user's
    frame-start row has unit Euclidean norm (path loss folded out, which is
    what referencing noise levels to Eb/N0 requires)."""

    h_pilot: np.ndarray    # (N_k, N_t) at the training instant
    h_blocks: np.ndarray   # (B, N_k, N_t) at each block start
    f_max: float
    symbol_period: float


def build_downlink_frame(cfg: ScenarioConfig, speed: float,
                         k_bs_ris: float, v_ris_user: float,
                         rng_geo: np.random.Generator,
                         rng_fade: np.random.Generator) -> DownlinkFrame:
    links = _draw_links(cfg, rng_geo, k_bs_ris, v_ris_user)
    f_max = speed * cfg.carrier_f1 / ch.SPEED_OF_LIGHT

    q_nlos = ch.complex_normal(rng_fade, links.q_los_w.shape)  # static within frame
    q_total = links.q_los_w + links.q_nlos_weight * q_nlos
    q_omega = links.pattern.diagonal[:, None] * q_total  # (N, N_t)

    jakes = ch.JakesFading.create((cfg.n_users, cfg.n_ris_elements), f_max, rng_fade)
    block_times = (cfg.pilot_len + np.arange(cfg.blocks_per_frame) * cfg.symbols_per_block) \
        * cfg.symbol_period

    def cascade_at(t: float) -> np.ndarray:
        g = links.g_los_w + links.g_nlos_weight * jakes.sample_at(t)
        h = g @ q_omega
        if links.direct_rows is not None:
            h = h + links.direct_rows
        return h

    h_pilot = cascade_at(0.0)
    scale = 1.0 / np.linalg.norm(h_pilot, axis=1, keepdims=True)
    h_blocks = np.stack([cascade_at(t) for t in block_times]) * scale[None, :, :]
    return DownlinkFrame(h_pilot=h_pilot * scale,
                         h_blocks=h_blocks,
                         f_max=f_max,
                         symbol_period=cfg.symbol_period)


def build_uplink_instance(cfg: ScenarioConfig, rng_geo: np.random.Generator,
                          rng_fade: np.random.Generator):
    """Snapshot uplink channel set via TDD reciprocity.

    The array-side hop keeps the BS-RIS Rician factor and the user-side hop
    the RIS-user factor.  Components are scaled by the RMS cascade entry so
    noise levels reference a unit-mean-power channel; returns the channel set
    and the applied scale.
    """
    from .uplink import UplinkChannelSet

    links = _draw_links(cfg, rng_geo, cfg.rician_k_bs_ris, cfg.rician_v_ris_user)
    q_nlos = ch.complex_normal(rng_fade, links.q_los_w.shape)
    g_nlos = ch.complex_normal(rng_fade, links.g_los_w.shape)

    omega = links.pattern.diagonal
    # reciprocity: array side (N_t, N) rows = transposed BS->RIS hop
    left_los = links.q_los_w.T * omega[None, :]
    left_nlos = (links.q_nlos_weight * q_nlos).T * omega[None, :]
    right_los = links.g_los_w.T                      # (N, N_k)
    right_nlos = (links.g_nlos_weight * g_nlos).T

    a = left_los @ right_los
    b = left_los @ right_nlos + left_nlos @ right_los
    o = left_nlos @ right_nlos
    rms = np.sqrt(np.mean(np.abs(a + b + o) ** 2))
    return UplinkChannelSet(a=a / rms, b=b / rms, o=o / rms), float(rms)
