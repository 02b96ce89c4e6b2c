"""Seeded Monte Carlo experiment harness with CSV export.

Every experiment derives per-chunk random streams from (seed, experiment tag,
grid point, chunk index), so results are bit-identical regardless of the
worker count, and all schemes inside one run see exactly the same channel
draws (common random numbers).  Error-rate points accumulate fixed-size
batches until an error target or a trial ceiling is met, never fewer than the
configured minimum number of trials.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import analysis, downlink, uplink
from .config import ScenarioConfig
from .scenario import build_downlink_frame, build_uplink_instance, stream
from .waveform import NoiseModel

DOWNLINK_SCHEMES = ("linear_precoded", "linear_joint", "qam_ml_baseline")

# fixed batch geometry so adaptive stopping is scheduling-independent
FRAMES_PER_TASK = 2
TASKS_PER_BATCH = 8

_TAG_DOWNLINK = 11
_TAG_OUTPUT_SNR = 12
_TAG_UPLINK = 13
_TAG_PDF = 14

_SCHEME_IDS = {name: i + 1 for i, name in enumerate(DOWNLINK_SCHEMES)}

Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass
class Series:
    values: np.ndarray
    half_widths: np.ndarray
    trials: np.ndarray


@dataclass
class CurveResult:
    """One experiment curve: shared x grid, named series with 95% confidence
    half-widths and per-point trial counts, plus auditable header notes."""

    x_name: str
    x_values: np.ndarray
    series: dict[str, Series] = field(default_factory=dict)
    notes: tuple = ()

    def add(self, name, values, half_widths, trials):
        self.series[name] = Series(np.asarray(values, dtype=float),
                                   np.asarray(half_widths, dtype=float),
                                   np.asarray(trials, dtype=np.int64))


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def export_csv(result: CurveResult, path) -> None:
    """Write a CurveResult deterministically: note lines prefixed with '#',
    a mandatory header row, one row per grid point, 9-significant-digit
    floats with '.' decimals."""
    lines = [f"# {note}" for note in result.notes]
    header = [result.x_name]
    for name in result.series:
        header += [name, f"{name}_halfwidth", f"{name}_trials"]
    lines.append(",".join(header))
    for i, x in enumerate(result.x_values):
        row = [_fmt(x)]
        for s in result.series.values():
            row += [_fmt(s.values[i]), _fmt(s.half_widths[i]), str(int(s.trials[i]))]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_curve_csv(path) -> CurveResult:
    """Parse a file written by export_csv back into a CurveResult."""
    notes, header, rows = [], None, []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                notes.append(line[2:] if line.startswith("# ") else line[1:])
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path}: missing header row")
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(header)))
    result = CurveResult(x_name=header[0], x_values=data[:, 0] if rows else np.array([]),
                         notes=tuple(notes))
    for j in range(1, len(header), 3):
        name = header[j]
        result.add(name, data[:, j] if rows else [],
                   data[:, j + 1] if rows else [],
                   data[:, j + 2].astype(np.int64) if rows else [])
    return result


def _run_tasks(fn, args_list, workers: int):
    if workers <= 1 or len(args_list) <= 1:
        return [fn(a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args_list))


def _rate_halfwidth(errors: int, total: int) -> float:
    if total == 0:
        return 0.0
    p = errors / total
    return Z95 * math.sqrt(max(p * (1.0 - p), 0.0) / total)


# --------------------------------------------------------------------------
# downlink BER
# --------------------------------------------------------------------------

def scheme_noise_sigma2(cfg: ScenarioConfig, scheme: str, ebn0_db: float) -> float:
    """Per-branch complex noise variance from Eb/N0.

    Channels are normalized to unit frame-start row norm; the transmit budget
    is 1 per symbol, so Eb is 1 over the scheme's bits per symbol:
    N_k (precoded, 1 bit/user), N_t (joint, 1 bit/antenna), 2*N_k (4-QAM).
    A configured noise_sigma2 overrides the mapping for every scheme.
    """
    if cfg.noise_sigma2 is not None:
        return float(cfg.noise_sigma2)
    bits = {"linear_precoded": cfg.n_users,
            "linear_joint": cfg.n_bs_antennas,
            "qam_ml_baseline": 2 * cfg.n_users}[scheme]
    return 10.0 ** (-ebn0_db / 10.0) / bits


def qam_demodulate(y_eq: np.ndarray) -> np.ndarray:
    """Gray-mapped 4-QAM bit decisions from equalized samples: bit 0 from the
    real axis, bit 1 from the imaginary axis (negative half-plane -> 1)."""
    y = np.asarray(y_eq)
    return np.stack([(y.real < 0), (y.imag < 0)], axis=-1).astype(int)


def qam_modulate(bits: np.ndarray) -> np.ndarray:
    """Gray-mapped unit-power 4-QAM symbols from bit pairs (..., 2)."""
    b = np.asarray(bits)
    return ((1 - 2 * b[..., 0]) + 1j * (1 - 2 * b[..., 1])) / np.sqrt(2.0)


def _complex_noise(rng, shape, sigma2):
    if sigma2 == 0.0:
        return np.zeros(shape, dtype=complex)
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _sim_linear_precoded(frame, cfg, sigma2, rng_noise, rng_data):
    n_k = cfg.n_users
    blocks, syms = cfg.blocks_per_frame, cfg.symbols_per_block
    pilots = downlink.hadamard_pilots(cfg.n_bs_antennas, cfg.pilot_len)
    s_t = (1.0 + pilots) / 2.0

    h0 = frame.h_pilot
    c1 = h0 @ s_t
    c2 = h0 @ (1.0 - s_t)
    v = _complex_noise(rng_noise, (2,) + c1.shape, sigma2)
    z_t = np.abs(c1 + v[0]) ** 2 - np.abs(c2 + v[1]) ** 2
    h_hat = downlink.ls_estimate(downlink.PilotBlock(pilots, z_t))
    pre = downlink.zf_precoder(h_hat)

    bits = rng_data.integers(0, 2, size=(blocks, syms, n_k))
    # true per-block real equivalent channel through the stale precoder
    w = downlink.equivalent_channel(frame.h_blocks) @ pre.p  # (B, N_k, N_k)
    amp = np.sqrt(pre.rho)
    a1 = amp * np.einsum("buk,bsk->bsu", w, bits.astype(float))
    a2 = amp * np.einsum("buk,bsk->bsu", w, 1.0 - bits)
    v1 = _complex_noise(rng_noise, a1.shape, sigma2)
    v2 = _complex_noise(rng_noise, a1.shape, sigma2)
    z = np.abs(a1 + v1) ** 2 - np.abs(a2 + v2) ** 2
    detected = (z >= 0).astype(int)
    return int(np.count_nonzero(detected != bits)), bits.size


def _sim_linear_joint(frame, cfg, sigma2, rng_noise, rng_data):
    n_t = cfg.n_bs_antennas
    blocks, syms = cfg.blocks_per_frame, cfg.symbols_per_block
    scale = 1.0 / np.sqrt(n_t)  # unit average transmit power over both tones
    pilots = downlink.hadamard_pilots(n_t, cfg.pilot_len)
    s_t = (1.0 + pilots) / 2.0

    h0 = frame.h_pilot
    c1 = scale * (h0 @ s_t)
    c2 = scale * (h0 @ (1.0 - s_t))
    v = _complex_noise(rng_noise, (2,) + c1.shape, sigma2)
    z_t = np.abs(c1 + v[0]) ** 2 - np.abs(c2 + v[1]) ** 2
    # LS recovers scale^2 * H_bar, consistent with the scaled data symbols
    h_hat = downlink.ls_estimate(downlink.PilotBlock(pilots, z_t))

    bits = rng_data.integers(0, 2, size=(blocks, syms, n_t))
    errors = 0
    for b in range(blocks):
        c1 = scale * (frame.h_blocks[b] @ bits[b].T.astype(float))     # (N_k, S)
        c2 = scale * (frame.h_blocks[b] @ (1.0 - bits[b]).T)
        v1 = _complex_noise(rng_noise, c1.shape, sigma2)
        v2 = _complex_noise(rng_noise, c1.shape, sigma2)
        z = np.abs(c1 + v1) ** 2 - np.abs(c2 + v2) ** 2
        for s in range(syms):
            sym = downlink.joint_detect(z[:, s], h_hat)
            errors += int(np.count_nonzero(sym.s != bits[b, s]))
    return errors, bits.size


def _sim_qam_baseline(frame, cfg, sigma2, rng_noise, rng_data, rng_est):
    n_k = cfg.n_users
    blocks, syms = cfg.blocks_per_frame, cfg.symbols_per_block
    pilot_budget = downlink.hadamard_pilots(cfg.n_bs_antennas, cfg.pilot_len).shape[1]
    est_sigma2 = sigma2 / pilot_budget

    bits = rng_data.integers(0, 2, size=(blocks, syms, n_k, 2))
    x = qam_modulate(bits)  # (B, S, N_k)
    dnu = 2.0 * np.pi * frame.f_max * frame.symbol_period
    errors = 0
    for b in range(blocks):
        t0 = cfg.pilot_len + b * syms
        h_true = frame.h_blocks[b]
        h_est = np.exp(1j * dnu * t0) * h_true \
            + _complex_noise(rng_est, h_true.shape, est_sigma2)
        p_c = np.linalg.pinv(h_est)
        p_c = p_c / np.sqrt(np.trace(p_c.conj().T @ p_c).real)
        composite = h_true @ p_c                 # (N_k, N_k)
        gain = np.diag(h_est @ p_c)              # receiver-side block estimate
        rot = np.exp(1j * dnu * (t0 + np.arange(syms)))
        y = rot[:, None] * (x[b] @ composite.T) \
            + _complex_noise(rng_noise, (syms, n_k), sigma2)
        detected = qam_demodulate(y / gain[None, :])
        errors += int(np.count_nonzero(detected != bits[b]))
    return errors, bits.size


def _downlink_task(args):
    """Simulate a contiguous frame range for every scheme on common channel
    draws; returns {scheme: (bit_errors, bits)}."""
    (cfg, schemes, speed, k_bs_ris, v_ris_user, sigma2s,
     seed, point_idx, frame_lo, frame_hi) = args
    totals = {s: [0, 0] for s in schemes}
    for frame_idx in range(frame_lo, frame_hi):
        rng_geo = stream(seed, _TAG_DOWNLINK, 1, point_idx, frame_idx)
        rng_fade = stream(seed, _TAG_DOWNLINK, 2, point_idx, frame_idx)
        frame = build_downlink_frame(cfg, speed, k_bs_ris, v_ris_user, rng_geo, rng_fade)
        for scheme in schemes:
            sid = _SCHEME_IDS[scheme]
            rng_noise = stream(seed, _TAG_DOWNLINK, 3, point_idx, frame_idx, sid)
            rng_data = stream(seed, _TAG_DOWNLINK, 4, point_idx, frame_idx, sid)
            if scheme == "linear_precoded":
                err, bits = _sim_linear_precoded(frame, cfg, sigma2s[scheme],
                                                 rng_noise, rng_data)
            elif scheme == "linear_joint":
                err, bits = _sim_linear_joint(frame, cfg, sigma2s[scheme],
                                              rng_noise, rng_data)
            else:
                rng_est = stream(seed, _TAG_DOWNLINK, 5, point_idx, frame_idx, sid)
                err, bits = _sim_qam_baseline(frame, cfg, sigma2s[scheme],
                                              rng_noise, rng_data, rng_est)
            totals[scheme][0] += err
            totals[scheme][1] += bits
    return totals


def run_downlink_ber(cfg: ScenarioConfig, schemes, sweep: str, grid=None,
                     workers: int = 1) -> CurveResult:
    """Monte Carlo downlink BER versus speed, Eb/N0, or Rician factor.

    One trial is one transmission block; frames of ``blocks_per_frame``
    consecutive trials share a channel and training state.  Points stop at
    ``mc_min_errors`` bit errors per scheme or the trial ceiling, never below
    ``mc_min_trials`` trials.
    """
    if isinstance(schemes, str):
        schemes = [schemes]
    for s in schemes:
        if s not in DOWNLINK_SCHEMES:
            raise ValueError(f"unknown scheme {s!r}")
    if sweep not in ("speed", "ebn0", "rician_k"):
        raise ValueError(f"unknown sweep axis {sweep!r}")
    if "linear_joint" in schemes:
        downlink.bipolar_candidates(cfg.n_bs_antennas)  # enforce the search cap early
    if grid is None:
        grid = {"speed": (10.0, 30.0, 50.0), "ebn0": cfg.ebn0_db_grid,
                "rician_k": (1.0, 10.0, 100.0)}[sweep]
    grid = tuple(float(g) for g in grid)

    min_frames = max(1, math.ceil(cfg.mc_min_trials / cfg.blocks_per_frame))
    max_frames = max(min_frames, math.ceil(cfg.mc_trial_ceiling / cfg.blocks_per_frame))
    batch_frames = FRAMES_PER_TASK * TASKS_PER_BATCH

    x_name = {"speed": "speed_mps", "ebn0": "ebn0_db", "rician_k": "rician_k"}[sweep]
    result = CurveResult(x_name=x_name, x_values=np.asarray(grid))
    acc = {s: [[0, 0] for _ in grid] for s in schemes}
    trials = [0 for _ in grid]

    for pi, value in enumerate(grid):
        speed = value if sweep == "speed" else cfg.speed
        k = v = value if sweep == "rician_k" else None
        k = cfg.rician_k_bs_ris if k is None else k
        v = cfg.rician_v_ris_user if v is None else v
        ebn0 = value if sweep == "ebn0" else cfg.ebn0_db
        sigma2s = {s: scheme_noise_sigma2(cfg, s, ebn0) for s in schemes}

        done_frames = 0
        while True:
            hi = min(done_frames + batch_frames, max_frames)
            tasks = [(cfg, tuple(schemes), speed, k, v, sigma2s, cfg.seed, pi, lo,
                      min(lo + FRAMES_PER_TASK, hi))
                     for lo in range(done_frames, hi, FRAMES_PER_TASK)]
            for partial in _run_tasks(_downlink_task, tasks, workers):
                for s in schemes:
                    acc[s][pi][0] += partial[s][0]
                    acc[s][pi][1] += partial[s][1]
            done_frames = hi
            trials[pi] = done_frames * cfg.blocks_per_frame
            enough_errors = all(acc[s][pi][0] >= cfg.mc_min_errors for s in schemes)
            if done_frames >= max_frames or (done_frames >= min_frames and enough_errors):
                break

    notes = [
        "experiment=downlink-ber sweep=%s schemes=%s" % (sweep, "+".join(schemes)),
        "seed=%d trial=block frame=%d blocks x %d symbols + %d pilots"
        % (cfg.seed, cfg.blocks_per_frame, cfg.symbols_per_block, cfg.pilot_len),
        "noise map: sigma2 = 10^(-EbN0/10)/bits_per_symbol, bits = "
        "{precoded: N_k=%d, joint: N_t=%d, qam: 2N_k=%d}; channel rows unit-normalized "
        "at frame start%s" % (cfg.n_users, cfg.n_bs_antennas, 2 * cfg.n_users,
                              "; sigma2 override=%g" % cfg.noise_sigma2
                              if cfg.noise_sigma2 is not None else ""),
    ]
    result.notes = tuple(notes)
    for s in schemes:
        errs = np.array([acc[s][i][0] for i in range(len(grid))], dtype=float)
        bits = np.array([acc[s][i][1] for i in range(len(grid))], dtype=float)
        result.add(s, errs / bits,
                   [_rate_halfwidth(int(e), int(b)) for e, b in zip(errs, bits)],
                   trials)
    return result


# --------------------------------------------------------------------------
# precoded output SNR
# --------------------------------------------------------------------------

def _output_snr_task(args):
    cfg, n_t, seed, point_idx, draw_lo, draw_hi, sigma2, n_sym = args
    n_k = cfg.n_users
    etas = []
    for d in range(draw_lo, draw_hi):
        rng = stream(seed, _TAG_OUTPUT_SNR, point_idx, d)
        h_bar = rng.standard_normal((n_k, n_t))
        pre = downlink.zf_precoder(h_bar)
        w = h_bar @ pre.p
        bits = rng.integers(0, 2, size=(n_sym, n_k)).astype(float)
        amp = np.sqrt(pre.rho)
        a1 = amp * bits @ w.T
        a2 = amp * (1.0 - bits) @ w.T
        z_clean = a1 ** 2 - a2 ** 2
        v1 = _complex_noise(rng, a1.shape, sigma2)
        v2 = _complex_noise(rng, a1.shape, sigma2)
        z_noisy = np.abs(a1 + v1) ** 2 - np.abs(a2 + v2) ** 2
        noise = z_noisy - z_clean
        etas.append(np.mean(z_clean ** 2) / np.mean(noise ** 2))
    return etas


def run_output_snr(cfg: ScenarioConfig, nt_grid=None, workers: int = 1) -> CurveResult:
    """Simulated precoded output SNR (signal power over post-detection noise
    power) against the large-array closed form, per transmit-array size."""
    if nt_grid is None:
        nt_grid = (32, 64, 128)
    nt_grid = tuple(int(n) for n in nt_grid)
    sigma2 = cfg.noise_sigma2 if cfg.noise_sigma2 is not None else 0.01
    if sigma2 <= 0:
        raise ValueError("output SNR experiment needs sigma2 > 0")
    for n_t in nt_grid:
        if n_t <= cfg.n_users + 1:
            raise ValueError("every grid point must satisfy n_t > n_k + 1")
    draws, n_sym = cfg.snr_channel_draws, 256

    result = CurveResult(x_name="n_bs_antennas", x_values=np.asarray(nt_grid, dtype=float))
    sim_vals, sim_hw, predicted = [], [], []
    for pi, n_t in enumerate(nt_grid):
        tasks = [(cfg, n_t, cfg.seed, pi, lo, min(lo + 25, draws), sigma2, n_sym)
                 for lo in range(0, draws, 25)]
        etas = [e for part in _run_tasks(_output_snr_task, tasks, workers) for e in part]
        etas = np.asarray(etas)
        sim_vals.append(etas.mean())
        sim_hw.append(Z95 * etas.std(ddof=1) / np.sqrt(etas.size))
        predicted.append(downlink.output_snr_asymptotic(n_t, cfg.n_users, sigma2))
    result.notes = ("experiment=output-snr seed=%d sigma2=%g draws=%d users=%d"
                    % (cfg.seed, sigma2, draws, cfg.n_users),
                    "channel draws: unit-variance Gaussian equivalent rows")
    result.add("simulated", sim_vals, sim_hw, [draws] * len(nt_grid))
    result.add("closed_form", predicted, [0.0] * len(nt_grid), [0] * len(nt_grid))
    return result


# --------------------------------------------------------------------------
# uplink SER
# --------------------------------------------------------------------------

def _uplink_point_mc(cfg, chans, regions, sigma2, point_idx, workers):
    cs = chans.c  # (N_t, N_k)
    const = uplink.bipolar_constellation(cfg.n_users)
    s_all = (const + 1.0) / 2.0
    amp1 = cs @ s_all.T           # (N_t, R)
    amp2 = cs @ (1.0 - s_all).T
    worker = _UplinkTask(cfg, amp1, amp2, regions, sigma2, point_idx)

    errors = total = 0
    done = 0
    while True:
        hi = min(done + cfg.mc_symbol_chunk * 4, cfg.mc_symbol_ceiling)
        chunk_edges = list(range(done, hi, cfg.mc_symbol_chunk)) + [hi]
        tasks = list(zip(chunk_edges[:-1], chunk_edges[1:]))
        for err, n in _run_tasks(worker, tasks, workers):
            errors += err
            total += n
        done = hi
        if done >= cfg.mc_symbol_ceiling or \
                (total >= cfg.mc_min_trials and errors >= cfg.mc_min_errors):
            break
    return errors, total


class _UplinkTask:
    """Picklable uplink chunk worker bound to one grid point's state."""

    def __init__(self, cfg, amp1, amp2, regions, sigma2, point_idx):
        self.cfg, self.amp1, self.amp2 = cfg, amp1, amp2
        self.regions, self.sigma2, self.point_idx = regions, sigma2, point_idx

    def __call__(self, bounds):
        lo, hi = bounds
        rng = stream(self.cfg.seed, _TAG_UPLINK, self.point_idx, lo)
        n = hi - lo
        n_points = self.amp1.shape[1]
        idx = rng.integers(0, n_points, size=n)
        v = _complex_noise(rng, (2, n, self.amp1.shape[0]), self.sigma2)
        z = (np.abs(self.amp1[:, idx].T + v[0]) ** 2
             - np.abs(self.amp2[:, idx].T + v[1]) ** 2)
        xi = z.mean(axis=1)
        detected = self.regions.representatives[self.regions.locate(xi)]
        return int(np.count_nonzero(detected != idx)), n


def uplink_noise_sigma2(ebn0_db: float) -> float:
    """Per-branch complex noise variance at one antenna for a unit-mean-power
    normalized cascade carrying one bit per user."""
    return 10.0 ** (-ebn0_db / 10.0)


def run_uplink_ser(cfg: ScenarioConfig, mode: str = "both", grid=None,
                   workers: int = 1) -> CurveResult:
    """SER of the averaged-observation uplink on one frozen channel instance,
    by Monte Carlo, the closed form, or both (paired on the same instance)."""
    if mode not in ("monte_carlo", "closed_form", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    if grid is None:
        grid = cfg.ebn0_db_grid
    grid = tuple(float(g) for g in grid)

    chans, rms = build_uplink_instance(cfg, stream(cfg.seed, _TAG_UPLINK, 1),
                                       stream(cfg.seed, _TAG_UPLINK, 2))
    gains = uplink.exact_linear_gains(chans)
    const = uplink.bipolar_constellation(cfg.n_users)
    regions = uplink.build_regions(gains, const)

    result = CurveResult(x_name="ebn0_db", x_values=np.asarray(grid))
    result.notes = ("experiment=uplink-ser seed=%d users=%d antennas=%d mode=%s"
                    % (cfg.seed, cfg.n_users, cfg.n_bs_antennas, mode),
                    "noise map: sigma2 = 10^(-EbN0/10) per branch at one antenna; "
                    "cascade normalized to unit RMS entry (raw RMS %.6g)" % rms,
                    "degenerate_regions=%s" % regions.degenerate)

    if mode in ("monte_carlo", "both"):
        errs, totals = [], []
        for pi, x in enumerate(grid):
            sigma2 = cfg.noise_sigma2 if cfg.noise_sigma2 is not None \
                else uplink_noise_sigma2(x)
            if sigma2 == 0.0:
                clean = (chans.c @ ((const + 1.0) / 2.0).T,
                         chans.c @ ((1.0 - const) / 2.0).T)
                xi = (np.abs(clean[0]) ** 2 - np.abs(clean[1]) ** 2).mean(axis=0)
                detected = regions.representatives[regions.locate(xi)]
                errs.append(int(np.count_nonzero(detected != np.arange(const.shape[0]))))
                totals.append(const.shape[0])
            else:
                e, n = _uplink_point_mc(cfg, chans, regions, sigma2, pi, workers)
                errs.append(e)
                totals.append(n)
        result.add("monte_carlo", [e / n for e, n in zip(errs, totals)],
                   [_rate_halfwidth(e, n) for e, n in zip(errs, totals)], totals)

    if mode in ("closed_form", "both"):
        vals = []
        for x in grid:
            sigma2 = cfg.noise_sigma2 if cfg.noise_sigma2 is not None \
                else uplink_noise_sigma2(x)
            if sigma2 == 0.0:
                vals.append(0.0 if not regions.degenerate else np.nan)
            else:
                vals.append(analysis.closed_form_ser(
                    gains, NoiseModel(sigma2), chans, const).probability)
        result.add("closed_form", vals, [0.0] * len(grid), [0] * len(grid))
    return result


# --------------------------------------------------------------------------
# observation pdf fit
# --------------------------------------------------------------------------

def run_pdf_fit(cfg: ScenarioConfig, snr_points=None) -> CurveResult:
    """Empirical, series, and Gaussian densities of one antenna observation
    on a shared grid, one group of series per branch SNR point (dB)."""
    # default top point keeps the density series inside the diagonal budget
    # below; genuinely high-SNR requests still fail loudly with the bound
    if snr_points is None:
        snr_points = (18.0, 10.0, 3.0)
    snr_points = tuple(float(s) for s in snr_points)
    series_ctl = analysis.SeriesControl(max_terms=400)

    chans, _ = build_uplink_instance(cfg, stream(cfg.seed, _TAG_PDF, 1),
                                     stream(cfg.seed, _TAG_PDF, 2))
    row = chans.c[0]
    s_ref = np.arange(cfg.n_users) % 2  # alternating bit pattern
    from .waveform import ComplementarySymbol
    sym = ComplementarySymbol(s_ref, levels=2)
    g1 = float(np.abs(row @ sym.s) ** 2)
    g2 = float(np.abs(row @ sym.s_bar) ** 2)
    gamma_ref = max(g1, g2)

    # moments at the widest noise fix the shared grid
    sv2_max = gamma_ref / (2.0 * 10.0 ** (min(snr_points) / 10.0))
    wide = analysis.gaussian_approx(row, sym, sv2_max)
    lo = wide.mu - 8.0 * np.sqrt(wide.sigma2)
    hi = wide.mu + 8.0 * np.sqrt(wide.sigma2)
    grid = np.linspace(lo, hi, 401)
    edges = np.concatenate([[lo - (hi - lo) / 800.0],
                            0.5 * (grid[1:] + grid[:-1]),
                            [hi + (hi - lo) / 800.0]])

    result = CurveResult(x_name="observation", x_values=grid)
    notes = ["experiment=pdf-fit seed=%d samples=%d gamma_ref=%.9g"
             % (cfg.seed, cfg.pdf_fit_samples, gamma_ref),
             "noise map: sigma_v2 = gamma_ref / (2 * 10^(SNRdB/10)) per point"]
    n = cfg.pdf_fit_samples
    for pi, snr_db in enumerate(snr_points):
        sv2 = gamma_ref / (2.0 * 10.0 ** (snr_db / 10.0))
        rng = stream(cfg.seed, _TAG_PDF, 3, pi)
        v = np.sqrt(sv2) * (rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n)))
        samples = (np.abs(row @ sym.s + v[0]) ** 2
                   - np.abs(row @ sym.s_bar + v[1]) ** 2)
        hist, _ = np.histogram(samples, bins=edges, density=True)

        model = analysis.gaussian_approx(row, sym, sv2)
        gauss = stats.norm.pdf(grid, model.mu, np.sqrt(model.sigma2))
        p1 = analysis.GammaParams(beta=2.0 * sv2, gamma=g1)
        p2 = analysis.GammaParams(beta=2.0 * sv2, gamma=g2)
        try:
            series = analysis.gamma_difference_pdf(grid, p1, p2, series_ctl)
        except analysis.SeriesTruncationError as exc:
            raise analysis.SeriesTruncationError(
                f"series truncation at SNR point {snr_db} dB: {exc}",
                partial_sum=exc.partial_sum, tail_bound=exc.tail_bound) from exc

        ks_gauss = stats.kstest(samples, "norm",
                                args=(model.mu, np.sqrt(model.sigma2))).statistic
        fine = np.linspace(lo, hi, 2001)
        fine_pdf = analysis.gamma_difference_pdf(fine, p1, p2, series_ctl)
        cdf = np.concatenate([[0.0], np.cumsum(
            (fine_pdf[1:] + fine_pdf[:-1]) / 2.0 * np.diff(fine))])
        cdf = np.clip(cdf / max(cdf[-1], 1e-300), 0.0, 1.0)
        sorted_s = np.sort(samples)
        ecdf_hi = np.arange(1, n + 1) / n
        interp = np.interp(sorted_s, fine, cdf)
        ks_series = float(np.max(np.maximum(np.abs(ecdf_hi - interp),
                                            np.abs(ecdf_hi - 1.0 / n - interp))))
        tag = format(snr_db, "g")
        notes.append("snr=%sdB sigma_v2=%.9g ks_gauss=%.9g ks_series=%.9g"
                     % (tag, sv2, ks_gauss, ks_series))
        result.add(f"empirical_{tag}dB", hist, np.zeros_like(hist), [n] * grid.size)
        result.add(f"series_{tag}dB", series, np.zeros_like(series), [0] * grid.size)
        result.add(f"gaussian_{tag}dB", gauss, np.zeros_like(gauss), [0] * grid.size)
    result.notes = tuple(notes)
    return result
