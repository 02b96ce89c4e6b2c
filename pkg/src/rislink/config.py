"""Scenario configuration: flat key-value files with validated defaults.

The default configuration reproduces the evaluation setup: 8 users, a 64-
element RIS, a 128-antenna base station, Rician factor 10 on both hops, a
5.9 GHz carrier with 8 us symbols, 50 m/s mobility, and a 40-block frame of
1,020 symbols including 20 training symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .channel import SPEED_OF_LIGHT


class ConfigError(ValueError):
    """Configuration problem, carrying the offending key and line."""

    def __init__(self, message, key=None, line=None):
        loc = ""
        if line is not None:
            loc += f" (line {line})"
        if key is not None:
            loc += f" [key: {key}]"
        super().__init__(message + loc)
        self.key = key
        self.line = line


@dataclass
class ScenarioConfig:
    """Full geometric and radio parameterization of one experiment."""

    bs_position: tuple = (20.0, -15.0, 25.0)
    ris_position: tuple = (-5.0, 45.0, 10.0)
    coverage_length: float = 100.0
    n_users: int = 8
    n_ris_elements: int = 64
    n_bs_antennas: int = 128
    rician_factor: float = 10.0
    rician_K: float | None = None   # BS-RIS hop override
    rician_V: float | None = None   # RIS-user hop override
    pathloss_exponents: tuple = (2.5, 2.3, 2.1)  # bs_user, bs_ris, ris_user
    carrier_f1: float = 5.9e9
    symbol_period: float = 8e-6
    speed: float = 50.0
    blocks_per_frame: int = 40
    symbols_per_block: int = 25
    pilot_len: int = 20
    noise_sigma2: float | None = None
    ebn0_db: float = 10.0
    ebn0_db_grid: tuple = (0.0, 4.0, 8.0, 12.0, 16.0)
    seed: int = 20250811
    ris_phase_mode: str = "aligned"
    direct_link: bool = False
    samples_per_symbol: int = 16
    # Monte Carlo controls
    mc_min_errors: int = 100
    mc_min_trials: int = 1000
    mc_trial_ceiling: int = 20000
    mc_symbol_chunk: int = 50000
    mc_symbol_ceiling: int = 2_000_000
    snr_channel_draws: int = 200
    pdf_fit_samples: int = 1_000_000
    explicit_keys: frozenset = field(default_factory=frozenset, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        for key in ("n_users", "n_ris_elements", "n_bs_antennas",
                    "blocks_per_frame", "symbols_per_block", "pilot_len",
                    "samples_per_symbol", "mc_min_errors", "mc_min_trials",
                    "mc_trial_ceiling", "mc_symbol_chunk", "mc_symbol_ceiling",
                    "snr_channel_draws", "pdf_fit_samples"):
            if int(getattr(self, key)) < 1:
                raise ConfigError(f"{key} must be >= 1", key=key)
        for key in ("coverage_length", "carrier_f1", "symbol_period"):
            if getattr(self, key) <= 0:
                raise ConfigError(f"{key} must be > 0", key=key)
        if self.speed < 0:
            raise ConfigError("speed must be >= 0", key="speed")
        if self.rician_factor < 0:
            raise ConfigError("rician_factor must be >= 0", key="rician_factor")
        for key in ("rician_K", "rician_V"):
            value = getattr(self, key)
            if value is not None and value < 0:
                raise ConfigError(f"{key} must be >= 0", key=key)
        if len(self.bs_position) != 3 or len(self.ris_position) != 3:
            raise ConfigError("positions must be 3-vectors", key="bs_position")
        if len(self.pathloss_exponents) != 3 or any(a <= 0 for a in self.pathloss_exponents):
            raise ConfigError("pathloss_exponents must be 3 positive values",
                              key="pathloss_exponents")
        if self.noise_sigma2 is not None and self.noise_sigma2 < 0:
            raise ConfigError("noise_sigma2 must be >= 0", key="noise_sigma2")
        grid = self.ebn0_db_grid
        if len(grid) and np.any(np.diff(grid) <= 0):
            raise ConfigError("ebn0_db_grid must be strictly increasing",
                              key="ebn0_db_grid")
        if self.ris_phase_mode not in ("aligned", "fixed", "random"):
            raise ConfigError(f"unknown ris_phase_mode {self.ris_phase_mode!r}",
                              key="ris_phase_mode")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits", key="seed")

    # ---- derived quantities -------------------------------------------------

    @property
    def carrier_f2(self) -> float:
        return self.carrier_f1 + 1.0 / self.symbol_period

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_f1

    @property
    def doppler_max(self) -> float:
        return self.speed * self.carrier_f1 / SPEED_OF_LIGHT

    @property
    def ris_grid(self) -> tuple[int, int]:
        """Squarest (nx, ny) factorization of the RIS element count."""
        n = self.n_ris_elements
        for nx in range(int(np.sqrt(n)), 0, -1):
            if n % nx == 0:
                return (n // nx, nx)
        return (n, 1)

    @property
    def rician_k_bs_ris(self) -> float:
        return self.rician_factor if self.rician_K is None else self.rician_K

    @property
    def rician_v_ris_user(self) -> float:
        return self.rician_factor if self.rician_V is None else self.rician_V

    @property
    def symbols_per_frame(self) -> int:
        return self.pilot_len + self.blocks_per_frame * self.symbols_per_block

    def replace(self, **kwargs) -> "ScenarioConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "explicit_keys"}
        values.update(kwargs)
        explicit = self.explicit_keys | frozenset(kwargs)
        return ScenarioConfig(**values, explicit_keys=explicit)


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_floats(raw: str) -> tuple:
    return tuple(float(v) for v in raw.replace(",", " ").split())


_PARSERS = {
    "bs_position": _parse_floats,
    "ris_position": _parse_floats,
    "coverage_length": float,
    "n_users": int,
    "n_ris_elements": int,
    "n_bs_antennas": int,
    "rician_factor": float,
    "rician_K": float,
    "rician_V": float,
    "pathloss_exponents": _parse_floats,
    "carrier_f1": float,
    "symbol_period": float,
    "speed": float,
    "blocks_per_frame": int,
    "symbols_per_block": int,
    "pilot_len": int,
    "noise_sigma2": float,
    "ebn0_db": float,
    "ebn0_db_grid": _parse_floats,
    "seed": int,
    "ris_phase_mode": str,
    "direct_link": _parse_bool,
    "samples_per_symbol": int,
    "mc_min_errors": int,
    "mc_min_trials": int,
    "mc_trial_ceiling": int,
    "mc_symbol_chunk": int,
    "mc_symbol_ceiling": int,
    "snr_channel_draws": int,
    "pdf_fit_samples": int,
}


def load_scenario(path) -> ScenarioConfig:
    """Parse a flat ``key: value`` (or ``key = value``) scenario file.

    Keys are exactly the ScenarioConfig field names in SI units; ``#`` starts
    a comment; absent keys take the built-in defaults.  Parse and invariant
    violations raise ConfigError with the offending line or key.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()

    values = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        for sep in (":", "="):
            if sep in text:
                key, _, rest = text.partition(sep)
                break
        else:
            raise ConfigError(f"expected 'key: value', got {text!r}", line=lineno)
        key = key.strip()
        rest = rest.strip()
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=lineno)
        if not rest:
            raise ConfigError("missing value", key=key, line=lineno)
        try:
            values[key] = _PARSERS[key](rest)
        except ValueError as exc:
            raise ConfigError(f"bad value {rest!r}: {exc}", key=key, line=lineno) from exc

    try:
        return ScenarioConfig(**values, explicit_keys=frozenset(values))
    except TypeError as exc:  # pragma: no cover - guarded by _PARSERS
        raise ConfigError(str(exc)) from exc
