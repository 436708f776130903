"""Monte Carlo BER engine for the DS-UWB receivers.

Every realization draws its data bits and noise from a generator seeded by
``realization_seed(base_seed, index)``; channel draws use an independent
stream. Results depend only on the configuration, never on scheduling.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .analysis import MfbPoint, mfb_average
from .channel_model import (
    ChannelParams,
    ChannelRealization,
    discretize,
    generate_evaluation_set,
    load_channel_params,
    select_best,
)
from .equalizer import EqualizerConfig, dfe_equalize, le_equalize
from .rake_frontend import apply_channel, select_fingers, srake_detect
from .signal_core import (
    FrameConfig,
    SampledWaveform,
    SpreadingCode,
    make_chip_pulse,
    pulse_energy,
    synthesize_frame,
    synthesize_symbol_pulse,
)
from .smpic import SmpicConfig, hard_decision, smpic_detect

__all__ = [
    "ConfigError",
    "SimConfig",
    "BerRow",
    "BerTable",
    "RECEIVERS",
    "load_config",
    "realization_seed",
    "noise_psd",
    "run_realization",
    "run_sweep",
    "run_mfb",
    "evaluation_set",
    "with_overrides",
]

RECEIVERS = ("srake", "srake-dfe", "smpic-le")
SWEEP_HEADER = ["receiver", "profile", "rate_bps", "J", "eb_n0_db", "ber", "bits", "realizations", "seed"]

_DATA_STREAM = 0x4454


class ConfigError(ValueError):
    """Inconsistent or unreadable simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    channel_profile: str = "CM1"
    data_rate: float = 250e6
    code: tuple[int, ...] = (-1, 1)
    receiver: str = "smpic-le"
    J: int = 32
    p: int = 2
    w: float = 0.9
    equalizer: EqualizerConfig = field(default_factory=EqualizerConfig)
    eb_n0_list: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0)
    realizations: int = 100
    keep_best: int = 90
    bits_per_realization: int = 20000
    symbols_per_frame: int = 1024
    base_seed: int = 0
    pulse_shape: str = "rectangular"
    oversampling: int = 4
    shadowing: bool = False

    def __post_init__(self):
        if self.receiver not in RECEIVERS:
            raise ConfigError(f"unknown receiver {self.receiver!r}; choose from {', '.join(RECEIVERS)}")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if not 1 <= self.keep_best <= self.realizations:
            raise ConfigError(f"keep_best ({self.keep_best}) must lie in [1, realizations={self.realizations}]")
        if self.bits_per_realization < self.equalizer.training_length:
            raise ConfigError("bits_per_realization must be at least the training length")
        if self.bits_per_realization < 1 or self.symbols_per_frame < 1:
            raise ConfigError("bits_per_realization and symbols_per_frame must be positive")
        if not self.eb_n0_list:
            raise ConfigError("eb_n0_list is empty")
        if self.J < 1 or self.p < 0 or not 0.0 <= self.w <= 1.0:
            raise ConfigError("need J >= 1, p >= 0 and 0 <= w <= 1")
        if not self.data_rate > 0:
            raise ConfigError("data_rate must be positive")
        try:
            SpreadingCode(tuple(self.code))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def frame(self) -> FrameConfig:
        return FrameConfig.from_data_rate(self.data_rate, SpreadingCode(tuple(self.code)), self.symbols_per_frame)

    @property
    def smpic(self) -> SmpicConfig:
        return SmpicConfig(J=self.J, p=self.p, w=self.w)

    def channel_params(self) -> ChannelParams:
        try:
            return load_channel_params(self.channel_profile)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def load_config(path: str | Path, **overrides) -> SimConfig:
    """Read a YAML config; ``None``-valued overrides are ignored."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")

    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(SimConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    profile = str(data.get("channel_profile", "CM1"))
    if profile.lower() not in ("cm1", "cm4"):
        p = Path(profile)
        if not p.is_absolute():
            p = path.parent / p
        data["channel_profile"] = str(p)
    try:
        if "equalizer" in data:
            data["equalizer"] = EqualizerConfig(**(data["equalizer"] or {}))
        for key in ("code", "eb_n0_list"):
            if key in data:
                data[key] = tuple(data[key])
        data["eb_n0_list"] = tuple(float(v) for v in data.get("eb_n0_list", SimConfig.eb_n0_list))
        # YAML 1.1 reads exponents like 1.5e9 as strings
        for key in ("data_rate", "w"):
            if key in data:
                data[key] = float(data[key])
        return SimConfig(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None


def realization_seed(base_seed: int, index: int) -> int:
    """Fixed integer hash of ``(base_seed, index)`` for the data/noise stream."""
    ss = np.random.SeedSequence([_DATA_STREAM, int(base_seed) % 2**63, int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def noise_psd(eb_n0_db: float, bit_energy: float) -> float:
    """N0 such that ``bit_energy / N0`` equals the requested Eb/N0."""
    return bit_energy / 10.0 ** (eb_n0_db / 10.0)


def complex_awgn(rng: np.random.Generator, n: int) -> np.ndarray:
    """Unit-power circular complex Gaussian samples."""
    return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)


def _frame_lengths(total: int, per_frame: int) -> list[int]:
    full, rest = divmod(total, per_frame)
    return [per_frame] * full + ([rest] if rest else [])


def _detect(cfg: SimConfig, r: SampledWaveform, dch, fingers, fcfg, pulse, training) -> np.ndarray:
    T = training.size
    if cfg.receiver == "srake":
        return hard_decision(srake_detect(r, fingers, fcfg, pulse))[T:]
    if cfg.receiver == "srake-dfe":
        return dfe_equalize(srake_detect(r, fingers, fcfg, pulse), training, cfg.equalizer)
    soft = smpic_detect(r, dch, cfg.smpic, fcfg, pulse, fingers=fingers)
    return le_equalize(soft, training, cfg.equalizer)


def run_realization(cfg: SimConfig, ch: ChannelRealization, seed: int) -> tuple[np.ndarray, int]:
    """Simulate one channel realization at every Eb/N0 point of ``cfg``.

    Returns the data-bit error count per Eb/N0 point and the number of data
    bits counted (training symbols excluded). Bits and noise shapes are shared
    across Eb/N0 points; only the noise scale changes.
    """
    frame = cfg.frame
    pulse = make_chip_pulse(cfg.pulse_shape, frame.chip_duration, cfg.oversampling)
    Ts = pulse.sample_period
    dch = discretize(ch, Ts, include_shadowing=cfg.shadowing)
    fingers = select_fingers(dch, cfg.J)
    eb = pulse_energy(synthesize_symbol_pulse(frame, pulse))
    noise_std = [math.sqrt(noise_psd(snr, eb) / Ts) for snr in cfg.eb_n0_list]

    rng = np.random.default_rng(seed)
    T = cfg.equalizer.training_length
    errors = np.zeros(len(cfg.eb_n0_list), dtype=np.int64)
    counted = 0
    for n_data in _frame_lengths(cfg.bits_per_realization, cfg.symbols_per_frame):
        fcfg = frame.with_symbols(T + n_data)
        symbols = np.where(rng.random(T + n_data) < 0.5, -1.0, 1.0)
        training, data = symbols[:T], symbols[T:]
        clean = apply_channel(synthesize_frame(fcfg, pulse, symbols), dch).samples
        unit_noise = complex_awgn(rng, clean.size)
        for i, std in enumerate(noise_std):
            r = SampledWaveform(clean + std * unit_noise, Ts)
            decisions = _detect(cfg, r, dch, fingers, fcfg, pulse, training)
            errors[i] += int(np.count_nonzero(decisions != data))
        counted += n_data
    return errors, counted


@dataclass(frozen=True)
class BerRow:
    receiver: str
    profile: str
    rate_bps: float
    J: int
    eb_n0_db: float
    errors: int
    bits: int
    realizations: int
    seed: int

    @property
    def ber(self) -> float:
        return self.errors / self.bits


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True)
class BerTable:
    rows: tuple[BerRow, ...]
    per_realization: np.ndarray | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for r in self.rows:
            writer.writerow(
                [r.receiver, r.profile, _num(r.rate_bps), r.J, repr(float(r.eb_n0_db)), repr(r.ber), r.bits, r.realizations, r.seed]
            )
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    def ber(self, eb_n0_db: float) -> float:
        for r in self.rows:
            if r.eb_n0_db == eb_n0_db:
                return r.ber
        raise KeyError(eb_n0_db)


def _run_one(args):
    cfg, ch, seed = args
    return run_realization(cfg, ch, seed)


def evaluation_set(cfg: SimConfig) -> list[ChannelRealization]:
    return generate_evaluation_set(cfg.channel_params(), cfg.realizations, cfg.base_seed)


def run_sweep(cfg: SimConfig, workers: int = 1, channels: Sequence[ChannelRealization] | None = None) -> BerTable:
    """BER versus Eb/N0, aggregated over the best ``keep_best`` realizations per point.

    Realizations are ranked by their own BER at each Eb/N0 point; the
    reported BER is total errors over total bits of the kept realizations.
    """
    params = cfg.channel_params()
    if channels is None:
        channels = generate_evaluation_set(params, cfg.realizations, cfg.base_seed)
    jobs = [(cfg, ch, realization_seed(cfg.base_seed, i)) for i, ch in enumerate(channels)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(job) for job in jobs]

    errors = np.stack([e for e, _ in results])
    bits = np.array([b for _, b in results])
    rows = []
    for k, snr in enumerate(cfg.eb_n0_list):
        ranked = [(i, errors[i, k] / bits[i]) for i in range(len(results))]
        kept = select_best(ranked, min(cfg.keep_best, len(results)))
        rows.append(
            BerRow(
                receiver=cfg.receiver,
                profile=params.profile_tag,
                rate_bps=cfg.data_rate,
                J=cfg.J,
                eb_n0_db=float(snr),
                errors=int(errors[kept, k].sum()),
                bits=int(bits[kept].sum()),
                realizations=len(kept),
                seed=cfg.base_seed,
            )
        )
    return BerTable(rows=tuple(rows), per_realization=errors)


def run_mfb(cfg: SimConfig, J: int | None = None, channels: Sequence[ChannelRealization] | None = None) -> list[MfbPoint]:
    """Matched filter bound over the realization set used by :func:`run_sweep`.

    ``J=None`` uses ``cfg.J``; pass a large ``J`` to capture every tap. The
    same best-``keep_best`` trimming as the sweep is applied, ranked by the
    bound itself.
    """
    J = cfg.J if J is None else J
    Ts = cfg.frame.chip_duration / cfg.oversampling
    if channels is None:
        channels = evaluation_set(cfg)
    grid = [discretize(ch, Ts, include_shadowing=cfg.shadowing) for ch in channels]
    keep = min(cfg.keep_best, len(grid))
    points = []
    for snr in cfg.eb_n0_list:
        ranked = [(i, mfb_average([d], J, snr).ber) for i, d in enumerate(grid)]
        kept = sorted(select_best(ranked, keep))
        points.append(mfb_average([grid[i] for i in kept], J, snr))
    return points


def with_overrides(cfg: SimConfig, **overrides) -> SimConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
