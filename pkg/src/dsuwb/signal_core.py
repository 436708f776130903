"""Transmitter side of the DS-UWB link: chip pulses, spreading and frames.

All waveforms live on a uniform grid with period ``Ts = Tc / oversampling``
and start at ``t = 0``. Continuous-time integrals are Riemann sums on that
grid, so inner products of shifted pulses are exact in discrete form.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "ChipPulse",
    "SpreadingCode",
    "FrameConfig",
    "SampledWaveform",
    "make_chip_pulse",
    "pulse_energy",
    "pulse_autocorrelation",
    "synthesize_symbol_pulse",
    "synthesize_frame",
    "DEFAULT_OVERSAMPLING",
]

DEFAULT_OVERSAMPLING = 4
RRC_ROLLOFF = 0.3
RRC_SPAN_CHIPS = 4

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class SampledWaveform:
    """Complex baseband samples on a uniform grid starting at t = 0."""

    samples: np.ndarray
    sample_period: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class ChipPulse:
    """Unit-energy chip pulse g_T(t) sampled at ``sample_period``."""

    samples: np.ndarray
    sample_period: float
    chip_duration: float
    shape_tag: str = "rectangular"

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def oversampling(self) -> int:
        return int(round(self.chip_duration / self.sample_period))

    @property
    def lead(self) -> int:
        """Samples between the start of the pulse array and the nominal chip interval."""
        return (self.samples.size - self.oversampling) // 2


@dataclass(frozen=True)
class SpreadingCode:
    chips: tuple[int, ...] = (-1, 1)

    def __post_init__(self):
        chips = tuple(int(c) for c in self.chips)
        if not chips:
            raise ValueError("spreading code must have at least one chip")
        if any(c not in (-1, 1) for c in chips):
            raise ValueError(f"spreading chips must be -1 or +1, got {self.chips}")
        object.__setattr__(self, "chips", chips)

    @property
    def N(self) -> int:
        return len(self.chips)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.chips, dtype=float)


@dataclass(frozen=True)
class FrameConfig:
    """Frame geometry: M symbols of N chips each, chip duration Tc in seconds."""

    M: int
    code: SpreadingCode
    chip_duration: float

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"symbols_per_frame must be >= 1, got {self.M}")
        if not self.chip_duration > 0:
            raise ValueError(f"chip duration must be positive, got {self.chip_duration}")

    @classmethod
    def from_data_rate(cls, data_rate: float, code: SpreadingCode | None = None, M: int = 1024):
        """Tc = 1 / (rate * N); e.g. 250 Mbps with N = 2 gives Tc = 2 ns."""
        code = code or SpreadingCode()
        if not data_rate > 0:
            raise ValueError(f"data rate must be positive, got {data_rate}")
        return cls(M=M, code=code, chip_duration=1.0 / (data_rate * code.N))

    @property
    def N(self) -> int:
        return self.code.N

    @property
    def symbol_duration(self) -> float:
        return self.code.N * self.chip_duration

    def with_symbols(self, M: int) -> "FrameConfig":
        return FrameConfig(M=M, code=self.code, chip_duration=self.chip_duration)


def _rrc_taps(t: np.ndarray, Tc: float, beta: float) -> np.ndarray:
    x = t / Tc
    h = np.empty_like(x)
    zero = np.isclose(x, 0.0)
    sing = np.isclose(np.abs(x), 1.0 / (4.0 * beta))
    reg = ~(zero | sing)
    h[zero] = 1.0 - beta + 4.0 * beta / np.pi
    h[sing] = (beta / np.sqrt(2.0)) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
    )
    xr = x[reg]
    num = np.sin(np.pi * xr * (1 - beta)) + 4 * beta * xr * np.cos(np.pi * xr * (1 + beta))
    den = np.pi * xr * (1 - (4 * beta * xr) ** 2)
    h[reg] = num / den
    return h


def make_chip_pulse(shape: str = "rectangular", Tc: float = 2e-9, oversampling: int = DEFAULT_OVERSAMPLING) -> ChipPulse:
    """Build a unit-energy chip pulse.

    Parameters
    ----------
    shape : {"rectangular", "root-raised-cosine"}
        Rectangular pulses span exactly one chip. Root-raised-cosine pulses
        use rolloff 0.3 and are truncated to +/- 4 chip durations.
    Tc : float
        Chip duration in seconds.
    oversampling : int
        Samples per chip; the grid period is ``Tc / oversampling``.
    """
    if not Tc > 0:
        raise ValueError(f"chip duration must be positive, got {Tc}")
    if int(oversampling) != oversampling or oversampling < 1:
        raise ValueError(f"oversampling must be a positive integer, got {oversampling}")
    oversampling = int(oversampling)
    Ts = Tc / oversampling

    if shape == "rectangular":
        samples = np.ones(oversampling)
    elif shape in ("root-raised-cosine", "rrc"):
        shape = "root-raised-cosine"
        k = np.arange(-RRC_SPAN_CHIPS * oversampling, RRC_SPAN_CHIPS * oversampling + 1)
        samples = _rrc_taps(k * Ts, Tc, RRC_ROLLOFF)
    else:
        raise ValueError(f"unknown pulse shape {shape!r}")

    samples = samples / np.sqrt(np.sum(samples**2) * Ts)
    return ChipPulse(samples=samples, sample_period=Ts, chip_duration=Tc, shape_tag=shape)


def pulse_energy(p: ChipPulse | SampledWaveform) -> float:
    """Riemann-sum energy: sum of |samples|^2 times the sample period."""
    return float(np.sum(np.abs(p.samples) ** 2) * p.sample_period)


def _grid_lag(dt: float, Ts: float) -> int:
    k = dt / Ts
    lag = int(round(k))
    if abs(k - lag) > _GRID_TOL * max(1.0, abs(k)):
        raise ValueError(f"lag {dt!r} s is not a multiple of the sample period {Ts!r} s")
    return lag


def _autocorr_lag(p: ChipPulse, lag: int) -> float:
    s = p.samples
    lag = abs(lag)
    if lag >= s.size:
        return 0.0
    return float(np.dot(s[: s.size - lag], s[lag:]) / np.dot(s, s))


def pulse_autocorrelation(p: ChipPulse, dt: float) -> float:
    """Normalized autocorrelation R_g(dt) of the chip pulse; ``dt`` must be on grid."""
    return _autocorr_lag(p, _grid_lag(dt, p.sample_period))


def _check_grid(cfg: FrameConfig, pulse: ChipPulse) -> int:
    ratio = cfg.chip_duration / pulse.sample_period
    os_ = int(round(ratio))
    if os_ < 1 or abs(ratio - os_) > _GRID_TOL * ratio:
        raise ValueError("pulse sample period does not divide the chip duration")
    if abs(pulse.chip_duration - cfg.chip_duration) > _GRID_TOL * cfg.chip_duration:
        raise ValueError(
            f"pulse chip duration {pulse.chip_duration} differs from frame chip duration {cfg.chip_duration}"
        )
    return os_


def synthesize_symbol_pulse(cfg: FrameConfig, pulse: ChipPulse) -> SampledWaveform:
    """Spread symbol waveform g(t) = sum_n c[n] g_T(t - n Tc)."""
    os_ = _check_grid(cfg, pulse)
    impulses = np.zeros((cfg.N - 1) * os_ + 1)
    impulses[::os_] = cfg.code.as_array()
    return SampledWaveform(np.convolve(impulses, pulse.samples), pulse.sample_period)


def _modulate(cfg: FrameConfig, pulse: ChipPulse, amplitudes: np.ndarray) -> np.ndarray:
    os_ = _check_grid(cfg, pulse)
    chips = np.outer(amplitudes, cfg.code.as_array()).ravel()
    impulses = np.zeros((chips.size - 1) * os_ + 1, dtype=chips.dtype)
    impulses[::os_] = chips
    return np.convolve(impulses, pulse.samples)


def synthesize_frame(
    cfg: FrameConfig, pulse: ChipPulse, bits: Sequence[float], *, strict: bool = True
) -> SampledWaveform:
    """Frame waveform s(t) = sum_m b[m] g(t - m Tb).

    With ``strict=False`` any real or complex amplitudes are accepted; the
    map is linear in ``bits`` either way.
    """
    b = np.asarray(bits)
    if b.ndim != 1 or b.size != cfg.M:
        raise ValueError(f"expected {cfg.M} bits, got shape {b.shape}")
    if strict and not np.all((b == 1) | (b == -1)):
        raise ValueError("bits must be -1 or +1")
    dtype = complex if np.iscomplexobj(b) else float
    return SampledWaveform(_modulate(cfg, pulse, b.astype(dtype)), pulse.sample_period)
