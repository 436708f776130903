"""Selective RAKE front end with an exact interference decomposition.

Fingers sit on the receiver sample grid. The correlation window for finger
``j`` and symbol ``m`` is one symbol long and starts at the finger delay
plus ``m * Tb`` (plus the pulse lead for pulses longer than one chip).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel_model import DiscreteChannel
from .signal_core import (
    ChipPulse,
    FrameConfig,
    SampledWaveform,
    pulse_autocorrelation,
    pulse_energy,
    synthesize_symbol_pulse,
)

__all__ = [
    "FingerSet",
    "CorrelationBreakdown",
    "select_fingers",
    "symbol_window",
    "finger_template",
    "correlate_finger",
    "finger_outputs",
    "srake_detect",
    "interference_decomposition",
    "apply_channel",
]


@dataclass(frozen=True)
class FingerSet:
    """Selected paths ordered by descending |gain|; ``delays`` are grid indices."""

    delays: np.ndarray
    gains: np.ndarray

    @property
    def J(self) -> int:
        return self.delays.size

    def __len__(self) -> int:
        return self.delays.size

    def __iter__(self):
        return iter(zip(self.delays.tolist(), self.gains.tolist()))

    def __getitem__(self, j: int) -> tuple[int, complex]:
        return int(self.delays[j]), complex(self.gains[j])


@dataclass(frozen=True)
class CorrelationBreakdown:
    """Noiseless finger correlation split into signal, IPI, ICI and ISI terms.

    The finger output is ``b * (S + I1 + I2) + I3 + Z`` where ``b`` is the
    bit being detected.
    """

    S: float
    I1: complex
    I2: complex
    I3: complex
    Z: complex = 0.0

    def total(self, bit: float) -> complex:
        return bit * (self.S + self.I1 + self.I2) + self.I3 + self.Z


def select_fingers(ch: DiscreteChannel, J: int) -> FingerSet:
    """The ``J`` strongest nonzero grid taps; equal magnitudes resolve to the earliest delay."""
    if J < 1:
        raise ValueError(f"finger count must be >= 1, got {J}")
    idx = np.flatnonzero(ch.taps)
    if idx.size == 0:
        raise ValueError("channel has no nonzero taps")
    order = np.lexsort((idx, -np.abs(ch.taps[idx])))[:J]
    sel = idx[order]
    return FingerSet(delays=sel, gains=ch.taps[sel].copy())


def _chip_os(cfg: FrameConfig, pulse: ChipPulse) -> int:
    return int(round(cfg.chip_duration / pulse.sample_period))


def symbol_window(delay: int, symbol_index: int, cfg: FrameConfig, pulse: ChipPulse) -> tuple[int, int]:
    span = cfg.N * _chip_os(cfg, pulse)
    start = delay + symbol_index * span + pulse.lead
    return start, start + span


def finger_template(cfg: FrameConfig, pulse: ChipPulse, finger: tuple[int, complex], symbol_index: int) -> SampledWaveform:
    """Local template conj(gain) * g(t - delay - m Tb) of one finger."""
    delay, gain = finger
    g = synthesize_symbol_pulse(cfg, pulse).samples
    offset = int(delay) + symbol_index * cfg.N * _chip_os(cfg, pulse)
    out = np.zeros(offset + g.size, dtype=complex)
    out[offset:] = np.conj(gain) * g
    return SampledWaveform(out, pulse.sample_period)


def correlate_finger(r: SampledWaveform, template: SampledWaveform, window: tuple[int, int]) -> complex:
    """Riemann-sum inner product of ``r`` and ``template`` over ``[start, end)``."""
    if r.sample_period != template.sample_period:
        raise ValueError("waveforms are on different sample grids")
    start, end = window
    if start < 0 or end < start or end > len(r) or end > len(template):
        raise ValueError(f"window {window} outside the waveforms ({len(r)}, {len(template)} samples)")
    return complex(np.dot(r.samples[start:end], template.samples[start:end]) * r.sample_period)


def _window_pulse(cfg: FrameConfig, pulse: ChipPulse) -> np.ndarray:
    g = synthesize_symbol_pulse(cfg, pulse).samples
    span = cfg.N * _chip_os(cfg, pulse)
    return g[pulse.lead : pulse.lead + span].real


def _correlate_symbols(samples: np.ndarray, delay: int, gain: complex, M: int, g_win: np.ndarray, Ts: float, lead: int) -> np.ndarray:
    span = g_win.size
    start = delay + lead
    stop = start + M * span
    if stop > samples.size:
        raise ValueError(f"received waveform too short: need {stop} samples, have {samples.size}")
    seg = samples[start:stop].reshape(M, span)
    return np.conj(gain) * Ts * (seg @ g_win)


def finger_outputs(r: SampledWaveform, fingers: FingerSet, cfg: FrameConfig, pulse: ChipPulse) -> np.ndarray:
    """Per-finger correlations, shape ``(J, M)``."""
    g_win = _window_pulse(cfg, pulse)
    out = np.empty((fingers.J, cfg.M), dtype=complex)
    for j, (d, a) in enumerate(fingers):
        out[j] = _correlate_symbols(r.samples, d, a, cfg.M, g_win, r.sample_period, pulse.lead)
    return out


def srake_detect(r: SampledWaveform, fingers: FingerSet, cfg: FrameConfig, pulse: ChipPulse) -> np.ndarray:
    """MRC selective-RAKE soft symbols; the conjugate gains in the templates do the weighting."""
    return finger_outputs(r, fingers, cfg, pulse).sum(axis=0)


def apply_channel(s: SampledWaveform, ch: DiscreteChannel) -> SampledWaveform:
    """Noiseless received waveform: discrete convolution with the grid channel."""
    if s.sample_period != ch.sample_period:
        raise ValueError("waveform and channel are on different sample grids")
    return SampledWaveform(np.convolve(s.samples, ch.taps), s.sample_period)


def interference_decomposition(
    ch: DiscreteChannel,
    fingers: FingerSet,
    cfg: FrameConfig,
    pulse: ChipPulse,
    bits: Sequence[float],
    finger_index: int,
    symbol_index: int,
) -> CorrelationBreakdown:
    """Evaluate the signal, IPI, ICI and ISI sums for one finger and symbol.

    Each term is a direct sum over paths, chips and symbols of the pulse
    autocorrelation. It matches the waveform-domain correlation exactly
    when the template lies inside the correlation window (rectangular
    chips).
    """
    Ts = pulse.sample_period
    Eg = pulse_energy(pulse)
    c = cfg.code.chips
    N = cfg.N
    os_ = _chip_os(cfg, pulse)
    b = np.asarray(bits)
    dj, aj = fingers[finger_index]
    m0 = symbol_index

    paths = [(int(k), complex(ch.taps[k])) for k in np.flatnonzero(ch.taps)]
    S = N * Eg * abs(aj) ** 2
    I1 = I2 = I3 = 0j
    for d, a in paths:
        w = a * np.conj(aj)
        if d != dj:
            I1 += N * Eg * w * pulse_autocorrelation(pulse, (d - dj) * Ts)
        for n in range(N):
            for nt in range(N):
                if n != nt:
                    I2 += Eg * w * c[n] * c[nt] * pulse_autocorrelation(pulse, (d - dj + (n - nt) * os_) * Ts)
        for m in range(cfg.M):
            if m == m0:
                continue
            for n in range(N):
                for nt in range(N):
                    lag = d - dj + (n - nt) * os_ + (m - m0) * N * os_
                    I3 += Eg * w * b[m] * c[n] * c[nt] * pulse_autocorrelation(pulse, lag * Ts)
    return CorrelationBreakdown(S=float(S), I1=complex(I1), I2=complex(I2), I3=complex(I3))
