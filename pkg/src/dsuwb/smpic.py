"""Selective multipath interference cancellation (SMPIC).

Each iteration takes hard decisions on the current RAKE output, rebuilds the
contribution of every selected path from those decisions, and re-correlates
each finger on the received signal minus ``w`` times the other selected
paths' replicas. Unselected paths are never cancelled.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel_model import DiscreteChannel
from .rake_frontend import FingerSet, _correlate_symbols, _window_pulse, finger_outputs, select_fingers
from .signal_core import ChipPulse, FrameConfig, SampledWaveform, synthesize_frame

__all__ = ["SmpicConfig", "hard_decision", "regenerate_path", "cancelled_input", "smpic_detect"]


@dataclass(frozen=True)
class SmpicConfig:
    J: int = 32
    p: int = 2
    w: float = 0.9

    def __post_init__(self):
        if self.J < 1:
            raise ValueError(f"finger count must be >= 1, got {self.J}")
        if self.p < 0:
            raise ValueError(f"iteration count must be >= 0, got {self.p}")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError(f"interference rejection weight must lie in [0, 1], got {self.w}")


def hard_decision(soft: Sequence[complex]) -> np.ndarray:
    """Sign of the real part, with 0 mapped to +1."""
    return np.where(np.real(np.asarray(soft)) >= 0, 1.0, -1.0)


def regenerate_path(
    bits_est: Sequence[float],
    finger: tuple[int, complex],
    cfg: FrameConfig,
    pulse: ChipPulse,
    length: int | None = None,
) -> SampledWaveform:
    """Noiseless replica of one path: the re-spread decisions scaled by the path gain and delayed.

    ``length`` pads or truncates the replica to match a received waveform.
    """
    delay, gain = finger
    frame = synthesize_frame(cfg, pulse, bits_est).samples
    n = int(delay) + frame.size if length is None else int(length)
    out = np.zeros(n, dtype=complex)
    stop = min(n, int(delay) + frame.size)
    if stop > delay:
        out[delay:stop] = gain * frame[: stop - delay]
    return SampledWaveform(out, pulse.sample_period)


def cancelled_input(
    r: SampledWaveform, replicas: Sequence[SampledWaveform], exclude_index: int, w: float
) -> SampledWaveform:
    """Finger input ``r - w * sum(replicas[j'] for j' != exclude_index)``.

    Replicas shorter than ``r`` are zero-extended.
    """
    out = r.samples.copy()
    for jp, rep in enumerate(replicas):
        if rep.sample_period != r.sample_period:
            raise ValueError("replica is on a different sample grid")
        if len(rep) > len(r):
            raise ValueError(f"replica longer than received waveform ({len(rep)} > {len(r)})")
        if jp != exclude_index:
            out[: len(rep)] -= w * rep.samples
    return SampledWaveform(out, r.sample_period)


def smpic_detect(
    r: SampledWaveform,
    ch: DiscreteChannel,
    cfg: SmpicConfig,
    frame_cfg: FrameConfig,
    pulse: ChipPulse,
    *,
    fingers: FingerSet | None = None,
    history: bool = False,
):
    """Soft symbols after ``cfg.p`` cancellation iterations.

    Iteration 0 is the plain selective-RAKE output. With ``history=True``
    the soft outputs of every iteration are returned as a list.
    """
    if fingers is None:
        fingers = select_fingers(ch, cfg.J)
    soft = finger_outputs(r, fingers, frame_cfg, pulse).sum(axis=0)
    outputs = [soft]

    g_win = _window_pulse(frame_cfg, pulse)
    Ts = r.sample_period
    n = len(r)
    for _ in range(cfg.p):
        decisions = hard_decision(soft)
        frame = synthesize_frame(frame_cfg, pulse, decisions).samples
        replicas = np.zeros((fingers.J, n), dtype=complex)
        for j, (d, a) in enumerate(fingers):
            stop = min(n, d + frame.size)
            replicas[j, d:stop] = a * frame[: stop - d]
        total = replicas.sum(axis=0)
        base = r.samples - cfg.w * total
        per_finger = np.empty((fingers.J, frame_cfg.M), dtype=complex)
        for j, (d, a) in enumerate(fingers):
            own_input = base + cfg.w * replicas[j]
            per_finger[j] = _correlate_symbols(own_input, d, a, frame_cfg.M, g_win, Ts, pulse.lead)
        soft = per_finger.sum(axis=0)
        outputs.append(soft)

    return outputs if history else soft
