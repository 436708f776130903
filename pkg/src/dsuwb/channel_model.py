"""IEEE 802.15.3a (modified Saleh-Valenzuela) channel realizations.

Cluster and ray arrivals are Poisson; each ray's mean power decays
exponentially with both cluster and ray excess delay, and its amplitude is
log-normal with a random +/-1 polarity. Realizations are normalized to unit
multipath energy with the log-normal shadowing term kept separately.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np
import yaml

__all__ = [
    "ChannelParams",
    "ChannelRealization",
    "DiscreteChannel",
    "load_channel_params",
    "generate_realization",
    "discretize",
    "generate_evaluation_set",
    "select_best",
    "rms_delay_spread",
]

# Stream tag keeping channel draws independent of data/noise draws.
_CHANNEL_STREAM = 0x5356


@dataclass(frozen=True)
class ChannelParams:
    """Profile parameters; rates in 1/ns, decay constants and delays in ns, sigmas in dB."""

    cluster_arrival_rate: float
    ray_arrival_rate: float
    cluster_decay: float
    ray_decay: float
    cluster_fading_sigma: float
    ray_fading_sigma: float
    shadowing_sigma: float
    max_excess_delay: float
    profile_tag: str = "custom"
    line_of_sight: bool | None = None

    def __post_init__(self):
        for name in ("cluster_arrival_rate", "ray_arrival_rate", "cluster_decay", "ray_decay", "max_excess_delay"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("cluster_fading_sigma", "ray_fading_sigma", "shadowing_sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def load_channel_params(source: str | Path) -> ChannelParams:
    """Load a profile by tag (``"CM1"``, ``"cm4"``) or from a YAML file path."""
    text = None
    if isinstance(source, str) and source.lower() in ("cm1", "cm4"):
        text = resources.files("dsuwb.profiles").joinpath(f"{source.lower()}.yaml").read_text()
    else:
        path = Path(source)
        if not path.is_file():
            raise FileNotFoundError(f"channel profile {source!s} not found")
        text = path.read_text()
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError(f"channel profile {source!s} is not a mapping")
    try:
        return ChannelParams(**data)
    except TypeError as exc:
        raise ValueError(f"bad channel profile {source!s}: {exc}") from None


@dataclass(frozen=True)
class ChannelRealization:
    """Continuous-delay tap list, delays in ns sorted ascending.

    ``cluster_index`` and ``relative_delays`` map every tap back to its
    cluster; ``cluster_delays`` holds the cluster arrival times.
    """

    delays: np.ndarray
    gains: np.ndarray
    shadowing: float = 1.0
    seed: int | None = None
    cluster_delays: np.ndarray = field(default_factory=lambda: np.zeros(1))
    cluster_index: np.ndarray | None = None
    relative_delays: np.ndarray | None = None

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.gains) ** 2))

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["delay_ns", "gain_real", "gain_imag"])
            for d, g in zip(self.delays, np.asarray(self.gains, dtype=complex)):
                writer.writerow([repr(float(d)), repr(float(g.real)), repr(float(g.imag))])


@dataclass(frozen=True)
class DiscreteChannel:
    """Channel on the receiver sample grid: ``taps[k]`` sits at delay ``k * sample_period``."""

    taps: np.ndarray
    sample_period: float

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def total_length(self) -> int:
        return self.taps.size

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))

    def as_realization(self) -> ChannelRealization:
        idx = np.flatnonzero(self.taps)
        return ChannelRealization(delays=idx * self.sample_period * 1e9, gains=self.taps[idx].copy())


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([_CHANNEL_STREAM, int(seed) % 2**63])


def _poisson_arrivals(rng: np.random.Generator, rate: float, window: float) -> np.ndarray:
    """Arrival times in ``[0, window]`` of a Poisson process whose first arrival is at 0."""
    chunk = int(rate * window + 4.0 * math.sqrt(rate * window) + 8)
    times = np.zeros(1)
    while times[-1] <= window:
        times = np.concatenate([times, times[-1] + np.cumsum(rng.exponential(1.0 / rate, size=chunk))])
    return times[times <= window]


def generate_realization(params: ChannelParams, seed: int) -> ChannelRealization:
    """Draw one channel impulse response for ``params``, deterministic in ``seed``."""
    rng = _rng(seed)
    t_max = params.max_excess_delay
    sigma_sq = params.cluster_fading_sigma**2 + params.ray_fading_sigma**2
    # Mean offset making E[beta^2] follow the double-exponential power profile.
    mu_offset = sigma_sq * math.log(10.0) / 20.0

    cluster_delays = _poisson_arrivals(rng, params.cluster_arrival_rate, t_max)
    delays, rel, cidx, amp_db = [], [], [], []
    for l, T in enumerate(cluster_delays):
        xi = rng.normal(0.0, params.cluster_fading_sigma)
        tau = _poisson_arrivals(rng, params.ray_arrival_rate, t_max - T)
        zeta = rng.normal(0.0, params.ray_fading_sigma, size=tau.size)
        mu = (-10.0 * T / params.cluster_decay - 10.0 * tau / params.ray_decay) / math.log(10.0) - mu_offset
        delays.append(T + tau)
        rel.append(tau)
        cidx.append(np.full(tau.size, l))
        amp_db.append(mu + xi + zeta)
    delays, rel, cidx, amp_db = (np.concatenate(v) for v in (delays, rel, cidx, amp_db))

    n = len(delays)
    polarity = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    gains = polarity * 10.0 ** (amp_db / 20.0)
    gains = gains / np.sqrt(np.sum(gains**2))
    shadowing = 10.0 ** (rng.normal(0.0, params.shadowing_sigma) / 20.0)

    order = np.argsort(delays, kind="stable")
    return ChannelRealization(
        delays=delays[order],
        gains=gains[order].astype(complex),
        shadowing=float(shadowing),
        seed=int(seed),
        cluster_delays=cluster_delays,
        cluster_index=cidx[order],
        relative_delays=rel[order],
    )


def discretize(ch: ChannelRealization, Ts: float, *, include_shadowing: bool = False) -> DiscreteChannel:
    """Round each tap to the nearest multiple of ``Ts`` (seconds), summing collisions coherently.

    Energy is preserved only when no two taps share a bin; colliding taps
    add as complex amplitudes.
    """
    if not Ts > 0:
        raise ValueError(f"sample period must be positive, got {Ts}")
    delays = np.asarray(ch.delays, dtype=float)
    gains = np.asarray(ch.gains, dtype=complex)
    if include_shadowing:
        gains = gains * ch.shadowing
    if delays.size == 0:
        return DiscreteChannel(np.zeros(0, dtype=complex), Ts)
    bins = np.floor(delays / (Ts * 1e9) + 0.5).astype(int)
    if bins.min() < 0:
        raise ValueError("negative tap delay")
    taps = np.zeros(bins.max() + 1, dtype=complex)
    np.add.at(taps, bins, gains)
    return DiscreteChannel(taps, Ts)


def generate_evaluation_set(params: ChannelParams, count: int, base_seed: int) -> list[ChannelRealization]:
    """``count`` realizations seeded ``base_seed + index``."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    return [generate_realization(params, base_seed + i) for i in range(count)]


def select_best(results: Iterable[tuple[int, float]], keep: int) -> list[int]:
    """Ids of the ``keep`` realizations with the smallest metric; ties go to the lower id."""
    results = list(results)
    if keep > len(results) or keep < 0:
        raise ValueError(f"cannot keep {keep} of {len(results)} realizations")
    ranked = sorted(results, key=lambda item: (item[1], item[0]))
    return [rid for rid, _ in ranked[:keep]]


def rms_delay_spread(ch: ChannelRealization | DiscreteChannel) -> float:
    """Power-weighted RMS delay spread in ns."""
    if isinstance(ch, DiscreteChannel):
        ch = ch.as_realization()
    p = np.abs(ch.gains) ** 2
    p = p / p.sum()
    d = np.asarray(ch.delays)
    mean = np.sum(p * d)
    return float(np.sqrt(np.sum(p * (d - mean) ** 2)))
