"""Matched filter bound and per-symbol complexity (MADPOS) formulas."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.special import erfc

from .channel_model import DiscreteChannel

__all__ = [
    "MfbPoint",
    "ComplexityReport",
    "qfunc",
    "captured_energy",
    "mfb_ber",
    "mfb_average",
    "complexity_srake",
    "complexity_smpic",
    "complexity_krls",
    "complexity_receiver",
    "saving_pct",
    "write_mfb_csv",
    "write_complexity_csv",
]


@dataclass(frozen=True)
class MfbPoint:
    eb_n0_db: float
    ber: float


@dataclass(frozen=True)
class ComplexityReport:
    receiver_tag: str
    madpos: float
    breakdown: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


def qfunc(x):
    """Gaussian tail probability Q(x) = erfc(x / sqrt(2)) / 2."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def captured_energy(ch: DiscreteChannel, J: int) -> float:
    """Energy of the ``J`` strongest grid taps."""
    if J < 1:
        raise ValueError(f"finger count must be >= 1, got {J}")
    p = np.abs(ch.taps) ** 2
    if p.size == 0 or not np.any(ch.taps):
        raise ValueError("channel has no nonzero taps")
    # fsum is exact before rounding, so the result is order-free and monotone in J
    if J >= p.size:
        return math.fsum(p)
    return math.fsum(np.partition(p, p.size - J)[p.size - J :])


def mfb_ber(gamma: float) -> float:
    """BPSK bit error probability Q(sqrt(2 * gamma)) at per-bit SNR ``gamma``."""
    if gamma < 0:
        raise ValueError(f"SNR must be non-negative, got {gamma}")
    return float(0.5 * erfc(math.sqrt(gamma)))


def mfb_average(channels: Sequence[DiscreteChannel], J: int, eb_n0_db: float) -> MfbPoint:
    """Semi-analytic bound averaged over channel realizations."""
    if len(channels) == 0:
        raise ValueError("need at least one channel realization")
    snr = 10.0 ** (eb_n0_db / 10.0)
    bers = [mfb_ber(captured_energy(ch, J) * snr) for ch in channels]
    return MfbPoint(eb_n0_db=float(eb_n0_db), ber=float(math.fsum(bers) / len(bers)))


def _report(tag: str, breakdown: dict, params: dict) -> ComplexityReport:
    return ComplexityReport(receiver_tag=tag, madpos=sum(breakdown.values()), breakdown=breakdown, params=params)


def complexity_srake(J: int) -> ComplexityReport:
    if J < 1:
        raise ValueError(f"finger count must be >= 1, got {J}")
    return _report("srake", {"srake": 2 * J}, {"J": J})


def complexity_smpic(J: int, p: int) -> ComplexityReport:
    """RAKE passes ``2 (p + 1) J`` plus regeneration ``3 p J``."""
    if J < 1:
        raise ValueError(f"finger count must be >= 1, got {J}")
    if p < 0:
        raise ValueError(f"iteration count must be >= 0, got {p}")
    return _report("smpic", {"rake": 2 * (p + 1) * J, "regeneration": 3 * p * J}, {"J": J, "p": p})


def complexity_krls(n_taps: int) -> ComplexityReport:
    if n_taps < 1:
        raise ValueError(f"tap count must be >= 1, got {n_taps}")
    return _report("krls", {"quadratic": 2.5 * n_taps**2, "linear": 4.5 * n_taps}, {"taps": n_taps})


def complexity_receiver(tag: str, J: int, p: int = 2, L: int = 15, FF: int = 25, FB: int = 20) -> ComplexityReport:
    """MADPOS of a full receiver chain, ``"smpic-le"`` or ``"srake-dfe"``."""
    tag = tag.lower()
    if tag == "smpic-le":
        front, eq = complexity_smpic(J, p), complexity_krls(L)
        params = {"J": J, "p": p, "L": L}
    elif tag == "srake-dfe":
        front, eq = complexity_srake(J), complexity_krls(FF + FB)
        params = {"J": J, "FF": FF, "FB": FB}
    elif tag == "srake":
        return complexity_srake(J)
    else:
        raise ValueError(f"unknown receiver {tag!r}")
    breakdown = {f"{front.receiver_tag}.{k}": v for k, v in front.breakdown.items()}
    breakdown.update({f"krls.{k}": v for k, v in eq.breakdown.items()})
    return _report(tag, breakdown, params)


def saving_pct(proposed: ComplexityReport, baseline: ComplexityReport) -> float:
    """Relative MADPOS saving in percent, rounded to one decimal."""
    return round((1.0 - proposed.madpos / baseline.madpos) * 100.0, 1)


def write_mfb_csv(points: Iterable[MfbPoint], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["eb_n0_db", "ber"])
        for pt in points:
            writer.writerow([repr(pt.eb_n0_db), repr(pt.ber)])


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_complexity_csv(rows: Iterable[tuple[ComplexityReport, float | None]], path_or_file) -> None:
    """Rows of ``(report, saving_pct)``; ``saving_pct`` is empty for the baseline."""
    own = isinstance(path_or_file, (str, Path))
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["receiver", "J", "params", "madpos", "saving_pct"])
        for rep, sav in rows:
            params = ";".join(f"{k}={v}" for k, v in rep.params.items() if k != "J")
            writer.writerow([rep.receiver_tag, rep.params.get("J", ""), params, _fmt(rep.madpos), "" if sav is None else f"{sav:.1f}"])
    finally:
        if own:
            fh.close()
