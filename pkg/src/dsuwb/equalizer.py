"""Symbol-spaced adaptive equalizers trained by exponentially weighted RLS.

The filter output is ``w^H u``. Both equalizers run a training stage on
known symbols followed by a decision-directed stage.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

__all__ = ["EqualizerConfig", "RlsState", "rls_init", "rls_update", "le_equalize", "dfe_equalize"]


@dataclass(frozen=True)
class EqualizerConfig:
    le_taps: int = 15
    ff_taps: int = 25
    fb_taps: int = 20
    forgetting_factor: float = 0.99999
    training_length: int = 200
    init_diag: float = 0.01

    def __post_init__(self):
        if self.le_taps < 1 or self.ff_taps < 1 or self.fb_taps < 0:
            raise ValueError("equalizer tap counts must be positive (feedback may be zero)")
        if not 0.0 < self.forgetting_factor <= 1.0:
            raise ValueError(f"forgetting factor must lie in (0, 1], got {self.forgetting_factor}")
        if self.training_length < 0:
            raise ValueError("training length must be non-negative")
        if not self.init_diag > 0:
            raise ValueError("init_diag must be positive")


@dataclass(frozen=True)
class RlsState:
    weights: np.ndarray
    inverse_correlation: np.ndarray
    sample_count: int = 0


def rls_init(n_taps: int, delta: float, reference: int | None = None) -> RlsState:
    """Zero weights (optionally a unit tap at ``reference``) and inverse correlation ``I / delta``."""
    if n_taps < 1:
        raise ValueError(f"n_taps must be >= 1, got {n_taps}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    w = np.zeros(n_taps, dtype=complex)
    if reference is not None:
        w[reference] = 1.0
    return RlsState(weights=w, inverse_correlation=np.eye(n_taps, dtype=complex) / delta)


def _rls_step(w, P, u, d, lam):
    Pu = P @ u
    k = Pu / (lam + np.vdot(u, Pu).real)
    e = d - np.vdot(w, u)
    w = w + k * np.conj(e)
    P = (P - np.outer(k, Pu.conj())) / lam
    P = 0.5 * (P + P.conj().T)
    return w, P, e


def rls_update(state: RlsState, input_vector: Sequence[complex], desired: complex, forgetting_factor: float = 1.0):
    """One RLS recursion; returns the new state and the a-priori error."""
    u = np.asarray(input_vector, dtype=complex)
    if u.shape != state.weights.shape:
        raise ValueError(f"input vector has shape {u.shape}, expected {state.weights.shape}")
    w, P, e = _rls_step(state.weights, state.inverse_correlation, u, desired, forgetting_factor)
    return replace(state, weights=w, inverse_correlation=P, sample_count=state.sample_count + 1), complex(e)


def _check_inputs(soft, training):
    x = np.asarray(soft, dtype=complex)
    t = np.asarray(training, dtype=float)
    if t.size > x.size:
        raise ValueError(f"training sequence ({t.size}) longer than input ({x.size})")
    return x, t


def _adaptive_equalize(x, training, n_ff, reference, n_fb, cfg: EqualizerConfig):
    lam = cfg.forgetting_factor
    n = x.size
    T = training.size
    state = rls_init(n_ff + n_fb, cfg.init_diag, reference=reference)
    w, P = state.weights, state.inverse_correlation
    # Tap t of the feedforward section sees x[i + reference - t].
    xp = np.concatenate([np.zeros(n_ff), x, np.zeros(n_ff)])
    past = np.zeros(n_fb, dtype=complex)
    decisions = np.empty(n)
    u = np.empty(n_ff + n_fb, dtype=complex)
    for i in range(n):
        hi = i + n_ff + reference
        u[:n_ff] = xp[hi - n_ff + 1 : hi + 1][::-1]
        u[n_ff:] = past
        y = np.vdot(w, u)
        dec = 1.0 if y.real >= 0 else -1.0
        desired = training[i] if i < T else dec
        w, P, _ = _rls_step(w, P, u, desired, lam)
        decisions[i] = dec
        if n_fb:
            past[1:] = past[:-1]
            past[0] = desired
    return decisions[T:]


def le_equalize(soft, training, cfg: EqualizerConfig = EqualizerConfig(), reference: int | None = None) -> np.ndarray:
    """Linear transversal equalizer over ``cfg.le_taps`` soft symbols.

    The reference tap defaults to the center ``le_taps // 2``; taps before
    it see later symbols, taps after it earlier ones. Returns hard
    decisions for the symbols following the training prefix.
    """
    x, t = _check_inputs(soft, training)
    ref = cfg.le_taps // 2 if reference is None else reference
    return _adaptive_equalize(x, t, cfg.le_taps, ref, 0, cfg)


def dfe_equalize(soft, training, cfg: EqualizerConfig = EqualizerConfig()) -> np.ndarray:
    """Decision-feedback equalizer: ``ff_taps`` feedforward taps, ``fb_taps`` over past decisions.

    The feedforward reference is the last tap, so the feedforward section
    spans the current and ``ff_taps - 1`` later soft symbols. Feedback
    uses training symbols during training and own decisions afterwards.
    """
    x, t = _check_inputs(soft, training)
    return _adaptive_equalize(x, t, cfg.ff_taps, cfg.ff_taps - 1, cfg.fb_taps, cfg)
