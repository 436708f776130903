import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsuwb.channel_model import DiscreteChannel, discretize, generate_realization, load_channel_params
from dsuwb.rake_frontend import apply_channel, select_fingers, srake_detect
from dsuwb.signal_core import FrameConfig, SampledWaveform, SpreadingCode, make_chip_pulse, synthesize_frame
from dsuwb.smpic import SmpicConfig, cancelled_input, hard_decision, regenerate_path, smpic_detect

TC = 2e-9
TS = TC / 4


@pytest.fixture
def rect():
    return make_chip_pulse("rectangular", TC, 4)


def _setup(taps, bits, pulse, noise=0.0, seed=0):
    ch = DiscreteChannel(np.asarray(taps, dtype=complex), pulse.sample_period)
    cfg = FrameConfig(M=len(bits), code=SpreadingCode((-1, 1)), chip_duration=TC)
    r = apply_channel(synthesize_frame(cfg, pulse, bits), ch)
    if noise:
        rng = np.random.default_rng(seed)
        r = SampledWaveform(r.samples + noise * (rng.normal(size=len(r)) + 1j * rng.normal(size=len(r))), TS)
    return ch, cfg, r


def _bits(M, seed=0):
    return np.random.default_rng(seed).choice([-1.0, 1.0], size=M)


def test_hard_decision():
    np.testing.assert_array_equal(hard_decision([0.3, -2.0, 0.0, -0.0, 1j, -1e-30 + 5j]), [1, -1, 1, 1, 1, -1])


def test_regenerate_path(rect):
    cfg = FrameConfig(M=2, code=SpreadingCode((-1, 1)), chip_duration=TC)
    frame = synthesize_frame(cfg, rect, [1, -1]).samples
    rep = regenerate_path([1, -1], (3, 0.5j), cfg, rect)
    assert len(rep) == 3 + frame.size
    np.testing.assert_array_equal(rep.samples[:3], 0)
    np.testing.assert_allclose(rep.samples[3:], 0.5j * frame)
    short = regenerate_path([1, -1], (3, 0.5j), cfg, rect, length=10)
    np.testing.assert_array_equal(short.samples, rep.samples[:10])


def test_cancelled_input_examples():
    r = SampledWaveform(np.array([1.0, 2.0, 3.0, 4.0]), TS)
    reps = [SampledWaveform(np.array([1.0, 1.0]), TS), SampledWaveform(np.array([0.0, 1.0, 1.0]), TS)]
    np.testing.assert_allclose(cancelled_input(r, reps, 0, 0.5).samples, [1.0, 1.5, 2.5, 4.0])
    np.testing.assert_allclose(cancelled_input(r, reps, 1, 1.0).samples, [0.0, 1.0, 3.0, 4.0])
    np.testing.assert_array_equal(cancelled_input(r, reps, 0, 0.0).samples, r.samples)


def test_cancelled_input_errors():
    r = SampledWaveform(np.zeros(4), TS)
    with pytest.raises(ValueError):
        cancelled_input(r, [SampledWaveform(np.zeros(2), TS / 2)], 1, 0.5)
    with pytest.raises(ValueError):
        cancelled_input(r, [SampledWaveform(np.zeros(5), TS)], 1, 0.5)


@pytest.mark.parametrize("kw", [dict(J=0), dict(p=-1), dict(w=1.5), dict(w=-0.1)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SmpicConfig(**kw)


@pytest.mark.parametrize("cfg", [SmpicConfig(J=16, p=0, w=0.9), SmpicConfig(J=16, p=3, w=0.0)])
def test_degenerate_settings_equal_srake(rect, cfg):
    ch = discretize(generate_realization(load_channel_params("CM1"), 2), TS)
    bits = _bits(64)
    _, fcfg, r = _setup(ch.taps, bits, rect, noise=3e3)
    ref = srake_detect(r, select_fingers(ch, cfg.J), fcfg, rect)
    np.testing.assert_array_equal(smpic_detect(r, ch, cfg, fcfg, rect), ref)


def test_history_structure(rect):
    ch, fcfg, r = _setup([1.0, 0.5], _bits(8), rect)
    hist = smpic_detect(r, ch, SmpicConfig(J=2, p=3), fcfg, rect, history=True)
    assert len(hist) == 4
    np.testing.assert_array_equal(hist[0], srake_detect(r, select_fingers(ch, 2), fcfg, rect))


@pytest.mark.parametrize("w", [0.0, 0.3, 0.9, 1.0])
def test_interference_scales_by_one_minus_w(rect, w):
    bits = _bits(32, seed=3)
    ch, fcfg, r = _setup([1.0, 0.5], bits, rect)
    s0, s1 = smpic_detect(r, ch, SmpicConfig(J=2, p=1, w=w), fcfg, rect, history=True)
    own = 2.0 * 1.25 * bits
    assert np.all(hard_decision(s0) == bits)
    np.testing.assert_allclose(s1 - own, (1 - w) * (s0 - own), atol=1e-9)


def test_perfect_cancellation_leaves_own_path(rect):
    ch = discretize(generate_realization(load_channel_params("CM1"), 8), TS)
    bits = _bits(128, seed=5)
    _, fcfg, r = _setup(ch.taps, bits, rect)
    f = select_fingers(ch, 10**6)
    soft = smpic_detect(r, ch, SmpicConfig(J=f.J, p=1, w=1.0), fcfg, rect, fingers=f)
    s0 = srake_detect(r, f, fcfg, rect)
    assert np.all(hard_decision(s0) == bits)
    np.testing.assert_allclose(soft, 2.0 * np.sum(np.abs(f.gains) ** 2) * bits, atol=1e-9)


def test_residual_interference_shrinks_with_correct_decisions(rect):
    bits = _bits(64, seed=9)
    ch, fcfg, r = _setup([1.0, 0, 0.6, 0.3j, 0, 0, 0.4], bits, rect)
    hist = smpic_detect(r, ch, SmpicConfig(J=4, p=4, w=0.7), fcfg, rect, history=True)
    own = 2.0 * np.sum(np.abs(ch.taps) ** 2) * bits
    resid = [np.abs(h - own).max() for h in hist]
    assert all(b <= a + 1e-12 for a, b in zip(resid, resid[1:]))


def test_fixed_point_is_stable(rect):
    bits = _bits(32, seed=1)
    ch, fcfg, r = _setup([1.0, 0.4, -0.2], bits, rect)
    hist = smpic_detect(r, ch, SmpicConfig(J=3, p=3, w=0.9), fcfg, rect, history=True)
    np.testing.assert_allclose(hist[2], hist[1], atol=1e-12)
    np.testing.assert_allclose(hist[3], hist[1], atol=1e-12)


def test_matches_cancelled_input_reference(rect):
    ch = discretize(generate_realization(load_channel_params("CM1"), 21), TS)
    bits = _bits(16, seed=2)
    _, fcfg, r = _setup(ch.taps, bits, rect, noise=2e4, seed=4)
    cfg = SmpicConfig(J=6, p=1, w=0.8)
    f = select_fingers(ch, cfg.J)
    s0 = srake_detect(r, f, fcfg, rect)
    dec = hard_decision(s0)
    reps = [regenerate_path(dec, f[j], fcfg, rect, length=len(r)) for j in range(f.J)]
    ref = sum(
        srake_detect(cancelled_input(r, reps, j, cfg.w), type(f)(f.delays[j : j + 1], f.gains[j : j + 1]), fcfg, rect)
        for j in range(f.J)
    )
    np.testing.assert_allclose(smpic_detect(r, ch, cfg, fcfg, rect), ref, atol=1e-9)


@settings(max_examples=20, deadline=None)
@given(mag=st.floats(0.1, 10.0), phase=st.floats(0, 2 * np.pi), seed=st.integers(0, 1000))
def test_output_scales_with_channel_power(mag, phase, seed):
    rect = make_chip_pulse("rectangular", TC, 4)
    bits = _bits(24, seed=seed)
    taps = np.array([1.0, 0.5, 0, -0.7])
    c = mag * np.exp(1j * phase)
    cfg = SmpicConfig(J=3, p=2, w=0.9)
    ch, fcfg, r = _setup(taps, bits, rect)
    ch2, _, r2 = _setup(c * taps, bits, rect)
    a = smpic_detect(r, ch, cfg, fcfg, rect)
    b = smpic_detect(r2, ch2, cfg, fcfg, rect)
    np.testing.assert_allclose(b, abs(c) ** 2 * a, rtol=1e-9, atol=1e-9 * np.abs(b).max())
