import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from dsuwb.analysis import (
    MfbPoint,
    captured_energy,
    complexity_krls,
    complexity_receiver,
    complexity_smpic,
    complexity_srake,
    mfb_average,
    mfb_ber,
    qfunc,
    saving_pct,
    write_complexity_csv,
    write_mfb_csv,
)
from dsuwb.channel_model import DiscreteChannel

TS = 0.5e-9


def _q_oracle(x):
    return mpmath.mpf(1) / 2 * mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2))


def test_captured_energy_examples():
    ch = DiscreteChannel(np.array([0.1, 0.0, -0.9, 0.5j, 0.3]), TS)
    assert captured_energy(ch, 1) == pytest.approx(0.81)
    assert captured_energy(ch, 2) == pytest.approx(1.06)
    assert captured_energy(ch, 100) == pytest.approx(ch.energy)
    with pytest.raises(ValueError):
        captured_energy(ch, 0)
    with pytest.raises(ValueError):
        captured_energy(DiscreteChannel(np.zeros(3), TS), 1)


@settings(max_examples=50, deadline=None)
@given(taps=st.lists(st.floats(-1, 1), min_size=1, max_size=30))
def test_captured_energy_monotone_and_bounded(taps):
    ch = DiscreteChannel(np.asarray(taps), TS)
    if not np.any(ch.taps):
        return
    e = [captured_energy(ch, J) for J in range(1, len(taps) + 2)]
    assert all(b >= a for a, b in zip(e, e[1:]))
    assert e[-1] == pytest.approx(ch.energy)


@pytest.mark.parametrize("gamma", [0.0, 1e-6, 0.5, 1.0, 3.0, 10.0, 20.0, 30.0])
def test_mfb_ber_matches_high_precision_oracle(gamma):
    ref = _q_oracle(mpmath.sqrt(2 * mpmath.mpf(gamma)))
    assert mfb_ber(gamma) == pytest.approx(float(ref), rel=1e-12)


def test_mfb_ber_against_numerical_integral():
    tail, _ = quad(lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), math.sqrt(2.0), math.inf)
    assert mfb_ber(1.0) == pytest.approx(tail, rel=1e-10)
    assert mfb_ber(0.0) == 0.5
    with pytest.raises(ValueError):
        mfb_ber(-1.0)


def test_qfunc_vectorized():
    np.testing.assert_allclose(qfunc([0.0, 1.0]), [0.5, float(_q_oracle(1.0))], rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0, 40), b=st.floats(0, 40))
def test_mfb_ber_is_decreasing(a, b):
    lo, hi = sorted((a, b))
    assert mfb_ber(hi) <= mfb_ber(lo)


def test_mfb_average_examples():
    unit = DiscreteChannel(np.array([1.0]), TS)
    pt = mfb_average([unit], J=1, eb_n0_db=0.0)
    assert isinstance(pt, MfbPoint) and pt.eb_n0_db == 0.0
    assert pt.ber == pytest.approx(float(_q_oracle(math.sqrt(2))), rel=1e-12)
    half = DiscreteChannel(np.array([math.sqrt(0.5), 0, math.sqrt(0.5)]), TS)
    avg = mfb_average([unit, half], J=1, eb_n0_db=3.0)
    snr = 10 ** 0.3
    assert avg.ber == pytest.approx(0.5 * (mfb_ber(snr) + mfb_ber(0.5 * snr)))
    with pytest.raises(ValueError):
        mfb_average([], 1, 0.0)


def test_mfb_average_improves_with_fingers():
    rng = np.random.default_rng(0)
    chans = [DiscreteChannel(rng.normal(size=40) * np.exp(-np.arange(40) / 10), TS) for _ in range(5)]
    bers = [mfb_average(chans, J, 8.0).ber for J in (1, 4, 16, 40)]
    assert all(b <= a for a, b in zip(bers, bers[1:]))


def test_complexity_examples():
    assert complexity_srake(16).madpos == 32
    assert complexity_smpic(16, 2).madpos == 2 * 3 * 16 + 3 * 2 * 16
    assert complexity_smpic(16, 0).madpos == complexity_srake(16).madpos
    assert complexity_krls(1).madpos == 7
    assert complexity_krls(45).madpos == pytest.approx(2.5 * 45**2 + 4.5 * 45)


def test_table_values():
    for J, dfe, le, sav in [(16, 5297, 822, 84.5), (32, 5329, 1014, 81.0)]:
        d = complexity_receiver("srake-dfe", J)
        l = complexity_receiver("smpic-le", J)
        assert d.madpos == dfe and l.madpos == le
        assert saving_pct(l, d) == sav
        assert sum(l.breakdown.values()) == l.madpos


def test_complexity_validation():
    for f, args in [(complexity_srake, (0,)), (complexity_smpic, (4, -1)), (complexity_krls, (0,))]:
        with pytest.raises(ValueError):
            f(*args)
    with pytest.raises(ValueError):
        complexity_receiver("mmse", 16)


@settings(max_examples=50, deadline=None)
@given(J=st.integers(1, 256), p=st.integers(0, 8), L=st.integers(1, 60))
def test_complexity_monotone(J, p, L):
    base = complexity_receiver("smpic-le", J, p=p, L=L).madpos
    assert complexity_receiver("smpic-le", J + 1, p=p, L=L).madpos > base
    assert complexity_receiver("smpic-le", J, p=p + 1, L=L).madpos > base
    assert complexity_receiver("smpic-le", J, p=p, L=L + 1).madpos > base


def test_mfb_csv(tmp_path):
    path = tmp_path / "mfb.csv"
    write_mfb_csv([MfbPoint(0.0, 0.1), MfbPoint(2.0, 1e-3)], path)
    assert path.read_text() == "eb_n0_db,ber\n0.0,0.1\n2.0,0.001\n"


def test_complexity_csv():
    d, l = complexity_receiver("srake-dfe", 16), complexity_receiver("smpic-le", 16)
    buf = io.StringIO()
    write_complexity_csv([(d, None), (l, saving_pct(l, d))], buf)
    assert buf.getvalue().splitlines() == [
        "receiver,J,params,madpos,saving_pct",
        "srake-dfe,16,FF=25;FB=20,5297,",
        "smpic-le,16,p=2;L=15,822,84.5",
    ]


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-10, 30), b=st.floats(-10, 30), J=st.integers(1, 40))
def test_mfb_average_non_increasing_in_snr(a, b, J):
    rng = np.random.default_rng(J)
    chans = [DiscreteChannel(rng.normal(size=40), TS) for _ in range(3)]
    lo, hi = sorted((a, b))
    assert mfb_average(chans, J, hi).ber <= mfb_average(chans, J, lo).ber
