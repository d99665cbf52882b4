import numpy as np
import pytest

from irs_mmwave import beamformer as bf
from irs_mmwave.metrics import (LinkBudget, dbm_to_mw, mw_to_dbm, spectral_efficiency,
                                spectral_efficiency_ofdm)
from irs_mmwave.numerics import DegenerateChannelError

from _helpers import crandn


def test_dbm_conversions():
    assert dbm_to_mw(30.0) == pytest.approx(1000.0)
    assert dbm_to_mw(-91.0) == pytest.approx(10 ** -9.1)
    assert mw_to_dbm(dbm_to_mw(17.3)) == pytest.approx(17.3)


def test_link_budget():
    link = LinkBudget.from_dbm(40.0)
    assert link.p_tx == pytest.approx(1e4) and link.noise == pytest.approx(10 ** -9.1)
    with pytest.raises(ValueError):
        LinkBudget(0.0, 1.0)


def test_scalar_case():
    p = 7.0
    se = spectral_efficiency([[1.0]], [[1.0]], [[np.sqrt(p)]], [[1.0]], [[1.0]], 1.0)
    assert se == pytest.approx(np.log2(1 + p))


def test_zero_channel():
    assert spectral_efficiency(np.zeros((2, 3)), None, np.ones((3, 1)), None, np.ones((2, 1)), 1.0) == 0.0


def test_svd_design_matches_waterfilling_rate(rng):
    h = crandn(rng, 4, 6)
    noise, p = 0.3, 5.0
    bb = bf.baseband_design(h, noise, p, 3)
    direct = sum(np.log2(1 + lv * s ** 2 / noise) for lv, s in zip(bb.allocation.levels, np.linalg.svd(h, compute_uv=False)))
    se = spectral_efficiency(h, None, bb.f_bb, None, bb.w_bb, noise)
    assert se == pytest.approx(direct, rel=1e-8)
    assert se == pytest.approx(bb.rate, rel=1e-8)


def test_non_white_noise_matches_direct_formula(rng):
    h = crandn(rng, 4, 5)
    f_rf, w_rf = crandn(rng, 5, 3), crandn(rng, 4, 3)
    f_bb, w_bb = crandn(rng, 3, 2), crandn(rng, 3, 2)
    noise = 0.7
    w = w_rf @ w_bb
    f = f_rf @ f_bb
    rn = noise * w.conj().T @ w
    m = np.eye(2) + np.linalg.inv(rn) @ w.conj().T @ h @ f @ f.conj().T @ h.conj().T @ w
    expected = np.log2(np.linalg.det(m).real)
    assert spectral_efficiency(h, f_rf, f_bb, w_rf, w_bb, noise) == pytest.approx(expected, rel=1e-10)


def test_ill_conditioned_combiner_is_degenerate(rng):
    h = crandn(rng, 3, 3)
    w_bb = np.array([[1.0, 1.0], [0.0, 1e-9], [0.0, 0.0]])
    with pytest.raises(DegenerateChannelError):
        spectral_efficiency(h, None, np.eye(3)[:, :2], None, w_bb, 1.0)


def test_ofdm_single_subcarrier_equals_narrowband(rng):
    h = crandn(rng, 3, 4)
    f_rf, w_rf, f_bb, w_bb = crandn(rng, 4, 2), crandn(rng, 3, 2), crandn(rng, 2, 2), crandn(rng, 2, 2)
    assert spectral_efficiency_ofdm([h], f_rf, [f_bb], w_rf, [w_bb], 0.5) == \
        spectral_efficiency(h, f_rf, f_bb, w_rf, w_bb, 0.5)


def test_ofdm_identical_subcarriers_scale_with_k(rng):
    h = crandn(rng, 4, 4)
    k, p, noise = 6, 12.0, 1.0
    bb = bf.baseband_design(h, noise, p / k, 2)
    single = spectral_efficiency(h, None, bb.f_bb, None, bb.w_bb, noise)
    total = spectral_efficiency_ofdm([h] * k, None, [bb.f_bb] * k, None, [bb.w_bb] * k, noise)
    assert total == pytest.approx(k * single, rel=1e-12)


def test_ofdm_matches_loop(rng):
    hs = crandn(rng, 4, 3, 5)
    f_rf, w_rf = crandn(rng, 5, 2), crandn(rng, 3, 2)
    f_bbs, w_bbs = crandn(rng, 4, 2, 2), crandn(rng, 4, 2, 2)
    loop = sum(spectral_efficiency(hs[k], f_rf, f_bbs[k], w_rf, w_bbs[k], 0.2) for k in range(4))
    assert spectral_efficiency_ofdm(hs, f_rf, f_bbs, w_rf, w_bbs, 0.2) == pytest.approx(loop, rel=1e-9)


def test_ofdm_reports_degenerate_subcarriers(rng):
    hs = crandn(rng, 3, 3, 3)
    good = np.eye(3)[:, :2]
    bad = np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
    with pytest.raises(DegenerateChannelError) as info:
        spectral_efficiency_ofdm(hs, None, [good] * 3, None, [good, bad, bad], 1.0)
    assert info.value.subcarriers == [1, 2]


def test_monotone_in_power(rng):
    h = crandn(rng, 4, 4)
    bb = bf.baseband_design(h, 1.0, 1.0, 3)
    rates = [spectral_efficiency(h, None, bb.f_bb * np.sqrt(c), None, bb.w_bb, 1.0) for c in (1, 2, 4, 8)]
    assert np.all(np.diff(rates) > 0)
