import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from irs_mmwave.channel import (ArrayConfig, Link, LinkGeometry, PathSet, UpaGeometry,
                                apply_estimation_error, build_triple, ofdm_tap_phases, path_loss_db,
                                perturb_paths, sample_link_geometry, sample_paths, sample_triple,
                                synthesize_narrowband, synthesize_ofdm, upa_response)

from _helpers import crandn

angles = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False)


def _random_paths(rng, n):
    ang = rng.random((4, n)) * np.array([2 * np.pi, np.pi, 2 * np.pi, np.pi])[:, None]
    return PathSet(crandn(rng, n), *ang, np.zeros(n, bool)).sorted()


# --- array response -------------------------------------------------------

def test_upa_trivial_point():
    np.testing.assert_allclose(upa_response(UpaGeometry(2, 1), 0.0, np.pi / 2),
                               np.array([1, 1]) / np.sqrt(2), atol=1e-15)


def test_upa_half_turn_azimuth():
    np.testing.assert_allclose(upa_response(UpaGeometry(2, 1), np.pi / 2, np.pi / 2),
                               np.array([1, -1]) / np.sqrt(2), atol=1e-15)


def test_upa_flat_index_order():
    # vertical index runs fastest: element (i_h=0, i_v=1) sits at flat index 1
    a = upa_response(UpaGeometry(2, 2), 0.0, 0.0)
    np.testing.assert_allclose(a * 2, [1, -1, 1, -1], atol=1e-15)


def test_upa_matches_naive_loop():
    geom = UpaGeometry(3, 2, spacing=0.4)
    az, el = 1.1, 0.7
    expected = []
    for ih in range(3):
        for iv in range(2):
            expected.append(np.exp(2j * np.pi * 0.4 * (ih * np.sin(az) * np.sin(el) + iv * np.cos(el))))
    np.testing.assert_allclose(upa_response(geom, az, el), np.array(expected) / np.sqrt(6), atol=1e-14)


@given(h=st.integers(1, 6), v=st.integers(1, 6), az=angles, el=angles)
def test_upa_unit_norm(h, v, az, el):
    assert np.linalg.norm(upa_response(UpaGeometry(h, v), az, el)) == pytest.approx(1.0, abs=1e-12)


def test_upa_vectorized_columns():
    geom = UpaGeometry(4, 2)
    az, el = np.array([0.1, 2.0]), np.array([0.5, 1.5])
    cols = upa_response(geom, az, el)
    assert cols.shape == (8, 2)
    np.testing.assert_allclose(cols[:, 1], upa_response(geom, 2.0, 1.5))


def test_geometry_validation_and_square():
    with pytest.raises(ValueError):
        UpaGeometry(0, 3)
    with pytest.raises(ValueError):
        UpaGeometry(2, 2, spacing=0.0)
    assert (UpaGeometry.square(64).horizontal, UpaGeometry.square(64).vertical) == (8, 8)
    assert UpaGeometry.square(8).size == 8
    assert UpaGeometry(4, 2).size == 8


# --- path loss and geometry ------------------------------------------------

@pytest.mark.parametrize("d, los, pen, expected", [
    (1.0, True, 0.0, 61.4),     # intercept of the LOS model
    (100.0, True, 0.0, 101.4),  # 61.4 + 20 * 2
    (10.0, False, 40.1, 141.3),  # 72.0 + 29.2 + 40.1
])
def test_path_loss_values(d, los, pen, expected):
    assert path_loss_db(d, los, 0.0, pen) == pytest.approx(expected, abs=1e-12)


def test_path_loss_rejects_non_positive_distance():
    with pytest.raises(ValueError):
        path_loss_db(0.0, True)


def test_link_geometry_sampler_ranges(rng):
    for _ in range(200):
        g = sample_link_geometry(rng)
        assert 50 <= g.d_ti < 60 and 10 <= g.d_ir < 20
        assert g.d_ti + g.d_ir - 10 <= g.d_tr < g.d_ti + g.d_ir
    with pytest.raises(ValueError):
        LinkGeometry(-1.0, 1.0, 1.0)


# --- path sampling -----------------------------------------------------------

def test_zero_angle_range_gives_zero_angles(rng):
    p = sample_paths(rng, 5, Link.TI, 55.0, 16, 64, angle_range=0.0)
    assert np.all(p.angles == 0.0)


def test_sampled_paths_sorted_and_tapped(rng):
    for link in Link:
        p = sample_paths(rng, 8, link, 30.0, 4, 4)
        assert np.all(np.diff(np.abs(p.gains)) <= 0)
        np.testing.assert_array_equal(p.delays, np.arange(8))
        assert p.los.sum() == (0 if link is Link.TR else 1)


def test_angle_ranges(rng):
    p = sample_paths(rng, 2000, Link.IR, 15.0, 4, 4, angle_range=0.5)
    assert np.all((p.aoa_az >= 0) & (p.aoa_az < np.pi))
    assert np.all((p.aod_el >= 0) & (p.aod_el < np.pi / 2))


def test_gain_variance_monte_carlo(rng):
    # one NLOS path on the direct link without shadowing: variance is deterministic
    d, rows, cols = 40.0, 4, 8
    target = rows * cols * 10 ** (-0.1 * path_loss_db(d, False, 0.0, 40.1))
    g = np.array([sample_paths(rng, 1, Link.TR, d, rows, cols, shadowing=False).gains[0]
                  for _ in range(100_000)])
    assert np.mean(np.abs(g) ** 2) == pytest.approx(target, rel=0.03)


def test_sample_paths_rejects_empty(rng):
    with pytest.raises(ValueError):
        sample_paths(rng, 0, Link.TI, 10.0, 2, 2)


def test_pathset_validation():
    with pytest.raises(ValueError, match="expected 2"):
        PathSet(np.ones(2), np.zeros(2), np.zeros(1), np.zeros(2), np.zeros(2), np.zeros(2, bool))
    with pytest.raises(ValueError, match="finite"):
        PathSet(np.array([np.nan]), *np.zeros((4, 1)), np.zeros(1, bool))


# --- synthesis ---------------------------------------------------------------

def test_single_trivial_path_is_constant_matrix():
    rx, tx = UpaGeometry(2, 1), UpaGeometry(3, 1)
    p = PathSet(np.array([1.0 + 0j]), np.zeros(1), np.full(1, np.pi / 2), np.zeros(1),
                np.full(1, np.pi / 2), np.zeros(1, bool))
    np.testing.assert_allclose(synthesize_narrowband(p, rx, tx), np.full((2, 3), 1 / np.sqrt(6)), atol=1e-15)


def test_zero_gains_zero_matrix(rng):
    p = _random_paths(rng, 3)
    z = PathSet(np.zeros(3, complex), *p.angles, p.los)
    assert not np.any(synthesize_narrowband(z, UpaGeometry(2, 2), UpaGeometry(2, 2)))


def _naive_channel(paths, rx, tx, phases=None):
    h = np.zeros((rx.size, tx.size), complex)
    for q in range(len(paths)):
        a_r = upa_response(rx, paths.aoa_az[q], paths.aoa_el[q])
        a_t = upa_response(tx, paths.aod_az[q], paths.aod_el[q])
        g = paths.gains[q] * (1.0 if phases is None else phases[q])
        for i in range(rx.size):
            for j in range(tx.size):
                h[i, j] += g * a_r[i] * np.conj(a_t[j])
    return h


def test_narrowband_matches_triple_loop(rng):
    rx, tx = UpaGeometry(3, 2), UpaGeometry(2, 2)
    p = _random_paths(rng, 4)
    np.testing.assert_allclose(synthesize_narrowband(p, rx, tx), _naive_channel(p, rx, tx), atol=1e-12)


def test_ofdm_matches_naive_summation(rng):
    rx, tx, k = UpaGeometry(2, 2), UpaGeometry(3, 1), 4
    p = _random_paths(rng, 2)
    h = synthesize_ofdm(p, rx, tx, k)
    assert h.shape == (4, 4, 3)
    for kk in range(k):
        ph = [np.exp(-2j * np.pi * q * kk / k) for q in p.delays]
        np.testing.assert_allclose(h[kk], _naive_channel(p, rx, tx, ph), atol=1e-12)


def test_ofdm_subcarrier_zero_is_narrowband(rng):
    rx, tx = UpaGeometry(2, 2), UpaGeometry(2, 2)
    p = _random_paths(rng, 5)
    np.testing.assert_array_equal(synthesize_ofdm(p, rx, tx, 8)[0], synthesize_narrowband(p, rx, tx))
    np.testing.assert_array_equal(synthesize_ofdm(p, rx, tx, 1)[0], synthesize_narrowband(p, rx, tx))


def test_ofdm_single_path_flat(rng):
    p = _random_paths(rng, 1)
    h = synthesize_ofdm(p, UpaGeometry(2, 1), UpaGeometry(2, 1), 6)
    for kk in range(6):
        np.testing.assert_array_equal(h[kk], h[0])


def test_tap_phases_exact_ones():
    ph = ofdm_tap_phases(np.array([0, 2]), 4)
    assert ph[2, 1] == 1.0 and ph[0, 1] == 1.0
    assert ph[1, 1] == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        ofdm_tap_phases(np.arange(2), 0)


def test_triple_shapes_and_reconstruction(rng):
    arrays = ArrayConfig(UpaGeometry(4, 2), UpaGeometry(2, 2), UpaGeometry(3, 3))
    tri = sample_triple(rng, arrays, sample_link_geometry(rng), {"TR": 2, "TI": 3, "IR": 4})
    assert tri.h_tr.shape == (4, 8) and tri.h_ti.shape == (9, 8) and tri.h_ir.shape == (4, 9)
    assert (len(tri.paths_tr), len(tri.paths_ti), len(tri.paths_ir)) == (2, 3, 4)
    for link in Link:
        rx, tx = arrays.link_arrays(link)
        p = tri.paths(link)
        recon = p.rx_responses(rx) @ np.diag(p.gains) @ p.tx_responses(tx).conj().T
        h = {Link.TR: tri.h_tr, Link.TI: tri.h_ti, Link.IR: tri.h_ir}[link]
        np.testing.assert_allclose(h, recon, atol=1e-10 * max(1e-300, np.abs(h).max()))


def test_ofdm_triple_shared_magnitudes(rng):
    arrays = ArrayConfig(UpaGeometry(2, 2), UpaGeometry(2, 1), UpaGeometry(2, 2))
    tri = sample_triple(rng, arrays, sample_link_geometry(rng), 3, n_subcarriers=5)
    assert tri.is_ofdm and tri.h_ti.shape == (5, 4, 4)
    assert not sample_triple(rng, arrays, sample_link_geometry(rng), 3).is_ofdm


# --- estimation error ----------------------------------------------------------

def test_rho_zero_is_identity(rng):
    arrays = ArrayConfig(UpaGeometry(2, 2), UpaGeometry(2, 1), UpaGeometry(2, 2))
    tri = sample_triple(rng, arrays, sample_link_geometry(rng), 3)
    est_rng = np.random.default_rng(1)
    state = est_rng.bit_generator.state
    assert apply_estimation_error(tri, est_rng, 0.0) is tri
    assert est_rng.bit_generator.state == state


def test_rho_bounded_support(rng):
    p = _random_paths(rng, 1)
    diffs = []
    for _ in range(2000):
        q = perturb_paths(p, rng, 4.0)
        diffs.append(np.rad2deg(q.aoa_az[0] - p.aoa_az[0]))
        assert abs(q.gains[0] / p.gains[0] - 1) <= 4.0
    diffs = np.array(diffs)
    assert np.all(np.abs(diffs) <= 4.0 + 1e-9)
    assert diffs.max() > 3.5 and diffs.min() < -3.5


def test_perturbed_matrix_differs(rng):
    arrays = ArrayConfig(UpaGeometry(2, 2), UpaGeometry(2, 1), UpaGeometry(2, 2))
    tri = sample_triple(rng, arrays, sample_link_geometry(rng), 3)
    est = apply_estimation_error(tri, rng, 2.0)
    for a, b in ((tri.h_tr, est.h_tr), (tri.h_ti, est.h_ti), (tri.h_ir, est.h_ir)):
        assert np.linalg.norm(a - b) > 0


def test_perturbed_paths_resorted_with_delays(rng):
    p = PathSet(np.array([1.0, 0.99]), *np.zeros((4, 2)), np.zeros(2, bool))
    swapped = False
    for _ in range(200):
        q = perturb_paths(p, rng, 0.5)
        assert np.all(np.diff(np.abs(q.gains)) <= 0)
        # each estimated gain keeps the tap of the path it came from
        for g, d in zip(q.gains, q.delays):
            assert abs(g / p.gains[d] - 1) <= 0.5
        swapped |= q.delays[0] == 1
    assert swapped


def test_rho_negative_rejected(rng):
    with pytest.raises(ValueError):
        perturb_paths(_random_paths(rng, 2), rng, -1.0)


def test_build_triple_roundtrip(rng):
    arrays = ArrayConfig(UpaGeometry(2, 2), UpaGeometry(2, 1), UpaGeometry(2, 2))
    tri = sample_triple(rng, arrays, sample_link_geometry(rng), 2)
    again = build_triple(arrays, tri.paths_tr, tri.paths_ti, tri.paths_ir)
    np.testing.assert_array_equal(again.h_ir, tri.h_ir)
