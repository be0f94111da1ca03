import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scriptorium.energy import (
    MAX_GLOBAL_KERNEL,
    SmoothingConfig,
    background_energy,
    smoothed_energy,
    text_energy,
    total_energy,
)
from scriptorium.raster import EmptyPageError, box_filter, connected_components, distance_to_nearest, plus_filter

from oracles import box_offsets, plus_offsets, shifted_mean


def _random_mask(seed, n=40, m=50, blobs=6):
    rng = np.random.default_rng(seed)
    mask = np.zeros((n, m), bool)
    for _ in range(int(rng.integers(1, blobs + 1))):
        r, c = rng.integers(0, n - 3), rng.integers(0, m - 4)
        h, w = rng.integers(1, 4), rng.integers(1, 5)
        mask[r:r + h, c:c + w] = True
    return mask


def test_background_energy_values():
    B = background_energy([(0.0, 0.0)], 1, 4)
    # distance 0 and 1 both clamp to d_min = 1
    np.testing.assert_allclose(B, [[1.0, 1.0, 0.5, 1 / 3]])


def test_background_energy_custom_dmin():
    B = background_energy([(0.0, 0.0)], 1, 4, d_min=2.0)
    np.testing.assert_allclose(B, [[0.5, 0.5, 0.5, 1 / 3]])
    with pytest.raises(ValueError):
        background_energy([(0.0, 0.0)], 1, 4, d_min=0)


def test_text_energy_doubles_on_text():
    B = np.array([[0.5, 0.25]])
    T = text_energy(B, np.array([[1, 0]]))
    np.testing.assert_allclose(B + T, [[1.0, 0.25]])
    with pytest.raises(ValueError):
        text_energy(B, np.zeros((2, 2)))


def test_smoothed_energy_is_box_of_plus():
    rng = np.random.default_rng(3)
    B = rng.uniform(size=(20, 30))
    T = np.where(rng.uniform(size=B.shape) > 0.7, B, 0)
    S = smoothed_energy(B, T, SmoothingConfig(g=None, k=4))
    ref = shifted_mean(shifted_mean(B + T, plus_offsets(20)), box_offsets(4))
    np.testing.assert_allclose(S, ref, rtol=0, atol=1e-9)


def test_smoothing_resolve():
    assert SmoothingConfig().resolve(1400) == (1400, 32)
    assert SmoothingConfig().resolve(10_000) == (MAX_GLOBAL_KERNEL, 32)
    assert SmoothingConfig(g=7, k=3).resolve(1400) == (7, 3)
    with pytest.raises(ValueError):
        SmoothingConfig(k=0).resolve(10)


def test_total_energy_empty_page():
    with pytest.raises(EmptyPageError):
        total_energy(np.zeros((5, 5)))


def test_normalized_range():
    E = total_energy(_random_mask(0), SmoothingConfig(k=4)).normalized()
    assert E.min() == 0.0 and E.max() == 1.0


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_energy_ordering(seed):
    mask = _random_mask(seed)
    em = total_energy(mask, SmoothingConfig(k=5))
    assert (em.B >= 0).all() and (em.T >= 0).all() and (em.S >= 0).all()
    assert (em.E >= em.B).all()
    # background energy falls off with distance away from text
    d = distance_to_nearest(connected_components(mask).centroids, *mask.shape)
    off = ~mask
    dv, bv = d[off], em.B[off]
    order = np.argsort(dv, kind="stable")
    dv, bv = dv[order], bv[order]
    strict = dv[1:] > dv[:-1]
    assert (bv[:-1][strict] >= bv[1:][strict]).all()


def test_text_pixel_doubles_equal_distance_background():
    mask = np.zeros((11, 11), bool)
    mask[5, 4:7] = True  # centroid exactly at (5, 5)
    em = total_energy(mask, SmoothingConfig(k=3))
    bt = em.B + em.T
    assert bt[5, 4] == 2 * bt[4, 5] == 2.0  # both 1 px from the centroid
    assert bt[5, 6] == 2 * bt[6, 5]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_background_term_depends_only_on_distance(seed):
    mask = _random_mask(seed)
    em = total_energy(mask, SmoothingConfig(k=5))
    d = distance_to_nearest(connected_components(mask).centroids, *mask.shape)
    np.testing.assert_array_equal(em.B, 1.0 / np.maximum(d, 1.0))
    bt = em.B + em.T
    np.testing.assert_array_equal(bt[mask], 2 * em.B[mask])
    np.testing.assert_array_equal(bt[~mask], em.B[~mask])


def _shift_compare(got, want, axis, shift):
    sl_g = [slice(None)] * 2
    sl_w = [slice(None)] * 2
    if shift:
        sl_g[axis] = slice(shift, None)
        sl_w[axis] = slice(None, -shift)
    return got[tuple(sl_g)], want[tuple(sl_w)]


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10_000), g_half=st.integers(0, 30), k=st.integers(1, 12))
def test_energy_flip_equivariance(seed, g_half, k):
    """Flipping the page flips E, up to a one-pixel shift of the box term when k is even."""
    mask = _random_mask(seed)
    cfg = SmoothingConfig(g=2 * g_half + 1, k=k)
    em = total_energy(mask, cfg)
    for axis in (0, 1):
        fl = total_energy(np.flip(mask, axis), cfg)
        np.testing.assert_allclose(fl.B + fl.T, np.flip(em.B + em.T, axis), rtol=0, atol=1e-9)
        got, want = _shift_compare(fl.S, np.flip(em.S, axis), axis, 1 - k % 2)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-9)
        got, want = _shift_compare(fl.E - (fl.B + fl.T), np.flip(em.E - (em.B + em.T), axis), axis, 1 - k % 2)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-9)


def test_energy_flip_default_box_kernel():
    # the default 32 x 32 box with an odd '+' kernel
    mask = _random_mask(7, n=80, m=90)
    cfg = SmoothingConfig(g=79, k=32)
    em = total_energy(mask, cfg)
    fl = total_energy(np.flip(mask, 0), cfg)
    np.testing.assert_allclose(fl.S[1:], np.flip(em.S, 0)[:-1], rtol=0, atol=1e-9)


def test_energy_is_sum_of_terms():
    mask = _random_mask(11)
    em = total_energy(mask, SmoothingConfig(g=9, k=3))
    np.testing.assert_array_equal(em.E, em.B + em.T + em.S)
    np.testing.assert_allclose(em.S, box_filter(plus_filter(em.B + em.T, 9), 3))
