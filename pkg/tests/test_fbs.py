import numpy as np
import pytest
from sklearn.base import clone

from fcv.codec.dct import dct8x8_inverse, inverse_zigzag
from fcv.errors import ParameterError
from fcv.fbs import BandSelector, band_energy, energy_retained, select_bands
from fcv.features import CoeffTensor
from fcv.partial import extract_frame


@pytest.fixture(scope="module")
def iframe_tensor(translate_coded):
    return extract_frame(translate_coded[0], 0).dct


def random_tensor(shape=(4, 5, 192), seed=0):
    return np.random.default_rng(seed).integers(-500, 500, shape).astype(np.int32)


def test_full_band_selection_is_identity(iframe_tensor):
    out = select_bands(iframe_tensor, 64)
    assert np.array_equal(out.values, iframe_tensor.values)


def test_half_band_depth():
    out = select_bands(random_tensor(), 32)
    assert out.shape == (4, 5, 96)


def test_selected_values_are_a_subsequence():
    t = random_tensor(seed=1)
    for k in (1, 7, 16, 32, 63):
        out = select_bands(t, k)
        for c in range(3):
            assert np.array_equal(out[..., c * k : (c + 1) * k],
                                  t[..., c * 64 : c * 64 + k])


def test_composition_takes_the_minimum():
    t = random_tensor(seed=2)
    for k1, k2 in ((32, 16), (16, 32), (64, 5), (5, 64)):
        roundabout = select_bands(select_bands(t, k1), k2)
        direct = select_bands(t, min(k1, k2))
        assert np.array_equal(roundabout, direct)


def test_out_of_range_k_rejected():
    with pytest.raises(ParameterError):
        select_bands(random_tensor(), 0)
    with pytest.raises(ParameterError):
        select_bands(random_tensor(), 65)


def test_dc_only_reconstruction_is_blockwise_mean(iframe_tensor):
    # independent oracle: inverse transform of full blocks vs DC-only blocks
    dc_only = select_bands(iframe_tensor, 1)
    luma_full = iframe_tensor.channel(0)
    luma_dc = dc_only.channel(0)
    for by in range(iframe_tensor.h_blocks):
        for bx in range(iframe_tensor.w_blocks):
            # quality 2 stream: dequantized coefficient = 2 * level
            full_pix = dct8x8_inverse(inverse_zigzag(luma_full[by, bx] * 2.0))
            vec = np.zeros(64)
            vec[0] = luma_dc[by, bx, 0] * 2.0
            dc_pix = dct8x8_inverse(inverse_zigzag(vec))
            assert np.abs(dc_pix - full_pix.mean()).max() < 1e-9


def test_band_energy_of_constant_frame_is_dc_only():
    t = np.zeros((3, 4, 192), dtype=np.int32)
    t[:, :, 0] = 800   # luma DC
    t[:, :, 64] = 40   # chroma DCs
    t[:, :, 128] = 40
    energy = band_energy(t)
    assert energy[0] > 0
    assert (energy[1:] == 0).all()


def test_energy_prefix_monotonicity(iframe_tensor):
    assert energy_retained(iframe_tensor, 32) >= energy_retained(iframe_tensor, 16)
    retained = [energy_retained(iframe_tensor, k) for k in range(1, 65)]
    assert all(a <= b + 1e-12 for a, b in zip(retained, retained[1:]))
    assert retained[-1] == pytest.approx(1.0)


def test_natural_fixture_concentrates_low_bands(iframe_tensor):
    # measured on the smooth-texture fixture; the low-frequency prefix
    # carries nearly all energy
    assert energy_retained(iframe_tensor, 16) > 0.90


def test_estimator_interface_matches_function():
    t = random_tensor(seed=3)
    sel = BandSelector(k=16)
    assert sel.get_params() == {"k": 16}
    out = sel.fit(t).transform(t)
    assert np.array_equal(out, select_bands(t, 16))
    twin = clone(sel).set_params(k=32)
    assert twin.k == 32
    with pytest.raises(ParameterError):
        BandSelector(k=0).fit(t)
