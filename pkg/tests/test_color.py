import numpy as np
import pytest

from jpegkit.color import rgb_to_ycbcr, ycbcr_to_rgb
from jpegkit.errors import WrongChannelCount
from jpegkit.image import FloatImage, round_half_away_from_zero, to_float, to_pixels
from tests.conftest import natural_image


def _one_pixel(r, g, b):
    return FloatImage(np.array([[[r, g, b]]], dtype=np.float64))


def test_black_maps_to_zero_luma_neutral_chroma():
    ycc = rgb_to_ycbcr(_one_pixel(0, 0, 0))
    assert (ycc.y[0, 0], ycc.cb[0, 0], ycc.cr[0, 0]) == (0.0, 128.0, 128.0)


def test_white_row_sums():
    ycc = rgb_to_ycbcr(_one_pixel(255, 255, 255))
    assert abs(ycc.y[0, 0] - 255.0) < 1e-9
    assert abs(ycc.cb[0, 0] - 128.0) < 1e-9
    assert abs(ycc.cr[0, 0] - 128.0) < 1e-9


def test_pure_red_direct_evaluation():
    # independent evaluation of the stated constants; the conversion does
    # not clamp, so Cr exceeds the nominal range on pure red
    ycc = rgb_to_ycbcr(_one_pixel(255, 0, 0))
    assert abs(ycc.y[0, 0] - 0.299 * 255) < 1e-9
    assert abs(ycc.cb[0, 0] - (128 - 0.168736 * 255)) < 1e-9
    assert abs(ycc.cr[0, 0] - (128 + 0.5 * 255)) < 1e-9
    assert abs(ycc.cr[0, 0] - 255.5) < 1e-9


def test_neutral_gray_fixed_point():
    ycc = rgb_to_ycbcr(_one_pixel(128, 128, 128))
    back = ycbcr_to_rgb(ycc)
    assert np.allclose(back.data, 128.0, atol=1e-9)
    assert abs(ycc.y[0, 0] - 128.0) < 1e-9


def test_float_roundtrip_is_identity(rng):
    img = FloatImage(rng.uniform(0, 255, size=(9, 7, 3)))
    back = ycbcr_to_rgb(rgb_to_ycbcr(img))
    assert np.max(np.abs(back.data - img.data)) < 1e-9


def test_roundtrip_with_8bit_intermediate_is_lossy():
    img = natural_image(np.random.default_rng(5))
    ycc = rgb_to_ycbcr(to_float(img))
    planes = [np.clip(round_half_away_from_zero(p), 0, 255) for p in (ycc.y, ycc.cb, ycc.cr)]
    from jpegkit.color import YCbCrImage

    back = to_pixels(ycbcr_to_rgb(YCbCrImage(*planes)))
    rmse = np.sqrt(np.mean((back.data.astype(float) - img.data.astype(float)) ** 2))
    assert rmse > 0.0
    assert rmse <= 1.0


def test_wrong_channel_count():
    with pytest.raises(WrongChannelCount):
        rgb_to_ycbcr(FloatImage(np.zeros((2, 2, 1))))
