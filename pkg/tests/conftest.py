import numpy as np
import pytest
from hypothesis import settings

from jpegkit.image import PixelImage, round_half_away_from_zero

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def decoded_ycbcr_planes(grid):
    """The decoder's component planes (before color conversion), quantized
    to 8 bits for comparison against external decoders."""
    from jpegkit import dct
    from jpegkit.codec import LEVEL_SHIFT, channel_kinds
    from jpegkit.quant import dequantize

    planes = []
    for ch, kind in zip(grid.channels, channel_kinds(grid.n_channels, grid.colorspace)):
        coef = dequantize(ch, grid.table.for_channel_kind(kind))
        plane = dct.merge_blocks(dct.idct2(coef), grid.width, grid.height) + LEVEL_SHIFT
        planes.append(np.clip(round_half_away_from_zero(plane), 0, 255))
    return np.stack(planes, axis=-1).astype(int)


def natural_image(rng, height=24, width=24, channels=3, lo=16, hi=239):
    """Deterministic pseudo-natural fixture: smooth gradients, a few blobs,
    mild grain, kept away from saturation."""
    yy, xx = np.mgrid[0:height, 0:width].astype(float)
    img = np.zeros((height, width, channels))
    for c in range(channels):
        img[:, :, c] = 120 + 60 * np.sin(
            2 * np.pi * (rng.random() * xx / width + rng.random() * yy / height + rng.random())
        )
        for _ in range(3):
            cy, cx = rng.random() * height, rng.random() * width
            s, a = 2 + 4 * rng.random(), rng.normal(0, 40)
            img[:, :, c] += a * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
        img[:, :, c] += rng.normal(0, 6, (height, width))
    return PixelImage(np.clip(img, lo, hi).astype(np.uint8))


def uniform_image(rng, height=24, width=24, channels=3):
    return PixelImage(rng.integers(0, 256, size=(height, width, channels), dtype=np.uint8))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def natural_set():
    rng = np.random.default_rng(99)
    return [natural_image(rng) for _ in range(12)]
