"""Consistency projection: clamp a restoration's DCT coefficients into the
half-step cells of a compressed input.

The clamp half-width is 0.5 minus two guards. A 1e-9 tie guard keeps
clamped values off the rounding boundary (a coefficient exactly halfway
re-rounds away from the cell, not into it). On top of that, the default
"pixel" guard shrinks each position by the worst-case coefficient
perturbation that terminal uint8 rounding can introduce (half the l1 mass
of that DCT basis function, divided by the quantization step), so the
projected image stays exactly consistent even after it is written out as
8-bit pixels. With guard="tie" only the 1e-9 margin is applied, which is
enough when consistency is checked on the float image itself.

Exactness preconditions: dimensions that are multiples of 8 (otherwise the
edge-replicate pad of the cropped result differs from the padded plane the
clamp saw, perturbing edge-block coefficients), and for the 8-bit path a
projected image that stays close to [0, 255] (the guard absorbs rounding,
not deep clamping).
"""

from __future__ import annotations

import numpy as np

from .codec import CodecOptions, CoefficientGrid, LEVEL_SHIFT, channel_kinds, planes_for_compress, planes_to_image
from .dct import DCT_M, dct2, idct2, merge_blocks, split_blocks
from .errors import DimMismatch, OptionsMismatch
from .image import FloatImage, PixelImage, to_float

TIE_GUARD = 1e-9

# l1 mass of each 2-D basis function; the worst-case coefficient shift from
# per-pixel perturbations bounded by 0.5 is half of this (the color rows
# all have unit l1 norm, so the bound carries through the YCbCr path).
_ROW_L1 = np.abs(DCT_M).sum(axis=1)
BASIS_L1 = np.outer(_ROW_L1, _ROW_L1)


def _half_width(q: np.ndarray, guard: str) -> np.ndarray:
    half = np.full((8, 8), 0.5 - TIE_GUARD)
    if guard == "pixel":
        half = half - 0.5 * BASIS_L1 / q
    elif guard != "tie":
        raise ValueError("guard must be 'pixel' or 'tie'")
    return np.maximum(half, 0.0)


def project(
    xhat: PixelImage | FloatImage,
    y_grid: CoefficientGrid,
    opts: CodecOptions | None = None,
    guard: str = "pixel",
) -> FloatImage:
    """Smallest change to xhat whose requantization reproduces y_grid."""
    if opts is None:
        opts = CodecOptions(colorspace=y_grid.colorspace)
    if opts.colorspace != y_grid.colorspace:
        raise OptionsMismatch(
            f"grid is {y_grid.colorspace} but options say {opts.colorspace}"
        )
    if opts.round_chroma:
        raise OptionsMismatch("projection requires the float color path")
    fimg = to_float(xhat) if isinstance(xhat, PixelImage) else xhat
    if (fimg.width, fimg.height) != (y_grid.width, y_grid.height):
        raise DimMismatch(
            f"image {fimg.width}x{fimg.height} vs grid {y_grid.width}x{y_grid.height}"
        )
    if fimg.channels != y_grid.n_channels:
        raise DimMismatch(
            f"image has {fimg.channels} channels, grid has {y_grid.n_channels}"
        )

    planes = planes_for_compress(fimg, opts)
    kinds = channel_kinds(len(planes), opts.colorspace)
    out = []
    for plane, kind, levels in zip(planes, kinds, y_grid.channels):
        q = y_grid.table.for_channel_kind(kind)
        half = _half_width(q, guard)
        coef = dct2(split_blocks(plane - LEVEL_SHIFT, pad=True)) / q
        clamped = levels + np.clip(coef - levels, -half, half)
        rec = merge_blocks(idct2(clamped * q), y_grid.width, y_grid.height)
        out.append(rec + LEVEL_SHIFT)
    return planes_to_image(out, opts)
