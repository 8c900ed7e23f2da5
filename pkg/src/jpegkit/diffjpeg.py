"""Differentiable compression operator with a straight-through rounding
gradient.

:func:`forward` runs the float pipeline end to end (color transform, level
shift, edge pad, blockwise DCT, divide / round / multiply by the table,
inverse) with no terminal 8-bit step, and returns the value together with a
:class:`Vjp`. :func:`apply_vjp` pulls a cotangent back through the exact
adjoint of the same pipeline with rounding replaced by the identity; since
every other stage is linear, the captured state is just the operator
itself. Do not mistake the result for the true gradient of the rounding
pipeline, which is zero almost everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import (
    CodecOptions,
    LEVEL_SHIFT,
    channel_kinds,
    planes_for_compress,
    planes_to_image,
)
from .color import RGB_TO_YCBCR, YCBCR_TO_RGB
from .dct import BLOCK, dct2, idct2, merge_blocks, split_blocks
from .errors import DimMismatch
from .image import FloatImage, round_half_away_from_zero
from .quant import QuantTable, table_for_qf


@dataclass(frozen=True)
class DiffJpegOp:
    """Quantization table, options, and the image geometry they apply to."""

    table: QuantTable
    options: CodecOptions
    width: int
    height: int
    channels: int

    @classmethod
    def for_image(cls, img, qf: int, options: CodecOptions = CodecOptions()) -> "DiffJpegOp":
        return cls(table_for_qf(qf), options, img.width, img.height, img.channels)

    @property
    def _uses_color(self) -> bool:
        return self.channels == 3 and self.options.colorspace == "ycbcr"


@dataclass(frozen=True)
class Vjp:
    """Handle for the adjoint; the pipeline is linear so the operator is
    all the state it needs."""

    op: DiffJpegOp


def _check_dims(op: DiffJpegOp, img: FloatImage):
    if (img.width, img.height, img.channels) != (op.width, op.height, op.channels):
        raise DimMismatch(
            f"image {img.width}x{img.height}x{img.channels} does not match operator "
            f"{op.width}x{op.height}x{op.channels}"
        )


def _run(op: DiffJpegOp, x: FloatImage, rounding: bool) -> FloatImage:
    planes = planes_for_compress(x, op.options)
    kinds = channel_kinds(len(planes), op.options.colorspace)
    out = []
    for plane, kind in zip(planes, kinds):
        q = op.table.for_channel_kind(kind)
        coef = dct2(split_blocks(plane - LEVEL_SHIFT, pad=True)) / q
        if rounding:
            coef = round_half_away_from_zero(coef)
        rec = merge_blocks(idct2(coef * q), op.width, op.height)
        out.append(rec + LEVEL_SHIFT)
    return planes_to_image(out, op.options)


def forward(op: DiffJpegOp, x: FloatImage) -> tuple[FloatImage, Vjp]:
    """Float-valued compress-decompress of x, plus the adjoint handle."""
    _check_dims(op, x)
    return _run(op, x, rounding=True), Vjp(op)


def forward_no_round(op: DiffJpegOp, x: FloatImage) -> FloatImage:
    """The pipeline with rounding replaced by the identity: the map whose
    exact Jacobian the VJP implements."""
    _check_dims(op, x)
    return _run(op, x, rounding=False)


def _fold_pad(g: np.ndarray, height: int, width: int) -> np.ndarray:
    """Adjoint of bottom/right edge-replicate padding: fold the padded
    region's cotangent back onto the edge row/column it was copied from."""
    out = g[:height, :].copy()
    if g.shape[0] > height:
        out[height - 1, :] += g[height:, :].sum(axis=0)
    out2 = out[:, :width].copy()
    if out.shape[1] > width:
        out2[:, width - 1] += out[:, width:].sum(axis=1)
    return out2


def apply_vjp(vjp: Vjp, cotangent: FloatImage) -> FloatImage:
    """Pull a cotangent back through the pipeline, rounding as identity."""
    op = vjp.op
    _check_dims(op, cotangent)
    u = cotangent.data

    if op._uses_color:
        # forward output was ycc' @ YCBCR_TO_RGB.T, so the adjoint right-
        # multiplies by YCBCR_TO_RGB
        u = np.tensordot(u, YCBCR_TO_RGB, axes=([2], [0]))

    hp = -(-op.height // BLOCK) * BLOCK
    wp = -(-op.width // BLOCK) * BLOCK
    kinds = channel_kinds(op.channels, op.options.colorspace)
    planes = []
    for c, kind in enumerate(kinds):
        q = op.table.for_channel_kind(kind)
        g = np.zeros((hp, wp))
        g[: op.height, : op.width] = u[:, :, c]  # adjoint of the crop
        b = dct2(split_blocks(g))  # adjoint of merge, then of idct2
        b = (b * q) / q  # adjoints of *q, round (identity), /q
        plane = merge_blocks(idct2(b))  # adjoint of dct2, then of split
        planes.append(_fold_pad(plane, op.height, op.width))
    u = np.stack(planes, axis=-1)

    if op._uses_color:
        # forward input went through rgb @ RGB_TO_YCBCR.T
        u = np.tensordot(u, RGB_TO_YCBCR, axes=([2], [0]))
    return FloatImage(u)
