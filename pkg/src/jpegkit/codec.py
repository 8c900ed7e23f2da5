"""The full compress/decompress pipeline over quantized coefficient grids.

`compress` runs pixels -> (YCbCr) -> level shift -> 8x8 blocks -> DCT ->
quantize; `decompress` is the mirror image ending in uint8 pixels. The grid
is the codec's native currency: every module that needs "the compressed
input" takes a :class:`CoefficientGrid`, never a .jpg byte string.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import dct
from .color import YCbCrImage, rgb_to_ycbcr, ycbcr_to_rgb
from .errors import QfOutOfRange
from .image import (
    FloatImage,
    PixelImage,
    round_half_away_from_zero,
    to_float,
    to_pixels,
)
from .quant import QuantTable, dequantize, detect_qf, quantize, table_for_qf, zigzag_flatten, zigzag_unflatten

COLORSPACES = ("ycbcr", "rgb-passthrough")
LEVEL_SHIFT = 128.0


@dataclass(frozen=True)
class CodecOptions:
    """Pipeline switches: color path, optional 8-bit rounding of the
    converted planes (for the lossless-settings study), pad mode."""

    colorspace: str = "ycbcr"
    round_chroma: bool = False
    pad: str = "edge"

    def __post_init__(self):
        if self.colorspace not in COLORSPACES:
            raise ValueError(f"colorspace must be one of {COLORSPACES}")
        if self.pad != "edge":
            raise ValueError("only edge padding is supported")


@dataclass(frozen=True, eq=False)
class CoefficientGrid:
    """Per-channel quantized DCT blocks plus the table that made them."""

    channels: tuple
    table: QuantTable
    width: int
    height: int
    colorspace: str = "ycbcr"

    def __post_init__(self):
        if self.colorspace not in COLORSPACES:
            raise ValueError(f"colorspace must be one of {COLORSPACES}")
        if len(self.channels) not in (1, 3):
            raise ValueError("grid must have 1 or 3 channels")
        nby = -(-self.height // dct.BLOCK)
        nbx = -(-self.width // dct.BLOCK)
        norm = []
        for ch in self.channels:
            arr = np.asarray(ch, dtype=np.int32)
            if arr.shape != (nby, nbx, 8, 8):
                raise ValueError(
                    f"channel blocks {arr.shape} do not tile {self.width}x{self.height}"
                )
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            norm.append(arr)
        object.__setattr__(self, "channels", tuple(norm))

    def __eq__(self, other):
        return (
            isinstance(other, CoefficientGrid)
            and self.width == other.width
            and self.height == other.height
            and self.colorspace == other.colorspace
            and self.table == other.table
            and len(self.channels) == len(other.channels)
            and all(np.array_equal(a, b) for a, b in zip(self.channels, other.channels))
        )

    @property
    def n_channels(self) -> int:
        return len(self.channels)


def channel_kinds(n_channels: int, colorspace: str) -> list[str]:
    """Which table each channel uses: chroma only for YCbCr channels 2-3."""
    if n_channels == 3 and colorspace == "ycbcr":
        return ["luma", "chroma", "chroma"]
    return ["luma"] * n_channels


def planes_for_compress(img: FloatImage, opts: CodecOptions) -> list[np.ndarray]:
    """Color-convert (per options) and return the per-channel planes."""
    if img.channels == 3 and opts.colorspace == "ycbcr":
        ycc = rgb_to_ycbcr(img)
        planes = [ycc.y, ycc.cb, ycc.cr]
        if opts.round_chroma:
            planes = [
                np.clip(round_half_away_from_zero(p), 0.0, 255.0) for p in planes
            ]
        return planes
    return [img.data[:, :, c] for c in range(img.channels)]


def planes_to_image(planes: list[np.ndarray], opts: CodecOptions) -> FloatImage:
    """Inverse of :func:`planes_for_compress` (minus any plane rounding)."""
    if len(planes) == 3 and opts.colorspace == "ycbcr":
        return ycbcr_to_rgb(YCbCrImage(planes[0], planes[1], planes[2]))
    return FloatImage(np.stack(planes, axis=-1))


def compress(img: PixelImage | FloatImage, qf: int, opts: CodecOptions = CodecOptions()) -> CoefficientGrid:
    """Quantized-coefficient half of the codec."""
    table = table_for_qf(qf)  # raises QfOutOfRange
    return compress_with_table(img, table, opts)


def compress_with_table(
    img: PixelImage | FloatImage, table: QuantTable, opts: CodecOptions = CodecOptions()
) -> CoefficientGrid:
    fimg = to_float(img) if isinstance(img, PixelImage) else img
    planes = planes_for_compress(fimg, opts)
    kinds = channel_kinds(len(planes), opts.colorspace)
    blocks = []
    for plane, kind in zip(planes, kinds):
        b = dct.split_blocks(plane - LEVEL_SHIFT, pad=True)
        blocks.append(quantize(dct.dct2(b), table.for_channel_kind(kind)))
    return CoefficientGrid(
        tuple(blocks), table, fimg.width, fimg.height, opts.colorspace
    )


def decompress_float(grid: CoefficientGrid, round_chroma: bool = False) -> FloatImage:
    """Decompress without the terminal 8-bit step."""
    opts = CodecOptions(colorspace=grid.colorspace, round_chroma=round_chroma)
    kinds = channel_kinds(grid.n_channels, grid.colorspace)
    planes = []
    for ch, kind in zip(grid.channels, kinds):
        coef = dequantize(ch, grid.table.for_channel_kind(kind))
        plane = dct.merge_blocks(dct.idct2(coef), grid.width, grid.height)
        planes.append(plane + LEVEL_SHIFT)
    return planes_to_image(planes, opts)


def decompress(grid: CoefficientGrid) -> PixelImage:
    """Pixel half of the codec: dequantize, invert, round to uint8."""
    return to_pixels(decompress_float(grid))


def jpeg_q(img: PixelImage, qf: int, opts: CodecOptions = CodecOptions()) -> PixelImage:
    """Full compress-decompress round trip; output dims equal input dims."""
    return decompress(compress(img, qf, opts))


# --- binary sidecar --------------------------------------------------------
#
# magic "CGRD", version 1, colorspace byte, channel count, width/height u32le,
# quality i16le (-1 = custom), both tables as 64 zigzag bytes, then per
# channel the blocks in raster order, each as 64 zigzag int16le.

_MAGIC = b"CGRD"
_VERSION = 1


def write_sidecar(grid: CoefficientGrid) -> bytes:
    out = bytearray()
    out += _MAGIC
    out += struct.pack(
        "<BBBII h",
        _VERSION,
        COLORSPACES.index(grid.colorspace),
        grid.n_channels,
        grid.width,
        grid.height,
        grid.table.quality_factor if isinstance(grid.table.quality_factor, int) else -1,
    )
    out += bytes(int(v) for v in zigzag_flatten(grid.table.luma))
    out += bytes(int(v) for v in zigzag_flatten(grid.table.chroma))
    for ch in grid.channels:
        flat = ch.reshape(-1, 8, 8)
        for block in flat:
            out += zigzag_flatten(block).astype("<i2").tobytes()
    return bytes(out)


def read_sidecar(data: bytes) -> CoefficientGrid:
    header = struct.calcsize("<BBBII h")
    if data[:4] != _MAGIC:
        raise ValueError("not a coefficient sidecar")
    if len(data) < 4 + header + 128:
        raise ValueError("sidecar truncated before the tables")
    version, cs_idx, n_ch, width, height, qf = struct.unpack_from("<BBBII h", data, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported sidecar version {version}")
    if cs_idx >= len(COLORSPACES) or n_ch not in (1, 3) or width < 1 or height < 1:
        raise ValueError("sidecar header fields out of range")
    nby = -(-height // dct.BLOCK)
    nbx = -(-width // dct.BLOCK)
    expected = 4 + header + 128 + n_ch * nby * nbx * 128
    if len(data) < expected:
        raise ValueError(f"sidecar has {len(data)} of {expected} bytes")
    pos = 4 + header
    luma = zigzag_unflatten(np.frombuffer(data, np.uint8, 64, pos).astype(np.int64))
    pos += 64
    chroma = zigzag_unflatten(np.frombuffer(data, np.uint8, 64, pos).astype(np.int64))
    pos += 64
    table = QuantTable(luma, chroma, qf if qf >= 0 else "custom")
    chans = []
    for _ in range(n_ch):
        blocks = np.empty((nby * nbx, 8, 8), dtype=np.int32)
        for i in range(nby * nbx):
            vec = np.frombuffer(data, "<i2", 64, pos)
            pos += 128
            blocks[i] = zigzag_unflatten(vec)
        chans.append(blocks.reshape(nby, nbx, 8, 8))
    return CoefficientGrid(tuple(chans), table, width, height, COLORSPACES[cs_idx])


def grid_quality(grid: CoefficientGrid) -> int | str:
    """Quality factor recorded on the grid's table, re-detected if custom."""
    if isinstance(grid.table.quality_factor, int):
        return grid.table.quality_factor
    return detect_qf(grid.table.luma, grid.table.chroma)
