"""Binary PGM (P5) and PPM (P6) reader/writer, maxval 255 only.

The writer emits a canonical header: magic, newline, "<width> <height>",
newline, "255", newline, then the raw payload. The reader accepts any
legal whitespace/comment layout, so read(write(x)) == x and
write(read(f)) == f for canonical f.
"""

from __future__ import annotations

import numpy as np

from .errors import MaxvalNot255, TruncatedPayload, UnsupportedMagic
from .image import PixelImage


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise TruncatedPayload("header ended before all fields were read")
    return data[start:pos], pos


def read_pnm(data: bytes) -> PixelImage:
    """Decode a binary PGM/PPM byte string."""
    if len(data) < 2:
        raise UnsupportedMagic("not a PNM stream")
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedMagic(f"unsupported magic {magic!r}")
    channels = 1 if magic == b"P5" else 3

    pos = 2
    fields = []
    for _ in range(3):
        tok, pos = _read_token(data, pos)
        if not tok.isdigit():
            raise TruncatedPayload(f"non-numeric header field {tok!r}")
        fields.append(int(tok))
    width, height, maxval = fields
    if maxval != 255:
        raise MaxvalNot255(f"maxval {maxval} (only 255 supported)")
    if width < 1 or height < 1:
        raise TruncatedPayload("non-positive dimensions")

    # exactly one whitespace byte separates the header from the payload
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise TruncatedPayload("missing separator before payload")
    pos += 1

    need = width * height * channels
    payload = data[pos : pos + need]
    if len(payload) < need:
        raise TruncatedPayload(f"payload has {len(payload)} of {need} bytes")
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return PixelImage(arr)


def write_pnm(img: PixelImage) -> bytes:
    """Encode to canonical binary PGM (1 channel) or PPM (3 channels)."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n" + f"{img.width} {img.height}".encode() + b"\n255\n"
    return header + img.data.tobytes()
