"""Round-trip error study at lossless settings, isolating the color path.

At maximum quality the only surviving sources of error are the color
transform and the integer quantization of its output. To isolate them the
study runs the pipeline at unit block size, where the transform stage is
exactly invertible on integers (the coefficients ARE the samples), for
three paths:

* rgb-passthrough: no conversion; round-tripping 8-bit samples is exact,
  so the error is identically zero;
* ycbcr-float: convert in float, quantize the converted samples to
  integers, convert back; the rounding noise does not invert exactly;
* ycbcr-rounded: additionally round the converted planes to 8 bits before
  quantization (a no-op on top of the quantization here, so the row can
  equal the float row).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .codec import LEVEL_SHIFT
from .color import YCbCrImage, rgb_to_ycbcr, ycbcr_to_rgb
from .errors import EmptySet, WrongChannelCount
from .image import FloatImage, PixelImage, round_half_away_from_zero, to_float, to_pixels

STUDY_PATHS = ("ycbcr-rounded", "ycbcr-float", "rgb-passthrough")


def _unit_quantize(plane: np.ndarray) -> np.ndarray:
    """Unit-block, unit-step quantization: round the level-shifted samples."""
    return round_half_away_from_zero(plane - LEVEL_SHIFT) + LEVEL_SHIFT


def lossless_roundtrip(img: PixelImage, path: str) -> PixelImage:
    """One image through the chosen lossless-settings path."""
    if path == "rgb-passthrough":
        planes = [img.data[:, :, c].astype(np.float64) for c in range(img.channels)]
        out = np.stack([_unit_quantize(p) for p in planes], axis=-1)
        return to_pixels(FloatImage(out))
    if path not in STUDY_PATHS:
        raise ValueError(f"unknown path {path!r}")
    if img.channels != 3:
        raise WrongChannelCount("color paths need a 3-channel image")
    ycc = rgb_to_ycbcr(to_float(img))
    planes = [ycc.y, ycc.cb, ycc.cr]
    if path == "ycbcr-rounded":
        planes = [np.clip(round_half_away_from_zero(p), 0.0, 255.0) for p in planes]
    planes = [_unit_quantize(p) for p in planes]
    return to_pixels(ycbcr_to_rgb(YCbCrImage(*planes)))


@dataclass(frozen=True)
class StudyRow:
    path: str
    rmse: float
    n_images: int


def run_numerics_study(images) -> list:
    """Mean per-image round-trip RMSE of each path over the set."""
    images = list(images)
    if not images:
        raise EmptySet("study needs at least one image")
    rows = []
    for path in STUDY_PATHS:
        errs = []
        for img in images:
            out = lossless_roundtrip(img, path)
            d = out.data.astype(np.float64) - img.data.astype(np.float64)
            errs.append(float(np.sqrt(np.mean(d * d))))
        rows.append(StudyRow(path, float(np.mean(errs)), len(images)))
    return rows


def study_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["path", "rmse", "n_images"])
    for r in rows:
        writer.writerow([r.path, f"{r.rmse:.6f}", r.n_images])
    return buf.getvalue()
