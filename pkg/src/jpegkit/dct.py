"""Orthonormal 8x8 type-II 2-D DCT and plane <-> block bookkeeping."""

from __future__ import annotations

import numpy as np

from .errors import NonMultipleOf8WithoutPadFlag

BLOCK = 8


def dct_matrix(n: int = BLOCK) -> np.ndarray:
    """Orthonormal DCT-II basis; rows are frequencies."""
    c = np.zeros((n, n))
    j = np.arange(n)
    c[0, :] = 1.0 / np.sqrt(n)
    for i in range(1, n):
        c[i, :] = np.sqrt(2.0 / n) * np.cos((2 * j + 1) * i * np.pi / (2 * n))
    return c


DCT_M = dct_matrix()


def dct2(block: np.ndarray) -> np.ndarray:
    """Forward transform; accepts any (..., 8, 8) stack."""
    return DCT_M @ block @ DCT_M.T


def idct2(coef: np.ndarray) -> np.ndarray:
    """Inverse transform; exact transpose-inverse of :func:`dct2`."""
    return DCT_M.T @ coef @ DCT_M


def pad_to_block_multiple(plane: np.ndarray) -> np.ndarray:
    """Edge-replicate pad on the bottom/right up to multiples of 8."""
    h, w = plane.shape
    ph = (-h) % BLOCK
    pw = (-w) % BLOCK
    if ph == 0 and pw == 0:
        return plane
    return np.pad(plane, ((0, ph), (0, pw)), mode="edge")


def split_blocks(plane: np.ndarray, pad: bool = False) -> np.ndarray:
    """Tile a 2-D plane into (n_by, n_bx, 8, 8) blocks in raster order."""
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    if h % BLOCK or w % BLOCK:
        if not pad:
            raise NonMultipleOf8WithoutPadFlag(f"plane is {w}x{h}")
        plane = pad_to_block_multiple(plane)
        h, w = plane.shape
    return (
        plane.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .copy()
    )


def merge_blocks(blocks: np.ndarray, width: int | None = None, height: int | None = None) -> np.ndarray:
    """Inverse of :func:`split_blocks`; crops to (height, width) if given."""
    nby, nbx = blocks.shape[:2]
    plane = blocks.transpose(0, 2, 1, 3).reshape(nby * BLOCK, nbx * BLOCK)
    if width is not None or height is not None:
        plane = plane[: height or nby * BLOCK, : width or nbx * BLOCK]
    return plane
