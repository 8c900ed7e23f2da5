import numpy as np
import pytest

from jpegkit.codec import CodecOptions, compress, decompress_float, jpeg_q
from jpegkit.diffjpeg import DiffJpegOp, Vjp, apply_vjp, forward, forward_no_round
from jpegkit.errors import DimMismatch
from jpegkit.image import FloatImage, to_float, to_pixels
from tests.conftest import natural_image, uniform_image

PASSTHROUGH = CodecOptions(colorspace="rgb-passthrough")


def test_value_agrees_with_codec(rng):
    for qf in (5, 50):
        x = natural_image(rng)
        op = DiffJpegOp.for_image(x, qf)
        y, _ = forward(op, to_float(x))
        z = jpeg_q(x, qf)
        assert np.max(np.abs(to_pixels(y).data.astype(int) - z.data.astype(int))) <= 1


def test_lattice_images_are_fixed_points(rng):
    for qf in (10, 100):
        g = compress(uniform_image(rng, 16, 16), qf)
        x = decompress_float(g)
        op = DiffJpegOp(g.table, CodecOptions(), x.width, x.height, x.channels)
        y, _ = forward(op, x)
        assert np.max(np.abs(y.data - x.data)) < 1e-9


def test_qf100_passthrough_lattice_identity(rng):
    g = compress(uniform_image(rng, 8, 8), 100, PASSTHROUGH)
    x = decompress_float(g)
    op = DiffJpegOp(g.table, PASSTHROUGH, x.width, x.height, x.channels)
    y, _ = forward(op, x)
    assert np.max(np.abs(y.data - x.data)) < 1e-9


def test_vjp_matches_finite_differences(rng):
    # central differences of the no-rounding pipeline vs the adjoint
    x = to_float(natural_image(rng, 17, 13))
    op = DiffJpegOp.for_image(x, 10)
    _, vjp = forward(op, x)
    h = 1e-3
    for _ in range(10):
        u = rng.normal(size=x.data.shape)
        v = rng.normal(size=x.data.shape)
        fp = forward_no_round(op, FloatImage(x.data + h * v)).data
        fm = forward_no_round(op, FloatImage(x.data - h * v)).data
        lhs = float(np.sum(u * (fp - fm) / (2 * h)))
        rhs = float(np.sum(apply_vjp(vjp, FloatImage(u)).data * v))
        assert abs(lhs - rhs) <= 1e-6 * max(abs(lhs), 1e-12)


def test_vjp_passthrough_is_identity(rng):
    x = to_float(uniform_image(rng, 16, 16))
    op = DiffJpegOp.for_image(x, 30, PASSTHROUGH)
    _, vjp = forward(op, x)
    c = rng.normal(size=x.data.shape)
    out = apply_vjp(vjp, FloatImage(c)).data
    assert np.max(np.abs(out - c)) < 1e-12


def test_vjp_zero_cotangent(rng):
    x = to_float(uniform_image(rng, 8, 8))
    op = DiffJpegOp.for_image(x, 50)
    _, vjp = forward(op, x)
    out = apply_vjp(vjp, FloatImage(np.zeros_like(x.data)))
    assert np.all(out.data == 0.0)


def test_ste_contract_vjp_of_no_round_pipeline(rng):
    # J is input-independent: the adjoint applied to a basis cotangent must
    # reproduce the corresponding row of the no-rounding pipeline's Jacobian
    x = to_float(uniform_image(rng, 8, 8))
    op = DiffJpegOp.for_image(x, 20)
    _, vjp = forward(op, x)
    v = rng.normal(size=x.data.shape)
    jv = (
        forward_no_round(op, FloatImage(x.data + v)).data
        - forward_no_round(op, x).data
    )
    u = rng.normal(size=x.data.shape)
    assert abs(np.sum(u * jv) - np.sum(apply_vjp(vjp, FloatImage(u)).data * v)) < 1e-7


def test_residual_shrinks_with_quality(rng):
    # table dominance: higher quality factors quantize no more coarsely,
    # and the reconstruction residual shrinks accordingly on a fixed image
    x = to_float(natural_image(rng))
    norms = []
    for qf in (5, 25, 50, 75, 95, 100):
        op = DiffJpegOp.for_image(x, qf, PASSTHROUGH)
        y, _ = forward(op, x)
        norms.append(float(np.linalg.norm(y.data - x.data)))
    assert all(b <= a + 1e-9 for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 0.5 * np.sqrt(x.data.size)


def test_dim_mismatch(rng):
    x = to_float(uniform_image(rng, 8, 8))
    op = DiffJpegOp.for_image(x, 50)
    bad = FloatImage(np.zeros((16, 16, 3)))
    with pytest.raises(DimMismatch):
        forward(op, bad)
    _, vjp = forward(op, x)
    with pytest.raises(DimMismatch):
        apply_vjp(vjp, bad)


def test_vjp_dataclass_holds_operator(rng):
    x = to_float(uniform_image(rng, 8, 8))
    op = DiffJpegOp.for_image(x, 50)
    _, vjp = forward(op, x)
    assert isinstance(vjp, Vjp) and vjp.op == op
