"""Command-line front end: one binary, one subcommand per tool.

Exit codes: 0 success, 1 domain error (error class name on stderr),
2 usage error. All randomness is seeded via flags, so logged commands
reproduce bitwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .codec import CodecOptions, compress, decompress, grid_quality, jpeg_q
from .errors import JpegkitError
from .image import PixelImage, to_pixels
from .jfif import parse_jfif, write_jfif
from .losses import LossWeights
from .metrics import MetricReport, consistency_rmse, perceptual_proxy, psnr
from .numerics import run_numerics_study, study_to_csv
from .pnm import read_pnm, write_pnm
from .quant import table_to_text
from .projection import project
from .restorer import RestoreConfig, restore, sweep_lambda_c
from .toy import (
    fm_identity_check,
    load_model,
    mmse_consistency_deviation,
    posterior_sampler,
    posterior_sampler_checks,
    random_model,
)


def _load_pnm(path: str) -> PixelImage:
    return read_pnm(Path(path).read_bytes())


def _load_jfif(path: str):
    return parse_jfif(Path(path).read_bytes())


def _expand_gray(img: PixelImage) -> PixelImage:
    if img.channels == 3:
        return img
    return PixelImage(np.repeat(img.data, 3, axis=2))


def _opts(args) -> CodecOptions:
    return CodecOptions(
        colorspace="rgb-passthrough" if getattr(args, "passthrough", False) else "ycbcr",
        round_chroma=getattr(args, "round_chroma", False),
    )


def _cmd_encode(args) -> int:
    img = _expand_gray(_load_pnm(args.input))
    grid = compress(img, args.quality)
    Path(args.output).write_bytes(write_jfif(grid))
    return 0


def _cmd_decode(args) -> int:
    grid, _ = _load_jfif(args.input)
    Path(args.output).write_bytes(write_pnm(decompress(grid)))
    if args.dump_tables:
        print(table_to_text(grid.table.luma))
        print(table_to_text(grid.table.chroma))
    return 0


def _cmd_roundtrip(args) -> int:
    img = _load_pnm(args.input)
    opts = _opts(args)
    y = jpeg_q(img, args.quality, opts)
    report = MetricReport(
        name=Path(args.input).name,
        qf=args.quality,
        consistency_rmse=consistency_rmse(y, y, args.quality, opts),
        psnr=psnr(img, y),
        perceptual_proxy=perceptual_proxy([img], [y]),
        n_samples=1,
    )
    print(MetricReport.CSV_HEADER)
    print(report.to_csv_row())
    return 0


def _cmd_project(args) -> int:
    xhat = _load_pnm(args.xhat)
    grid, _ = _load_jfif(args.compressed)
    out = to_pixels(project(xhat, grid))
    Path(args.output).write_bytes(write_pnm(out))
    return 0


def _cmd_metrics(args) -> int:
    xhat = _load_pnm(args.xhat)
    x = _load_pnm(args.reference)
    grid, _ = _load_jfif(args.compressed)
    y = decompress(grid)
    qf = grid_quality(grid)
    report = MetricReport(
        name=Path(args.xhat).name,
        qf=qf,
        consistency_rmse=consistency_rmse(
            xhat, y, qf if isinstance(qf, int) else 1, table=grid.table
        ),
        psnr=psnr(xhat, x),
        perceptual_proxy=perceptual_proxy([xhat], [x]),
        n_samples=1,
    )
    print(MetricReport.CSV_HEADER)
    print(report.to_csv_row())
    return 0


def _restore_config(args, grid) -> RestoreConfig:
    qf = grid_quality(grid)
    weights = LossWeights(lambda_c=args.lambda_c, lambda_prior=args.lambda_prior)
    return RestoreConfig(
        qf=qf if isinstance(qf, int) else 50,
        table=grid.table,
        weights=weights,
        steps=args.steps,
        step_size=args.step_size,
        n_seeds=args.seeds,
        seed=args.seed,
        init_noise_std=args.noise_std,
    )


def _cmd_restore(args) -> int:
    grid, _ = _load_jfif(args.input)
    y = decompress(grid)
    cfg = _restore_config(args, grid)
    outs = restore(y, cfg)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    for k, img in enumerate(outs):
        target = img
        if args.project:
            target = to_pixels(project(img, grid))
        (outdir / f"restored_{k:02d}.ppm").write_bytes(write_pnm(target))
        rmse = consistency_rmse(target, y, cfg.qf, cfg.options, table=grid.table)
        print(f"seed {k}: consistency_rmse={rmse:.4f}")
    return 0


def _cmd_sweep(args) -> int:
    pairs = []
    for jpg in sorted(Path(args.directory).glob("*.jpg")):
        ppm = jpg.with_suffix(".ppm")
        if ppm.exists():
            pairs.append((jpg, ppm))
    if not pairs:
        raise JpegkitError("no stem.jpg/stem.ppm pairs found")
    grids = [parse_jfif(j.read_bytes())[0] for j, _ in pairs]
    if any(g.table != grids[0].table for g in grids):
        raise JpegkitError("sweep inputs must share one quantization table")
    y_set = [decompress(g) for g in grids]
    x_set = [read_pnm(p.read_bytes()) for _, p in pairs]
    qf = grid_quality(grids[0])
    cfg = RestoreConfig(
        qf=qf if isinstance(qf, int) else 50,
        table=grids[0].table,
        weights=LossWeights(lambda_prior=args.lambda_prior),
        steps=args.steps,
        step_size=args.step_size,
        n_seeds=args.seeds,
        seed=args.seed,
        init_noise_std=args.noise_std,
    )
    lambdas = [float(tok) for tok in args.lambdas.split(",")]
    result = sweep_lambda_c(y_set, x_set, lambdas, cfg)
    Path(args.output).write_text(result.to_csv())
    print(result.to_csv(), end="")
    return 0


def _cmd_numerics_study(args) -> int:
    images = []
    root = Path(args.directory)
    for path in sorted(list(root.glob("*.ppm")) + list(root.glob("*.pgm"))):
        images.append(_expand_gray(read_pnm(path.read_bytes())))
    rows = run_numerics_study(images)
    csv_text = study_to_csv(rows)
    if args.output:
        Path(args.output).write_text(csv_text)
    print(csv_text, end="")
    return 0


def _cmd_theorem_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    models = [random_model(rng) for _ in range(args.models)]
    if args.fixture:
        models.append(load_model(Path(args.fixture).read_text()))
    worst_bound = 0.0
    worst_fm = 0.0
    ok = True
    for m in models:
        worst_bound = max(worst_bound, mmse_consistency_deviation(m))
        worst_fm = max(worst_fm, fm_identity_check(m))
    if worst_bound > 0.5 + 1e-12 or worst_fm > 1e-12:
        ok = False
    report = posterior_sampler_checks(models[0], posterior_sampler(models[0]))
    if (
        report.inconsistent_mass > 1e-12
        or report.marginal_tv > 1e-12
        or report.max_posterior_gap > 1e-12
    ):
        ok = False
    print(f"models checked: {len(models)}")
    print(f"max |transform(mmse) - y|_inf = {worst_bound:.15f} (bound 0.5)")
    print(f"max mean-vs-mmse deviation   = {worst_fm:.3e} (bound 1e-12)")
    print(
        "posterior sampler: "
        f"inconsistent_mass={report.inconsistent_mass:.3e} "
        f"marginal_tv={report.marginal_tv:.3e} "
        f"max_gap={report.max_posterior_gap:.3e}"
    )
    print("ALL BOUNDS HOLD" if ok else "BOUND VIOLATED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jpegkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress a PPM/PGM into a baseline .jpg")
    p.add_argument("input")
    p.add_argument("-q", "--quality", type=int, required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="decompress a baseline .jpg into a PPM")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--dump-tables", action="store_true",
                   help="print both quantization tables as zigzag integer lines")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("roundtrip", help="compress-decompress and report metrics")
    p.add_argument("input")
    p.add_argument("-q", "--quality", type=int, required=True)
    p.add_argument("--passthrough", action="store_true", help="skip color conversion")
    p.add_argument("--round-chroma", action="store_true", help="round converted planes to 8 bits")
    p.set_defaults(func=_cmd_roundtrip)

    p = sub.add_parser("project", help="clamp an image into a compressed input's cells")
    p.add_argument("xhat")
    p.add_argument("compressed")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("metrics", help="consistency/psnr/proxy of a restoration")
    p.add_argument("xhat")
    p.add_argument("reference")
    p.add_argument("compressed")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("restore", help="stochastic restoration of a .jpg")
    p.add_argument("input")
    p.add_argument("--lambda-c", type=float, default=10.0)
    p.add_argument("--lambda-prior", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-std", type=float, default=4.0)
    p.add_argument("--project", action="store_true", help="project outputs onto the input's cells")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.set_defaults(func=_cmd_restore)

    p = sub.add_parser("sweep", help="trace the tradeoff across consistency weights")
    p.add_argument("directory", help="directory of stem.jpg/stem.ppm pairs")
    p.add_argument("--lambdas", required=True, help="comma-separated weights")
    p.add_argument("--lambda-prior", type=float, default=20.0)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--step-size", type=float, default=0.1)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-std", type=float, default=4.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("numerics-study", help="lossless-settings color path study")
    p.add_argument("directory")
    p.add_argument("-o", "--output")
    p.set_defaults(func=_cmd_numerics_study)

    p = sub.add_parser("theorem-check", help="run the exact finite-space checks")
    p.add_argument("--models", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fixture", help="optional model fixture file")
    p.set_defaults(func=_cmd_theorem_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except JpegkitError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
