"""Command-line front end: compress, decompress, analyze, bench, phantom.

Exit codes: 0 success, 1 usage error, 2 format/corruption error. Output
files are written to a temporary sibling and renamed on success, so a
failure never leaves a partial file behind. CSV schemas are documented in
docs/CLI.md.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import codec, imgio, lifting, prediction, stats
from ._backend import backend_name
from .errors import CodecError

# published results on comparable 128x128 medical corpora; context only
REFERENCE_LINES = [
    "reference (literature, non-binding): MRI avg 1.48 bpp, CT avg 1.42 bpp",
]


def _write_atomic(path: Path, data: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _config_from_args(args) -> codec.CodecConfig:
    return codec.CodecConfig(levels=args.levels, mode=args.selection,
                             predict=not args.no_predict)


def _cmd_compress(args) -> int:
    img = imgio.read_pgm(Path(args.input).read_bytes())
    container = codec.compress(img, _config_from_args(args))
    _write_atomic(Path(args.output), container)
    return 0


def _cmd_decompress(args) -> int:
    img = codec.decompress(Path(args.input).read_bytes())
    _write_atomic(Path(args.output), imgio.write_pgm(img))
    return 0


def _cmd_phantom(args) -> int:
    img = imgio.make_phantom(args.kind, args.size, args.size, args.seed)
    _write_atomic(Path(args.output), imgio.write_pgm(img))
    return 0


def _cmd_analyze(args) -> int:
    """Per-band prediction CSVs plus one combined correlation CSV."""
    img = imgio.read_pgm(Path(args.input).read_bytes())
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pyr = lifting.forward(img, args.levels)
    corr_rows = ["band_id,role_a,role_b,r"]
    role_labels = [r.name for r in prediction.PredictorRole] + ["DEPENDENT"]
    for band in pyr.detail_bands:
        ctx = prediction.extract_context(pyr, band)
        model = prediction.select_predictors(ctx, args.selection)
        predicted = prediction.predict_many(model, ctx.columns)
        residuals = ctx.dependent - predicted
        rows, cols = ctx.shape
        rr, cc = np.divmod(np.arange(rows * cols), cols)
        lines = ["band_id,row,col,actual,predicted,residual"]
        lines.extend(
            f"{ctx.band_id},{r},{c},{a},{p},{e}"
            for r, c, a, p, e in zip(rr.tolist(), cc.tolist(),
                                     ctx.dependent.tolist(), predicted.tolist(),
                                     residuals.tolist()))
        _write_atomic(out_dir / f"band_{ctx.band_id}_prediction.csv",
                      ("\n".join(lines) + "\n").encode())
        labeled = [(label, ctx.columns[:, i]) for i, label in
                   enumerate(role_labels[:-1])] + [("DEPENDENT", ctx.dependent)]
        matrix = stats.correlation_matrix(labeled)
        for i, la in enumerate(matrix.labels):
            for j, lb in enumerate(matrix.labels):
                v = matrix.entries[i][j]
                corr_rows.append(
                    f"{ctx.band_id},{la},{lb},{'NA' if v is None else repr(v)}")
    _write_atomic(out_dir / "correlations.csv",
                  ("\n".join(corr_rows) + "\n").encode())
    return 0


def _bench_one(path: Path, cfg_name: str, cfg: codec.CodecConfig, repeats: int):
    img = imgio.read_pgm(path.read_bytes())
    container = codec.compress(img, cfg)
    enc_ms = []
    dec_ms = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        codec.compress(img, cfg)
        t1 = time.perf_counter()
        decoded = codec.decompress(container)
        t2 = time.perf_counter()
        enc_ms.append((t1 - t0) * 1e3)
        dec_ms.append((t2 - t1) * 1e3)
        if decoded != img:
            raise CodecError(f"lossless contract violated on {path.name}")
    bpp = 8.0 * len(container) / (img.width * img.height)
    return (path.name, cfg_name, bpp, min(enc_ms), min(dec_ms))


def _cmd_bench(args) -> int:
    corpus = sorted(Path(args.corpus).glob("*.pgm"))
    if not corpus:
        print(f"no .pgm files in {args.corpus}", file=sys.stderr)
        return 1
    configs = [("predict-greedy", codec.CodecConfig()),
               ("no-predict", codec.CodecConfig(predict=False))]
    if args.exhaustive:
        configs.append(("predict-exhaustive", codec.CodecConfig(mode="exhaustive")))
    jobs = [(path, name, cfg) for path in corpus for name, cfg in configs]
    threads = int(os.environ.get("MWP_THREADS", "0") or "0")
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor  # noqa: PLC0415
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda j: _bench_one(j[0], j[1], j[2], args.repeats), jobs))
    else:
        rows = [_bench_one(path, name, cfg, args.repeats)
                for path, name, cfg in jobs]
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = ["image,config,bpp,enc_ms,dec_ms"]
    lines.extend(f"{img},{cfg},{bpp:.6f},{enc:.3f},{dec:.3f}"
                 for img, cfg, bpp, enc, dec in rows)
    _write_atomic(Path(args.out_csv), ("\n".join(lines) + "\n").encode())
    name_w = max(len(r[0]) for r in rows)
    print(f"{'image':{name_w}s} {'config':18s} {'bpp':>8s} {'enc_ms':>9s} {'dec_ms':>9s}")
    for img, cfg, bpp, enc, dec in rows:
        print(f"{img:{name_w}s} {cfg:18s} {bpp:8.4f} {enc:9.2f} {dec:9.2f}")
    for line in REFERENCE_LINES:
        print(f"# {line}")
    print(f"# backend: {backend_name()}, repeats: {args.repeats}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwp",
        description="Lossless wavelet-prediction codec for grayscale PGM images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="PGM -> .mwp container")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--selection", choices=("greedy", "exhaustive"), default="greedy")
    p.add_argument("--no-predict", action="store_true",
                   help="zero models everywhere (A/B baseline)")
    p.set_defaults(func=_cmd_compress)

    p = sub.add_parser("decompress", help=".mwp container -> PGM")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=_cmd_decompress)

    p = sub.add_parser("analyze",
                       help="per-band predicted-vs-actual and correlation CSVs")
    p.add_argument("input")
    p.add_argument("out_dir")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--selection", choices=("greedy", "exhaustive"), default="greedy")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("bench", help="compress/decompress a corpus, emit CSV")
    p.add_argument("corpus", help="directory of .pgm files")
    p.add_argument("out_csv")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--exhaustive", action="store_true",
                   help="also bench exhaustive predictor selection")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("phantom", help="generate a synthetic test image")
    p.add_argument("kind", choices=imgio.PHANTOM_KINDS)
    p.add_argument("output")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_phantom)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except CodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
