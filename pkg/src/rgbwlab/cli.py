"""Command-line front end: ``mosaic``, ``demosaic``, and ``evaluate``.

Exit codes: 0 success, 1 usage error, 2 data error (I/O, formats, shapes),
3 numerical failure (solver divergence).  Every command is deterministic
given its flags and seed.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import baseline as baseline_mod
from . import formats, report
from .cfa import (
    CfaPattern,
    NoiseSpec,
    add_noise,
    builtin_pattern_names,
    expand_mask,
    forward,
    get_pattern,
)
from .image import RawImage, RgbImage, attach_white, drop_white, synthesize_white
from .metrics import EvalRecord, aggregate, mse, psnr, write_records
from .solver import (
    DivergenceError,
    INIT_ADJOINT,
    INIT_ZEROS,
    SolverConfig,
    chambolle_pock,
    grid_search_lambda,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

METHOD_PROPOSED = "proposed"
METHOD_BASELINE = "baseline"

_KERNEL_PROFILES = {
    "tent": baseline_mod.PROFILE_TENT,
    "gaussian": baseline_mod.PROFILE_GAUSSIAN,
}


class UsageError(Exception):
    """Bad flags or flag values; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through the
    # command's own usage exit code instead.
    def error(self, message):
        raise UsageError(message)


def resolve_pattern(spec: str) -> CfaPattern:
    """Look up a CFA layout: built-in registry name first, then a file path."""
    try:
        return get_pattern(spec)
    except KeyError:
        pass
    path = Path(spec)
    if not path.exists():
        raise UsageError(
            f"unknown pattern {spec!r}: not one of {', '.join(builtin_pattern_names())} "
            "and no such file"
        )
    return formats.load_pattern(path)


def _solver_config(args) -> SolverConfig:
    try:
        return SolverConfig(
            lam=args.lam,
            tau=args.tau,
            sigma=args.sigma,
            iterations=args.iters,
            init=args.init,
            record_trace=getattr(args, "trace", None) is not None,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _kernel(args, pattern: CfaPattern) -> baseline_mod.InterpolationKernel | None:
    if args.kernel is None and args.kernel_radius is None:
        return None  # baseline picks its pattern-sized default
    profile = _KERNEL_PROFILES[args.kernel or "tent"]
    radius = args.kernel_radius
    if radius is None:
        radius = max(pattern.tile_height, pattern.tile_width)
    try:
        return baseline_mod.InterpolationKernel(
            radius=radius, profile=profile, sigma=args.kernel_sigma
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _parse_float_list(text: str, flag: str, minimum: float | None = None) -> list[float]:
    values = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        try:
            value = float(piece)
        except ValueError:
            raise UsageError(f"{flag}: {piece!r} is not a number") from None
        if not np.isfinite(value) or (minimum is not None and value < minimum):
            raise UsageError(f"{flag}: bad value {piece!r}")
        values.append(value)
    if not values:
        raise UsageError(f"{flag}: empty list")
    return values


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda", dest="lam", type=float, default=0.005,
                        help="TV weight (default 0.005)")
    parser.add_argument("--tau", type=float, default=0.25,
                        help="primal step (default 0.25)")
    parser.add_argument("--sigma", type=float, default=0.5,
                        help="dual step (default 0.5)")
    parser.add_argument("--iters", type=int, default=400,
                        help="iteration budget (default 400)")
    parser.add_argument("--init", choices=(INIT_ADJOINT, INIT_ZEROS),
                        default=INIT_ADJOINT, help="primal start (default adjoint)")


def _add_kernel_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kernel", choices=tuple(_KERNEL_PROFILES),
                        default=None, help="baseline interpolation profile")
    parser.add_argument("--kernel-radius", type=int, default=None,
                        help="kernel half-width in pixels (default: tile size)")
    parser.add_argument("--kernel-sigma", type=float, default=1.0,
                        help="gaussian kernel width (default 1.0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rgbwlab",
                     description="RGBW color-filter-array simulation and reconstruction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mosaic", parents=[], help="apply the CFA forward model")
    p.add_argument("--input", required=True, help="RGB raster (png/ppm/pgm)")
    p.add_argument("--pattern", required=True, help="built-in name or pattern file")
    p.add_argument("--noise-std", type=float, default=0.0,
                   help="additive Gaussian noise level (default 0)")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")
    p.add_argument("--white", default="mean",
                   help="'mean' to synthesize W from RGB, or a panchromatic raster path")
    p.add_argument("--output", required=True, help="raw mosaic tensor path")
    p.add_argument("--preview", default=None,
                   help="tinted mosaic raster (default: <output>_preview.png)")
    p.set_defaults(func=cmd_mosaic)

    p = sub.add_parser("demosaic", help="reconstruct RGB from a raw mosaic")
    p.add_argument("--input", required=True, help="raw mosaic tensor")
    p.add_argument("--pattern", required=True, help="built-in name or pattern file")
    p.add_argument("--method", choices=(METHOD_PROPOSED, METHOD_BASELINE),
                   default=METHOD_PROPOSED)
    _add_solver_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--output", required=True, help="reconstructed RGB raster")
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p.add_argument("--trace", default=None,
                   help="per-iteration objective/change CSV (proposed only)")
    p.set_defaults(func=cmd_demosaic)

    p = sub.add_parser("evaluate", help="cross-product benchmark over a dataset")
    p.add_argument("--dataset", required=True, help="directory of reference rasters")
    p.add_argument("--patterns", default="sparse3,kodak,sony",
                   help="comma-separated pattern names/files")
    p.add_argument("--methods", default=f"{METHOD_PROPOSED},{METHOD_BASELINE}",
                   help="comma-separated methods")
    p.add_argument("--noise-std", default="0",
                   help="comma-separated noise levels, e.g. 0,0.05")
    p.add_argument("--seed", type=int, default=0, help="base noise seed")
    p.add_argument("--out", required=True, help="per-image CSV path")
    p.add_argument("--lambda-grid", default=None,
                   help="comma-separated TV weights to grid-search per (pattern, noise)")
    _add_solver_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--figures-dir", default=None,
                   help="write per-image comparison panels here")
    p.set_defaults(func=cmd_evaluate)

    return parser


def cmd_mosaic(args) -> int:
    rgb = formats.load_image(args.input)
    if args.white == "mean":
        scene = synthesize_white(rgb)
    else:
        scene = attach_white(rgb, formats.load_plane(args.white))
    pattern = resolve_pattern(args.pattern)
    mask = expand_mask(pattern, scene.height, scene.width)
    raw = forward(scene, mask)
    if args.noise_std < 0:
        raise UsageError(f"--noise-std must be >= 0, got {args.noise_std}")
    if args.noise_std > 0:
        raw = add_noise(raw, NoiseSpec(std_dev=args.noise_std, seed=args.seed))
    formats.write_tensor(args.output, raw.data)
    out = Path(args.output)
    preview = Path(args.preview) if args.preview else out.with_name(out.stem + "_preview.png")
    formats.save_image(report.colorize_mosaic(raw, mask), preview)
    print(f"wrote {out} and {preview}")
    return EXIT_OK


def _load_raw(path) -> RawImage:
    array = formats.read_tensor(path)
    if array.shape[2] != 1:
        raise formats.TensorFormatError(
            f"expected a single-plane raw tensor, got K={array.shape[2]}"
        )
    return RawImage(array[:, :, 0])


def cmd_demosaic(args) -> int:
    raw = _load_raw(args.input)
    pattern = resolve_pattern(args.pattern)
    mask = expand_mask(pattern, raw.height, raw.width)
    if args.method == METHOD_PROPOSED:
        result = chambolle_pock(raw, mask, _solver_config(args))
        estimate = result.estimate
        if args.trace is not None:
            with open(args.trace, "w", newline="") as stream:
                writer = csv.writer(stream, lineterminator="\n")
                writer.writerow(("iteration", "objective", "relative_change"))
                rows = zip(result.objective_trace, result.iterate_change_trace)
                for i, (value, change) in enumerate(rows, start=1):
                    writer.writerow((i, repr(value), repr(change)))
    else:
        estimate = baseline_mod.baseline_demosaic(raw, pattern, kernel=_kernel(args, pattern))
    formats.save_image(estimate, args.output, bit_depth=args.bit_depth)
    print(f"wrote {args.output}")
    return EXIT_OK


def _evaluate_one(method, scene, mask, pattern, noise_std, seed, cfg, kernel):
    """Mosaic one scene and reconstruct it; returns (estimate, mse, psnr)."""
    raw = forward(scene, mask)
    if noise_std > 0:
        raw = add_noise(raw, NoiseSpec(std_dev=noise_std, seed=seed))
    if method == METHOD_PROPOSED:
        estimate = chambolle_pock(raw, mask, cfg).estimate
    else:
        estimate = baseline_mod.baseline_demosaic(raw, pattern, kernel=kernel)
    reference = drop_white(scene)
    return estimate, mse(estimate, reference), psnr(estimate, reference)


def cmd_evaluate(args) -> int:
    dataset = formats.load_dataset(args.dataset)
    if not dataset:
        raise formats.ImageFormatError(f"no reference images found in {args.dataset}")
    patterns = [resolve_pattern(p.strip()) for p in args.patterns.split(",") if p.strip()]
    if not patterns:
        raise UsageError("--patterns: empty list")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method not in (METHOD_PROPOSED, METHOD_BASELINE):
            raise UsageError(f"--methods: unknown method {method!r}")
    if not methods:
        raise UsageError("--methods: empty list")
    noise_levels = _parse_float_list(args.noise_std, "--noise-std", minimum=0.0)
    lam_grid = (_parse_float_list(args.lambda_grid, "--lambda-grid", minimum=0.0)
                if args.lambda_grid else None)
    base_cfg = _solver_config(args)
    figures_dir = Path(args.figures_dir) if args.figures_dir else None
    if figures_dir:
        figures_dir.mkdir(parents=True, exist_ok=True)

    records: list[EvalRecord] = []
    summary_rows: list[report.SummaryRow] = []
    failures = 0
    for pattern in patterns:
        for noise_std in noise_levels:
            cfg = base_cfg
            if lam_grid and METHOD_PROPOSED in methods:
                noise = (NoiseSpec(std_dev=noise_std, seed=args.seed)
                         if noise_std > 0 else None)
                search = grid_search_lambda(
                    [scene for _, scene in dataset], pattern, lam_grid,
                    base_cfg, noise=noise,
                )
                cfg = SolverConfig(
                    lam=search.best_lam, tau=base_cfg.tau, sigma=base_cfg.sigma,
                    iterations=base_cfg.iterations, init=base_cfg.init,
                )
                print(f"{pattern.name} noise={noise_std:g}: grid search "
                      f"selected lambda={search.best_lam:g}")
            cell_scores: dict[str, list[float]] = {m: [] for m in methods}
            for index, (image_id, scene) in enumerate(dataset):
                mask = expand_mask(pattern, scene.height, scene.width)
                seed = args.seed + index
                estimates: list[tuple[str, RgbImage]] = []
                for method in methods:
                    kernel = _kernel(args, pattern) if method == METHOD_BASELINE else None
                    try:
                        estimate, err, ratio = _evaluate_one(
                            method, scene, mask, pattern, noise_std, seed, cfg, kernel
                        )
                    except Exception as exc:  # per-image failures never kill the batch
                        failures += 1
                        print(
                            f"warning: {image_id} / {pattern.name} / {method} "
                            f"/ noise {noise_std:g} failed: {exc}",
                            file=sys.stderr,
                        )
                        continue
                    records.append(EvalRecord(
                        pattern=pattern.name, method=method, noise_std=noise_std,
                        seed=seed, image_id=image_id, mse=err, psnr=ratio,
                    ))
                    cell_scores[method].append(err)
                    estimates.append((method, estimate))
                if figures_dir and estimates:
                    panel = figures_dir / f"{image_id}_{pattern.name}_n{noise_std:g}.png"
                    report.save_comparison_panel(
                        drop_white(scene), estimates, panel,
                        title=f"{image_id} / {pattern.name} / noise {noise_std:g}",
                    )
            for method in methods:
                if not cell_scores[method]:
                    continue
                mean, std = aggregate(cell_scores[method])
                summary_rows.append(report.SummaryRow(
                    pattern=pattern.name, method=method, noise_std=noise_std,
                    lam=cfg.lam if method == METHOD_PROPOSED else None,
                    count=len(cell_scores[method]), mse_mean=mean, mse_std=std,
                ))

    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as stream:
        write_records(stream, records)
    summary_csv = out.with_name(out.stem + "_summary.csv")
    with open(summary_csv, "w", newline="") as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(("pattern", "method", "noise_std", "lambda",
                         "count", "mse_mean", "mse_std"))
        for row in summary_rows:
            writer.writerow((
                row.pattern, row.method, repr(row.noise_std),
                "" if row.lam is None else repr(row.lam),
                row.count, repr(row.mse_mean), repr(row.mse_std),
            ))
    chart = out.with_name(out.stem + "_summary.png")
    if summary_rows:
        report.save_mse_chart(summary_rows, chart)

    _print_summary_table(summary_rows)
    print(f"wrote {out}, {summary_csv} and {chart}")
    if failures:
        print(f"{failures} image evaluation(s) failed; see warnings above",
              file=sys.stderr)
    return EXIT_OK


def _print_summary_table(rows: list[report.SummaryRow]) -> None:
    """Mean +/- std MSE per (pattern, method, noise) cell."""
    if not rows:
        print("no results")
        return
    header = f"{'pattern':<10} {'method':<10} {'noise':>6}  {'mse mean +/- std':<26} {'n':>3}"
    print(header)
    print("-" * len(header))
    for row in rows:
        print(f"{row.pattern:<10} {row.method:<10} {row.noise_std:>6g}  "
              f"{row.mse_mean:.3e} +/- {row.mse_std:.3e}     {row.count:>3}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (formats.PatternFormatError, formats.ImageFormatError,
            formats.TensorFormatError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
