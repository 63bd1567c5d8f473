"""Command-line surface.

Subcommands: ``phantom``, ``mask``, ``reconstruct``, ``jackknife``,
``bootstrap``, ``evaluate``, ``batch``, ``render``.  Values given on
the command line override config-file values, and every run writes its
fully resolved configuration next to its outputs.  Exit codes: 0 on
success, 1 on usage errors, 2 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .errbars import BootstrapConfig, FullReconMode, JackknifeConfig
from .errors import ReconbarsError
from .grids import GridDims
from .harness import ExperimentFailure, run_batch, run_experiment, save_report
from .phantom import shepp_logan
from .rasters import RenderMode, load_map, render, save_image, save_map
from .sampling import SamplingPlan, SamplingScheme, draw_sampling_set, mask_from_set


class _Parser(argparse.ArgumentParser):
    # Usage errors exit 1 (argparse's default of 2 is reserved here for
    # runtime failures).
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_dims(text: str) -> GridDims:
    rows, sep, cols = text.lower().partition("x")
    if not sep:
        raise argparse.ArgumentTypeError(f"dims must look like 64x64, got {text!r}")
    try:
        return GridDims(int(rows), int(cols))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_common(parser: _Parser):
    parser.add_argument("--config", help="TOML or JSON config file")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--threads", type=int, help="worker cap for replicate solves")
    loud = parser.add_mutually_exclusive_group()
    loud.add_argument("--quiet", action="store_true", help="suppress progress output")
    loud.add_argument("--verbose", action="store_true", help="extra output and per-iteration solver CSV")
    parser.add_argument("--force", action="store_true", help="overwrite existing outputs")


def _add_experiment_flags(parser: _Parser):
    parser.add_argument("--image", help="image path or phantom:<rows>x<cols>")
    parser.add_argument("--scheme", choices=[s.value for s in SamplingScheme])
    parser.add_argument("--density", choices=["1x", "2x"])
    parser.add_argument("--num-draws", type=int, dest="num_draws")
    parser.add_argument("--sigma", type=float, help="measurement noise standard deviation")
    parser.add_argument("--iterations", type=int, help="solver iteration count")
    parser.add_argument("--calibration", type=float, help="jackknife calibration constant")
    parser.add_argument("--resamples", type=int, help="bootstrap resample count")
    parser.add_argument(
        "--mode",
        choices=[m.value for m in FullReconMode],
        help="bootstrap full-grid reconstruction mode",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="reconbars", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("phantom", help="write the synthetic head phantom")
    p.add_argument("--dims", type=_parse_dims, required=True)
    p.add_argument("--out", required=True, help="output image (.pgm or .png)")
    p.add_argument("--depth", type=int, choices=[8, 16], default=8)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_phantom)

    p = sub.add_parser("mask", help="draw a sampling set and write its mask image")
    p.add_argument("--scheme", choices=[s.value for s in SamplingScheme], required=True)
    p.add_argument("--dims", type=_parse_dims, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", choices=["1x", "2x"], default="1x")
    p.add_argument("--num-draws", type=int, dest="num_draws")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_mask)

    for name, help_text in (
        ("reconstruct", "reconstruct from an undersampled measurement"),
        ("jackknife", "reconstruct and compute the leave-one-out error map"),
        ("bootstrap", "reconstruct and compute the resampled error map"),
        ("evaluate", "full ground-truth validation run"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        _add_experiment_flags(p)
        p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("batch", help="run every experiment in a config file")
    _add_common(p)
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("render", help="render a stored .f32 map to 8-bit grayscale")
    p.add_argument("--input", required=True, help=".f32 map file")
    p.add_argument(
        "--mode",
        choices=[m.value for m in RenderMode],
        default=RenderMode.SIGNED_ERROR.value,
    )
    p.add_argument("--out", required=True, help="output image (.pgm or .png)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=_cmd_render)

    return parser


def _say(args, message):
    if not getattr(args, "quiet", False):
        print(message)


def _cmd_phantom(args) -> int:
    img = shepp_logan(args.dims)
    if args.depth == 8:
        raster = render(img, RenderMode.INTENSITY)
    else:
        raster = np.floor(np.clip(img, 0.0, 1.0) * 65535.0 + 0.5).astype(np.uint16)
    save_image(raster, args.out, force=args.force)
    _say(args, f"wrote {args.out}")
    return 0


def _cmd_mask(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.num_draws is not None:
        plan = SamplingPlan(
            scheme=args.scheme,
            dims=args.dims,
            num_draws=args.num_draws,
            density=args.density,
            seed=args.seed,
        )
    else:
        plan = SamplingPlan.with_default_draws(
            args.scheme, args.dims, density=args.density, seed=args.seed
        )
    line_set = draw_sampling_set(plan)
    mask = mask_from_set(line_set)
    save_image(render(mask.astype(float), RenderMode.INTENSITY), outdir / "mask.pgm", force=args.force)
    (outdir / "lineset.json").write_text(line_set.to_json() + "\n")
    cfgmod.save_resolved_config(
        outdir / "config.json",
        [
            {
                "command": "mask",
                "scheme": plan.scheme.value,
                "dims": [plan.dims.rows, plan.dims.cols],
                "density": plan.density,
                "num_draws": plan.num_draws,
                "seed": plan.seed,
            }
        ],
        out=str(outdir),
        threads=1,
        verbosity=1,
    )
    _say(args, f"wrote {outdir}/mask.pgm ({line_set.num_lines} lines)")
    return 0


def _resolve_run(args) -> tuple[dict, dict]:
    """Merge config-file values with command-line overrides.

    Returns the experiment dict and the run-level settings (out,
    threads, verbosity); flags win wherever both are given.
    """
    document: dict = {}
    if args.config:
        document = cfgmod.load_config_file(args.config)
    doc = (
        cfgmod.experiment_dicts(document)[0] if document.get("experiment") else {}
    )
    if args.image is not None:
        doc["image"] = args.image
    if args.scheme is not None:
        doc["scheme"] = args.scheme
    if args.density is not None:
        doc["density"] = args.density
    if args.num_draws is not None:
        doc["num_draws"] = args.num_draws
    if args.sigma is not None:
        doc["sigma"] = args.sigma
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.iterations is not None:
        doc.setdefault("solver", {})["iterations"] = args.iterations
    if args.calibration is not None:
        doc.setdefault("jackknife", {})["calibration"] = args.calibration
    if args.resamples is not None:
        doc.setdefault("bootstrap", {})["resamples"] = args.resamples
    if args.mode is not None:
        doc.setdefault("bootstrap", {})["mode"] = args.mode
    if "image" not in doc:
        raise ReconbarsError("no image given (use --image or a config file)")
    if "scheme" not in doc:
        raise ReconbarsError("no sampling scheme given (use --scheme or a config file)")

    if args.quiet:
        verbosity = 0
    elif args.verbose:
        verbosity = 2
    else:
        verbosity = int(document.get("verbosity", 1))
    run = {
        "out": args.out or document.get("out") or f"{args.command}-out",
        "threads": args.threads if args.threads is not None else int(document.get("threads", 1)),
        "verbosity": verbosity,
    }
    return doc, run


def _select_estimators(command: str, spec):
    """The subcommand decides which estimator panels to produce."""
    if command == "reconstruct":
        return replace(spec, jackknife=None, bootstrap=None)
    if command == "jackknife":
        return replace(spec, jackknife=spec.jackknife or JackknifeConfig(), bootstrap=None)
    if command == "bootstrap":
        return replace(spec, jackknife=None, bootstrap=spec.bootstrap or BootstrapConfig())
    if spec.jackknife is None and spec.bootstrap is None:
        return replace(spec, jackknife=JackknifeConfig(), bootstrap=BootstrapConfig())
    return spec


def _cmd_experiment(args) -> int:
    doc, run = _resolve_run(args)
    spec = _select_estimators(args.command, cfgmod.spec_from_dict(doc))
    outdir = Path(run["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    verbose = run["verbosity"] >= 2
    diagnostics: list | None = [] if verbose else None

    report = run_experiment(spec, threads=run["threads"], solver_diagnostics=diagnostics)
    save_report(report, outdir, force=args.force)
    cfgmod.save_resolved_config(
        outdir / "config.json",
        [cfgmod.spec_to_dict(report.spec)],
        out=str(outdir),
        threads=run["threads"],
        verbosity=run["verbosity"],
    )
    if diagnostics is not None:
        _write_diagnostics_csv(diagnostics, outdir / "solver_diagnostics.csv")
    if verbose:
        for key in sorted(report.metrics):
            print(f"  {key} = {report.metrics[key]}")
    if run["verbosity"] >= 1:
        print(f"wrote {outdir} ({report.line_set.num_lines} lines retained)")
    return 0


def _write_diagnostics_csv(diagnostics, path):
    with Path(path).open("w", newline="") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=["iteration", "u_step_residual", "objective", "fidelity_rms"]
        )
        writer.writeheader()
        writer.writerows(diagnostics)


def _cmd_batch(args) -> int:
    if not args.config:
        raise ReconbarsError("batch needs --config")
    document = cfgmod.load_config_file(args.config)
    docs = cfgmod.experiment_dicts(document)
    if args.seed is not None:
        for doc in docs:
            doc["seed"] = args.seed
    specs = [cfgmod.spec_from_dict(doc) for doc in docs]
    outdir = Path(args.out or document.get("out") or "batch-out")
    outdir.mkdir(parents=True, exist_ok=True)
    threads = args.threads if args.threads is not None else int(document.get("threads", 1))

    results = run_batch(specs, threads=threads, csv_path=outdir / "summary.csv")
    failures = 0
    for index, result in enumerate(results):
        if isinstance(result, ExperimentFailure):
            failures += 1
            _say(args, f"[{index}] FAILED at {result.stage}: {result.message}")
            continue
        save_report(result, outdir / f"run-{index:03d}", force=args.force)
        _say(args, f"[{index}] ok: {result.spec.image}")
    cfgmod.save_resolved_config(
        outdir / "config.json",
        [cfgmod.spec_to_dict(r.spec) if not isinstance(r, ExperimentFailure) else docs[i]
         for i, r in enumerate(results)],
        out=str(outdir),
        threads=threads,
        verbosity=2 if args.verbose else (0 if args.quiet else 1),
    )
    _say(args, f"wrote {outdir}/summary.csv ({failures} failure(s))")
    return 0


def _cmd_render(args) -> int:
    values, _meta = load_map(args.input)
    save_image(render(values, RenderMode(args.mode)), args.out, force=args.force)
    if not getattr(args, "quiet", False):
        print(f"wrote {args.out}")
    return 0


def cli_main(argv=None) -> int:
    """Parse and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ReconbarsError, OSError, ValueError) as exc:
        print(f"reconbars: error: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
