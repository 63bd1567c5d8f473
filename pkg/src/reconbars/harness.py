"""Ground-truth validation harness.

Builds measurements from a known image, reconstructs, runs the error
estimators, and scores the estimated error maps against the actual
error.  Everything downstream of the master seed is deterministic, and
every derived seed is recorded so any panel can be recomputed on its
own.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter

from .errbars import BootstrapConfig, JackknifeConfig, bootstrap_map, jackknife_map
from .errors import DimsMismatchError, ExperimentStageError, OverwriteRefusedError
from .grids import GridDims
from .kspace import NoiseSpec, add_measurement_noise, forward_transform, normalize_image
from .phantom import shepp_logan
from .rasters import RenderMode, load_image, render, save_image, save_map
from .sampling import (
    LineSet,
    SamplingPlan,
    SamplingScheme,
    draw_sampling_set,
    mask_from_set,
)
from .seeds import BOOTSTRAP_STREAM, NOISE_STREAM, SAMPLING_STREAM, substream_seed
from .solver import SolverParams, reconstruct

# Pixels count as covered when the actual error is within this multiple
# of the locally blurred estimate.
_COVERAGE_FACTOR = 3.0


def actual_error(original: np.ndarray, reconstruction: np.ndarray) -> np.ndarray:
    """Signed ground-truth error map: original minus reconstruction."""
    original = np.asarray(original, dtype=np.float64)
    reconstruction = np.asarray(reconstruction, dtype=np.float64)
    if original.shape != reconstruction.shape:
        raise DimsMismatchError(
            f"original {original.shape} vs reconstruction {reconstruction.shape}"
        )
    return original - reconstruction


def agreement_metrics(actual: np.ndarray, estimated: np.ndarray) -> dict:
    """Scalar agreement between an actual and an estimated error map.

    Returns
    -------
    dict with keys
        ``pearson_abs``: Pearson correlation of the absolute values
        (0.0, flagged, when either side is constant);
        ``ratio_l2``: ||estimated|| / ||actual|| (+inf, flagged, for a
        zero actual map);
        ``coverage``: fraction of pixels whose actual error is at most
        3x the 3x3 box blur of |estimated|;
        ``pearson_degenerate``, ``zero_actual``: the flags.
    """
    actual = np.asarray(actual, dtype=np.float64)
    estimated = np.asarray(estimated, dtype=np.float64)
    if actual.shape != estimated.shape:
        raise DimsMismatchError(f"actual {actual.shape} vs estimated {estimated.shape}")
    abs_actual = np.abs(actual)
    abs_estimated = np.abs(estimated)

    actual_norm = np.linalg.norm(actual)
    zero_actual = actual_norm == 0.0
    ratio = np.inf if zero_actual else float(np.linalg.norm(estimated) / actual_norm)

    degenerate = bool(abs_actual.std() == 0.0 or abs_estimated.std() == 0.0)
    if degenerate:
        pearson = 0.0
    else:
        pearson = float(np.corrcoef(abs_actual.ravel(), abs_estimated.ravel())[0, 1])

    local = uniform_filter(abs_estimated, size=3, mode="nearest")
    coverage = float(np.mean(abs_actual <= _COVERAGE_FACTOR * local))

    return {
        "pearson_abs": pearson,
        "ratio_l2": ratio,
        "coverage": coverage,
        "pearson_degenerate": degenerate,
        "zero_actual": bool(zero_actual),
    }


@dataclass(frozen=True)
class ExperimentSpec:
    """A complete, serializable description of one validation run.

    ``image`` is either a file path or ``"phantom:<rows>x<cols>"``.
    All stage seeds derive from the single master ``seed`` through the
    documented substreams (noise, sampling draw, bootstrap); a
    :class:`BootstrapConfig` whose own seed is ``None`` picks up the
    derived one when the experiment runs.
    """

    image: str
    scheme: SamplingScheme
    density: str = "1x"
    num_draws: int | None = None
    sigma: float = 0.02
    seed: int = 0
    solver: SolverParams = field(default_factory=SolverParams)
    jackknife: JackknifeConfig | None = None
    bootstrap: BootstrapConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", SamplingScheme(self.scheme))
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass
class ExperimentReport:
    """Everything one run produced: the five panels, agreement metrics,
    per-stage timings, and the fully resolved spec."""

    spec: ExperimentSpec
    original: np.ndarray
    reconstruction: np.ndarray
    actual_error: np.ndarray
    jackknife: np.ndarray | None
    bootstrap: np.ndarray | None
    line_set: LineSet
    metrics: dict
    timings: dict


@dataclass
class ExperimentFailure:
    """A failed batch entry: which spec, which stage, and the message."""

    index: int
    image: str
    stage: str
    message: str


def resolve_image(reference: str) -> np.ndarray:
    """Turn an image reference into pixel data.

    ``"phantom:64x64"`` rasterizes the bundled phantom; anything else is
    treated as a path and loaded from disk.
    """
    if reference.startswith("phantom:"):
        rows, _, cols = reference[len("phantom:") :].partition("x")
        try:
            dims = GridDims(int(rows), int(cols))
        except ValueError as exc:
            raise ValueError(f"bad phantom reference {reference!r}: {exc}") from exc
        return shepp_logan(dims)
    return load_image(reference)


def _stage(timings: dict, name: str):
    class _Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, exc_type, exc, tb):
            timings[name] = time.perf_counter() - self.start
            if exc is not None and not isinstance(exc, ExperimentStageError):
                raise ExperimentStageError(name, str(exc)) from exc
            return False

    return _Timer()


def run_experiment(
    spec: ExperimentSpec,
    *,
    image: np.ndarray | None = None,
    line_set: LineSet | None = None,
    threads: int = 1,
    solver_diagnostics: list | None = None,
) -> ExperimentReport:
    """Run the full measure-reconstruct-estimate-score pipeline.

    ``image`` and ``line_set`` override the spec's image reference and
    the seeded sampling draw (library-level hooks; config-driven runs
    always derive both from the spec).  ``solver_diagnostics``, if a
    list, collects per-iteration diagnostics of the base
    reconstruction.
    """
    timings: dict = {}

    with _stage(timings, "load"):
        pixels = resolve_image(spec.image) if image is None else np.asarray(image)
        original = normalize_image(pixels)
        dims = GridDims(*original.shape)

    with _stage(timings, "measure"):
        clean = forward_transform(original)
        noise = NoiseSpec(sigma=spec.sigma, seed=substream_seed(spec.seed, NOISE_STREAM))
        measured = add_measurement_noise(clean, noise)

    with _stage(timings, "sample"):
        draw_seed = substream_seed(spec.seed, SAMPLING_STREAM)
        if spec.num_draws is not None:
            plan = SamplingPlan(
                scheme=spec.scheme,
                dims=dims,
                num_draws=spec.num_draws,
                density=spec.density,
                seed=draw_seed,
            )
        else:
            plan = SamplingPlan.with_default_draws(
                spec.scheme, dims, density=spec.density, seed=draw_seed
            )
        sampling_set = draw_sampling_set(plan) if line_set is None else line_set

    with _stage(timings, "reconstruct"):
        recon = reconstruct(
            measured,
            mask_from_set(sampling_set),
            spec.solver,
            collect=solver_diagnostics,
        )

    jackknife = None
    if spec.jackknife is not None:
        with _stage(timings, "jackknife"):
            jackknife = jackknife_map(
                measured, sampling_set, spec.solver, spec.jackknife, threads=threads
            )

    bootstrap = None
    bootstrap_cfg = spec.bootstrap
    if bootstrap_cfg is not None:
        if bootstrap_cfg.seed is None:
            bootstrap_cfg = replace(
                bootstrap_cfg, seed=substream_seed(spec.seed, BOOTSTRAP_STREAM)
            )
        with _stage(timings, "bootstrap"):
            bootstrap = bootstrap_map(
                measured,
                sampling_set,
                plan,
                spec.solver,
                bootstrap_cfg,
                threads=threads,
            )

    with _stage(timings, "metrics"):
        error = actual_error(original, recon)
        original_norm = np.linalg.norm(original)
        metrics = {
            "recon_rel_l2": (
                float(np.linalg.norm(error) / original_norm)
                if original_norm > 0
                else 0.0
            ),
            "num_lines": sampling_set.num_lines,
        }
        for name, estimate in (("jackknife", jackknife), ("bootstrap", bootstrap)):
            if estimate is None:
                continue
            for key, value in agreement_metrics(error, estimate).items():
                metrics[f"{name}_{key}"] = value

    resolved = replace(spec, num_draws=plan.num_draws, bootstrap=bootstrap_cfg)
    return ExperimentReport(
        spec=resolved,
        original=original,
        reconstruction=recon,
        actual_error=error,
        jackknife=jackknife,
        bootstrap=bootstrap,
        line_set=sampling_set,
        metrics=metrics,
        timings=timings,
    )


_CSV_METRICS = (
    "recon_rel_l2",
    "jackknife_pearson_abs",
    "jackknife_ratio_l2",
    "jackknife_coverage",
    "bootstrap_pearson_abs",
    "bootstrap_ratio_l2",
    "bootstrap_coverage",
)
_CSV_STAGES = ("load", "measure", "sample", "reconstruct", "jackknife", "bootstrap", "metrics")


def run_batch(
    specs,
    *,
    threads: int = 1,
    csv_path=None,
) -> list:
    """Run a sequence of experiments, isolating per-spec failures.

    The result list parallels ``specs``: an :class:`ExperimentReport`
    where the run succeeded, an :class:`ExperimentFailure` where it did
    not.  When ``csv_path`` is given, a one-row-per-spec metrics
    summary lands there.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("need at least one spec")
    results = []
    for index, spec in enumerate(specs):
        try:
            results.append(run_experiment(spec, threads=threads))
        except ExperimentStageError as exc:
            results.append(
                ExperimentFailure(
                    index=index, image=spec.image, stage=exc.stage, message=str(exc)
                )
            )
    if csv_path is not None:
        write_batch_csv(results, csv_path)
    return results


def write_batch_csv(results, path):
    """Metrics summary across a batch, one row per spec."""
    path = Path(path)
    header = (
        ["id", "image", "scheme", "density", "sigma", "num_draws", "resamples", "num_lines"]
        + list(_CSV_METRICS)
        + [f"t_{stage}" for stage in _CSV_STAGES]
        + ["error"]
    )
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for index, result in enumerate(results):
            if isinstance(result, ExperimentFailure):
                row = [index, result.image] + [""] * (len(header) - 3)
                row.append(f"{result.stage}: {result.message}")
                writer.writerow(row)
                continue
            spec = result.spec
            row = [
                index,
                spec.image,
                spec.scheme.value,
                spec.density,
                spec.sigma,
                spec.num_draws,
                spec.bootstrap.resamples if spec.bootstrap else "",
                result.metrics.get("num_lines", ""),
            ]
            row += [result.metrics.get(name, "") for name in _CSV_METRICS]
            row += [round(result.timings.get(stage, 0.0), 3) for stage in _CSV_STAGES]
            row.append("")
            writer.writerow(row)


def save_report(report: ExperimentReport, outdir, *, force: bool = False) -> dict:
    """Write a report's panels and metadata into a directory.

    Intensity panels go out as rendered PGM; error panels additionally
    as raw ``.f32`` dumps with provenance sidecars.  ``timings.json`` is
    the only file that varies between identical reruns.  Returns a name
    -> path map of everything written.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = report.spec
    written = {}

    def _panel_pgm(name, values, mode):
        p = outdir / f"{name}.pgm"
        save_image(render(values, mode), p, force=force)
        written[name + "_pgm"] = p

    base_meta = {
        "image": spec.image,
        "scheme": spec.scheme.value,
        "density": spec.density,
        "num_draws": spec.num_draws,
        "sigma": spec.sigma,
        "master_seed": spec.seed,
        "solver": {
            "mu": spec.solver.mu,
            "beta": spec.solver.beta,
            "iterations": spec.solver.iterations,
        },
    }

    _panel_pgm("original", report.original, RenderMode.INTENSITY)
    _panel_pgm("reconstruction", report.reconstruction, RenderMode.INTENSITY)
    _panel_pgm("actual_error", report.actual_error, RenderMode.SIGNED_ERROR)

    maps = [
        ("reconstruction", report.reconstruction, {"content": "reconstruction"}),
        ("actual_error", report.actual_error, {"content": "actual-error"}),
    ]
    if report.jackknife is not None:
        _panel_pgm("jackknife", report.jackknife, RenderMode.SIGNED_ERROR)
        maps.append(
            (
                "jackknife",
                report.jackknife,
                {
                    "content": "error-estimate",
                    "estimator": "jackknife",
                    "factor": 2.0,
                    "calibration": spec.jackknife.calibration,
                },
            )
        )
    if report.bootstrap is not None:
        _panel_pgm("bootstrap", report.bootstrap, RenderMode.SIGNED_ERROR)
        maps.append(
            (
                "bootstrap",
                report.bootstrap,
                {
                    "content": "error-estimate",
                    "estimator": "bootstrap",
                    "factor": 3.0,
                    "resamples": spec.bootstrap.resamples,
                    "bootstrap_seed": spec.bootstrap.seed,
                    "full_recon_mode": spec.bootstrap.full_recon_mode.value,
                },
            )
        )
    for name, values, meta in maps:
        p = outdir / f"{name}.f32"
        save_map(values, p, meta={**base_meta, **meta}, force=force)
        written[name + "_f32"] = p

    lineset_path = outdir / "lineset.json"
    if lineset_path.exists() and not force:
        raise OverwriteRefusedError(f"{lineset_path} exists; pass force=True")
    lineset_path.write_text(report.line_set.to_json() + "\n")
    written["lineset"] = lineset_path

    metrics_path = outdir / "metrics.json"
    metrics_path.write_text(json.dumps(report.metrics, indent=2, sort_keys=True) + "\n")
    written["metrics"] = metrics_path

    timings_path = outdir / "timings.json"
    timings_path.write_text(json.dumps(report.timings, indent=2, sort_keys=True) + "\n")
    written["timings"] = timings_path
    return written
