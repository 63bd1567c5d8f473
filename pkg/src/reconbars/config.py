"""Run configuration: TOML/JSON documents <-> experiment specs.

Input configs may be TOML or JSON with the same structure; every run
writes its fully resolved configuration back out as JSON (the
documented equivalent), so a recorded run can be replayed exactly by
feeding that file back in.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errbars import BootstrapConfig, FullReconMode, JackknifeConfig
from .errors import UnsupportedFormatError
from .harness import ExperimentSpec
from .sampling import SamplingScheme
from .solver import SolverParams


@dataclass
class RunConfig:
    """One experiment spec plus where and how loudly to run it."""

    spec: ExperimentSpec
    out: str | None = None
    threads: int = 1
    verbosity: int = 1


def spec_to_dict(spec: ExperimentSpec) -> dict:
    doc = {
        "image": spec.image,
        "scheme": spec.scheme.value,
        "density": spec.density,
        "sigma": spec.sigma,
        "seed": spec.seed,
        "solver": {
            "mu": spec.solver.mu,
            "beta": spec.solver.beta,
            "iterations": spec.solver.iterations,
        },
    }
    if spec.num_draws is not None:
        doc["num_draws"] = spec.num_draws
    if spec.jackknife is not None:
        doc["jackknife"] = {"calibration": spec.jackknife.calibration}
    if spec.bootstrap is not None:
        bs = {
            "resamples": spec.bootstrap.resamples,
            "mode": spec.bootstrap.full_recon_mode.value,
        }
        if spec.bootstrap.seed is not None:
            bs["seed"] = spec.bootstrap.seed
        doc["bootstrap"] = bs
    return doc


def spec_from_dict(doc: dict) -> ExperimentSpec:
    solver_doc = doc.get("solver", {})
    solver = SolverParams(
        mu=float(solver_doc.get("mu", 1e12)),
        beta=float(solver_doc.get("beta", 10.0)),
        iterations=int(solver_doc.get("iterations", 100)),
    )
    jackknife = None
    if "jackknife" in doc:
        jackknife = JackknifeConfig(
            calibration=float(doc["jackknife"].get("calibration", 1.0))
        )
    bootstrap = None
    if "bootstrap" in doc:
        bs = doc["bootstrap"]
        bootstrap = BootstrapConfig(
            resamples=int(bs.get("resamples", 1000)),
            seed=None if bs.get("seed") is None else int(bs["seed"]),
            full_recon_mode=FullReconMode(bs.get("mode", "solve")),
        )
    return ExperimentSpec(
        image=doc["image"],
        scheme=SamplingScheme(doc["scheme"]),
        density=doc.get("density", "1x"),
        num_draws=None if doc.get("num_draws") is None else int(doc["num_draws"]),
        sigma=float(doc.get("sigma", 0.02)),
        seed=int(doc.get("seed", 0)),
        solver=solver,
        jackknife=jackknife,
        bootstrap=bootstrap,
    )


def load_config_file(path) -> dict:
    """Parse a TOML or JSON config document into a plain dict."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config: {path}")
    suffix = path.suffix.lower()
    if suffix == ".toml":
        with path.open("rb") as handle:
            return tomllib.load(handle)
    if suffix == ".json":
        return json.loads(path.read_text())
    raise UnsupportedFormatError(f"{path}: config must be .toml or .json")


def experiment_dicts(document: dict) -> list[dict]:
    """Extract the experiment table(s) from a config document.

    A single-run config has one ``[experiment]`` table; a batch config
    has an ``[[experiment]]`` array.  Either comes back as a list.
    """
    entry = document.get("experiment")
    if entry is None:
        raise ValueError("config has no [experiment] section")
    if isinstance(entry, dict):
        return [dict(entry)]
    return [dict(e) for e in entry]


def save_resolved_config(
    out_path,
    spec_docs: list[dict],
    *,
    out: str | None,
    threads: int,
    verbosity: int,
):
    """Write the fully resolved configuration as JSON next to outputs."""
    document = {
        "out": out,
        "threads": threads,
        "verbosity": verbosity,
        "experiment": spec_docs[0] if len(spec_docs) == 1 else spec_docs,
    }
    Path(out_path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n")
