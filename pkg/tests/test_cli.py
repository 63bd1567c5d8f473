import json
from pathlib import Path

import numpy as np
import pytest

from reconbars import load_image, load_map, render, RenderMode, save_map
from reconbars.cli import cli_main


TINY_CONFIG = """\
[experiment]
image = "phantom:24x24"
scheme = "radial"
num_draws = 4
sigma = 0.02
seed = 5

[experiment.solver]
iterations = 12

[experiment.jackknife]
calibration = 1.0

[experiment.bootstrap]
resamples = 3
"""


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_CONFIG)
    return path


def _tree_bytes(root, ignore=("timings.json",)):
    """Byte content of every file under root, keyed by relative path."""
    root = Path(root)
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file() and p.name not in ignore
    }


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        assert cli_main(["phantom", "--dims", "24x24", "--nope"]) == 1

    def test_unknown_subcommand_is_usage_error(self):
        assert cli_main(["frobnicate"]) == 1

    def test_missing_required_flag_is_usage_error(self):
        assert cli_main(["phantom", "--dims", "24x24"]) == 1  # no --out

    def test_runtime_error_is_two(self, tmp_path):
        code = cli_main(
            ["reconstruct", "--image", str(tmp_path / "missing.pgm"),
             "--scheme", "radial", "--out", str(tmp_path / "o")]
        )
        assert code == 2

    def test_success_is_zero(self, tmp_path):
        assert cli_main(["phantom", "--dims", "24x24", "--out", str(tmp_path / "p.pgm")]) == 0

    def test_help_exits_zero(self, capsys):
        assert cli_main(["--help"]) == 0


class TestPhantomCommand:
    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.pgm", tmp_path / "b.pgm"
        assert cli_main(["phantom", "--dims", "32x48", "--out", str(a)]) == 0
        assert cli_main(["phantom", "--dims", "32x48", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        img = load_image(a)
        assert img.shape == (32, 48)

    def test_refuses_overwrite(self, tmp_path):
        p = tmp_path / "p.pgm"
        assert cli_main(["phantom", "--dims", "24x24", "--out", str(p)]) == 0
        assert cli_main(["phantom", "--dims", "24x24", "--out", str(p)]) == 2
        assert cli_main(["phantom", "--dims", "24x24", "--out", str(p), "--force"]) == 0

    def test_16_bit_depth(self, tmp_path):
        p = tmp_path / "p.pgm"
        assert cli_main(["phantom", "--dims", "24x24", "--out", str(p), "--depth", "16"]) == 0
        assert b"65535" in p.read_bytes()[:20]


class TestMaskCommand:
    def test_outputs(self, tmp_path):
        out = tmp_path / "m"
        code = cli_main(
            ["mask", "--scheme", "radial", "--dims", "32x32", "--seed", "3",
             "--out", str(out), "--quiet"]
        )
        assert code == 0
        assert (out / "mask.pgm").exists()
        lineset = json.loads((out / "lineset.json").read_text())
        assert lineset["scheme"] == "radial"
        assert len(lineset["drawn"]) <= 13  # round(64/5) draws
        resolved = json.loads((out / "config.json").read_text())
        assert resolved["experiment"]["num_draws"] == 13

    def test_mask_image_is_binary(self, tmp_path):
        out = tmp_path / "m"
        cli_main(["mask", "--scheme", "horizontal", "--dims", "64x64",
                  "--seed", "1", "--out", str(out), "--quiet"])
        img = load_image(out / "mask.pgm")
        assert set(np.unique(img)) <= {0.0, 1.0}


class TestRenderCommand:
    def test_round_trip_matches_library_render(self, tmp_path, rng):
        values = rng.standard_normal((16, 16)).astype(np.float32)
        src = tmp_path / "m.f32"
        save_map(values, src)
        out = tmp_path / "m.pgm"
        assert cli_main(["render", "--input", str(src), "--mode", "signed-error",
                         "--out", str(out)]) == 0
        expected = render(np.asarray(load_map(src)[0], dtype=np.float64),
                          RenderMode.SIGNED_ERROR)
        got = (255 * load_image(out)).astype(np.uint8) if False else None
        raw = out.read_bytes()
        header_end = raw.index(b"255\n") + 4
        assert raw[header_end:] == expected.tobytes()


class TestEvaluateCommand:
    def test_full_run_outputs(self, tiny_config, tmp_path):
        out = tmp_path / "run"
        code = cli_main(["evaluate", "--config", str(tiny_config),
                         "--out", str(out), "--quiet"])
        assert code == 0
        for name in (
            "original.pgm", "reconstruction.pgm", "actual_error.pgm",
            "jackknife.pgm", "bootstrap.pgm",
            "reconstruction.f32", "actual_error.f32", "jackknife.f32",
            "bootstrap.f32", "lineset.json", "metrics.json", "timings.json",
            "config.json",
        ):
            assert (out / name).exists(), name

    def test_resolved_config_replays_byte_identically(self, tiny_config, tmp_path):
        first = tmp_path / "first"
        again = tmp_path / "again"
        assert cli_main(["evaluate", "--config", str(tiny_config),
                         "--out", str(first), "--quiet"]) == 0
        assert cli_main(["evaluate", "--config", str(first / "config.json"),
                         "--out", str(again), "--quiet"]) == 0
        a = _tree_bytes(first, ignore=("timings.json", "config.json"))
        b = _tree_bytes(again, ignore=("timings.json", "config.json"))
        assert a == b

    def test_threads_flag_does_not_change_outputs(self, tiny_config, tmp_path):
        one = tmp_path / "one"
        three = tmp_path / "three"
        assert cli_main(["evaluate", "--config", str(tiny_config), "--out", str(one),
                         "--threads", "1", "--quiet"]) == 0
        assert cli_main(["evaluate", "--config", str(tiny_config), "--out", str(three),
                         "--threads", "3", "--quiet"]) == 0
        a = _tree_bytes(one, ignore=("timings.json", "config.json"))
        b = _tree_bytes(three, ignore=("timings.json", "config.json"))
        assert a == b

    def test_flags_override_config(self, tiny_config, tmp_path):
        out = tmp_path / "o"
        assert cli_main(["evaluate", "--config", str(tiny_config), "--out", str(out),
                         "--seed", "99", "--quiet"]) == 0
        resolved = json.loads((out / "config.json").read_text())
        assert resolved["experiment"]["seed"] == 99

    def test_verbose_writes_solver_diagnostics(self, tiny_config, tmp_path, capsys):
        out = tmp_path / "v"
        assert cli_main(["evaluate", "--config", str(tiny_config),
                         "--out", str(out), "--verbose"]) == 0
        csv_text = (out / "solver_diagnostics.csv").read_text()
        assert csv_text.startswith("iteration,")
        assert len(csv_text.strip().splitlines()) == 13  # header + 12 iterations
        assert "pearson" in capsys.readouterr().out

    def test_estimator_subcommands_select_panels(self, tiny_config, tmp_path):
        jk = tmp_path / "jk"
        assert cli_main(["jackknife", "--config", str(tiny_config),
                         "--out", str(jk), "--quiet"]) == 0
        assert (jk / "jackknife.f32").exists()
        assert not (jk / "bootstrap.f32").exists()

        bs = tmp_path / "bs"
        assert cli_main(["bootstrap", "--config", str(tiny_config),
                         "--out", str(bs), "--quiet"]) == 0
        assert (bs / "bootstrap.f32").exists()
        assert not (bs / "jackknife.f32").exists()

        rec = tmp_path / "rec"
        assert cli_main(["reconstruct", "--config", str(tiny_config),
                         "--out", str(rec), "--quiet"]) == 0
        assert (rec / "reconstruction.f32").exists()
        assert not (rec / "jackknife.f32").exists()
        assert not (rec / "bootstrap.f32").exists()

    def test_bare_flags_without_config(self, tmp_path):
        out = tmp_path / "bare"
        code = cli_main(
            ["reconstruct", "--image", "phantom:24x24", "--scheme", "horizontal",
             "--sigma", "0", "--iterations", "10", "--seed", "2",
             "--out", str(out), "--quiet"]
        )
        assert code == 0
        assert (out / "reconstruction.f32").exists()


class TestBatchCommand:
    def test_two_runs_and_summary(self, tmp_path):
        config = tmp_path / "batch.toml"
        config.write_text(
            """\
[[experiment]]
image = "phantom:24x24"
scheme = "radial"
num_draws = 3
seed = 1
[experiment.solver]
iterations = 8

[[experiment]]
image = "phantom:24x24"
scheme = "horizontal"
num_draws = 2
seed = 2
[experiment.solver]
iterations = 8
"""
        )
        out = tmp_path / "batch"
        assert cli_main(["batch", "--config", str(config), "--out", str(out), "--quiet"]) == 0
        assert (out / "summary.csv").exists()
        assert (out / "run-000" / "reconstruction.f32").exists()
        assert (out / "run-001" / "reconstruction.f32").exists()
        lines = (out / "summary.csv").read_text().strip().splitlines()
        assert len(lines) == 3

    def test_batch_without_config_is_runtime_error(self, tmp_path):
        assert cli_main(["batch", "--out", str(tmp_path / "b")]) == 2


class TestShippedConfigs:
    def test_desk_config_parses(self):
        from reconbars.config import experiment_dicts, load_config_file, spec_from_dict

        doc = load_config_file(Path(__file__).resolve().parents[1] / "configs" / "desk.toml")
        spec = spec_from_dict(experiment_dicts(doc)[0])
        assert spec.sigma == 0.02
        assert spec.solver.mu == 1e12
        assert spec.bootstrap.resamples == 50

    def test_defaults_config_encodes_standard_settings(self):
        from reconbars.config import experiment_dicts, load_config_file, spec_from_dict

        doc = load_config_file(
            Path(__file__).resolve().parents[1] / "configs" / "defaults.toml"
        )
        spec = spec_from_dict(experiment_dicts(doc)[0])
        assert spec.sigma == 0.02
        assert spec.solver.mu == 1e12
        assert spec.solver.beta == 10.0
        assert spec.solver.iterations == 100
        assert spec.bootstrap.resamples == 1000
        assert spec.jackknife.calibration == 1.0
