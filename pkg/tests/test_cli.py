import json

import pytest

from app.api import EXIT_INVALID, EXIT_NUMERIC, EXIT_OK
from app.api import verification as verification_commands
from app.main import cli_dispatch
from app.models.verification import GradcheckEntry, GradcheckReport
from tests.conftest import tiny_experiment_overlay


def run(capsys, *argv):
  status = cli_dispatch(list(argv))
  return status, capsys.readouterr().out


def test_paper_scale_shapes(capsys):
  status, out = run(capsys, "shapes", "--paper-scale")
  assert status == EXIT_OK
  lines = out.splitlines()
  assert "M: 16x2048x16x16" in lines
  assert "f_st: 16x2048" in lines
  assert "g_3: 8x1024" in lines
  assert lines[-1].startswith("params: ")


def test_reference_scale_alias(capsys):
  assert run(capsys, "shapes", "--reference-scale") == run(capsys, "shapes", "--paper-scale")


def test_desk_shapes_with_forward(capsys):
  status, out = run(capsys, "--preset", "gradcheck", "shapes", "--check-forward")
  assert status == EXIT_OK
  assert "M: 4x8x4x4" in out
  assert "forward shapes agree" in out


def test_unknown_flag(capsys):
  assert cli_dispatch(["shapes", "--nonsense"]) == EXIT_INVALID
  assert "usage" in capsys.readouterr().err


def test_missing_command():
  assert cli_dispatch([]) == EXIT_INVALID


def test_help_exits_cleanly(capsys):
  assert cli_dispatch(["--help"]) == EXIT_OK
  assert "gen-data" in capsys.readouterr().out


def test_invalid_config_file(tmp_path):
  (tmp_path / "bad.json").write_text('{"model": {"bogus": 1}}')
  assert cli_dispatch(["--config", str(tmp_path / "bad.json"), "shapes"]) == EXIT_INVALID


def test_alpha_and_sweep_conflict():
  status = cli_dispatch(["fuse", "--rgb", "a", "--flow", "b", "--alpha", "0.2", "--sweep"])
  assert status == EXIT_INVALID


def test_numeric_failure_exit_status(monkeypatch):
  entry = GradcheckEntry(name="conv2d", max_rel_error=1.0, tolerance=1e-5)
  failing = GradcheckReport(entries=[entry])
  monkeypatch.setattr(verification_commands, "run_gradcheck_suite", lambda *a, **k: failing)
  assert cli_dispatch(["gradcheck"]) == EXIT_NUMERIC


def test_end_to_end(tmp_path, tiny_spec, capsys):
  overlay = tiny_experiment_overlay(tmp_path / "data", tiny_spec)
  config = tmp_path / "experiment.json"
  config.write_text(json.dumps(overlay))
  common = ["--config", str(config), "--deterministic"]

  assert run(capsys, *common, "gen-data")[0] == EXIT_OK
  assert (tmp_path / "data" / "manifest.jsonl").exists()

  status, out = run(capsys, *common, "train", "--out", str(tmp_path / "rgb"))
  assert status == EXIT_OK
  assert json.loads(out.splitlines()[-1])["epoch"] == 2

  status, out = run(
    capsys, *common, "eval", "--checkpoint", str(tmp_path / "rgb" / "best.ckpt"),
    "--export-logits", str(tmp_path / "rgb.jsonl"),
  )
  assert status == EXIT_OK
  evaluated = json.loads(out)
  assert evaluated["num_clips"] == 8

  export = str(tmp_path / "rgb.jsonl")
  status, out = run(capsys, *common, "fuse", "--rgb", export, "--flow", export, "--alpha", "0")
  assert status == EXIT_OK
  assert json.loads(out) == evaluated

  status, out = run(
    capsys, *common, "fuse", "--rgb", export, "--flow", export, "--sweep",
    "--report", str(tmp_path / "report.json"),
  )
  assert status == EXIT_OK
  assert json.loads((tmp_path / "report.json").read_text())["best_alpha"] == 0.0


@pytest.mark.slow
def test_gradcheck_command(capsys):
  status, out = run(capsys, "gradcheck")
  assert status == EXIT_OK
  error = float(out.splitlines()[-1].removeprefix("max relative error: "))
  assert error <= 1e-4


def test_compare_command(tmp_path, tiny_spec, capsys):
  overlay = tiny_experiment_overlay(tmp_path / "data", tiny_spec)
  config = tmp_path / "experiment.json"
  config.write_text(json.dumps(overlay))
  report = tmp_path / "learning.json"
  status, out = run(
    capsys, "--config", str(config), "compare", "--suite", "learning", "--seeds", "0",
    "--out", str(tmp_path / "runs"), "--report", str(report),
  )
  assert status == EXIT_OK
  assert "global_only" in out
  arms = json.loads(report.read_text())["arms"]
  assert [arm["name"] for arm in arms] == ["full", "global_only"]
