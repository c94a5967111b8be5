import numpy as np
import pytest

from app.core.errors import DataError, ShapeError
from app.fusion import alpha_sweep, fuse_metrics, late_fuse, read_export, report_table, write_export
from app.models.fusion import LogitRecord
from app.training.metrics import compute_metrics


def records(rng, count=12, classes=5, prefix="clip"):
  return [
    LogitRecord(
      clip_id=f"{prefix}{i:02d}", label=int(rng.integers(classes)),
      logits=rng.normal(size=classes).tolist(),
    )
    for i in range(count)
  ]


def test_hand_example():
  fused = late_fuse(np.array([1.0, 0.0]), np.array([0.0, 5.0]), 0.4)
  np.testing.assert_allclose(fused, [1.0, 2.0])
  assert int(np.argmax(fused)) == 1


def test_linear_in_both_inputs(rng):
  a, b, c, d = rng.normal(size=(4, 6))
  combined = late_fuse(a + 2 * c, b + 2 * d, 0.3)
  np.testing.assert_allclose(combined, late_fuse(a, b, 0.3) + 2 * late_fuse(c, d, 0.3))
  np.testing.assert_array_equal(late_fuse(a, b, 0.0), a)


def test_length_mismatch():
  with pytest.raises(ShapeError):
    late_fuse(np.zeros(3), np.zeros(4), 0.4)


def test_self_fusion_is_constant_across_alpha(tmp_path, rng):
  export = records(rng)
  write_export(tmp_path / "rgb.jsonl", export)
  write_export(tmp_path / "opt.jsonl", export)
  report = alpha_sweep(tmp_path / "rgb.jsonl", tmp_path / "opt.jsonl", [0.0, 0.1, 0.4, 1.0])
  standalone = compute_metrics(np.array([r.logits for r in export]), [r.label for r in export])
  assert all(row.metrics == standalone for row in report.rows)
  assert report.best_alpha == 0.0
  assert "best alpha: 0.0" in report_table(report)


def test_zero_alpha_is_the_rgb_stream(rng):
  rgb, opt = records(rng), records(rng)
  opt = [r.model_copy(update={"label": q.label}) for r, q in zip(opt, rgb, strict=True)]
  rgb_map = {r.clip_id: r for r in rgb}
  opt_map = {r.clip_id: r for r in opt}
  standalone = compute_metrics(np.array([r.logits for r in rgb]), [r.label for r in rgb])
  assert fuse_metrics(rgb_map, opt_map, 0.0) == standalone


def test_best_alpha_matches_brute_force(tmp_path, rng):
  rgb, opt = records(rng, 40), records(rng, 40)
  opt = [r.model_copy(update={"label": q.label}) for r, q in zip(opt, rgb, strict=True)]
  write_export(tmp_path / "rgb.jsonl", rgb)
  write_export(tmp_path / "opt.jsonl", opt)
  grid = [round(0.1 * i, 10) for i in range(11)]
  report = alpha_sweep(tmp_path / "rgb.jsonl", tmp_path / "opt.jsonl", grid, "hash")
  labels = np.array([r.label for r in rgb])
  scores = []
  for alpha in grid:
    fused = np.array([r.logits for r in rgb]) + alpha * np.array([r.logits for r in opt])
    scores.append(np.mean(fused.argmax(axis=1) == labels))
  assert report.best_alpha == grid[int(np.argmax(scores))]
  assert report.config_hash == "hash"


def test_mismatched_clip_sets(tmp_path, rng):
  write_export(tmp_path / "rgb.jsonl", records(rng, 3))
  write_export(tmp_path / "opt.jsonl", records(rng, 4))
  with pytest.raises(DataError, match="clip03"):
    alpha_sweep(tmp_path / "rgb.jsonl", tmp_path / "opt.jsonl", [0.0])


def test_export_errors(tmp_path, rng):
  export = records(rng, 2)
  write_export(tmp_path / "dup.jsonl", [export[0], export[0]])
  with pytest.raises(DataError, match="twice"):
    read_export(tmp_path / "dup.jsonl")
  ragged = [export[0], export[1].model_copy(update={"logits": [0.0]})]
  write_export(tmp_path / "ragged.jsonl", ragged)
  with pytest.raises(DataError, match="varies"):
    read_export(tmp_path / "ragged.jsonl")
  with pytest.raises(DataError):
    read_export(tmp_path / "missing.jsonl")
