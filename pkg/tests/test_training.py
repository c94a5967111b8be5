import math

import numpy as np
import pytest

from app.core.errors import ConfigError, DataError, NumericError
from app.data import ClipDataset
from app.models.config import ScheduleConfig
from app.models.metrics import CheckpointMeta
from app.models.presets import build_config, deep_merge, preset, preset_overlay
from app.nn.tensor import Tensor, no_tape
from app.training import (
  AdamWState,
  Checkpoint,
  Trainer,
  adamw_step,
  compute_metrics,
  load_checkpoint,
  load_model,
  lr_at,
  save_checkpoint,
)
from app.training import trainer as trainer_module
from app.training.metrics import topk_hits
from app.training.trainer import BEST_CHECKPOINT, LAST_CHECKPOINT, METRICS_LOG, RUN_FILE


def scalar_adamw(x, steps, lr, wd, betas=(0.9, 0.999), eps=1e-8):
  m = v = 0.0
  for t in range(1, steps + 1):
    g = 2.0 * x
    m = betas[0] * m + (1 - betas[0]) * g
    v = betas[1] * v + (1 - betas[1]) * g * g
    m_hat = m / (1 - betas[0] ** t)
    v_hat = v / (1 - betas[1] ** t)
    x = x - lr * m_hat / (math.sqrt(v_hat) + eps) - lr * wd * x
  return x


class TestAdamW:
  def test_zero_gradient_without_decay(self, rng):
    params = {"w": rng.normal(size=(2, 3))}
    updated = adamw_step(params, {"w": np.zeros((2, 3))}, AdamWState(), 0.1)
    np.testing.assert_array_equal(updated["w"], params["w"])

  def test_zero_gradient_decays(self, rng):
    params = {"w": rng.normal(size=4)}
    state = AdamWState(weight_decay=0.1)
    updated = adamw_step(params, {"w": np.zeros(4)}, state, 0.01)
    np.testing.assert_allclose(updated["w"], params["w"] * (1 - 0.001), rtol=1e-12)

  @pytest.mark.parametrize("wd", [0.0, 0.1])
  def test_matches_scalar_oracle(self, wd):
    state = AdamWState(weight_decay=wd)
    params = {"x": np.array([1.0])}
    for _ in range(50):
      params = adamw_step(params, {"x": 2.0 * params["x"]}, state, 0.05)
    assert state.step == 50
    assert params["x"][0] == pytest.approx(scalar_adamw(1.0, 50, 0.05, wd), abs=1e-12)

  def test_non_finite_gradient_aborts(self):
    state = AdamWState()
    with pytest.raises(NumericError, match="'b'"):
      adamw_step({"a": np.zeros(2), "b": np.zeros(2)}, {"b": np.array([0.0, np.nan])}, state, 0.1)
    assert state.step == 0
    assert state.m == {}


class TestSchedule:
  def test_paper_schedule(self):
    schedule = preset("paper").schedule
    steps = 10
    assert lr_at(0, schedule, steps) == 0.0
    assert lr_at(50, schedule, steps) == pytest.approx(1e-4)
    assert lr_at(1000, schedule, steps) == pytest.approx(1e-5)
    assert lr_at(5000, schedule, steps) == pytest.approx(1e-5)

  def test_continuous_and_bounded(self):
    schedule = ScheduleConfig(epochs=6, warmup_epochs=2, lr_peak=1e-3, lr_floor=1e-4)
    rates = [lr_at(step, schedule, 7) for step in range(60)]
    assert all(0 <= rate <= 1e-3 for rate in rates)
    assert max(abs(a - b) for a, b in zip(rates, rates[1:])) <= 1e-3 / 14 + 1e-12
    assert rates[14] == pytest.approx(1e-3)
    assert rates[15] == pytest.approx(1e-3, rel=1e-2)


class TestMetrics:
  def test_hand_example(self):
    logits = np.array([[2.0, 1.0], [2.0, 1.0], [2.0, 1.0], [2.0, 1.0]])
    metrics = compute_metrics(logits, [0, 0, 0, 1])
    assert (metrics.top1_pi, metrics.top1_pc) == (75.0, 50.0)
    assert (metrics.top5_pi, metrics.top5_pc) == (100.0, 100.0)

  def test_perfect_predictions(self, rng):
    labels = rng.integers(0, 7, size=30)
    metrics = compute_metrics(np.eye(7)[labels], labels)
    assert {metrics.top1_pi, metrics.top5_pi, metrics.top1_pc, metrics.top5_pc} == {100.0}

  def test_top1_recount_and_superset(self, rng):
    logits = rng.normal(size=(50, 9))
    labels = rng.integers(0, 9, size=50)
    metrics = compute_metrics(logits, labels)
    assert metrics.top1_pi == 100.0 * np.mean(logits.argmax(axis=1) == labels)
    assert metrics.top5_pi >= metrics.top1_pi

  def test_ties_go_to_lower_index(self):
    assert topk_hits(np.array([[1.0, 1.0, 0.0]]), np.array([0]), 1).tolist() == [True]
    assert topk_hits(np.array([[1.0, 1.0, 0.0]]), np.array([1]), 1).tolist() == [False]

  def test_empty_split(self):
    with pytest.raises(DataError):
      compute_metrics(np.zeros((0, 3)), [])


class TestCheckpoint:
  def checkpoint(self, rng):
    meta = CheckpointMeta(
      config_hash="abc", config={}, next_epoch=2, step=5, best_top1=50.0,
      rng_state={"state": 1}, param_names=["a", "b"],
    )
    params = {"a": rng.normal(size=(2, 2)).astype(np.float32), "b": np.zeros(3, np.float32)}
    return Checkpoint(meta, params, {"a": np.ones((2, 2))}, {"a": np.ones((2, 2))})

  def test_bytes_are_deterministic(self, tmp_path, rng):
    checkpoint = self.checkpoint(rng)
    save_checkpoint(tmp_path / "one.ckpt", checkpoint)
    save_checkpoint(tmp_path / "two.ckpt", checkpoint)
    assert (tmp_path / "one.ckpt").read_bytes() == (tmp_path / "two.ckpt").read_bytes()
    assert not (tmp_path / "one.ckpt.tmp").exists()
    loaded = load_checkpoint(tmp_path / "one.ckpt")
    assert loaded.meta == checkpoint.meta
    np.testing.assert_array_equal(loaded.params["a"], checkpoint.params["a"])
    assert set(loaded.adam_m) == {"a"}

  def test_unreadable(self, tmp_path):
    (tmp_path / "bad.ckpt").write_bytes(b"not a zip")
    with pytest.raises(DataError):
      load_checkpoint(tmp_path / "bad.ckpt")


class TestTrainer:
  def test_runs_are_identical(self, tiny_experiment, tmp_path):
    first = Trainer(tiny_experiment, tmp_path / "a", num_workers=1).train()
    Trainer(tiny_experiment, tmp_path / "b", num_workers=3).train()
    for name in (METRICS_LOG, LAST_CHECKPOINT, BEST_CHECKPOINT, RUN_FILE):
      assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert [r.epoch for r in first.history] == [1, 2]
    assert first.history[-1].lr == pytest.approx(tiny_experiment.schedule.lr_floor)
    assert all(math.isfinite(r.train_loss) for r in first.history)

  def test_resume_reproduces_uninterrupted_run(self, tiny_experiment, tmp_path, monkeypatch):
    Trainer(tiny_experiment, tmp_path / "full").train()

    original = Trainer._train_epoch

    def interrupted(self, epoch):
      if epoch == 2:
        raise KeyboardInterrupt
      return original(self, epoch)

    monkeypatch.setattr(Trainer, "_train_epoch", interrupted)
    with pytest.raises(KeyboardInterrupt):
      Trainer(tiny_experiment, tmp_path / "resumed").train()
    monkeypatch.undo()
    assert load_checkpoint(tmp_path / "resumed" / LAST_CHECKPOINT).meta.next_epoch == 2
    Trainer(tiny_experiment, tmp_path / "resumed").train(resume=True)

    for name in (METRICS_LOG, LAST_CHECKPOINT, BEST_CHECKPOINT):
      assert (tmp_path / "full" / name).read_bytes() == (tmp_path / "resumed" / name).read_bytes()

  def test_resume_rejects_other_config(self, tiny_experiment, tiny_overlay, tmp_path):
    Trainer(tiny_experiment, tmp_path / "run").train()
    other = build_config(deep_merge(
      preset_overlay("desk"), deep_merge(tiny_overlay, {"seed": 1}),
    ))
    with pytest.raises(ConfigError, match="cannot resume"):
      Trainer(other, tmp_path / "run").train(resume=True)

  def test_numeric_failure_keeps_last_checkpoint(self, tiny_experiment, tmp_path, monkeypatch):
    original = trainer_module.lr_at

    def exploding(step, schedule, steps_per_epoch):
      return math.nan if step > steps_per_epoch else original(step, schedule, steps_per_epoch)

    monkeypatch.setattr(trainer_module, "lr_at", exploding)
    out = tmp_path / "run"
    with pytest.raises(NumericError):
      Trainer(tiny_experiment, out).train()
    assert load_checkpoint(out / LAST_CHECKPOINT).meta.next_epoch == 2
    assert len((out / METRICS_LOG).read_text().splitlines()) == 1

  def test_checkpoint_rebuilds_model(self, tiny_experiment, tmp_path):
    Trainer(tiny_experiment, tmp_path / "run").train()
    config, model = load_model(tmp_path / "run" / LAST_CHECKPOINT)
    assert config == tiny_experiment
    assert model.param_count() == sum(p.size for p in model.params.values())


def mean_loss(model, dataset):
  with no_tape():
    return np.mean([
      model.loss(Tensor(dataset.load(i, "test").clip, precision=model.precision), label).item()
      for i, label in enumerate(dataset.labels())
    ])


@pytest.mark.slow
def test_training_lowers_the_loss(tiny_overlay, tmp_path):
  changes = []
  for seed in range(3):
    config = build_config(deep_merge(preset_overlay("desk"), deep_merge(tiny_overlay, {
      "seed": seed, "schedule": {"epochs": 4},
    })))
    dataset = ClipDataset(config.data, "train", seed=seed)
    trainer = Trainer(config, tmp_path / str(seed), num_workers=1)
    before = mean_loss(trainer.model, dataset)
    trainer.train()
    _, trained = load_model(tmp_path / str(seed) / LAST_CHECKPOINT)
    changes.append(mean_loss(trained, dataset) - before)
  assert np.median(changes) < 0
