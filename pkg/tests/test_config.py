import json

import pytest

from app.api import experiment_overrides
from app.core.config import init_config
from app.core.errors import ConfigError
from app.models.presets import (
  PRESETS,
  build_config,
  deep_merge,
  load_experiment_config,
  preset,
  stream_overlay,
)
from app.nn.tensor import Precision
from app.util.seeding import canonical_json, derive_rng


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_validate(name):
  assert preset(name).config_hash()


def test_paper_preset_values():
  config = preset("paper")
  assert config.model.channels == 2048
  assert (config.model.d, config.model.d_seg, config.model.d_glob) == (1024, 1024, 2048)
  assert config.schedule.weight_decay == 0.1
  assert config.fusion.alpha == 0.4


def test_unknown_preset():
  with pytest.raises(ConfigError, match="unknown preset"):
    preset("huge")


def test_unknown_key_is_rejected():
  with pytest.raises(ConfigError):
    build_config({"model": {"num_heads": 3}})


def test_modality_must_match_backbone():
  with pytest.raises(ConfigError, match="in_channels"):
    build_config({"data": {"modality": "flow"}})
  flow = build_config(stream_overlay("flow"))
  assert flow.model.backbone.in_channels == 10


def test_segment_longer_than_clip():
  with pytest.raises(ConfigError):
    build_config({"data": {"num_frames": 4}, "model": {"segment_length": 8}})


def test_global_only_predicts_from_global_head():
  assert preset("global_only").model.prediction_head == "q_sg"


@pytest.mark.parametrize(("model", "head"), [
  ({"partitions": "tb", "prediction_head": "q_lr"}, "q_lr"),
  ({"use_spatial": False, "prediction_head": "q_left"}, "q_left"),
  ({"global_only": True, "prediction_head": "q_s"}, "q_s"),
  ({"prediction_head": "q_seg1"}, "q_seg1"),
])
def test_prediction_head_must_exist(model, head):
  with pytest.raises(ConfigError, match=head):
    build_config({"model": model})


def test_prediction_head_may_be_any_present_head():
  config = build_config({"model": {"partitions": "lr", "prediction_head": "q_lr"}})
  assert "q_lr" in config.model.heads()
  local = build_config({"model": {"local_temporal_heads": True, "prediction_head": "q_seg3"}})
  assert local.model.heads()[-1] == "q_seg3"


def test_hash_is_stable_and_sensitive():
  config = preset("desk")
  again = build_config(json.loads(config.model_dump_json()))
  assert again.config_hash() == config.config_hash()
  assert build_config({"seed": 1}).config_hash() != build_config({}).config_hash()
  assert canonical_json({"b": [1, 2], "a": None}) == '{"a":null,"b":[1,2]}'


def test_file_overlay_and_overrides(tmp_path):
  path = tmp_path / "experiment.json"
  overlay = {"precision": "double", "schedule": {"epochs": 4, "warmup_epochs": 1}}
  path.write_text(json.dumps(overlay))
  config = load_experiment_config(path, "desk", {"seed": 5})
  assert (config.precision, config.schedule.epochs, config.seed) == (Precision.DOUBLE, 4, 5)
  assert config.schedule.lr_peak == preset("desk").schedule.lr_peak


def test_unreadable_file(tmp_path):
  (tmp_path / "bad.json").write_text("[1, 2")
  with pytest.raises(ConfigError):
    load_experiment_config(tmp_path / "bad.json")
  (tmp_path / "list.json").write_text("[1, 2]")
  with pytest.raises(ConfigError, match="JSON object"):
    load_experiment_config(tmp_path / "list.json")


def test_cli_flags_override_environment(monkeypatch):
  monkeypatch.setenv("STEPNET_SEED", "9")
  init_config()

  class Args:
    seed = None
    deterministic = None
    stream = "flow"

  overrides = experiment_overrides(Args())
  assert overrides["seed"] == 9
  assert overrides["data"] == {"modality": "flow"}
  Args.seed = 2
  assert experiment_overrides(Args())["seed"] == 2
  monkeypatch.delenv("STEPNET_SEED")
  init_config()


def test_derived_generators_are_keyed():
  a = derive_rng(0, "heads.q_st.weight").uniform(size=3)
  b = derive_rng(0, "heads.q_st.weight").uniform(size=3)
  c = derive_rng(0, "heads.q_st.bias").uniform(size=3)
  assert a.tolist() == b.tolist()
  assert a.tolist() != c.tolist()
