import itertools

import numpy as np
import pytest

from app.models.verification import GradcheckEntry, GradcheckReport
from app.nn import functional as F
from app.nn.gradcheck import finite_diff_check
from app.nn.tensor import Tensor, apply
from app.services import verification
from app.services.verification import _primitive_cases, full_model_case, run_gradcheck_suite
from tests.conftest import gradcheck_variant


def test_report_summaries():
  report = GradcheckReport(entries=[
    GradcheckEntry(name="a", max_rel_error=1e-7, tolerance=1e-5),
    GradcheckEntry(name="b", max_rel_error=2e-5, tolerance=1e-4),
  ])
  assert report.passed
  assert report.max_error == 2e-5
  report.entries.append(GradcheckEntry(name="c", max_rel_error=1e-3, tolerance=1e-4))
  assert not report.passed


def test_wrong_backward_is_detected():
  def half_gradient_square(x: Tensor) -> Tensor:
    return apply("bad_square", (x,), lambda v: v * v, lambda g, _: (g * x.data,))

  point = [np.array([1.5, -2.0, 0.7])]
  error = finite_diff_check(lambda x: F.sum_all(half_gradient_square(x)), point)
  assert error > 0.1


def test_variant_models_pass(rng):
  for switches in ({"attention_norm": True}, {"use_grus": False}, {"partitions": "tb"}):
    name, tolerance, function, point, _ = full_model_case(gradcheck_variant(**switches), rng, 3)
    assert name == "stepnet_total_loss"
    assert finite_diff_check(function, point, max_coords=3, rng=rng) <= tolerance


def test_each_primitive_keeps_its_worst_point(monkeypatch):
  calls = itertools.count()
  monkeypatch.setattr(verification, "finite_diff_check", lambda *a, **k: float(next(calls)))
  report = run_gradcheck_suite(primitive_points=10)
  primitives = len(list(_primitive_cases(np.random.default_rng(0))))
  worst = [entry.max_rel_error for entry in report.entries[:primitives]]
  assert worst == [10.0 * i + 9 for i in range(primitives)]
  assert next(calls) == 10 * primitives + len(report.entries) - primitives


@pytest.mark.slow
def test_suite_passes():
  report = run_gradcheck_suite(seed=0, full_model_coords=4)
  names = [entry.name for entry in report.entries]
  assert {"conv2d", "gru_sequence", "attend", "stepnet_total_loss"} <= set(names)
  failed = [(e.name, e.max_rel_error) for e in report.entries if not e.passed]
  assert failed == []
  assert np.isfinite(report.max_error)
