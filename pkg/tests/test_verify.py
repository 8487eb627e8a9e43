import numpy as np
import pytest

from mms import verify as vf
from mms.io import dumps


def test_default_suites_pass():
    rep = vf.run(vf.SUITES, 20, seed=0)
    assert rep["passed"], dumps(rep)


def test_empty_suite_is_an_error():
    with pytest.raises(vf.EmptySuiteError):
        vf.run_suite("metric", 0)
    with pytest.raises(ValueError):
        vf.run_suite("nope", 3)


def test_injected_triangle_violation_fails_metric_suite():
    dist = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
    rep = vf.run_suite("metric", 4, injected=(dist, np.ones(3)))
    assert not rep.passed
    assert rep.checks["space_triangle"].failures == 4
    assert rep.checks["triangle"].failures == 0


def test_reports_are_reproducible():
    a = dumps(vf.run(["metric", "gradients"], 6, seed=7))
    b = dumps(vf.run(["metric", "gradients"], 6, seed=7))
    assert a == b
    assert a != dumps(vf.run(["metric", "gradients"], 6, seed=8))


def test_instances_do_not_depend_on_count():
    small = vf.run_suite("norms", 3, seed=1)
    large = vf.run_suite("norms", 6, seed=1)
    for name, tally in small.checks.items():
        assert tally.worst <= large.checks[name].worst


def test_instance_streams_are_independent():
    a = vf.instance_rng(0, "metric", 0).random(3)
    b = vf.instance_rng(0, "metric", 1).random(3)
    c = vf.instance_rng(0, "norms", 0).random(3)
    assert not np.allclose(a, b) and not np.allclose(a, c)
