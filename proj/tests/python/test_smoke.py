import math
import os
from pathlib import Path

import pytest

import dynq

SCENARIOS = Path(os.environ.get("DYNQ_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def scenario(name):
    return (SCENARIOS / f"{name}.json").read_text()


def bike_quantizer():
    return dynq.ZoomQuantizer(64, [0.2, 0.2, 2 * math.pi / 35])


def test_quantizer_examples():
    qz = dynq.ZoomQuantizer(3, [0.2])
    assert dynq.zoom_quantize(qz, [10.0]) == pytest.approx([0.6])
    assert dynq.zoom_quantize(qz, [0.25]) == pytest.approx([0.2])
    assert dynq.zoom_quantize(qz.with_mu(0.5), [0.25]) == pytest.approx([0.3])
    assert dynq.zoom_indices(qz, [-0.25]) == [-1]


def test_initial_region_has_eighty_points():
    h = 4 * math.pi / 35
    pts = dynq.lattice_points([0, 0, -h], [0.6, 0.6, h], bike_quantizer())
    assert len(pts) == 80
    assert pts == sorted(pts, key=lambda p: (round(p[0] / 0.2), round(p[1] / 0.2), round(p[2] / (2 * math.pi / 35))))
    assert dynq.lattice_count([0, 0, -math.pi], [10, 10, math.pi], bike_quantizer()) == 91035


def test_bad_quantizer_raises_library_error():
    with pytest.raises(dynq.Error):
        dynq.ZoomQuantizer(0, [0.2])
    with pytest.raises(dynq.RangeExceededError):
        dynq.lattice_points([0], [1], dynq.ZoomQuantizer(3, [0.2]))


def test_integrate_scalar_exact():
    x = dynq.integrate("scalar_linear", [1.0], [0.5], 0.3)
    assert x[0] == pytest.approx(math.exp(-0.3) + 0.5 * (1 - math.exp(-0.3)), abs=1e-8)
    assert "bicycle" in dynq.model_names()
    with pytest.raises(dynq.InputOutOfRangeError):
        dynq.integrate("bicycle", [0, 0, 0], [2.0, 0.0], 0.3)


def test_precision_margin():
    ok, margin = dynq.precision_ok(0.2, 1.0, 1.0, 0.3, 1.0, 0.02, 0.05)
    assert ok
    assert margin == pytest.approx(0.006836, abs=1e-6)


def test_scalar_check_holds():
    verdict = dynq.check(scenario("scalar_linear"))
    assert verdict["holds"]
    assert verdict["precision_margin"] == pytest.approx(0.006836, abs=1e-6)


def test_plan_and_patrol_open_field():
    p = dynq.plan(scenario("open_field"))
    assert p["abstract_states"] == 80 * p["regions_used"]
    assert p["text"].startswith("dynq-plan 1")
    run = dynq.patrol(scenario("open_field"), 2)
    assert min(run["visits"]) >= 2
    assert run["obstacle_hits"] == 0
    assert run["max_deviation"] <= 0.2


def test_errors_map_to_python():
    with pytest.raises(dynq.NoPathError):
        dynq.plan(scenario("blocked_corridor"))
    with pytest.raises(dynq.ParseError):
        dynq.plan("{broken")
