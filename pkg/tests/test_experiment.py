import math

import pytest

from lowgrip.core import HardSurface, ManeuverId
from lowgrip.experiment import ExperimentGrid, evaluate, evaluation_grid, generate_dataset, summarize
from lowgrip.predictor import train


def test_default_grid_counts():
    g = ExperimentGrid()
    assert len(g) == 330
    assert len(g.cells()) == 33
    assert len(evaluation_grid().cells()) == 130


def test_grid_invariants():
    with pytest.raises(ValueError):
        ExperimentGrid(velocities=())
    with pytest.raises(ValueError):
        ExperimentGrid(repetitions=0)
    with pytest.raises(ValueError):
        ExperimentGrid(hard_mu=(), soils=())


def test_tiny_grid_rows_and_determinism():
    g = ExperimentGrid(velocities=(2.0,), hard_mu=(0.45,), soils=(), sinkages=(), repetitions=1, seed=3)
    a = generate_dataset(g)
    assert len(a) == 5
    assert [r.maneuver for r in a.rows] == list(ManeuverId)
    assert generate_dataset(g) == a
    assert all(abs(r.scenario.v0_mps - 2.0) <= g.v_jitter_mps for r in a.rows)


def test_evaluate_self_consistent_and_regret_non_negative():
    g = ExperimentGrid(velocities=(1.0, 2.0, 3.0), hard_mu=(0.25, 0.45, 0.9), soils=(), sinkages=(),
                       repetitions=1, v_jitter_mps=0.0)
    model = train(generate_dataset(g))
    cells = evaluate(model, g, g)
    assert len(cells) == 9
    assert all(c.regret >= 0.0 for c in cells)
    assert not any(c.held_out for c in cells)
    s = summarize(cells)
    assert s["cells"] == 9 and s["held_out_cells"] == 0 and s["agreement_held_out"] is None
    assert set(s["rms_error_m"]) == {"1", "2", "3", "4", "5"}


def test_evaluate_skips_untrained_modes():
    g = ExperimentGrid(velocities=(2.0,), hard_mu=(0.45,), soils=(), sinkages=(), repetitions=1)
    model = train(generate_dataset(ExperimentGrid(velocities=(1.0, 2.0, 3.0), hard_mu=(0.25, 0.45, 0.9),
                                                  soils=(), sinkages=(), repetitions=1)))
    full = ExperimentGrid(velocities=(2.0,), hard_mu=(0.45,), soils=((74.0, 31.0),), sinkages=(0.03,), repetitions=1)
    assert len(evaluate(model, full)) == 1
    assert len(evaluate(model, g)) == 1
