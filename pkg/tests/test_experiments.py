from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from sigmaschur.experiments import (
    ExperimentSpec,
    FrequencyReport,
    chunk_rng,
    compare,
    compare_samplers,
    predict,
    run_experiment,
    sample_odd,
)
from sigmaschur.iso import Classifier


def test_exhaustive_f14():
    rep = run_experiment(ExperimentSpec(3, 1, 4))
    assert compare(rep).passed
    assert sorted((c.order, c.observed) for c in rep.classes) == [(1, 6), (3, 2), (9, 1)]
    triv = next(c for c in rep.classes if c.order == 1)
    assert triv.probability == Fraction(2, 3)


def test_exhaustive_f23():
    rep = run_experiment(ExperimentSpec(3, 2, 3))
    assert compare(rep).passed
    assert rep.totals["tuples"] == 81
    full = next(c for c in rep.classes if c.order == 27)
    assert full.observed == 1 and full.aut_order == 48


def test_exhaustive_p5():
    assert compare(run_experiment(ExperimentSpec(5, 1, 3))).passed


def test_predictions_sum_to_one():
    preds, _ = predict(3, 2, 3, Classifier())
    assert sum(p.probability for p in preds.values()) == 1


def test_report_round_trip():
    rep = run_experiment(ExperimentSpec(3, 1, 4))
    back = FrequencyReport.from_json(json.loads(rep.dumps()))
    assert back == rep


def test_chunk_rng_deterministic():
    a = chunk_rng(42, 3).integers(0, 1000, 10)
    b = chunk_rng(42, 3).integers(0, 1000, 10)
    c = chunk_rng(42, 4).integers(0, 1000, 10)
    assert (a == b).all() and not (a == c).all()


def test_samplers_hit_odd_part(f23):
    rng = np.random.default_rng(0)
    for method in ("odd-list", "twisted"):
        s = sample_odd(f23, rng, 500, method)
        assert f23.odd_mask[s].all()
    with pytest.raises(ValueError):
        sample_odd(f23, rng, 1, "other")


def test_monte_carlo_reproducible_and_worker_independent():
    base = dict(mode="monte-carlo", samples=3000, seed=9)
    clf, levels = Classifier(), {}
    r1 = run_experiment(ExperimentSpec(3, 2, 3, **base), clf, levels)
    r2 = run_experiment(ExperimentSpec(3, 2, 3, workers=2, **base), clf, levels)
    assert [(c.label, c.observed) for c in r1.classes] == [(c.label, c.observed) for c in r2.classes]
    assert compare(r1).passed
    r3 = run_experiment(ExperimentSpec(3, 2, 3, sampler="twisted", **base), clf, levels)
    assert compare_samplers(r1, r3).passed


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(3, 1, 4, mode="monte-carlo", samples=10).validate()
    with pytest.raises(ValueError):
        ExperimentSpec(4, 1, 4).validate()
    with pytest.raises(ValueError):
        ExperimentSpec(3, 1, 4, sampler="nope").validate()
