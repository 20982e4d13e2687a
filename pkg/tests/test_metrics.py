import csv
import json
import math

import numpy as np
import pytest

from codedlf.errors import InvalidArgument
from codedlf.metrics import (
    acer_at,
    auc,
    calibrate_threshold,
    evaluate,
    holdout_acer,
    roc_points,
)


def _phi(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def test_separable_scores():
    t, eer = calibrate_threshold([0.8, 0.9, 1.0], [0.0, 0.1, 0.2])
    assert eer == 0.0
    assert t == pytest.approx(0.5)
    assert acer_at([0.8, 0.9], [0.1, 0.2], t) == 0.0


def test_identical_scores_are_chance():
    t, eer = calibrate_threshold([0.3] * 5, [0.3] * 5)
    assert t == 0.3 and eer == 0.5


def test_threshold_tie_is_spoof():
    # a score equal to the threshold counts as spoof
    assert acer_at([0.5], [0.5], 0.5) == 0.5
    assert acer_at([0.6], [0.5], 0.5) == 0.0


def test_gaussian_oracle():
    rng = np.random.default_rng(2024)
    spoof = rng.normal(0.3, 0.1, 400)
    genuine = rng.normal(0.5, 0.1, 400)
    _, eer = calibrate_threshold(genuine, spoof)
    assert abs(eer - (1 - _phi(1.0))) <= 0.03
    analytic_auc = _phi(0.2 / math.sqrt(0.02))
    assert abs(auc(roc_points(genuine, spoof)) - analytic_auc) <= 0.03


def test_roc_is_monotone_and_closed():
    rng = np.random.default_rng(1)
    roc = roc_points(rng.random(30), rng.random(20))
    x = [r[1] for r in roc]
    y = [r[2] for r in roc]
    assert x == sorted(x) and y == sorted(y)
    assert (x[0], y[0]) == (0.0, 0.0) and (x[-1], y[-1]) == (1.0, 1.0)


@pytest.mark.parametrize("g,s", [([], [0.1]), ([0.1], []), ([np.nan], [0.1])])
def test_bad_inputs(g, s):
    with pytest.raises(InvalidArgument):
        calibrate_threshold(g, s)


def test_holdout_separable_and_chance():
    rng = np.random.default_rng(3)
    sep = holdout_acer(rng.uniform(1, 2, 80), rng.uniform(0, 0.9, 60), repeats=20, seed=1)
    assert sep["mean_acer"] == 0.0 and sep["per_class"] == 60
    same = holdout_acer(rng.random(400), rng.random(400), repeats=50, seed=2)
    assert abs(same["mean_acer"] - 0.5) <= 0.05


def test_holdout_seeded():
    g, s = np.linspace(0, 1, 40), np.linspace(0.2, 0.8, 40)
    assert holdout_acer(g, s, seed=5) == holdout_acer(g, s, seed=5)
    with pytest.raises(InvalidArgument):
        holdout_acer(g, s, test_fraction=1.0)


def test_report_files(tmp_path):
    rep = evaluate([0.5, 0.6, 0.7], [0.1, 0.2])
    rep.write(tmp_path)
    summary = json.loads((tmp_path / "report.json").read_text())
    assert summary["eer"] == 0.0 and summary["n_spoof"] == 2
    with open(tmp_path / "roc.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["threshold", "apcer", "one_minus_bpcer"] and len(rows) == 1 + 6
    with open(tmp_path / "hist.csv") as fh:
        hist = list(csv.DictReader(fh))
    assert len(hist) == 50
    assert sum(int(r["genuine"]) for r in hist) == 3
