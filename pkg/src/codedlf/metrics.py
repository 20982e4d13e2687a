"""Presentation-attack-detection metrics: EER threshold, ROC, ACER.

Scores are flatness errors, so a capture is declared a spoof when its score
is at or below the threshold.

APCER(t): fraction of spoofs accepted as genuine (score > t).
BPCER(t): fraction of genuine captures rejected (score <= t).
ACER: (APCER + BPCER) / 2.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .lf_core import make_rng

HIST_BINS = 50


def _as_scores(scores, name: str) -> np.ndarray:
    arr = np.sort(np.asarray(list(scores), dtype=np.float64).ravel())
    if arr.size == 0:
        raise InvalidArgument(f"{name} scores are empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"{name} scores must be finite")
    return arr


def error_rates(genuine, spoof, thresholds):
    """(APCER, BPCER) arrays at each threshold; inputs must be sorted."""
    t = np.asarray(thresholds, dtype=np.float64)
    apcer = (spoof.size - np.searchsorted(spoof, t, side="right")) / spoof.size
    bpcer = np.searchsorted(genuine, t, side="right") / genuine.size
    return apcer, bpcer


def acer_at(genuine_scores, spoof_scores, threshold: float) -> float:
    g = _as_scores(genuine_scores, "genuine")
    s = _as_scores(spoof_scores, "spoof")
    apcer, bpcer = error_rates(g, s, [threshold])
    return float((apcer[0] + bpcer[0]) / 2.0)


def calibrate_threshold(genuine_scores, spoof_scores) -> tuple[float, float]:
    """Threshold where APCER and BPCER are closest, and the EER there.

    Candidates are the midpoints between consecutive distinct scores of the
    merged set (the lone value when all scores coincide). Ties go to the
    smaller threshold.
    """
    g = _as_scores(genuine_scores, "genuine")
    s = _as_scores(spoof_scores, "spoof")
    merged = np.unique(np.concatenate([g, s]))
    cand = (merged[:-1] + merged[1:]) / 2.0 if merged.size > 1 else merged
    apcer, bpcer = error_rates(g, s, cand)
    i = int(np.argmin(np.abs(apcer - bpcer)))
    return float(cand[i]), float((apcer[i] + bpcer[i]) / 2.0)


def roc_points(genuine_scores, spoof_scores):
    """ROC as (threshold, APCER, 1 - BPCER) rows, both rates non-decreasing.

    One row per distinct score used as threshold (the largest gives (0, 0)),
    then a final ``-inf`` row at (1, 1).
    """
    g = _as_scores(genuine_scores, "genuine")
    s = _as_scores(spoof_scores, "spoof")
    thr = np.unique(np.concatenate([g, s]))[::-1]
    apcer, bpcer = error_rates(g, s, thr)
    rows = [(float(t), float(a), float(1.0 - b)) for t, a, b in zip(thr, apcer, bpcer)]
    rows.append((float("-inf"), 1.0, 1.0))
    return rows


def auc(roc) -> float:
    x = np.array([r[1] for r in roc])
    y = np.array([r[2] for r in roc])
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))


@dataclass
class EvalReport:
    eer: float
    threshold: float
    acer: float
    auc: float
    n_genuine: int
    n_spoof: int
    roc: list = field(default_factory=list, repr=False)
    hist_edges: np.ndarray = field(default=None, repr=False)
    hist_genuine: np.ndarray = field(default=None, repr=False)
    hist_spoof: np.ndarray = field(default=None, repr=False)
    holdout: dict | None = None

    def summary(self) -> dict:
        d = {
            "eer": self.eer,
            "threshold": self.threshold,
            "acer": self.acer,
            "auc": self.auc,
            "n_genuine": self.n_genuine,
            "n_spoof": self.n_spoof,
        }
        if self.holdout is not None:
            d["holdout"] = self.holdout
        return d

    def write(self, out_dir) -> None:
        """report.json, roc.csv and hist.csv in ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        with open(out / "roc.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["threshold", "apcer", "one_minus_bpcer"])
            for t, a, y in self.roc:
                w.writerow([repr(t), repr(a), repr(y)])
        with open(out / "hist.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "genuine", "spoof"])
            e = self.hist_edges
            for i in range(len(e) - 1):
                w.writerow([repr(float(e[i])), repr(float(e[i + 1])), int(self.hist_genuine[i]), int(self.hist_spoof[i])])


def histograms(genuine_scores, spoof_scores, bins: int = HIST_BINS):
    g = _as_scores(genuine_scores, "genuine")
    s = _as_scores(spoof_scores, "spoof")
    lo = min(g[0], s[0])
    hi = max(g[-1], s[-1])
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    return edges, np.histogram(g, edges)[0], np.histogram(s, edges)[0]


def evaluate(genuine_scores, spoof_scores) -> EvalReport:
    g = _as_scores(genuine_scores, "genuine")
    s = _as_scores(spoof_scores, "spoof")
    t, eer = calibrate_threshold(g, s)
    roc = roc_points(g, s)
    edges, hg, hs = histograms(g, s)
    return EvalReport(
        eer=eer,
        threshold=t,
        acer=acer_at(g, s, t),
        auc=auc(roc),
        n_genuine=int(g.size),
        n_spoof=int(s.size),
        roc=roc,
        hist_edges=edges,
        hist_genuine=hg,
        hist_spoof=hs,
    )


def holdout_acer(genuine_scores, spoof_scores, repeats: int = 50, test_fraction: float = 0.25, seed: int = 0) -> dict:
    """Mean test ACER over repeated balanced random splits.

    Each repeat subsamples the larger class to the size of the smaller one,
    holds out ``test_fraction`` of each class, sets the EER threshold on the
    training part and measures ACER on the held-out part.
    """
    g = _as_scores(genuine_scores, "genuine")
    s = _as_scores(spoof_scores, "spoof")
    if not 0.0 < test_fraction < 1.0:
        raise InvalidArgument("test_fraction must lie in (0, 1)")
    if repeats < 1:
        raise InvalidArgument("repeats must be >= 1")
    n = min(g.size, s.size)
    n_test = int(round(test_fraction * n))
    if n_test < 1 or n - n_test < 1:
        raise InvalidArgument(f"too few scores ({n} per class) for a {test_fraction:g} holdout")
    rng = make_rng(seed, 0x5EED)
    acers = []
    for _ in range(repeats):
        gi = rng.permutation(g.size)[:n]
        si = rng.permutation(s.size)[:n]
        g_test, g_train = g[gi[:n_test]], g[gi[n_test:]]
        s_test, s_train = s[si[:n_test]], s[si[n_test:]]
        t, _ = calibrate_threshold(g_train, s_train)
        acers.append(acer_at(g_test, s_test, t))
    acers = np.asarray(acers)
    return {
        "repeats": int(repeats),
        "test_fraction": float(test_fraction),
        "per_class": int(n),
        "seed": int(seed),
        "mean_acer": float(acers.mean()),
        "std_acer": float(acers.std()),
    }
