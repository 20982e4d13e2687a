"""Command-line front end: ``antispoof {gen,score,calibrate,evaluate,report}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, kernels
from .antispoof import GENUINE, LABELS, SPOOF_CURVED, SPOOF_FLAT, AntiSpoofConfig, classify, flatness_score
from .datagen import (
    FACE_PROXY,
    LAYERED,
    MaskSettings,
    SceneDistributions,
    load_capture,
    make_dataset,
    read_manifest,
    write_dataset,
)
from .errors import CodedLFError
from .metrics import calibrate_threshold, evaluate, holdout_acer
from .netpbm import read_coded, read_mask
from .stereo import Calibration

log = logging.getLogger("codedlf")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

SCORE_FIELDS = ["capture_id", "label", "score", "covered_fraction", "probe_d1", "probe_d2", "probe_d3"]
FAILURE_FIELDS = ["capture_id", "label", "error", "message"]


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    seed: int = 0
    jobs: int = 1
    n_genuine: int = 200
    n_flat: int = 100
    n_curved: int = 100
    width: int = 512
    height: int = 512
    genuine_kinds: tuple = (FACE_PROXY, LAYERED)
    calibration: Calibration | None = None
    mask: MaskSettings = field(default_factory=MaskSettings)
    antispoof: AntiSpoofConfig = field(default_factory=AntiSpoofConfig)
    scenes: SceneDistributions = field(default_factory=SceneDistributions)
    split: str = "holdout"
    repeats: int = 50
    test_fraction: float = 0.25

    @property
    def calib(self) -> Calibration:
        return self.calibration or Calibration.centered(self.width, self.height)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        try:
            d = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise DataError(f"config not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"config {path} is not valid JSON: {exc}") from exc
        cfg = cls()
        ds = d.get("dataset", {})
        for key in ("n_genuine", "n_flat", "n_curved", "width", "height"):
            if key in ds:
                setattr(cfg, key, int(ds[key]))
        if "genuine_kinds" in ds:
            cfg.genuine_kinds = tuple(ds["genuine_kinds"])
        if "seed" in d:
            cfg.seed = int(d["seed"])
        if "jobs" in d:
            cfg.jobs = int(d["jobs"])
        if "calibration" in d:
            cfg.calibration = Calibration.from_dict(d["calibration"])
        if "mask" in d:
            cfg.mask = MaskSettings(**d["mask"])
        if "antispoof" in d:
            cfg.antispoof = AntiSpoofConfig.from_dict(d["antispoof"])
        if "scenes" in d:
            cfg.scenes = SceneDistributions.from_dict(d["scenes"])
        ev = d.get("evaluation", {})
        cfg.split = ev.get("split", cfg.split)
        cfg.repeats = int(ev.get("repeats", cfg.repeats))
        cfg.test_fraction = float(ev.get("test_fraction", cfg.test_fraction))
        return cfg

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "dataset": {
                "n_genuine": self.n_genuine,
                "n_flat": self.n_flat,
                "n_curved": self.n_curved,
                "width": self.width,
                "height": self.height,
                "genuine_kinds": list(self.genuine_kinds),
            },
            "calibration": self.calib.to_dict(),
            "mask": self.mask.to_dict(),
            "antispoof": self.antispoof.to_dict(),
            "scenes": self.scenes.to_dict(),
            "evaluation": {"split": self.split, "repeats": self.repeats, "test_fraction": self.test_fraction},
        }


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "jobs", None) is not None:
        cfg.jobs = args.jobs
    if cfg.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    return cfg


def _out_dir(args, default: str) -> Path:
    out = Path(getattr(args, "out", None) or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ----------------------------------------------------------------------------- gen


def cmd_gen(args) -> int:
    cfg = _resolve_config(args)
    for name in ("n_genuine", "n_flat", "n_curved", "width", "height"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    out = _out_dir(args, "dataset")
    caps = make_dataset(
        cfg.n_genuine, cfg.n_flat, cfg.n_curved, (cfg.width, cfg.height), cfg.calib, cfg.seed,
        cfg.mask, cfg.scenes, cfg.genuine_kinds, jobs=cfg.jobs,
    )
    write_dataset(out, caps)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    log.info("wrote %d captures to %s", len(caps), out)
    return EXIT_OK


# --------------------------------------------------------------------------- score


def _score_one(task):
    """Score a capture directory; returns (row, failure) with exactly one set."""
    capture_dir, capture_id, label, cfg = task
    try:
        coded, mask, _ = load_capture(capture_dir)
        s = flatness_score(coded, mask, cfg)
    except (CodedLFError, OSError, ValueError) as exc:
        return None, {"capture_id": capture_id, "label": label, "error": type(exc).__name__, "message": str(exc)}
    row = {
        "capture_id": capture_id,
        "label": label,
        "score": repr(s.score),
        "covered_fraction": repr(s.covered_fraction),
    }
    for i, p in enumerate(s.probes, 1):
        row[f"probe_d{i}"] = repr(p.d)
    return row, None


def score_dataset(root, cfg: AntiSpoofConfig, jobs: int = 1):
    root = Path(root)
    try:
        manifest = read_manifest(root)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from exc
    tasks = [
        (root / m["path"], m["capture_id"], m["label"], cfg)
        for m in sorted(manifest, key=lambda m: m["capture_id"])
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_score_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_score_one(t) for t in tasks]
    rows = [r for r, _ in results if r is not None]
    failures = [f for _, f in results if f is not None]
    return rows, failures


def _write_csv(path, fields, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for r in rows:
            w.writerow(r)


def cmd_score(args) -> int:
    cfg = _resolve_config(args)
    if args.coded:
        if not args.mask:
            raise UsageError("--coded requires --mask")
        try:
            mask = read_mask(args.mask)
            coded = read_coded(args.coded, mask.mask_id)
        except OSError as exc:
            raise DataError(str(exc)) from exc
        try:
            s = flatness_score(coded, mask, cfg.antispoof)
        except CodedLFError as exc:
            print(f"cannot score: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_DATA
        coded_path = Path(args.coded)
        capture_id = coded_path.parent.name if coded_path.stem == "coded" else coded_path.stem
        threshold = cfg.antispoof.threshold
        decision = classify(s, threshold).label if threshold is not None else ""
        w = csv.writer(sys.stdout)
        w.writerow(SCORE_FIELDS + ["decision"])
        w.writerow([capture_id, "", repr(s.score), repr(s.covered_fraction)]
                   + [repr(p.d) for p in s.probes] + [decision])
        return EXIT_OK
    if not args.dataset:
        raise UsageError("score needs --dataset DIR or --coded PGM --mask DIR")
    out = _out_dir(args, ".")
    rows, failures = score_dataset(args.dataset, cfg.antispoof, cfg.jobs)
    _write_csv(out / "scores.csv", SCORE_FIELDS, rows)
    _write_csv(out / "failures.csv", FAILURE_FIELDS, failures)
    log.info("scored %d captures, %d failures", len(rows), len(failures))
    return EXIT_OK


# ------------------------------------------------------------- calibrate / evaluate


def read_scores(path, labels=None) -> list[float]:
    """Scores from a scores.csv (optionally filtered by label) or a bare one-column file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(str(exc)) from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return []
    try:
        if "score" in lines[0].split(","):
            rows = list(csv.DictReader(lines))
            if labels is not None:
                rows = [r for r in rows if r.get("label") in labels]
            return [float(r["score"]) for r in rows]
        return [float(ln.split(",")[0]) for ln in lines]
    except (ValueError, KeyError) as exc:
        raise DataError(f"{path}: unreadable score file ({exc})") from exc


def _split_scores(path, spoof_labels):
    rows = []
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        genuine = sorted(float(r["score"]) for r in rows if r["label"] == GENUINE)
        spoof = sorted(float(r["score"]) for r in rows if r["label"] in spoof_labels)
    except OSError as exc:
        raise DataError(str(exc)) from exc
    except (ValueError, KeyError) as exc:
        raise DataError(f"{path}: unreadable scores ({exc})") from exc
    if not genuine:
        raise DataError(f"class missing: no {GENUINE} scores in {path}")
    if not spoof:
        raise DataError(f"class missing: no spoof scores ({', '.join(spoof_labels)}) in {path}")
    return genuine, spoof


def cmd_calibrate(args) -> int:
    genuine = read_scores(args.genuine, {GENUINE})
    spoof = read_scores(args.spoof, {SPOOF_FLAT, SPOOF_CURVED})
    if not genuine or not spoof:
        raise DataError("calibrate needs non-empty genuine and spoof score lists")
    t, eer = calibrate_threshold(genuine, spoof)
    result = {"threshold": t, "eer": eer, "n_genuine": len(genuine), "n_spoof": len(spoof)}
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if getattr(args, "out", None):
        _out_dir(args, ".")
        (Path(args.out) / "threshold.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def run_evaluation(scores_path, out_dir, cfg: RunConfig, spoof_labels):
    genuine, spoof = _split_scores(scores_path, spoof_labels)
    report = evaluate(genuine, spoof)
    if cfg.split == "holdout":
        report.holdout = holdout_acer(genuine, spoof, cfg.repeats, cfg.test_fraction, cfg.seed)
    elif cfg.split != "all":
        raise UsageError(f"unknown split {cfg.split!r}")
    report.write(out_dir)
    return report


def _apply_eval_args(cfg: RunConfig, args) -> None:
    if getattr(args, "split", None):
        cfg.split = args.split
    if getattr(args, "repeats", None) is not None:
        cfg.repeats = args.repeats
    if getattr(args, "test_fraction", None) is not None:
        cfg.test_fraction = args.test_fraction


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    _apply_eval_args(cfg, args)
    out = _out_dir(args, ".")
    report = run_evaluation(args.scores, out, cfg, tuple(args.spoof_labels))
    sys.stdout.write(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_report(args) -> int:
    """Evaluate and also render the histogram/ROC figure when matplotlib is present."""
    cfg = _resolve_config(args)
    _apply_eval_args(cfg, args)
    out = _out_dir(args, "report")
    report = run_evaluation(args.scores, out, cfg, tuple(args.spoof_labels))
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        log.warning("matplotlib not installed; skipping figure")
        return EXIT_OK
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(10, 4))
    e = report.hist_edges
    centers = (e[:-1] + e[1:]) / 2
    width = e[1] - e[0]
    ax0.bar(centers, report.hist_spoof, width=width, alpha=0.6, label="spoof")
    ax0.bar(centers, report.hist_genuine, width=width, alpha=0.6, label="genuine")
    ax0.axvline(report.threshold, color="k", ls="--", lw=1)
    ax0.set_xlabel("mean l1 error")
    ax0.set_ylabel("count")
    ax0.legend()
    ax1.plot([r[1] for r in report.roc], [r[2] for r in report.roc])
    ax1.plot([0, 1], [0, 1], color="0.7", lw=0.8)
    ax1.set_xlabel("APCER")
    ax1.set_ylabel("1 - BPCER")
    ax1.set_title(f"AUC {report.auc:.3f}, EER {report.eer:.3f}")
    fig.tight_layout()
    fig.savefig(out / "report.png", dpi=120)
    plt.close(fig)
    return EXIT_OK


# --------------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="run configuration JSON")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output directory")

    p = _Parser(prog="antispoof", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({kernels.BACKEND} kernels)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a synthetic dataset")
    g.add_argument("--n-genuine", type=int)
    g.add_argument("--n-flat", type=int)
    g.add_argument("--n-curved", type=int)
    g.add_argument("--width", type=int)
    g.add_argument("--height", type=int)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("score", parents=[common], help="score a dataset or a single coded capture")
    s.add_argument("--dataset", help="dataset directory with manifest.csv")
    s.add_argument("--coded", help="coded image (PGM)")
    s.add_argument("--mask", help="mask directory (mask.pbm + mask.json) or mask.json path")
    s.set_defaults(func=cmd_score)

    c = sub.add_parser("calibrate", parents=[common], help="EER threshold from two score lists")
    c.add_argument("--genuine", required=True)
    c.add_argument("--spoof", required=True)
    c.set_defaults(func=cmd_calibrate)

    for name, func, helptext in (
        ("evaluate", cmd_evaluate, "EER/ACER/ROC report from scores.csv"),
        ("report", cmd_report, "evaluate and plot histograms and ROC"),
    ):
        e = sub.add_parser(name, parents=[common], help=helptext)
        e.add_argument("--scores", required=True)
        e.add_argument("--split", choices=["holdout", "all"])
        e.add_argument("--repeats", type=int)
        e.add_argument("--test-fraction", type=float)
        e.add_argument("--spoof-labels", nargs="+", default=[SPOOF_FLAT, SPOOF_CURVED],
                       choices=[lab for lab in LABELS if lab != GENUINE])
        e.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"antispoof: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, CodedLFError, FileNotFoundError) as exc:
        print(f"antispoof: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"antispoof: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
