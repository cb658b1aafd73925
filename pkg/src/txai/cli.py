"""Command-line entry point: ``txai <verb> [options]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config
from .data import ingest
from .errors import EmptySetError, InputError, TXAIError
from .golden import run_golden
from .inference import TXAIModel
from .learner import fit_dataset, run_experiment
from .setops import defuzzify_interval, sample
from .temporal import TemporalFuzzySets, tmf_grid
from .trajectories import model_rtms, most_likely_trajectory, render_trajectory

log = logging.getLogger("txai")

GOLDEN_MISMATCH = 2


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _header(verb, cfg: ExperimentConfig) -> str:
    conf = json.dumps(cfg.to_dict(), sort_keys=True, default=str)
    return f"# txai {__version__} {verb} seed={cfg.seed}\n# config: {conf}\n"


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str):
    path.write_text(text if text.endswith("\n") else text + "\n")
    return path


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else v


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    over = {
        "seed": args.seed,
        "mode": getattr(args, "mode", None),
        "relation": getattr(args, "relation", None),
        "grid": getattr(args, "grid", None),
    }
    if getattr(args, "leak_free", False):
        over["leak_free"] = True
    return cfg.with_overrides(**over)


def _data_path(args) -> Path:
    path = args.data or os.environ.get("TXAI_DATA")
    if not path:
        raise InputError("no data file given (use --data)")
    return Path(path)


def _load(args, cfg):
    ds = ingest(_data_path(args), cfg.schema(), cfg.axis())
    log.info("ingested %s", ds.report.to_dict())
    return ds


def _fit(cfg, ds):
    variables = cfg.build_variables(ds)
    return fit_dataset(ds, variables, cfg.ga, cfg.mode, 1.0 / cfg.cv.inner_folds, cfg.zlevels, cfg.relation,
                       cfg.shrink, cfg.interpolation, cfg.tnorm, cfg.output)


def _load_model(path) -> TXAIModel:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such model file: {path}")
    return TXAIModel.from_dict(json.loads(path.read_text()))


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------


def cmd_fit(args):
    cfg = _config(args)
    ds = _load(args, cfg)
    model, results = _fit(cfg, ds)
    out = _out_dir(args)
    _write(out / "model.json", json.dumps(model.to_dict(), sort_keys=True))
    _write(out / "rules.txt", _header("fit", cfg) + model.to_text())
    rows = [[name if name is not None else "global", f"{res.fitness:.6f}", len(res.rulebase)]
            for name, res in ((model.space.time_axis.interval_names[q] if q is not None else None, r)
                              for q, r in results.items())]
    _write_csv(out / "fit_summary.csv", ["interval", "validation_balanced_accuracy", "n_rules"], rows)
    print(_header("fit", cfg) + model.to_text())
    return 0


def cmd_infer(args):
    cfg = _config(args)
    model = _load_model(args.model)
    ds = _load(args, cfg)
    out = _out_dir(args)
    target = out / "predictions.csv"
    if len(ds) == 0:
        warnings.warn("input holds no data rows; nothing to classify")
        log.warning("input holds no data rows; nothing to classify")
        _write_csv(target, ["timestamp", "interval", "prediction", "rule"], [])
        return 0
    labels, winners = model.predict_detail(ds.X, ds.intervals)
    names = model.space.time_axis.interval_names
    rows = [
        [ts.strftime("%Y-%m-%d %H:%M:%S"), names[q], "" if lab is None else lab, f"R{w + 1}" if w >= 0 else ""]
        for ts, q, lab, w in zip(ds.timestamps, ds.intervals, labels, winners)
    ]
    _write_csv(target, ["timestamp", "interval", "prediction", "rule"], rows)
    print(f"{_header('infer', cfg)}{len(rows)} predictions -> {target}")
    return 0


def write_report(report, out: Path, cfg):
    """JSON report plus CSV tables for per-fold metrics, summary bars and convergence."""
    stem = report.mode
    _write(out / f"report_{stem}.json", json.dumps(
        {"header": {"verb": "eval", "seed": cfg.seed, "config": cfg.to_dict()}, **report.to_dict()},
        sort_keys=True, indent=1))
    cols = ["repeat", "fold", "split", "n", "abstained", *report.METRICS]
    _write_csv(out / f"metrics_{stem}.csv", cols, [[_fmt(r[c]) for c in cols] for r in report.records])
    summary = report.summary()
    _write_csv(out / f"summary_{stem}.csv", ["split", "metric", "mean", "std"], [
        [split, m, _fmt(v["mean"]), _fmt(v["std"])] for split, ms in summary.items() for m, v in ms.items()
    ])
    conv = report.convergence()
    _write_csv(out / f"convergence_{stem}.csv", ["generation", "best_validation_balanced_accuracy"],
               [[g, _fmt(float(v))] for g, v in enumerate(conv)])


def cmd_eval(args):
    cfg = _config(args)
    ds = _load(args, cfg)
    variables = cfg.build_variables(ds)
    out = _out_dir(args)
    modes = ("txai", "gt2") if args.both else (cfg.mode,)
    lines = [_header("eval", cfg).rstrip()]
    for mode in modes:
        report = run_experiment(ds, variables, cfg.cv, cfg.ga, mode, cfg.positive, cfg.zlevels, cfg.relation,
                                cfg.shrink, cfg.interpolation, cfg.tnorm, cfg.leak_free, cfg.n_jobs)
        write_report(report, out, cfg)
        s = report.summary()["test"]
        lines.append(f"{mode}: test " + " ".join(f"{m}={v['mean']:.4f}+-{v['std']:.4f}" for m, v in s.items()))
    print("\n".join(lines))
    return 0


def cmd_rtm(args):
    cfg = _config(args)
    ds = _load(args, cfg)
    if args.model:
        model = _load_model(args.model)
    else:
        model, _ = _fit(replace(cfg, mode="txai"), ds)
    rtms = model_rtms(model, ds, cfg.tnorm, cfg.gamma_reduce)
    out = _out_dir(args)
    for m in rtms:
        _write(out / f"rtm_{m.from_interval}_{m.to_interval}.csv", m.to_csv())
    path = most_likely_trajectory(rtms)
    text = _header("rtm", cfg) + model.to_text() + "\n\n# highest-possibility chain\n" + \
        render_trajectory(model, rtms, path)
    _write(out / "trajectory.txt", text)
    for m in rtms:
        text += f"\n\n# {m.from_interval} -> {m.to_interval}\n{m.to_csv()}"
    print(text)
    return 0


def cmd_golden(args):
    res = run_golden()
    print(f"# txai {__version__} golden seed={args.seed if args.seed is not None else 0}")
    print(res.report())
    if args.out:
        _write(_out_dir(args) / "golden.txt", res.report())
    return 0 if res.ok else GOLDEN_MISMATCH


def cmd_dump_plots(args):
    """Grid data for membership surfaces, frequency curves, envelopes and crisp values."""
    cfg = _config(args)
    ds = _load(args, cfg)
    variables = cfg.build_variables(ds)
    fsets = TemporalFuzzySets.fit(ds.X, ds.points, variables, cfg.axis(), cfg.zlevels, cfg.relation,
                                  cfg.interpolation, cfg.shrink)
    out = _out_dir(args)
    axis = fsets.axis
    ts = np.linspace(axis.positions[0], axis.positions[-1], 4 * axis.n_points - 3)
    freq, surf, env, crisp = [], [], [], []
    for row in fsets.sets:
        for s in row:
            var, col = s.var.name, s.col_name
            f_at = s.dist(np.asarray(axis.positions, dtype=float))
            for n, (g, f) in enumerate(zip(s.dist.g, f_at)):
                freq.append([var, col, axis.positions[n], _fmt(float(g)), _fmt(float(f))])
            xs = np.linspace(*s.var.universe, cfg.grid)
            grid = tmf_grid(s, xs, ts)
            for a, t in enumerate(ts):
                for b, x in enumerate(xs):
                    surf.append([var, col, _fmt(float(t)), _fmt(float(x)), _fmt(float(grid[a, b]))])
            sl = sample(s, xs)
            for q in range(axis.n_intervals):
                for i, z in enumerate(cfg.zlevels):
                    for b, x in enumerate(xs):
                        env.append([var, col, axis.interval_names[q], z, _fmt(float(x)),
                                    _fmt(float(sl.lower[q, i, b])), _fmt(float(sl.upper[q, i, b]))])
            for q in range(axis.n_intervals):
                try:
                    v = _fmt(float(defuzzify_interval(sl, q)))
                except EmptySetError:
                    v = ""  # label never occurs in this interval
                crisp.append([var, col, axis.interval_names[q], v])
    _write_csv(out / "frequency.csv", ["variable", "label", "point", "g", "f"], freq)
    _write_csv(out / "tmf_surface.csv", ["variable", "label", "t", "x", "tmf"], surf)
    _write_csv(out / "envelopes.csv", ["variable", "label", "interval", "z", "x", "lower", "upper"], env)
    _write_csv(out / "crisp.csv", ["variable", "label", "interval", "value"], crisp)
    print(f"{_header('dump-plots', cfg)}wrote frequency.csv, tmf_surface.csv, envelopes.csv, crisp.csv to {out}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="txai", description="Time-dependent type-2 fuzzy rule-based classification.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, data=True):
        sp.add_argument("--config", help="YAML experiment config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output directory")
        if data:
            sp.add_argument("--data", help="sensor table (CSV with header)")
            sp.add_argument("--mode", choices=("txai", "gt2"))
            sp.add_argument("--relation")
            sp.add_argument("--grid", type=int)
            sp.add_argument("--leak-free", action="store_true", help="fit distributions on training rows only")

    common(sub.add_parser("fit", help="learn and save rule bases"))
    sp = sub.add_parser("infer", help="classify rows with a saved model")
    common(sp)
    sp.add_argument("--model", required=True)
    sp = sub.add_parser("eval", help="repeated nested cross-validation")
    common(sp)
    sp.add_argument("--both", action="store_true", help="run txai and gt2 modes")
    sp = sub.add_parser("rtm", help="rule transition matrices and trajectory")
    common(sp)
    sp.add_argument("--model")
    common(sub.add_parser("golden", help="replay the worked numerical example"), data=False)
    common(sub.add_parser("dump-plots", help="emit grid CSVs for plotting"))
    return p


VERBS = {"fit": cmd_fit, "infer": cmd_infer, "eval": cmd_eval, "rtm": cmd_rtm, "golden": cmd_golden,
         "dump-plots": cmd_dump_plots}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return VERBS[args.verb](args)
    except TXAIError as e:
        print(f"error[{e.code}] {type(e).__name__}: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
