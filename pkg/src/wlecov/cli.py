"""Command line interface: ``wlecov {fit,outliers,pca,da,simulate}``.

Exit status is 0 on success, 1 on usage or input errors and 2 on numerical
failure; in the last case a diagnostic JSON document goes to stderr (and to
``--out``-adjacent ``*.diagnostic.json`` when an output path is known).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .discriminant import KINDS, classify, fit_da, loo_cv, misclassification
from .estimator import FitConfig, fit_mle, fit_wle
from .exceptions import BandwidthSelectionError, ConvergenceError, WLEError
from .io import (
    IngestError,
    archive_to_fit,
    config_to_dict,
    fit_to_archive,
    ingest_csv,
    load_archive,
    save_archive,
)
from .kde import SCHEMES
from .outlier import detect, diagnostics
from .pca import outlier_map, project, robust_pca, robust_standardize
from .raf import parse_raf
from .simulate import default_estimators, n_workers, run_study, scenario_from_dict, write_results

logger = logging.getLogger("wlecov")

FLOAT_FORMAT = ".12g"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), FLOAT_FORMAT)
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _parse_init(text):
    if text in ("det", "deterministic"):
        return "deterministic", 500
    if text.startswith("sub"):
        _, _, count = text.partition(":")
        try:
            n = int(count) if count else 500
        except ValueError:
            raise UsageError(f"--init: bad subsample count in {text!r}") from None
        if n < 1:
            raise UsageError("--init: subsample count must be positive")
        return "subsampling", n
    raise UsageError(f"--init must be 'det' or 'sub:<count>', got {text!r}")


def _parse_bandwidth(text):
    if text in (None, "auto"):
        return None
    try:
        h = float(text)
    except ValueError:
        raise UsageError(f"--bandwidth must be a positive number or 'auto', got {text!r}") from None
    if not h > 0:
        raise UsageError("--bandwidth must be positive")
    return h


def _config_from_args(args):
    init, count = _parse_init(args.init)
    try:
        raf = parse_raf(args.raf)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return FitConfig(
        kernel=args.kernel,
        raf=raf,
        bandwidth=_parse_bandwidth(args.bandwidth),
        target_downweighting=args.target_downweighting,
        init=init,
        n_subsamples=count,
        random_state=args.seed,
        max_iter=args.max_iter,
        tol=args.tol,
    )


def _split_columns(text):
    return [c.strip() for c in text.split(",") if c.strip()] if text else None


def _load(args, label_col=None):
    ds = ingest_csv(args.input, delimiter=args.delimiter, header=not args.no_header,
                    label_col=label_col, columns=_split_columns(args.columns))
    if ds.rejected_rows:
        logger.warning("dropped %d row(s) with missing cells: %s", len(ds.rejected_rows),
                       ds.rejected_rows[:20])
    return ds


def _add_fit_options(p):
    p.add_argument("--kernel", default="logback", choices=SCHEMES + ("wlea", "wleb", "wlec", "wled"))
    p.add_argument("--raf", default="hellinger", help="ml, hellinger, kl, ncs or power:<tau>")
    p.add_argument("--bandwidth", default="auto", help="positive number or 'auto'")
    p.add_argument("--target-downweighting", type=float, default=None)
    p.add_argument("--init", default="det", help="'det' or 'sub:<count>'")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)


def _add_input_options(p):
    p.add_argument("--input", required=True)
    p.add_argument("--columns", default=None, help="comma-separated numeric columns to use")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true")


def build_parser():
    parser = _Parser(prog="wlecov", description="Weighted likelihood location and scatter toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="fit location and scatter; write a model archive")
    _add_input_options(p)
    _add_fit_options(p)
    p.add_argument("--label-col", default=None, help="column to ignore (kept out of the fit)")
    p.add_argument("--standardize", action="store_true",
                   help="fit on robust z-scores (median/MAD) of the columns")
    p.add_argument("--out", required=True)

    p = sub.add_parser("outliers", help="flag outliers from a model archive")
    p.add_argument("--model", required=True)
    p.add_argument("--alpha", type=float, default=0.025)
    p.add_argument("--reference", choices=("beta", "chisq"), default="beta")
    p.add_argument("--multiplicity", action="store_true",
                   help="the 'outlier' column uses the multiplicity-corrected cutoff")
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("pca", help="principal components of a fitted scatter")
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.025)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("da", help="robust discriminant analysis")
    _add_input_options(p)
    _add_fit_options(p)
    p.add_argument("--label-col", required=True)
    p.add_argument("--kind", choices=KINDS, default="lda-b")
    p.add_argument("--center", choices=("l1", "wle"), default="l1")
    p.add_argument("--cv", action="store_true", help="also report leave-one-out error")
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("simulate", help="Monte Carlo study over a scenario grid")
    p.add_argument("--grid", required=True, help="JSON list of scenarios or dict of value lists")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimators", default=None, help="comma-separated subset of WLEa,WLEb,WLEc,WLEd,MLE")
    p.add_argument("--target-downweighting", type=float, default=None)
    p.add_argument("--out", required=True)
    return parser


# -- subcommands ---------------------------------------------------------------

def cmd_fit(args):
    config = _config_from_args(args)
    ds = _load(args, label_col=args.label_col)
    if ds.n <= ds.p:
        raise UsageError(f"need more rows than columns to fit (n={ds.n}, p={ds.p})")
    X = ds.data
    extra = {"columns": ds.columns, "data": X.tolist(), "rejected_rows": ds.rejected_rows}
    if args.standardize:
        X, med, scale = robust_standardize(X)
        extra["standardize"] = {"median": med.tolist(), "scale": scale.tolist()}
    fit = fit_wle(X, config)
    save_archive(fit_to_archive(fit, config, extra), args.out)
    print(json.dumps({"n": ds.n, "p": ds.p, "downweighting": fit.downweighting,
                      "bandwidth": fit.scheme.bandwidth if fit.scheme else None,
                      "iterations": fit.iterations, "out": args.out}))


def _archive_data(archive):
    d = archive.payload
    if "data" not in d:
        raise UsageError("model archive carries no data")
    X = np.asarray(d["data"], dtype=float)
    std = d.get("standardize")
    if std:
        X = (X - np.asarray(std["median"])) / np.asarray(std["scale"])
    return X


def cmd_outliers(args):
    if not 0 < args.alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    archive = load_archive(args.model)
    fit = archive_to_fit(archive)
    rep = detect(fit, args.alpha, args.reference)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chosen = rep.flags_multiplicity if args.multiplicity else rep.flags_plain
    _write_csv(
        out / "outliers.csv",
        ["row", "squared_distance", "weight", "cutoff_plain", "cutoff_multiplicity",
         "flag_plain", "flag_multiplicity", "outlier"],
        [
            (i + 1, rep.squared_distances[i], fit.weights[i], rep.cutoff_plain,
             rep.cutoff_multiplicity, rep.flags_plain[i], rep.flags_multiplicity[i], chosen[i])
            for i in range(rep.n)
        ],
    )
    X = _archive_data(archive)
    diag = diagnostics(fit, fit_mle(X), args.alpha)
    _write_csv(out / "qq.csv", ["theoretical", "observed"], diag["qq_pairs"])
    _write_csv(out / "dd.csv", ["row", "classical", "robust"],
               [(i + 1, a, b) for i, (a, b) in enumerate(diag["dd_pairs"])])
    print(json.dumps({"n_outliers": int(chosen.sum()), "cutoff_plain": rep.cutoff_plain,
                      "cutoff_multiplicity": rep.cutoff_multiplicity}))


def cmd_pca(args):
    archive = load_archive(args.model)
    fit = archive_to_fit(archive)
    p = fit.location.shape[0]
    if not 1 <= args.k <= p:
        raise UsageError(f"--k must lie in [1, {p}]")
    model = robust_pca(fit, args.k)
    X = _archive_data(archive)
    proj = project(model, X)
    omap = outlier_map(model, X, args.alpha)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = model.to_dict()
    doc["columns"] = archive.payload.get("columns")
    (out / "pca.json").write_text(json.dumps(doc, indent=1))
    _write_csv(out / "scores.csv", ["row"] + [f"pc{j + 1}" for j in range(args.k)],
               [(i + 1, *row) for i, row in enumerate(proj["scores"])])
    _write_csv(
        out / "outliermap.csv",
        ["row", "score_distance", "orthogonal_distance", "sd_cutoff", "od_cutoff", "sd_flag", "od_flag"],
        [
            (i + 1, sd, od, omap["sd_cutoff"], omap["od_cutoff"], omap["sd_flags"][i], omap["od_flags"][i])
            for i, (sd, od) in enumerate(omap["pairs"])
        ],
    )
    print(json.dumps({"k": args.k, "explained_variance_ratio": model.explained_variance_ratio}))


def cmd_da(args):
    config = _config_from_args(args)
    ds = _load(args, label_col=args.label_col)
    model = fit_da(ds.data, ds.labels, args.kind, config, center=args.center)
    pred = classify(model, ds.data)
    labels = list(model.labels)
    index = {c: j for j, c in enumerate(labels)}
    conf = np.zeros((len(labels), len(labels)), dtype=int)
    for t, q in zip(ds.labels, pred):
        conf[index[t], index[q]] += 1
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "confusion.csv", ["true\\predicted"] + labels,
               [(c, *conf[j]) for j, c in enumerate(labels)])
    rates = {
        "kind": args.kind,
        "center": args.center,
        "config": config_to_dict(config),
        "n": ds.n,
        "all_data": misclassification(model, ds.data, ds.labels),
    }
    if args.cv:
        rates["loo_cv"] = loo_cv(ds.data, ds.labels, args.kind, config, center=args.center,
                                 n_jobs=n_workers())
    (out / "rates.json").write_text(json.dumps(rates, indent=1))
    print(json.dumps({k: rates[k] for k in ("all_data", "loo_cv") if k in rates}))


def _load_grid(path):
    try:
        spec = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read grid {path}: {exc}") from None
    if isinstance(spec, dict):
        keys = list(spec)
        lists = [v if isinstance(v, list) else [v] for v in spec.values()]
        spec = [dict(zip(keys, combo)) for combo in itertools.product(*lists)]
    if not isinstance(spec, list) or not spec:
        raise UsageError("grid must be a non-empty JSON list or dict of lists")
    try:
        return [scenario_from_dict(d) for d in spec]
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad scenario in grid: {exc}") from None


def cmd_simulate(args):
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    grid = _load_grid(args.grid)
    estimators = default_estimators(args.target_downweighting)
    if args.estimators:
        names = _split_columns(args.estimators)
        unknown = [n for n in names if n not in estimators]
        if unknown:
            raise UsageError(f"unknown estimators {unknown}; have {list(estimators)}")
        estimators = {n: estimators[n] for n in names}
    summaries = run_study(grid, args.reps, estimators, seed=args.seed)
    write_results(summaries, args.out)
    print(json.dumps({"cells": len(summaries), "out": args.out}))


COMMANDS = {
    "fit": cmd_fit,
    "outliers": cmd_outliers,
    "pca": cmd_pca,
    "da": cmd_da,
    "simulate": cmd_simulate,
}


def _diagnostic(exc, args):
    doc = {"error": type(exc).__name__, "message": str(exc), "command": getattr(args, "command", None)}
    if isinstance(exc, BandwidthSelectionError):
        doc["profile"] = [list(t) for t in exc.profile]
    if isinstance(exc, ConvergenceError) and exc.best is not None:
        doc["best_iterate"] = {"location": exc.best.location.tolist(),
                               "iterations": exc.best.iterations,
                               "criterion": exc.best.criterion}
    return doc


def run(argv=None) -> int:
    """Entry point returning the process exit status."""
    parser = build_parser()
    args = None
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s: %(message)s")
        COMMANDS[args.command](args)
    except (UsageError, IngestError, FileNotFoundError) as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (WLEError, np.linalg.LinAlgError) as exc:
        doc = _diagnostic(exc, args)
        text = json.dumps(doc, indent=1)
        print(text, file=sys.stderr)
        target = getattr(args, "out", None)
        if target:
            Path(str(target) + ".diagnostic.json").write_text(text)
        return 2
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
