"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 verification
mismatch.  Reports are deterministic JSON (sorted keys, 17-significant-
digit floats) or CSV; `--figures DIR` additionally renders diagnostic
figures next to the report.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, io, metrics, oracle
from .errors import BettiMatchError
from .grid import build_grid
from .matching import (
    BettiMatching,
    _level_loss,
    betti_matching,
    betti_matching_loss,
)
from .metrics import (
    accuracy,
    betti_number_error,
    dice,
    matching_precision,
    to_diagram,
    wasserstein_matching,
)
from .persistence import compute_barcode

EVAL_METRICS = (
    "dice", "accuracy", "beta_err_0", "beta_err_1", "beta_err",
    "tau_err_0", "tau_err_1", "tau_err", "wasserstein_loss",
    "betti_matching_loss", "matching_precision",
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we want exit 1
        raise _UsageError(message)


def _csv_float(x) -> str:
    if isinstance(x, (float, np.floating)):
        return io._format_float(float(x))
    return str(x)


def _common_flags(p: _Parser, with_bothlevel: bool = True) -> None:
    choices = ["sublevel", "superlevel"] + (["bothlevel"] if with_bothlevel else [])
    p.add_argument("--construction", choices=["v", "t"], default="v")
    p.add_argument("--filtration", choices=choices, default="superlevel")
    p.add_argument("--relative", action="store_true")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--figures", metavar="DIR", default=None)
    p.add_argument("-o", "--output", metavar="FILE", default=None)


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fig_dir(args) -> str | None:
    if args.figures:
        os.makedirs(args.figures, exist_ok=True)
    return args.figures


def _levels(args) -> list[str]:
    if args.filtration == "bothlevel":
        return ["superlevel", "sublevel"]
    return [args.filtration]


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


# -- barcode -----------------------------------------------------------------

def _cmd_barcode(args) -> int:
    img = io.load_image(args.image)
    levels = []
    figdir = _fig_dir(args)
    for direction in _levels(args):
        grid = build_grid(img, args.construction, direction, args.relative)
        bc = compute_barcode(grid, keep_critical=False)
        rec = io.barcode_record(bc)
        rec["options"] = io.options_record(direction, args.construction,
                                           args.relative, grid.frame_value)
        levels.append(rec)
        if figdir:
            from . import plots

            fig = plots.barcode_figure(bc, f"{_stem(args.image)} ({direction})")
            plots.save_figure(fig, os.path.join(
                figdir, f"{_stem(args.image)}_barcode_{direction}.png"))
    if args.format == "csv":
        rows = ["filtration,dim,birth,death,birth_row,birth_col,death_row,death_col,essential"]
        for rec in levels:
            direction = rec["options"]["filtration"]
            for dim in ("0", "1"):
                for kind in ("dims", "essential"):
                    for r in rec[kind][dim]:
                        death = "" if r["death"] is None else _csv_float(r["death"])
                        dpx = r["death_pixel"] or ["", ""]
                        rows.append(",".join([
                            direction, dim, _csv_float(r["birth"]), death,
                            str(r["birth_pixel"][0]), str(r["birth_pixel"][1]),
                            str(dpx[0]), str(dpx[1]),
                            str(r["essential"]).lower(),
                        ]))
        _emit(args, "\n".join(rows))
    else:
        _emit(args, io.dumps_canonical({
            "version": __version__, "command": "barcode",
            "image": args.image, "levels": levels,
        }))
    return 0


# -- match -------------------------------------------------------------------

def _matching_record(bm: BettiMatching) -> dict:
    dims = {}
    for dim in (0, 1):
        dims[str(dim)] = {
            "matched": [
                {"pred": io.interval_record(a), "gt": io.interval_record(b)}
                for a, b in bm.matched(dim)
            ],
            "unmatched_pred": [io.interval_record(iv) for iv in bm.unmatched_pred(dim)],
            "unmatched_gt": [io.interval_record(iv) for iv in bm.unmatched_gt(dim)],
        }
    ess_p, ess_g = bm.essential_intervals()
    rec = {
        "filtration": bm.options["filtration"],
        "options": io.options_record(bm.options["filtration"],
                                     bm.options["construction"],
                                     bm.options["relative"],
                                     bm.grid_pred.frame_value),
        "dims": dims,
        "essential": {
            "matched": [
                {"pred": io.interval_record(a), "gt": io.interval_record(b)}
                for a, b in zip(ess_p["matched"], ess_g["matched"])
            ],
            "unmatched_pred": [io.interval_record(iv) for iv in ess_p["unmatched"]],
            "unmatched_gt": [io.interval_record(iv) for iv in ess_g["unmatched"]],
        },
        "tau_err": {
            "0": bm.n_unmatched(0, "pred") + bm.n_unmatched(0, "gt"),
            "1": bm.n_unmatched(1, "pred") + bm.n_unmatched(1, "gt"),
        },
    }
    rec["tau_err"]["total"] = rec["tau_err"]["0"] + rec["tau_err"]["1"]
    return rec


def _cmd_match(args) -> int:
    pred = io.load_image(args.pred)
    gt = io.load_image(args.gt)
    figdir = _fig_dir(args)
    levels = []
    for direction in _levels(args):
        bm = betti_matching(pred, gt, filtration=direction,
                            construction=args.construction,
                            relative=args.relative)
        levels.append(_matching_record(bm))
        if figdir:
            from . import plots

            fig = plots.matching_figure(
                bm, f"{_stem(args.pred)} vs {_stem(args.gt)} ({direction})")
            plots.save_figure(fig, os.path.join(
                figdir,
                f"{_stem(args.pred)}_vs_{_stem(args.gt)}_{direction}.png"))
    if args.format == "csv":
        rows = ["filtration,dim,status,pred_birth,pred_death,gt_birth,gt_death"]
        for rec in levels:
            direction = rec["filtration"]
            for dim in ("0", "1"):
                sec = rec["dims"][dim]
                for m in sec["matched"]:
                    rows.append(",".join([
                        direction, dim, "matched",
                        _csv_float(m["pred"]["birth"]), _csv_float(m["pred"]["death"]),
                        _csv_float(m["gt"]["birth"]), _csv_float(m["gt"]["death"]),
                    ]))
                for r in sec["unmatched_pred"]:
                    rows.append(",".join([direction, dim, "unmatched_pred",
                                          _csv_float(r["birth"]), _csv_float(r["death"]), "", ""]))
                for r in sec["unmatched_gt"]:
                    rows.append(",".join([direction, dim, "unmatched_gt", "", "",
                                          _csv_float(r["birth"]), _csv_float(r["death"])]))
        _emit(args, "\n".join(rows))
    else:
        _emit(args, io.dumps_canonical({
            "version": __version__, "command": "match",
            "pred": args.pred, "gt": args.gt, "levels": levels,
        }))
    return 0


# -- loss ----------------------------------------------------------------------

def _cmd_loss(args) -> int:
    pred = io.load_image(args.pred)
    gt = io.load_image(args.gt)
    report = betti_matching_loss(
        pred, gt, filtration=args.filtration, construction=args.construction,
        relative=args.relative, with_gradient=args.grad is not None)
    if args.grad is not None:
        io.save_gradient(args.grad, report.gradient)
        figdir = _fig_dir(args)
        if figdir:
            from . import plots

            fig = plots.gradient_figure(report.gradient)
            plots.save_figure(fig, os.path.join(
                figdir, f"{_stem(args.pred)}_gradient.png"))
    payload = {
        "version": __version__, "command": "loss",
        "pred": args.pred, "gt": args.gt,
        "options": io.options_record(args.filtration, args.construction,
                                     args.relative),
        "loss": report.loss,
        "levels": [lv.to_dict() for lv in report.levels],
        "gradient_file": args.grad,
    }
    if args.format == "csv":
        rows = ["filtration,dim,matched,unmatched_pred,unmatched_gt"]
        for lv in report.levels:
            for dim in (0, 1):
                rows.append(",".join([
                    lv.filtration, str(dim), _csv_float(lv.matched[dim]),
                    _csv_float(lv.unmatched_pred[dim]), _csv_float(lv.unmatched_gt[dim]),
                ]))
            rows.append(",".join([
                lv.filtration, "essential", _csv_float(lv.essential_matched),
                _csv_float(lv.essential_unmatched_pred),
                _csv_float(lv.essential_unmatched_gt),
            ]))
        rows.append(f"total,,{_csv_float(report.loss)},,")
        _emit(args, "\n".join(rows))
    else:
        _emit(args, io.dumps_canonical(payload))
    return 0


# -- eval ------------------------------------------------------------------------

def _pair_metrics(name, pred_path, gt_path, args):
    pred = io.load_image(pred_path)
    gt = io.load_image(gt_path)
    t = args.threshold
    p = (pred >= t).astype(np.float64)
    g = (gt >= t).astype(np.float64)
    bm = betti_matching(p, g, filtration=args.filtration,
                        construction=args.construction, relative=args.relative)
    level = _level_loss(bm, None)
    be = betti_number_error(p, g, threshold=t, construction=args.construction)
    clamp = 0.0 if args.filtration == "superlevel" else 1.0
    dl = to_diagram(bm.barcode_pred, clamp=clamp)
    dg = to_diagram(bm.barcode_gt, clamp=clamp)
    wm = wasserstein_matching(dl, dg)
    tau0 = bm.n_unmatched(0, "pred") + bm.n_unmatched(0, "gt")
    tau1 = bm.n_unmatched(1, "pred") + bm.n_unmatched(1, "gt")
    vals = {
        "dice": dice(p, g),
        "accuracy": accuracy(p, g),
        "beta_err_0": be.dim0,
        "beta_err_1": be.dim1,
        "beta_err": be.total,
        "tau_err_0": tau0,
        "tau_err_1": tau1,
        "tau_err": tau0 + tau1,
        "wasserstein_loss": wm.cost,
        "betti_matching_loss": level.total,
        "matching_precision": matching_precision(bm, wm),
    }
    return name, vals, bm


def _cmd_eval(args) -> int:
    preds = {f for f in os.listdir(args.pred_dir)
             if os.path.isfile(os.path.join(args.pred_dir, f))}
    gts = {f for f in os.listdir(args.gt_dir)
           if os.path.isfile(os.path.join(args.gt_dir, f))}
    names = sorted(preds & gts)
    if not names:
        raise BettiMatchError(
            f"no common file names between {args.pred_dir} and {args.gt_dir}")
    for missing in sorted((preds | gts) - set(names)):
        print(f"eval: skipping unpaired file {missing}", file=sys.stderr)

    workers = int(os.environ.get("BETTI_MATCH_THREADS",
                                 str(min(4, os.cpu_count() or 1))))
    workers = max(1, workers)
    jobs = [
        (n, os.path.join(args.pred_dir, n), os.path.join(args.gt_dir, n))
        for n in names
    ]
    results = {}
    if workers == 1:
        for n, pp, gp in jobs:
            results[n] = _pair_metrics(n, pp, gp, args)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for n, vals, bmres in pool.map(lambda j: _pair_metrics(*j, args), jobs):
                results[n] = (n, vals, bmres)

    figdir = _fig_dir(args)
    pairs = []
    for n in names:
        _, vals, bmres = results[n]
        pairs.append({"name": n, **vals})
        if figdir:
            from . import plots

            fig = plots.matching_figure(bmres, f"{n} ({args.filtration})")
            plots.save_figure(fig, os.path.join(
                figdir, f"{os.path.splitext(n)[0]}_matching.png"))
    if figdir:
        from . import plots

        fig = plots.metrics_figure([p["name"] for p in pairs],
                                   [p["tau_err"] for p in pairs])
        plots.save_figure(fig, os.path.join(figdir, "summary_tau_err.png"))

    aggregate = {
        m: float(np.mean([p[m] for p in pairs])) for m in EVAL_METRICS
    }
    if args.format == "csv":
        rows = ["name," + ",".join(EVAL_METRICS)]
        for p in pairs:
            rows.append(p["name"] + "," + ",".join(_csv_float(p[m]) for m in EVAL_METRICS))
        rows.append("mean," + ",".join(_csv_float(aggregate[m]) for m in EVAL_METRICS))
        _emit(args, "\n".join(rows))
    else:
        _emit(args, io.dumps_canonical({
            "version": __version__, "command": "eval",
            "options": io.options_record(args.filtration, args.construction,
                                         args.relative),
            "threshold": args.threshold,
            "pairs": pairs,
            "aggregate": aggregate,
        }))
    return 0


# -- verify ----------------------------------------------------------------------

def _verify_barcode(img, args) -> list[str]:
    problems = []
    grid = build_grid(img, args.construction, args.filtration, args.relative)
    fast = compute_barcode(grid).value_multiset()
    ref = oracle.reduce_boundary_matrix(grid).value_multiset()
    if fast != ref:
        problems.append(f"barcode mismatch: fast {fast} vs oracle {ref}")
    return problems


def _verify_pair(img1, img2, args) -> list[str]:
    from .image_persistence import compute_image_barcode

    problems = []
    ext = np.maximum if args.filtration == "superlevel" else np.minimum
    comp = ext(img1, img2)
    gc = build_grid(comp, args.construction, args.filtration, args.relative)
    bc = compute_barcode(gc)
    for label, img in (("pred", img1), ("gt", img2)):
        gi = build_grid(img, args.construction, args.filtration, args.relative)
        bi = compute_barcode(gi)
        fast = compute_image_barcode(gi, gc, bi, bc).forward_value_multiset()
        ref = oracle.reduce_image_matrix(gi, gc).forward_value_multiset(gi)
        if fast != ref:
            problems.append(f"image barcode mismatch ({label} -> comparison)")
    return problems


def _cmd_verify(args) -> int:
    problems = []
    checked = 0
    if args.random:
        rng = np.random.default_rng(args.seed)
        size = args.size or 5
        for trial in range(args.random):
            if trial % 3 == 2:
                img1 = (rng.random((size, size)) < 0.5).astype(np.float64)
                img2 = (rng.random((size, size)) < 0.5).astype(np.float64)
            else:
                img1 = rng.random((size, size))
                img2 = rng.random((size, size))
            for p in _verify_barcode(img1, args) + _verify_barcode(img2, args) \
                    + _verify_pair(img1, img2, args):
                problems.append(f"trial {trial}: {p}")
            checked += 1
    elif args.image:
        img1 = io.load_image(args.image)
        problems += _verify_barcode(img1, args)
        checked += 1
        if args.image2:
            img2 = io.load_image(args.image2)
            problems += _verify_barcode(img2, args)
            problems += _verify_pair(img1, img2, args)
            checked += 1
    else:
        raise _UsageError("verify needs an image or --random N")
    if problems:
        for p in problems:
            print(f"verify: {p}", file=sys.stderr)
        print(f"verify: FAILED ({len(problems)} mismatches over {checked} inputs)")
        return 3
    print(f"verify: OK ({checked} inputs checked against the reduction oracle)")
    return 0


# -- bench -----------------------------------------------------------------------

def _cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    betti_matching(rng.random((8, 8)), rng.random((8, 8)))  # warm the kernels
    suites = [(args.size, args.trials or 10)] if args.size else [(48, 100), (312, 1)]
    out = []
    for size, trials in suites:
        times = []
        for _ in range(trials):
            a = rng.random((size, size))
            b = rng.random((size, size))
            t0 = time.perf_counter()
            betti_matching(a, b, filtration=args.filtration,
                           construction=args.construction,
                           relative=args.relative)
            times.append(time.perf_counter() - t0)
        out.append({
            "size": size,
            "trials": trials,
            "median_s": statistics.median(times),
            "mean_s": statistics.fmean(times),
            "min_s": min(times),
            "max_s": max(times),
        })
    if args.format == "csv":
        rows = ["size,trials,median_s,mean_s,min_s,max_s"]
        for r in out:
            rows.append(",".join(_csv_float(r[k]) for k in
                                 ("size", "trials", "median_s", "mean_s", "min_s", "max_s")))
        _emit(args, "\n".join(rows))
    else:
        _emit(args, io.dumps_canonical({
            "version": __version__, "command": "bench", "runs": out,
        }))
    return 0


# -- entry -----------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="betti-match",
                     description="Topologically faithful matching, metrics "
                                 "and loss for 2D grayscale images")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("barcode", help="persistence barcode of one image")
    p.add_argument("image")
    _common_flags(p)
    p.set_defaults(func=_cmd_barcode)

    p = sub.add_parser("match", help="matched/unmatched features of an image pair")
    p.add_argument("pred")
    p.add_argument("gt")
    _common_flags(p)
    p.set_defaults(func=_cmd_match)

    p = sub.add_parser("loss", help="matching loss, optionally with gradient")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--grad", metavar="OUT.npy", default=None)
    _common_flags(p)
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("eval", help="metric report over paired directories")
    p.add_argument("--pred-dir", required=True)
    p.add_argument("--gt-dir", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    _common_flags(p, with_bothlevel=False)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("verify", help="fast path against the reduction oracle")
    p.add_argument("image", nargs="?")
    p.add_argument("image2", nargs="?")
    p.add_argument("--random", type=int, metavar="N", default=0)
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _common_flags(p, with_bothlevel=False)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("bench", help="timing report")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    _common_flags(p, with_bothlevel=False)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return 1
        return args.func(args)
    except _UsageError as exc:
        print(f"betti-match: {exc}", file=sys.stderr)
        return 1
    except (BettiMatchError, OSError, ValueError) as exc:
        print(f"betti-match: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
