"""Command-line front end: ``patchlab {patch,stats,eval,fit,report}``.

Settings may come from an INI file (``--config``, section ``[patchlab]``,
keys named like the long flags with ``_`` for ``-``); flags override it.
Exit codes: 0 success, 2 usage or validation, 3 data integrity, 4 I/O.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import itertools
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import errors, svg
from .evaluation import evaluate_by_size, load_detections, results_summary, write_results_csv
from .geometry import SIZE_CLASSES, PatchConfig, ScaleTable
from .pipeline import (
    build_patched_dataset,
    ensure_writable,
    export_coco,
    export_yolo,
    format_stats,
    load_coco,
    load_patched_coco,
    merge_datasets,
    stats_table,
    write_patch_images,
    write_stats_csv,
)
from .statlab import experiments
from .statlab.design import Var, column, sort_levels
from .statlab.equations import get_equation
from .statlab.ols import diagnostics, fit_formula
from .statlab.report import (
    format_selection,
    format_summary,
    prediction_curves,
    write_coefficients_csv,
    write_curves_csv,
    write_diagnostics_csv,
    write_selection_csv,
)
from .statlab.selection import selection_row

log = logging.getLogger("patchlab")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 2, 3, 4

# Settings that may appear in the config file, with their converters.
_CONFIG_KEYS = {
    "threshold": float, "overlap": float, "sizes": str, "keep_empty": "bool", "eq": str, "select": str,
    "cv_k": int, "cv_seed": int, "jobs": int, "out": str, "train": str, "val": str, "images": str, "yolo": "bool",
    "gt": str, "pred": str, "split": str, "data": str, "level": float, "input": str,
}
_DEFAULTS = {"threshold": 0.5, "overlap": 0.1, "sizes": ",".join(SIZE_CLASSES), "keep_empty": False,
             "cv_k": 10, "jobs": 1, "out": "out", "yolo": False, "level": 0.95}


class UsageError(errors.PatchlabError):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with a [patchlab] section")
    p.add_argument("--out", help="output directory (default: out)")
    p.add_argument("--jobs", type=int, help="worker cap for parallel steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patchlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def patch_flags(p):
        p.add_argument("--train", help="COCO annotation file for the training split")
        p.add_argument("--val", help="COCO annotation file for the validation split")
        p.add_argument("--threshold", type=float, help="minimum visible fraction to keep an annotation")
        p.add_argument("--overlap", type=float, help="overlap as a fraction of the base tile")
        p.add_argument("--sizes", help="comma-separated size classes (default: large,medium,small)")
        p.add_argument("--keep-empty", dest="keep_empty", action="store_const", const=True,
                       help="retain patches without annotations")

    p = sub.add_parser("patch", help="cut a COCO dataset into multi-scale patches")
    patch_flags(p)
    p.add_argument("--images", help="image root; when given, patch PNGs are written")
    p.add_argument("--yolo", action="store_const", const=True, help="also write YOLO label files")
    _add_common(p)

    p = sub.add_parser("stats", help="patch statistics per split and size class")
    patch_flags(p)
    p.add_argument("--gt", help="patched COCO file (instead of --train/--val)")
    _add_common(p)

    p = sub.add_parser("eval", help="score detections against a patched dataset")
    p.add_argument("--gt", help="patched COCO file written by 'patch'")
    p.add_argument("--pred", help="COCO results JSON")
    p.add_argument("--split", choices=("train", "val"), help="restrict to one split")
    _add_common(p)

    p = sub.add_parser("fit", help="fit a numbered regression model")
    p.add_argument("--eq", help="model id(s) 1-13, comma separated (default: 5)")
    p.add_argument("--select", help="model ids for the selection table (default: same as --eq)")
    p.add_argument("--data", help="experiment CSV (default: the bundled table for the model)")
    p.add_argument("--cv-k", dest="cv_k", type=int, help="folds for CV RMSE (default 10)")
    p.add_argument("--cv-seed", dest="cv_seed", type=int, help="shuffle folds with this seed (default: round-robin)")
    p.add_argument("--level", type=float, help="confidence level for prediction bands (default 0.95)")
    _add_common(p)

    p = sub.add_parser("report", help="render SVG charts from fit/eval outputs")
    p.add_argument("--input", help="directory holding 'fit' outputs (default: --out)")
    p.add_argument("--data", help="experiment CSV for the bar charts (default: bundled detector grid)")
    p.add_argument("--eq", help="model id(s) whose fit outputs to plot (default: all found)")
    _add_common(p)
    return parser


def _to_bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def resolve_settings(args: argparse.Namespace) -> dict:
    """Flags over config file over defaults."""
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        cp = configparser.ConfigParser()
        cp.read(path, encoding="utf-8")
        if cp.has_section("patchlab"):
            for key, raw in cp.items("patchlab"):
                key = key.replace("-", "_")
                if key not in _CONFIG_KEYS:
                    raise UsageError(f"unknown config key {key!r} in {path}")
                conv = _CONFIG_KEYS[key]
                try:
                    merged[key] = _to_bool(raw) if conv == "bool" else conv(raw)
                except ValueError:
                    raise UsageError(f"bad value for {key!r} in {path}: {raw!r}") from None
    for key, val in vars(args).items():
        if val is not None and key not in ("command", "config"):
            merged[key] = val
    if merged["jobs"] < 1:
        raise UsageError("--jobs must be >= 1")
    return merged


def _existing(path: str | None, what: str) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.exists():
        raise UsageError(f"{what} not found: {p}")
    return p


def _patch_config(s: dict) -> PatchConfig:
    sizes = tuple(x.strip() for x in str(s["sizes"]).split(",") if x.strip())
    return PatchConfig(threshold=s["threshold"], overlap=s["overlap"], scale_table=ScaleTable(),
                       size_classes=sizes)


def _load_source(s: dict):
    train, val = _existing(s.get("train"), "training annotations"), _existing(s.get("val"), "validation annotations")
    if train is None and val is None:
        raise UsageError("give --train and/or --val")
    parts = [load_coco(p, split) for p, split in ((train, "train"), (val, "val")) if p is not None]
    return parts[0] if len(parts) == 1 else merge_datasets(parts)


def cmd_patch(s: dict) -> int:
    config = _patch_config(s)
    ds = _load_source(s)
    pd = build_patched_dataset(ds, config, keep_empty=s["keep_empty"], jobs=s["jobs"])
    out = ensure_writable(s["out"])
    export_coco(pd, out / "patched_coco.json")
    rows = stats_table(pd) if pd.patches else []
    write_stats_csv(rows, out / "stats.csv")
    if s.get("yolo"):
        export_yolo(pd, out / "labels")
    if s.get("images"):
        write_patch_images(pd, _existing(s["images"], "image root"), out / "images", jobs=s["jobs"])
    counts = {sp: len(pd.select(sp)) for sp in ("train", "val")}
    print(f"{len(pd.patches)} patches ({counts['train']} train / {counts['val']} val), "
          f"{pd.num_annotations} annotations")
    if rows:
        print(format_stats(rows))
    return EXIT_OK


def cmd_stats(s: dict) -> int:
    if s.get("gt"):
        pd = load_patched_coco(_existing(s["gt"], "patched COCO file"))
    else:
        pd = build_patched_dataset(_load_source(s), _patch_config(s), keep_empty=s["keep_empty"], jobs=s["jobs"])
    rows = stats_table(pd)
    out = ensure_writable(s["out"])
    write_stats_csv(rows, out / "stats.csv")
    print(format_stats(rows))
    return EXIT_OK


def cmd_eval(s: dict) -> int:
    gt_path = _existing(s.get("gt"), "patched COCO file")
    pred_path = _existing(s.get("pred"), "predictions file")
    if gt_path is None or pred_path is None:
        raise UsageError("eval needs --gt and --pred")
    gt = load_patched_coco(gt_path)
    dets = load_detections(pred_path, gt)
    split = s.get("split")
    results = evaluate_by_size(gt, dets, split)
    out = ensure_writable(s["out"])
    write_results_csv(results, out / "metrics.csv", split)
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(results_summary(results, split), fh, indent=2)
        fh.write("\n")
    for r in results:
        print(f"{r.size_class or 'all':<7} mAP@0.5={r.map50:.4f}  mAP@0.5:0.95={r.map5095:.4f}  "
              f"(gt={r.num_gt}, det={r.num_detections})")
    return EXIT_OK


def _eq_ids(text) -> list[int]:
    try:
        ids = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"model ids must be integers, got {text!r}") from None
    for i in ids:
        try:
            get_equation(i)
        except errors.InvalidArgument as e:
            raise UsageError(str(e)) from None
    if not ids:
        raise UsageError("no model selected")
    return ids


def _records_for(eq, data: str | None):
    if data is None:
        return eq.records()
    require = ("size", "images_train") if eq.dataset == "size_grid" else ()
    return experiments.read_experiments(_existing(data, "experiment CSV"), require=require)


def _curve_groups(eq, records) -> tuple[dict, list[float], np.ndarray]:
    """Fixed values for every non-(threshold, overlap) input, one group per factor level."""
    variables: list[Var] = []
    for t in eq.formula.terms:
        variables.extend(v for v in t if v not in variables)
    factors = [v for v in variables if v.kind == "factor"]
    numerics = [v.name for v in variables if v.kind != "factor" and v.name not in ("threshold", "overlap")]
    levels = [sort_levels(column(records, v.name)) for v in factors]
    groups = {}
    for combo in itertools.product(*levels):
        name = "/".join(combo) or "all"
        groups[name] = {v.name: c for v, c in zip(factors, combo)}
    overlaps = sorted(set(column(records, "overlap").astype(float).tolist()))
    th = column(records, "threshold").astype(float)
    thresholds = np.round(np.linspace(th.min(), th.max(), 91), 6)
    if numerics:
        over = column(records, "overlap").astype(float)
        per_overlap = {o: {n: float(column(records, n).astype(float)[over == o].mean()) for n in numerics}
                       for o in overlaps}
        return {g: dict(fixed, _per_overlap=per_overlap) for g, fixed in groups.items()}, overlaps, thresholds
    return groups, overlaps, thresholds


def _curves(model, eq, records, level):
    groups, overlaps, thresholds = _curve_groups(eq, records)
    rows = []
    for gname, fixed in groups.items():
        per = fixed.pop("_per_overlap", None)
        for o in overlaps:
            base = dict(fixed, **(per[o] if per else {}))
            rows += prediction_curves(model, [o], thresholds, {gname: base}, level)
    return rows


def cmd_fit(s: dict) -> int:
    ids = _eq_ids(s.get("eq") or "5")
    select = _eq_ids(s["select"]) if s.get("select") else ids
    out = ensure_writable(s["out"])
    for i in ids:
        eq = get_equation(i)
        recs = _records_for(eq, s.get("data"))
        model = fit_formula(eq.formula, recs, label=str(eq.formula))
        text = format_summary(model)
        (out / f"summary_eq{i}.txt").write_text(text, encoding="utf-8")
        write_coefficients_csv(model, out / f"coefficients_eq{i}.csv")
        write_diagnostics_csv(diagnostics(model), out / f"diagnostics_eq{i}.csv")
        write_curves_csv(_curves(model, eq, recs, s["level"]), out / f"curves_eq{i}.csv")
        print(f"== model {i} ({eq.name})")
        print(text)
    rows = []
    for i in select:
        eq = get_equation(i)
        rows.append(selection_row(eq.name, eq.formula, _records_for(eq, s.get("data")), s["cv_k"], s.get("cv_seed")))
    write_selection_csv(rows, out / "selection.csv")
    print(format_selection(rows))
    return EXIT_OK


def _read_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def cmd_report(s: dict) -> int:
    src = Path(s.get("input") or s["out"])
    if not src.is_dir():
        raise errors.DependencyError(f"input directory {src} does not exist; run 'patchlab fit' first")
    if s.get("eq"):
        ids = _eq_ids(s["eq"])
    else:
        ids = sorted(int(p.stem.removeprefix("diagnostics_eq")) for p in src.glob("diagnostics_eq*.csv"))
    if not ids:
        raise errors.DependencyError(f"no fit outputs (diagnostics_eq*.csv) in {src}; run 'patchlab fit' first")
    out = ensure_writable(s["out"])
    recs = (experiments.read_experiments(_existing(s["data"], "experiment CSV")) if s.get("data")
            else experiments.model_grid())
    written = []
    for metric, label in (("map50", "mAP@IoU=0.5"), ("map5095", "mAP@IoU=0.5:0.95")):
        panels: dict = {}
        for r in recs:
            panels.setdefault(r.model if r.size is None else f"{r.model} {r.size}", {})[(r.threshold, r.overlap)] = \
                getattr(r, metric)
        written.append(svg.write_svg(svg.bar_chart(panels, f"{label} by threshold and overlap", label),
                                     out / f"bars_{metric}.svg"))
    for i in ids:
        diag_path, curve_path = src / f"diagnostics_eq{i}.csv", src / f"curves_eq{i}.csv"
        for p in (diag_path, curve_path):
            if not p.is_file():
                raise errors.DependencyError(f"missing {p}; run 'patchlab fit --eq {i}' first")
        d = _read_csv(diag_path)
        fitted = [float(r["fitted"]) for r in d]
        written.append(svg.write_svg(
            svg.scatter(fitted, [float(r["residual"]) for r in d], f"Residuals vs fitted, model {i}", "Fitted", "Residual"),
            out / f"residuals_eq{i}.svg"))
        written.append(svg.write_svg(
            svg.scatter([float(r["qq_theoretical"]) for r in d], [float(r["qq_sample"]) for r in d],
                        f"Normal Q-Q, model {i}", "Theoretical quantiles", "Standardized residuals", hline=None,
                        diagonal=True),
            out / f"qq_eq{i}.svg"))
        c = _read_csv(curve_path)
        by_group: dict[str, list[dict]] = {}
        for r in c:
            by_group.setdefault(r["group"], []).append(r)
        for g, rows in by_group.items():
            series = {}
            for o in sorted({float(r["overlap"]) for r in rows}):
                sel = [r for r in rows if float(r["overlap"]) == o]
                series[f"Overlap {o:g}"] = tuple(np.array([float(r[k]) for r in sel])
                                                for k in ("threshold", "mean", "lower", "upper"))
            safe = g.replace("/", "_").replace(" ", "_")
            written.append(svg.write_svg(svg.curves(series, None, f"model {i}: {g}", "Threshold", "predicted mAP"),
                                         out / f"curves_eq{i}_{safe}.svg"))
    for p in written:
        print(p)
    return EXIT_OK


COMMANDS = {"patch": cmd_patch, "stats": cmd_stats, "eval": cmd_eval, "fit": cmd_fit, "report": cmd_report}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, errors.InvalidArgument, errors.InvalidComparison, errors.UnsupportedImageSize)):
        return EXIT_USAGE
    if isinstance(exc, (errors.DependencyError, OSError)):
        return EXIT_IO
    if isinstance(exc, errors.PatchlabError):
        return EXIT_DATA
    raise exc


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("PATCHLAB_LOG", "WARNING").upper(), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        return COMMANDS[args.command](settings)
    except (errors.PatchlabError, OSError) as e:
        code = exit_code_for(e)
        print(f"patchlab {args.command}: error [{type(e).__name__}]: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
