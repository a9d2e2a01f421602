"""Command-line surface for the whole workflow.

One verb per invocation::

    agroisa validate FILE...
    agroisa score FILE [--out FILE]
    agroisa ingest --store DIR FILE...
    agroisa dataset --store DIR [--kind indicators|features] [--out FILE]
    agroisa select --data FILE --method cfs|info_gain
    agroisa train --data FILE --algorithm ALG --out MODEL
    agroisa evaluate --data FILE (--model MODEL | --algorithm ALG)
    agroisa grid --store DIR [--seed N] [--jobs N] [--out FILE]
    agroisa report --store DIR --out DIR [--rules] [--selection]
    agroisa synth --n N --seed N (--out DIR | --store DIR)

Exit codes: 0 on success, 1 when input data fails validation, 2 for
usage errors (bad flags, missing paths, unknown ids).  Diagnostics go
to stderr; data goes to stdout or to the requested files.  Every verb
that involves randomness honors ``--seed``.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .classify import format_rules, load_model, save_model, train_ripper
from .dataset import build_features_ds, build_indicators_ds, export_csv, import_csv
from .errors import (
    AgroisaError,
    QuestionnaireParseError,
    ScoringError,
)
from .evaluation import (
    ALGORITHMS,
    SELECTORS,
    cross_validate,
    evaluate_model,
    run_experiment_grid,
)
from .featsel import best_first_cfs, select_attributes
from .indicators import score_record
from .qschema import parse_questionnaire, serialize_questionnaire, validate
from .reports.documents import property_report, write_report_bundle
from .reports.filters import FilterCriteria, filter_records
from .reports.store import QuestionnaireStore
from .synth import SyntheticConfig, default_config, generate_synthetic

STORE_ENV = "AGROISA_STORE"

#: Exceptions that mean "the input data is invalid", not "the command
#: was used wrong".
_DATA_ERRORS = (QuestionnaireParseError, ScoringError)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_text(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _read_questionnaire(path):
    with open(path, encoding="utf-8") as fh:
        return parse_questionnaire(fh.read())


# -- shared flag groups ------------------------------------------------


def _add_filter_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("record filters")
    g.add_argument("--project", help="keep records of this project id")
    g.add_argument("--year", type=int, help="keep records interviewed in this year")
    g.add_argument("--municipality", action="append", metavar="NAME",
                   help="keep records in this municipality (repeatable)")
    g.add_argument("--basin", action="append", metavar="NAME",
                   help="keep records in this water basin (repeatable)")
    g.add_argument("--main-income", help="keep records with this main income source")
    g.add_argument("--state", help="keep records in this state")
    g.add_argument("--meso-region", help="keep records in this meso-region")
    g.add_argument("--micro-region", help="keep records in this micro-region")


def _criteria(args) -> FilterCriteria | None:
    crit = FilterCriteria(
        project=args.project,
        year=args.year,
        main_income=args.main_income,
        state=args.state,
        meso_region=args.meso_region,
        micro_region=args.micro_region,
        municipalities=frozenset(args.municipality) if args.municipality else None,
        water_basins=frozenset(args.basin) if args.basin else None,
    )
    return None if crit == FilterCriteria() else crit


def _add_store_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--store", default=os.environ.get(STORE_ENV),
                   help=f"questionnaire store directory (default: ${STORE_ENV})")


def _open_store(args, create: bool = False) -> QuestionnaireStore:
    if not args.store:
        raise _Usage(f"no store given: pass --store or set ${STORE_ENV}")
    if create:
        os.makedirs(args.store, exist_ok=True)
    elif not os.path.isdir(args.store):
        raise _Usage(f"store directory not found: {args.store}")
    return QuestionnaireStore(args.store)


def _scored_records(args, criteria=None):
    records = [score_record(q) for q in _open_store(args).load_all()]
    if criteria is not None:
        records = filter_records(records, criteria)
    if not records:
        raise _Usage("no records match" if criteria is not None else "store is empty")
    return records


class _Usage(Exception):
    """Command-level usage error (maps to exit code 2)."""


# -- verbs -------------------------------------------------------------


def _cmd_validate(args) -> int:
    bad = 0
    for path in args.files:
        try:
            issues = validate(_read_questionnaire(path))
        except QuestionnaireParseError as exc:
            print(f"{path}: error: {exc}")
            bad += 1
            continue
        for issue in issues:
            print(f"{path}: {issue.severity}: {issue.code}: {issue.message}")
        if any(i.severity == "error" for i in issues):
            bad += 1
    _log(f"{len(args.files) - bad}/{len(args.files)} file(s) valid")
    return 1 if bad else 0


def _cmd_score(args) -> int:
    q = _read_questionnaire(args.file)
    errors = [i for i in validate(q) if i.severity == "error"]
    if errors:
        for issue in errors:
            _log(f"{args.file}: {issue.severity}: {issue.code}: {issue.message}")
        return 1
    _write_text(args.out, property_report(score_record(q)))
    return 0


def _cmd_ingest(args) -> int:
    store = _open_store(args, create=True)
    parsed = []
    bad = 0
    for path in args.files:
        try:
            q = _read_questionnaire(path)
        except QuestionnaireParseError as exc:
            _log(f"{path}: error: {exc}")
            bad += 1
            continue
        issues = [i for i in validate(q) if i.severity == "error"]
        for issue in issues:
            _log(f"{path}: {issue.severity}: {issue.code}: {issue.message}")
        if issues:
            bad += 1
        else:
            parsed.append(q)
    if bad:
        _log(f"{bad} file(s) rejected; nothing ingested")
        return 1
    for q in parsed:
        store.put(q)
    _log(f"ingested {len(parsed)} record(s) into {args.store}")
    return 0


def _cmd_dataset(args) -> int:
    records = _scored_records(args, _criteria(args))
    build = build_indicators_ds if args.kind == "indicators" else build_features_ds
    ds = build(records)
    _write_text(args.out, export_csv(ds))
    _log(f"{args.kind} dataset: {len(ds)} instances, {len(ds.attributes)} attributes")
    return 0


def _cmd_select(args) -> int:
    ds = import_csv(args.data)
    _, result = select_attributes(ds, method=args.method, seed=args.seed)
    chosen = set(result.selected)
    lines = ["attribute,score,selected"]
    lines += [f"{name},{score:.12g},{1 if name in chosen else 0}"
              for name, score in result.ranking]
    _write_text(args.out, "\n".join(lines) + "\n")
    merit = "" if result.merit is None else f", merit {result.merit:.6f}"
    _log(f"{args.method}: kept {len(result.selected)}/{len(ds.attributes)} attributes{merit}")
    return 0


def _apply_selection(ds, method: str, seed: int):
    if method == "none":
        return ds
    sub, result = select_attributes(ds, method=method, seed=seed)
    _log(f"{method} kept {len(result.selected)}/{len(ds.attributes)} attributes")
    return sub


def _cmd_train(args) -> int:
    from .evaluation import _TRAINERS

    ds = _apply_selection(import_csv(args.data), args.select, args.seed)
    model = _TRAINERS[args.algorithm](ds, args.seed)
    save_model(model, args.out)
    _log(f"trained {args.algorithm} on {len(ds)} instances "
         f"({len(ds.attributes)} attributes) -> {args.out}")
    if args.algorithm == "ripper":
        _log(format_rules(model))
    return 0


def _metrics_csv(metrics) -> str:
    lines = ["metric,value"]
    for name in ("accuracy", "weighted_precision", "weighted_recall", "weighted_f1"):
        lines.append(f"{name},{getattr(metrics, name):.12g}")
    lines.append("class,precision,recall,f1,support")
    for k, cls in enumerate(metrics.class_values):
        lines.append(f"{cls},{metrics.precision[k]:.12g},{metrics.recall[k]:.12g},"
                     f"{metrics.f1[k]:.12g},{metrics.support[k]}")
    return "\n".join(lines) + "\n"


def _cmd_evaluate(args) -> int:
    from .evaluation import _TRAINERS

    ds = import_csv(args.data)
    if args.model:
        metrics = evaluate_model(load_model(args.model), ds)
        what = f"model {args.model}"
    else:
        if not args.algorithm:
            raise _Usage("pass either --model or --algorithm")
        sub = _apply_selection(ds, args.select, args.seed)
        trainer = _TRAINERS[args.algorithm]
        metrics = cross_validate(lambda d: trainer(d, args.seed), sub,
                                 n_folds=args.folds, seed=args.seed)
        what = f"{args.folds}-fold CV of {args.algorithm}"
    _write_text(args.out, _metrics_csv(metrics))
    _log(f"{what}: weighted precision {metrics.weighted_precision:.4f}, "
         f"accuracy {metrics.accuracy:.4f}")
    return 0


def _cmd_grid(args) -> int:
    records = _scored_records(args, _criteria(args))
    datasets = {
        "FeaturesDS": build_features_ds(records),
        "IndicatorsDS": build_indicators_ds(records),
    }
    result = run_experiment_grid(datasets, seed=args.seed, n_folds=args.folds,
                                 jobs=args.jobs)
    _write_text(args.out, result.to_csv())
    _log(result.format_table())
    return 0


def _load_stopwords(path):
    if not path:
        return None
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def _cmd_report(args) -> int:
    from .reports.charts import scatter_data

    scatter_data([], args.x, args.y)          # validate axis ids up front
    scatter_data([], args.area_axis, "SI")
    criteria = _criteria(args)
    records = _scored_records(args, criteria)
    stop = _load_stopwords(args.stopwords)

    rules = rules_ds = selection = None
    if args.rules or args.selection:
        ds = build_indicators_ds(records)
        if args.rules:
            rules, rules_ds = train_ripper(ds, seed=args.seed), ds
        if args.selection:
            selection = best_first_cfs(ds)

    bundle_args = dict(
        criteria=criteria, scatter_axes=(args.x, args.y), area_axis=args.area_axis,
        rules=rules, rules_dataset=rules_ds, selection=selection, stopwords=stop,
    )
    manifest = write_report_bundle(args.out, records, **bundle_args)
    n_figures = 0
    if not args.no_figures:
        from . import figures

        n_figures = len(figures.render_figures(args.out, records, **bundle_args))
    for warning in manifest.get("warnings", ()):
        _log(f"warning: {warning}")
    _log(f"report on {manifest['record_count']} record(s): "
         f"{len(manifest['files'])} data file(s), {n_figures} figure(s) -> {args.out}")
    return 0


def _cmd_synth(args) -> int:
    if not args.out and not args.store:
        raise _Usage(f"pass --out or --store (or set ${STORE_ENV})")
    if args.plant == "default":
        cfg = default_config(args.n, args.seed)
    else:
        cfg = SyntheticConfig(n=args.n, seed=args.seed)
    cfg = dataclasses.replace(cfg, project_id=args.project, year=args.year)
    questionnaires = generate_synthetic(cfg)
    if args.out:  # an explicit directory wins over the ambient store
        os.makedirs(args.out, exist_ok=True)
        for q in questionnaires:
            name = f"{q.header.property_code}_{q.header.year}.isa"
            _write_text(os.path.join(args.out, name), serialize_questionnaire(q))
        where = args.out
    else:
        store = _open_store(args, create=True)
        for q in questionnaires:
            store.put(q)
        where = args.store
    _log(f"wrote {len(questionnaires)} synthetic questionnaire(s) to {where}")
    return 0


# -- parser ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agroisa",
        description="Questionnaire scoring, dataset mining, and report generation.",
    )
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    p = sub.add_parser("validate", help="check questionnaire files against the schema")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("score", help="score one questionnaire and print its report")
    p.add_argument("file", metavar="FILE")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(handler=_cmd_score)

    p = sub.add_parser("ingest", help="validate questionnaire files and add them to the store")
    _add_store_flag(p)
    p.add_argument("files", nargs="+", metavar="FILE")
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("dataset", help="export a learning dataset from the store")
    _add_store_flag(p)
    _add_filter_flags(p)
    p.add_argument("--kind", choices=("indicators", "features"), default="indicators")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(handler=_cmd_dataset)

    p = sub.add_parser("select", help="rank and select dataset attributes")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--method", choices=("cfs", "info_gain"), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the ranking CSV here instead of stdout")
    p.set_defaults(handler=_cmd_select)

    p = sub.add_parser("train", help="train a classifier and save it as JSON")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    p.add_argument("--select", choices=SELECTORS, default="none",
                   help="attribute selection applied before training")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a model or cross-validate an algorithm")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--model", help="saved model to evaluate on the dataset")
    p.add_argument("--algorithm", choices=ALGORITHMS,
                   help="algorithm to cross-validate instead of a saved model")
    p.add_argument("--select", choices=SELECTORS, default="none")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the metrics CSV here instead of stdout")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("grid", help="run the algorithm x dataset x selector grid")
    _add_store_flag(p)
    _add_filter_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for grid cells")
    p.add_argument("--out", help="write the grid CSV here instead of stdout")
    p.set_defaults(handler=_cmd_grid)

    p = sub.add_parser("report", help="write the report bundle (data files and figures)")
    _add_store_flag(p)
    _add_filter_flags(p)
    p.add_argument("--out", required=True, help="bundle directory")
    p.add_argument("--x", default="I12", help="scatter x axis (I1..I21, S1..S7, SI)")
    p.add_argument("--y", default="SI", help="scatter y axis")
    p.add_argument("--area-axis", default="SI", help="value axis of the area chart")
    p.add_argument("--rules", action="store_true",
                   help="train a rule set on the records and include its flow data")
    p.add_argument("--selection", action="store_true",
                   help="include attribute-relevance bars from a CFS run")
    p.add_argument("--stopwords", help="file with one stop word per line")
    p.add_argument("--no-figures", action="store_true",
                   help="write only the delimited data files")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_report)

    p = sub.add_parser("synth", help="generate synthetic questionnaires")
    p.add_argument("--n", type=int, required=True, help="number of questionnaires")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plant", choices=("default", "none"), default="default",
                   help="plant the standard rule structure or draw plain records")
    p.add_argument("--project", default="SYN", help="project id stamped on the records")
    p.add_argument("--year", type=int, default=2023, help="interview year")
    p.add_argument("--out", help="directory for one .isa file per questionnaire")
    _add_store_flag(p)
    p.set_defaults(handler=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _Usage as exc:
        _log(f"agroisa {args.verb}: {exc}")
        return 2
    except _DATA_ERRORS as exc:
        _log(f"agroisa {args.verb}: {exc}")
        return 1
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        _log(f"agroisa {args.verb}: {exc}")
        return 2
    except AgroisaError as exc:
        _log(f"agroisa {args.verb}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
