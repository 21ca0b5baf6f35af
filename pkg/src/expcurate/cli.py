"""`xv`: command-line client for the curation engine.

Every subcommand maps 1:1 onto an engine operation; no domain logic lives
here. Exit codes: 0 success, 1 domain error, 2 usage error. Results print
to stdout as canonical JSON, or CSV where a table makes sense.

The store path comes from -s/--store or the XV_STORE environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from expcurate import curate, orchestrate
from expcurate.analytics import (
    agreement,
    compile_bulletin,
    confidence_histogram,
    export_results,
    pair_label_vectors,
    query_items,
)
from expcurate.analytics.tables import ResultTable
from expcurate.errors import CurationError
from expcurate.ingest import (
    EnrichmentRules,
    extract_tabular,
    load_release,
    load_rule_table,
    default_rule_table,
    read_xsac,
)
from expcurate.ingest.loader import create_dataset
from expcurate.metamodel import canonical_encode, parse_timestamp
from expcurate.metamodel.types import Provenance, Release
from expcurate.store import init_store, open_store


def _print_json(payload):
    sys.stdout.write(canonical_encode(payload).decode("utf-8") + "\n")


def _print_bytes(data: bytes):
    sys.stdout.write(data.decode("utf-8"))
    if not data.endswith(b"\n"):
        sys.stdout.write("\n")


def _store_path(args):
    path = getattr(args, "store", None) or os.environ.get("XV_STORE")
    if not path:
        raise CurationError("no store given: use --store or set XV_STORE")
    return path


def _items_table(views) -> ResultTable:
    cell_columns = []
    has_text = False
    for view in views:
        has_text = has_text or bool(view.text)
        for column in view.cells:
            if column not in cell_columns:
                cell_columns.append(column)
    columns = ["item_id", "external_id", "ordinal", "release_id"] + cell_columns
    if has_text:
        columns.append("text")
    rows = []
    for view in views:
        row = [
            view.item.id,
            view.item.external_id or "",
            view.item.ordinal,
            view.item.release_id,
        ]
        row.extend(view.cells.get(c, "") for c in cell_columns)
        if has_text:
            row.append(view.text)
        rows.append(tuple(row))
    return ResultTable(columns=tuple(columns), rows=tuple(rows))


# --- subcommand implementations ----------------------------------------------


def cmd_init(args):
    store = init_store(args.path)
    try:
        summary = {"root": str(store.root), "ledgers": 10}
        if args.with_demo_data:
            from expcurate.scenarios import build_demo_store

            handles = build_demo_store(store)
            summary["experiments"] = [
                handles.jellyfish.experiment_id,
                handles.seismic.experiment_id,
                handles.graffiti.experiment_id,
            ]
            summary["runs"] = list(handles.run_ids)
        if args.write_sources:
            from expcurate.scenarios import write_demo_sources

            paths = write_demo_sources(args.write_sources)
            summary["sources"] = {k: str(v) for k, v in paths.items()}
        _print_json(summary)
    finally:
        store.close()
    return 0


def cmd_ingest(args):
    with open_store(_store_path(args)) as store:
        dataset = store.get_any(args.dataset) or store.dataset_by_name(args.dataset)
        if dataset is None:
            dataset = create_dataset(store, args.dataset, domain=args.domain)
        if args.kind in ("tabular", "media-manifest"):
            staged = extract_tabular(args.path, delimiter=args.delimiter, quote=args.quote)
        elif args.kind == "signal":
            staged = read_xsac(args.path)
        elif args.kind == "text":
            with open(args.path, "r", encoding="utf-8") as fh:
                staged = [line.rstrip("\n") for line in fh]
        else:
            raise CurationError(f"unknown content kind {args.kind!r}")
        result = load_release(
            store,
            dataset.id,
            staged,
            content_kind=args.kind,
            license=args.license,
            provenance=Provenance(kind="external", ref=args.source or str(args.path)),
            external_id_column=args.external_id_column,
            media_hash_column=args.media_hash_column,
        )
        _print_json(
            {
                "release": result.release.to_record(),
                "catalogue": result.catalogue.to_record(),
                "items": len(result.items),
            }
        )
    return 0


def cmd_profile(args):
    with open_store(_store_path(args), writable=False) as store:
        release = store.require(args.release, Release)
        profile = store.get_profile(release)
        _print_json(profile.to_record() if profile else None)
    return 0


def cmd_experiment(args):
    with open_store(_store_path(args), writable=(args.action != "list")) as store:
        if args.action == "create":
            with open(args.team, "r", encoding="utf-8") as fh:
                team = json.load(fh)
            settings = None
            if args.settings:
                with open(args.settings, "r", encoding="utf-8") as fh:
                    settings = json.load(fh)
            created = curate.create_experiment(
                store,
                name=args.name,
                research_question=args.question,
                date=args.date,
                team=team,
                settings=settings,
            )
            _print_json(
                {
                    "experiment": created.experiment.to_record(),
                    "warnings": list(created.warnings),
                }
            )
        elif args.action == "list":
            _print_json([e.to_record() for e in store.experiments()])
        elif args.action == "publish":
            experiment = curate.publish_experiment(store, args.id, args.member)
            _print_json(experiment.to_record())
        elif args.action == "set-status":
            _print_json(
                curate.update_experiment(store, args.id, status=args.status).to_record()
            )
        elif args.action == "advance-cycle":
            current = store.require(args.id)
            _print_json(
                curate.update_experiment(store, args.id, cycle=current.cycle + 1).to_record()
            )
    return 0


def cmd_tag(args):
    with open_store(_store_path(args)) as store:
        if args.mode == "rules":
            ruleset = curate.load_ruleset(args.ruleset)
            result = curate.apply_rule_tags(
                store,
                args.release,
                ruleset,
                args.experiment,
                text_column=args.text_column,
            )
            _print_json(
                {"tags": len(result.tags), "action": result.action.to_record()}
            )
        elif args.mode == "user":
            tag = curate.apply_user_tag(
                store, args.item, args.label, args.member, args.experiment
            )
            _print_json(tag.to_record())
        elif args.mode == "import":
            tags, action = curate.import_labels(
                store, args.release, args.csv, args.author, args.experiment
            )
            _print_json({"tags": len(tags), "action": action.to_record()})
    return 0


def cmd_review(args):
    with open_store(_store_path(args)) as store:
        record = curate.review(
            store,
            args.target,
            args.member,
            args.verdict,
            comment=args.comment,
            expected_seq=args.seq,
        )
        _print_json(record.to_record())
    return 0


def cmd_transform(args):
    with open_store(_store_path(args)) as store:
        if args.mode == "map-headers":
            with open(args.mapping, "r", encoding="utf-8") as fh:
                mapping = json.load(fh)
            absent = tuple(a for a in (args.absent or "").split(",") if a)
            result = curate.map_headers(
                store, args.release, mapping, args.experiment, absent=absent
            )
            _print_json(
                {"release": result.release.to_record(), "action": result.action.to_record()}
            )
        elif args.mode == "geotemporal":
            table = (
                load_rule_table(args.rules, args.hemisphere)
                if args.rules
                else default_rule_table(args.hemisphere)
            )
            rules = EnrichmentRules(
                time_column=args.time_column,
                location_column=args.location_column,
                reference=parse_timestamp(args.reference),
                rule_table=table,
            )
            result = curate.normalize_geotemporal(store, args.release, rules, args.experiment)
            _print_json(
                {"release": result.release.to_record(), "action": result.action.to_record()}
            )
        elif args.mode == "features":
            result = curate.prepare_features(
                store, args.release, args.columns.split(","), args.experiment
            )
            _print_json(
                {"artefact": result.artefact.to_record(), "dropped_rows": result.dropped_rows}
            )
    return 0


def cmd_pipeline(args):
    with open_store(_store_path(args), writable=(args.action == "define")) as store:
        if args.action == "define":
            with open(args.spec, "r", encoding="utf-8") as fh:
                spec = json.load(fh)
            pipeline = orchestrate.define_pipeline(store, spec)
            _print_json(pipeline.to_record())
        else:
            _print_json([p.to_record() for p in store.pipelines()])
    return 0


def cmd_run(args):
    with open_store(_store_path(args)) as store:
        inputs = {}
        for binding in args.input or []:
            name, _, token = binding.partition("=")
            inputs[name] = token
        run, _ = orchestrate.run_pipeline(
            store, args.pipeline, args.experiment, inputs=inputs or None
        )
        _print_json(run.to_record())
        return 0 if run.status == "succeeded" else 1


def cmd_replay(args):
    with open_store(_store_path(args), writable=False) as store:
        report = orchestrate.replay(store, args.run_id)
        sys.stdout.write(f"identical: {'true' if report.identical else 'false'}\n")
        if args.verbose:
            _print_json(report.to_record())
        return 0 if report.identical else 1


def cmd_query(args):
    with open_store(_store_path(args), writable=False) as store:
        scope = args.release or args.experiment
        if scope is None:
            raise CurationError("query needs --release or --experiment")
        expr = json.loads(args.filter) if args.filter else None
        views = query_items(store, scope, expr)
        table = _items_table(views)
        if args.format == "csv":
            _print_bytes(export_results(table, "csv"))
        else:
            _print_bytes(export_results(table, "json"))
    return 0


def cmd_agree(args):
    with open_store(_store_path(args), writable=False) as store:
        labels_a, labels_b, items = pair_label_vectors(store, args.experiment, args.a, args.b)
        result = agreement(labels_a, labels_b)
        record = result.to_record()
        record["items"] = items
        _print_json(record)
    return 0


def cmd_histogram(args):
    with open_store(_store_path(args), writable=False) as store:
        tags = [
            t
            for t in store.tags()
            if t.experiment_id == args.experiment
            and (args.author is None or t.author == args.author)
        ]
        edges = [float(e) for e in args.edges.split(",")] if args.edges else None
        _print_json(confidence_histogram(tags, edges).to_record())
    return 0


def cmd_bulletin(args):
    with open_store(_store_path(args)) as store:
        result = compile_bulletin(store, args.experiment)
        _print_json(result.bulletin)
    return 0


def cmd_export(args):
    with open_store(_store_path(args), writable=False) as store:
        release = store.require(args.release, Release)
        from expcurate.ingest.loader import release_table

        table = release_table(store, release)
        result = ResultTable(columns=table.header, rows=table.rows)
        _print_bytes(export_results(result, args.format))
    return 0


def cmd_check(args):
    with open_store(_store_path(args), writable=False) as store:
        report = orchestrate.consistency_check(store)
        _print_json(report.to_record())
        return 0 if report.is_clean else 1


def cmd_serve(args):
    from expcurate.service import serve

    store = open_store(_store_path(args))
    try:
        serve(store, args.bind)
    finally:
        store.close()
    return 0


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xv", description=__doc__)
    parser.add_argument("-s", "--store", help="store root (or set XV_STORE)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create an empty store")
    p.add_argument("path")
    p.add_argument("--with-demo-data", action="store_true")
    p.add_argument("--write-sources", help="also write raw demo source files here")
    p.set_defaults(fn=cmd_init)

    p = sub.add_parser("ingest", help="extract and load a file as a release")
    p.add_argument("--dataset", required=True, help="dataset name or id; created if new")
    p.add_argument("--path", required=True)
    p.add_argument("--kind", required=True,
                   choices=["tabular", "text", "signal", "media-manifest"])
    p.add_argument("--license", default="unspecified")
    p.add_argument("--domain", default="")
    p.add_argument("--source", default="")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--quote", default='"')
    p.add_argument("--external-id-column")
    p.add_argument("--media-hash-column")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("profile", help="show a release profile")
    p.add_argument("--release", required=True)
    p.set_defaults(fn=cmd_profile)

    p = sub.add_parser("experiment", help="create, list, publish")
    p.add_argument("action", choices=["create", "list", "publish", "set-status", "advance-cycle"])
    p.add_argument("--name")
    p.add_argument("--question")
    p.add_argument("--date")
    p.add_argument("--team", help="JSON file with the member list")
    p.add_argument("--settings", help="JSON file with experiment settings")
    p.add_argument("--id")
    p.add_argument("--member")
    p.add_argument("--status", choices=["draft", "active", "published"])
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("tag", help="rule tags, user tags, or imported labels")
    p.add_argument("mode", choices=["rules", "user", "import"])
    p.add_argument("--release")
    p.add_argument("--ruleset", help="JSON rule-set file")
    p.add_argument("--text-column")
    p.add_argument("--item")
    p.add_argument("--label")
    p.add_argument("--member")
    p.add_argument("--author")
    p.add_argument("--csv", help="item_external_id,label,confidence file")
    p.add_argument("--experiment", required=True)
    p.set_defaults(fn=cmd_tag)

    p = sub.add_parser("review", help="record an accept/reject verdict")
    p.add_argument("--target", required=True)
    p.add_argument("--member", required=True)
    p.add_argument("--verdict", required=True, choices=["accepted", "rejected"])
    p.add_argument("--comment", default="")
    p.add_argument("--seq", type=int, help="expected history seq (optimistic concurrency)")
    p.set_defaults(fn=cmd_review)

    p = sub.add_parser("transform", help="registered transformations")
    p.add_argument("mode", choices=["map-headers", "geotemporal", "features"])
    p.add_argument("--release", required=True)
    p.add_argument("--experiment", required=True)
    p.add_argument("--mapping", help="JSON column mapping file")
    p.add_argument("--absent", help="comma-separated required fields declared absent")
    p.add_argument("--time-column")
    p.add_argument("--location-column")
    p.add_argument("--reference", default="2024-01-01T00:00:00Z")
    p.add_argument("--hemisphere", default="northern", choices=["northern", "southern"])
    p.add_argument("--rules", help="JSON-lines geo-temporal rule file")
    p.add_argument("--columns", help="comma-separated feature columns")
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("pipeline", help="define or list pipelines")
    p.add_argument("action", choices=["define", "list"])
    p.add_argument("--spec", help="pipeline spec JSON file")
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("run", help="execute a pipeline")
    p.add_argument("--pipeline", required=True)
    p.add_argument("--experiment", required=True)
    p.add_argument("--input", action="append", help="name=token runtime binding")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("replay", help="re-execute a run and compare hashes")
    p.add_argument("run_id")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("query", help="filter items in a release or experiment")
    p.add_argument("--release")
    p.add_argument("--experiment")
    p.add_argument("--filter", help="filter expression JSON")
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("agree", help="human-vs-machine agreement")
    p.add_argument("--experiment", required=True)
    p.add_argument("--a", required=True, help="first author (member id or model name)")
    p.add_argument("--b", required=True, help="second author")
    p.set_defaults(fn=cmd_agree)

    p = sub.add_parser("histogram", help="confidence histogram with review flags")
    p.add_argument("--experiment", required=True)
    p.add_argument("--author")
    p.add_argument("--edges", help="comma-separated bin edges")
    p.set_defaults(fn=cmd_histogram)

    p = sub.add_parser("bulletin", help="compile the senior-validated bulletin")
    p.add_argument("--experiment", required=True)
    p.set_defaults(fn=cmd_bulletin)

    p = sub.add_parser("export", help="export a release table")
    p.add_argument("--release", required=True)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("check", help="store-wide consistency report")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8787")
    p.set_defaults(fn=cmd_serve)

    return parser


def cli_dispatch(argv) -> int:
    """Parse and execute; returns the exit code instead of exiting."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except CurationError as exc:
        sys.stderr.write(f"error[{exc.code}]: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error[NOT_FOUND]: {exc}\n")
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
