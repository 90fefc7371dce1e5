"""Command-line interface.

Verbs are thin adapters over the library: ingest, draft, validate, search,
ablate, serve. Exit codes: 0 success, 1 validation failure, 2 transport or
internal error (argparse itself exits 2 on unknown flags).
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from sowgen.config import AppConfig, load_config
from sowgen.drafting import draft_to_json, parse_model_output, spec_from_dict, validate_input
from sowgen.errors import SowgenError, TransportError
from sowgen.gateway import create_app
from sowgen.ingest import ingest_documents, load_manifest, write_anonymization_sidecars
from sowgen.orchestrator import Pipeline, RunRegistry, write_ablation_csv
from sowgen.validation import validate_crossrefs, validate_structure, validate_style
from sowgen.vecstore import VectorStore

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ERROR = 2


def _config_from(args) -> AppConfig:
    config = load_config(args.config)
    if getattr(args, "data_dir", None):
        config.data_dir = Path(args.data_dir)
    return config


def _open_store(config: AppConfig) -> VectorStore:
    if config.index_path.exists():
        return VectorStore.load(
            config.index_path,
            expected_dim=config.pipeline.embedding_dim,
            feedback_alpha=config.pipeline.feedback_alpha,
        )
    return VectorStore(
        dim=config.pipeline.embedding_dim, feedback_alpha=config.pipeline.feedback_alpha
    )


def _pipeline(config: AppConfig, store: VectorStore) -> Pipeline:
    return Pipeline(config.pipeline, store, registry=RunRegistry(config.runs_dir))


def _load_spec(path: str | None):
    if path:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    else:
        data = json.loads(
            resources.files("sowgen.data").joinpath("sample_spec.json").read_text("utf-8")
        )
    spec, type_errors = spec_from_dict(data)
    errors = [e.to_dict() for e in type_errors + validate_input(spec)]
    return spec, errors


def cmd_ingest(args) -> int:
    config = _config_from(args)
    store = _open_store(config)
    pipeline = _pipeline(config, store)
    docs = load_manifest(Path(args.manifest))
    report = ingest_documents(docs, store, pipeline.embedding)
    config.data_dir.mkdir(parents=True, exist_ok=True)
    write_anonymization_sidecars(report, config.anonymization_dir)
    store.save(config.index_path)
    print(
        json.dumps(
            {
                "documents": report.documents,
                "sections": report.sections,
                "clauses": report.clauses,
                "index": str(config.index_path),
            }
        )
    )
    return EXIT_OK


def cmd_draft(args) -> int:
    config = _config_from(args)
    if args.backend:
        config.pipeline.generation.kind = args.backend
        config.pipeline.generation.validate()
    spec, errors = _load_spec(args.input)
    if errors:
        print(json.dumps({"status": "invalid", "field_errors": errors}, indent=2))
        return EXIT_INVALID
    store = _open_store(config)
    pipeline = _pipeline(config, store)
    outcome = pipeline.run(spec)
    if outcome.draft is not None:
        Path(args.out).write_text(draft_to_json(outcome.draft), encoding="utf-8")
    summary = {
        "sow_id": outcome.sow_id,
        "status": outcome.status,
        "verdict": outcome.validation.verdict if outcome.validation else None,
        "compliance": outcome.compliance.overall if outcome.compliance else None,
        "stages": [entry.stage for entry in outcome.audit],
        "out": args.out if outcome.draft is not None else None,
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK if outcome.status == "complete" else EXIT_INVALID


def cmd_validate(args) -> int:
    config = _config_from(args)
    text = Path(args.draft).read_text(encoding="utf-8")
    try:
        draft = parse_model_output(text)
    except SowgenError as exc:
        print(json.dumps({"status": "invalid", "error": str(exc)}))
        return EXIT_INVALID
    issues = (
        validate_structure(draft, config.pipeline.required_keys)
        + validate_crossrefs(draft)
        + validate_style(draft)
    )
    report = {
        "sow_id": draft.sow_id,
        "issues": [issue.to_dict() for issue in issues],
        "errors": sum(1 for i in issues if i.severity == "error"),
        "warnings": sum(1 for i in issues if i.severity == "warning"),
    }
    print(json.dumps(report, indent=2))
    return EXIT_INVALID if report["errors"] else EXIT_OK


def cmd_search(args) -> int:
    config = _config_from(args)
    store = _open_store(config)
    pipeline = _pipeline(config, store)
    [vector] = pipeline.embedding.embed([args.query])
    min_score = config.pipeline.similarity_min if args.min_score is None else args.min_score
    hits = store.search(vector, args.k, min_score)
    for hit in hits:
        print(
            json.dumps(
                {
                    "clause_id": hit.clause_id,
                    "raw_score": round(hit.raw_score, 6),
                    "adjusted_score": round(hit.adjusted_score, 6),
                    "text": store.get(hit.clause_id).text,
                },
                ensure_ascii=False,
            )
        )
    return EXIT_OK


def cmd_ablate(args) -> int:
    config = _config_from(args)
    spec, errors = _load_spec(args.input)
    if errors:
        print(json.dumps({"status": "invalid", "field_errors": errors}, indent=2))
        return EXIT_INVALID
    disabled = frozenset(p.strip() for p in args.disable.split(",") if p.strip()) if args.disable else frozenset()
    store = _open_store(config)
    pipeline = _pipeline(config, store)
    outcome = pipeline.ablation_run(spec, disabled)
    row = {
        "run_id": outcome.sow_id,
        "disabled_set": "+".join(sorted(disabled)) or "none",
        "completeness": f"{outcome.completeness:.4f}",
        "verdict": outcome.validation.verdict if outcome.validation else "failed",
    }
    if args.out:
        write_ablation_csv(Path(args.out), [row], append=Path(args.out).exists())
    print(json.dumps(row))
    return EXIT_OK if outcome.status == "complete" else EXIT_INVALID


def cmd_serve(args) -> int:
    import uvicorn

    config = _config_from(args)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sowgen",
        description="Draft, check, and validate Statement of Work documents.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to a key-value config file")
    common.add_argument("--data-dir", help="override the data directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "ingest", parents=[common], help="index a clause corpus from a JSONL manifest"
    )
    p.add_argument("manifest", help="manifest with one {doc_id, path, origin} per line")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("draft", parents=[common], help="run the full drafting pipeline")
    p.add_argument("--input", help="requirement spec JSON (defaults to the bundled sample)")
    p.add_argument("--out", default="draft.json", help="where to write the draft JSON")
    p.add_argument("--backend", choices=["stub", "http"], help="generation backend override")
    p.set_defaults(func=cmd_draft)

    p = sub.add_parser("validate", parents=[common], help="validate a draft JSON file")
    p.add_argument("draft", help="path to a draft JSON file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("search", parents=[common], help="query the clause index")
    p.add_argument("query")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--min-score", type=float, default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("ablate", parents=[common], help="run the pipeline with modules disabled")
    p.add_argument("--input", help="requirement spec JSON (defaults to the bundled sample)")
    p.add_argument("--disable", default="", help="comma list from: rag,compliance,formatting")
    p.add_argument("--out", help="append the result row to this CSV")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("serve", parents=[common], help="start the HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TransportError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except SowgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
