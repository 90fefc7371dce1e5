"""HTTP service exposing ingestion, drafting, retrieval search, and feedback.

Drafting is asynchronous: POST /api/v1/sow answers 202 immediately and the
pipeline runs on a worker thread; clients poll GET /api/v1/sow/{id}. The
service keeps no state of its own above the clause store and the run
registry — restarting it over the same index file reproduces identical
search results.

Every non-2xx response body is a single ApiError object:
{"code": ..., "message": ..., "field_errors": [...]}.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path
from threading import Lock

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from starlette.exceptions import HTTPException as StarletteHTTPException

from sowgen.config import AppConfig
from sowgen.drafting import spec_from_dict, validate_input
from sowgen.errors import (
    EmptyText,
    SowgenError,
    UnknownSection,
    UnknownSow,
)
from sowgen.ingest import SourceDocument, ingest_documents, write_anonymization_sidecars
from sowgen.orchestrator import FeedbackRecord, Pipeline, RunOutcome, RunRegistry
from sowgen.vecstore import VectorStore

logger = logging.getLogger("sowgen.gateway")

API = "/api/v1"


def api_error(status: int, code: str, message: str, field_errors=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "field_errors": field_errors or []},
    )


def _open_store(config: AppConfig) -> VectorStore:
    if config.index_path.exists():
        return VectorStore.load(
            config.index_path,
            expected_dim=config.pipeline.embedding_dim,
            feedback_alpha=config.pipeline.feedback_alpha,
        )
    return VectorStore(
        dim=config.pipeline.embedding_dim,
        feedback_alpha=config.pipeline.feedback_alpha,
    )


def create_app(config: AppConfig | None = None, store: VectorStore | None = None) -> FastAPI:
    config = config or AppConfig()
    config.data_dir.mkdir(parents=True, exist_ok=True)
    store = store or _open_store(config)
    registry = RunRegistry(config.runs_dir)
    pipeline = Pipeline(config.pipeline, store, registry=registry)

    executor = ThreadPoolExecutor(max_workers=4, thread_name_prefix="sowgen-run")
    in_flight: set[str] = set()
    in_flight_lock = Lock()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        executor.shutdown(wait=True, cancel_futures=False)

    app = FastAPI(title="sowgen", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.console_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.pipeline = pipeline
    app.state.registry = registry
    app.state.config = config

    # -- error shaping -----------------------------------------------------

    @app.exception_handler(StarletteHTTPException)
    async def handle_http_error(_req: Request, exc: StarletteHTTPException):
        codes = {404: "NOT_FOUND", 405: "METHOD_NOT_ALLOWED"}
        return api_error(exc.status_code, codes.get(exc.status_code, "HTTP_ERROR"), str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_req: Request, exc: RequestValidationError):
        return api_error(400, "MALFORMED_BODY", str(exc))

    @app.exception_handler(Exception)
    async def handle_internal_error(_req: Request, exc: Exception):
        logger.exception("unhandled error", exc_info=exc)
        return api_error(500, "INTERNAL", f"{type(exc).__name__}: {exc}")

    # -- endpoints -----------------------------------------------------------

    @app.get("/healthz")
    async def healthz():
        return PlainTextResponse("ok")

    @app.post(API + "/sow", status_code=202)
    async def create_sow(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return api_error(400, "MALFORMED_BODY", f"request body is not valid JSON: {exc}")
        if not isinstance(body, dict):
            return api_error(400, "MALFORMED_BODY", "request body must be a JSON object")
        spec, type_errors = spec_from_dict(body)
        field_errors = [e.to_dict() for e in type_errors + validate_input(spec)]
        if field_errors:
            return api_error(400, "INVALID_SPEC", "requirement input is invalid", field_errors)

        sow_id = pipeline.sow_id_for(spec)
        with in_flight_lock:
            if sow_id in in_flight:
                return JSONResponse(status_code=202, content={"sow_id": sow_id})
            in_flight.add(sow_id)
        registry.put(RunOutcome(sow_id=sow_id, status="processing", spec=spec))

        def run() -> None:
            try:
                pipeline.run(spec, sow_id=sow_id)
            except Exception:  # defensive: a run must always settle
                logger.exception("pipeline run %s crashed", sow_id)
                registry.put(RunOutcome(sow_id=sow_id, status="failed", spec=spec))
            finally:
                with in_flight_lock:
                    in_flight.discard(sow_id)

        executor.submit(run)
        return JSONResponse(status_code=202, content={"sow_id": sow_id})

    @app.get(API + "/sow/{sow_id}")
    async def get_sow(sow_id: str):
        outcome = registry.get(sow_id)
        if outcome is None:
            return api_error(404, "UNKNOWN_SOW", f"no run registered for {sow_id!r}")
        return JSONResponse(content=outcome.to_resource_dict())

    @app.post(API + "/sow/{sow_id}/feedback", status_code=204)
    async def post_feedback(sow_id: str, request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return api_error(400, "MALFORMED_BODY", f"request body is not valid JSON: {exc}")
        rating = body.get("rating")
        if isinstance(rating, bool) or rating not in (-1, 0, 1):
            return api_error(
                400, "INVALID_RATING", "rating must be -1, 0, or +1",
                [{"field": "rating", "code": "ENUM", "message": "rating must be -1, 0, or +1"}],
            )
        section_id = body.get("section_id")
        if section_id is not None and not isinstance(section_id, str):
            return api_error(400, "UNKNOWN_SECTION", "section_id must be a string when given")
        record = FeedbackRecord(
            sow_id=sow_id,
            rating=rating,
            section_id=section_id,
            comment=str(body.get("comment", "")),
            created_at=_dt.datetime.now(_dt.timezone.utc).isoformat(),
        )
        try:
            pipeline.record_feedback(record)
        except UnknownSow as exc:
            return api_error(404, "UNKNOWN_SOW", str(exc))
        except UnknownSection as exc:
            return api_error(400, "UNKNOWN_SECTION", str(exc))
        store.save(config.index_path)
        return Response(status_code=204)

    @app.get(API + "/clauses/search")
    async def search_clauses(request: Request):
        params = request.query_params
        q = params.get("q", "")
        if not q.strip():
            return api_error(400, "MISSING_QUERY", "query parameter 'q' is required")
        try:
            k = int(params.get("k", "5"))
            min_score = float(params.get("min_score", str(config.pipeline.similarity_min)))
        except ValueError:
            return api_error(400, "BAD_PARAMETER", "'k' must be an integer and 'min_score' a number")
        if k < 0:
            return api_error(400, "BAD_PARAMETER", "'k' must be >= 0")
        try:
            [vector] = pipeline.embedding.embed([q])
        except EmptyText as exc:
            return api_error(400, "MISSING_QUERY", str(exc))
        hits = store.search(vector, k, min_score)
        return JSONResponse(
            content=[
                {
                    "clause_id": h.clause_id,
                    "text": store.get(h.clause_id).text,
                    "raw_score": h.raw_score,
                    "adjusted_score": h.adjusted_score,
                }
                for h in hits
            ]
        )

    @app.post(API + "/corpus/ingest")
    async def ingest_corpus(request: Request):
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            return api_error(400, "MALFORMED_BODY", f"request body is not valid JSON: {exc}")
        origin = str(body.get("origin", "api upload"))
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
        docs: list[SourceDocument] = []
        for path_text in body.get("paths", []) or []:
            path = Path(path_text)
            if not path.is_file():
                return api_error(400, "BAD_PATH", f"not a readable file: {path_text}")
            docs.append(
                SourceDocument(
                    doc_id=path.stem,
                    raw_text=path.read_text(encoding="utf-8"),
                    origin=origin,
                    ingested_at=stamp,
                )
            )
        for i, entry in enumerate(body.get("documents", []) or []):
            if not isinstance(entry, dict) or "doc_id" not in entry or "text" not in entry:
                return api_error(
                    400, "MALFORMED_BODY", f"documents[{i}] must carry doc_id and text"
                )
            docs.append(
                SourceDocument(
                    doc_id=str(entry["doc_id"]),
                    raw_text=str(entry["text"]),
                    origin=str(entry.get("origin", origin)),
                    ingested_at=stamp,
                )
            )
        if not docs:
            return api_error(400, "EMPTY_INGEST", "no paths or documents to ingest")
        try:
            report = ingest_documents(docs, store, pipeline.embedding)
        except SowgenError as exc:
            return api_error(400, "INGEST_FAILED", str(exc))
        write_anonymization_sidecars(report, config.anonymization_dir)
        store.save(config.index_path)
        return JSONResponse(
            content={
                "documents": report.documents,
                "sections": report.sections,
                "clauses": report.clauses,
            }
        )

    return app
