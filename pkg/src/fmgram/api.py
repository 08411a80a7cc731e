"""HTTP query service over opened corpus indexes.

Endpoints (all JSON, versioned under /v1):

    POST /v1/query    {index, query_type: "count"|"search", query, max_docs?}
    GET  /v1/indexes  ready corpora with sizes and shard counts
    GET  /v1/health   version plus per-corpus open status

Corpora open in background threads at startup; a query against a corpus
that is still loading simply waits for it, bounded by the request timeout.
Query execution runs on a bounded worker pool so slow reconstructions
cannot starve the event loop.  Every request emits one JSON access-log
line.  Limits: query at most 4096 UTF-8 bytes (413 beyond), max_docs at
most 50, per-request timeout configurable (0 forces an immediate 408,
useful for tests).
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import time
from concurrent.futures import Future, ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .engine import CorpusIndex
from .errors import EmptyQuery, FmgramError, InvalidQuery

MAX_QUERY_BYTES = 4096
MAX_DOCS_LIMIT = 50
DEFAULT_MAX_DOCS = 10
DEFAULT_TIMEOUT_S = 30.0

logger = logging.getLogger("fmgram.api")


@dataclass
class ApiConfig:
    """Service configuration: corpus name -> index directory, plus limits."""

    corpora: dict[str, str] = field(default_factory=dict)
    timeout_s: float | None = DEFAULT_TIMEOUT_S
    workers: int | None = None
    verify: bool = False


def load_config(path: str | Path | None = None) -> ApiConfig:
    """Read service config from a JSON file or $FMGRAM_CONFIG."""
    if path is None:
        path = os.environ.get("FMGRAM_CONFIG")
    if not path:
        raise FileNotFoundError(
            "no config file given and FMGRAM_CONFIG is not set")
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    corpora = raw.get("corpora")
    if not isinstance(corpora, dict) or not corpora:
        raise ValueError(f"{path}: 'corpora' must map names to directories")
    return ApiConfig(
        corpora={str(k): str(v) for k, v in corpora.items()},
        timeout_s=raw.get("timeout_s", DEFAULT_TIMEOUT_S),
        workers=raw.get("workers"),
        verify=bool(raw.get("verify", False)))


class QueryRequest(BaseModel):
    index: str
    query_type: Literal["count", "search"]
    query: str
    max_docs: int | None = None


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: ApiConfig) -> FastAPI:
    workers = config.workers or 2 * (os.cpu_count() or 1)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.executor = ThreadPoolExecutor(max_workers=workers)
        loaders = ThreadPoolExecutor(max_workers=max(len(config.corpora), 1))
        app.state.loads = {
            name: loaders.submit(CorpusIndex.open, directory, config.verify)
            for name, directory in config.corpora.items()
        }
        try:
            yield
        finally:
            for fut in app.state.loads.values():
                if fut.done() and fut.exception() is None:
                    fut.result().close()
            loaders.shutdown(wait=False)
            app.state.executor.shutdown(wait=False)

    app = FastAPI(title="fmgram", version=__version__, lifespan=lifespan)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request,
                                  exc: RequestValidationError):
        return _error(400, f"malformed request: {exc.errors()[:1]}")

    @app.middleware("http")
    async def access_log(request: Request, call_next):
        t0 = time.perf_counter()
        response = await call_next(request)
        record = {
            "ts": datetime.now(timezone.utc).isoformat(),
            "method": request.method,
            "path": request.url.path,
            "status": response.status_code,
            "latency_ms": round((time.perf_counter() - t0) * 1000.0, 3),
        }
        record.update(getattr(request.state, "log_fields", {}))
        logger.info(json.dumps(record, sort_keys=True))
        return response

    @app.post("/v1/query")
    async def query(req: QueryRequest, request: Request):
        request.state.log_fields = {
            "corpus": req.index,
            "query_type": req.query_type,
            "q_bytes": len(req.query.encode("utf-8", errors="replace")),
        }
        fut: Future | None = app.state.loads.get(req.index)
        if fut is None:
            return _error(404, "unknown index")
        try:
            qbytes = req.query.encode("utf-8")
        except UnicodeEncodeError as exc:
            return _error(400, f"query is not valid UTF-8: {exc}")
        if len(qbytes) > MAX_QUERY_BYTES:
            return _error(413, f"query exceeds {MAX_QUERY_BYTES} bytes")
        max_docs = req.max_docs if req.max_docs is not None \
            else DEFAULT_MAX_DOCS
        if not 1 <= max_docs <= MAX_DOCS_LIMIT:
            return _error(400, f"max_docs must be in [1, {MAX_DOCS_LIMIT}]")

        loop = asyncio.get_running_loop()

        async def work():
            ci = await asyncio.wrap_future(fut)
            if req.query_type == "count":
                res = await loop.run_in_executor(
                    app.state.executor, ci.count, qbytes)
                return {"count": res.total, "per_shard": res.per_shard,
                        "latency_ms": round(res.latency_ms, 3)}
            res = await loop.run_in_executor(
                app.state.executor,
                lambda: ci.find_docs(qbytes, max_docs))
            return {
                "count": res.total,
                "docs": [{
                    "doc_id": h.doc_id,
                    "shard_id": h.shard_id,
                    "match_offset": h.match_offset,
                    "doc_text": h.doc_text.decode("utf-8", errors="replace"),
                    "metadata": h.metadata,
                } for h in res.hits],
                "latency_ms": round(res.latency_ms, 3),
            }

        timeout = config.timeout_s
        try:
            payload = await asyncio.wait_for(
                work(), None if timeout is None else float(timeout))
        except asyncio.TimeoutError:
            return _error(408, "query timed out")
        except (EmptyQuery, InvalidQuery) as exc:
            return _error(400, str(exc))
        except FmgramError as exc:
            return _error(503, f"index unavailable: {exc}")
        return payload

    @app.get("/v1/indexes")
    async def indexes():
        out = []
        for name, fut in app.state.loads.items():
            if fut.done() and fut.exception() is None:
                ci = fut.result()
                m = ci.manifest
                out.append({
                    "name": name,
                    "shard_count": ci.shard_count,
                    "doc_count": ci.doc_count,
                    "total_text_bytes": m["total_text_bytes"],
                    "total_index_bytes": m["total_index_bytes"],
                    "ratio": m["ratio"],
                })
        return {"indexes": out}

    @app.get("/v1/health")
    async def health():
        status = {}
        for name, fut in app.state.loads.items():
            if not fut.done():
                status[name] = "loading"
            elif fut.exception() is not None:
                status[name] = f"failed: {fut.exception()}"
            else:
                status[name] = "ready"
        return {"status": "ok", "version": __version__, "indexes": status}

    return app


def serve(config: ApiConfig, host: str = "127.0.0.1", port: int = 8080)\
        -> None:
    """Run the service until interrupted."""
    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(message)s")
    app = create_app(config)
    uvicorn.run(app, host=host, port=port, log_level="warning")
