"""Stateless REST service over a loaded knowledge base."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ragocl.errors import (
    ClientTimeout,
    ClientUnavailable,
    DanglingAssociation,
    EmptySpecification,
    ProviderUnavailable,
    RagOclError,
    UnknownModel,
    UnknownRetriever,
)
from ragocl.generation import RETRIEVER_IDS
from ragocl.harness.pipeline import Pipeline

_STATUS = {
    UnknownModel: 404,
    EmptySpecification: 422,
    DanglingAssociation: 422,
    ClientUnavailable: 502,
    ProviderUnavailable: 502,
    ClientTimeout: 504,
}


class QueryBody(BaseModel):
    model: str
    spec: str
    retriever: str = "sparse"
    k: int = Field(10, ge=0)


def _status(exc: RagOclError) -> int:
    for cls, status in _STATUS.items():
        if isinstance(exc, cls):
            return status
    return 400


def create_app(pipeline: Pipeline) -> FastAPI:
    app = FastAPI(title="ragocl")

    @app.exception_handler(RagOclError)
    async def _domain_error(request: Request, exc: RagOclError):
        return JSONResponse({"error": exc.code, "detail": str(exc)}, status_code=_status(exc))

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse({"error": "invalid_request", "detail": str(exc.errors())}, status_code=422)

    @app.exception_handler(Exception)
    async def _unexpected(request: Request, exc: Exception):
        return JSONResponse({"error": "internal_error", "detail": str(exc)}, status_code=500)

    def _check(body: QueryBody) -> None:
        if body.retriever not in RETRIEVER_IDS:
            raise UnknownRetriever(f"unknown retriever {body.retriever!r}")

    @app.get("/health")
    def health():
        return {"status": "ok", "models": len(pipeline.kb)}

    @app.post("/retrieve")
    def retrieve(body: QueryBody):
        _check(body)
        ctx = pipeline.retrieve(body.retriever, body.spec, body.model, body.k)
        return {"chunks": [{"text": i.text, "score": i.score, "rank": i.rank} for i in ctx.items]}

    @app.post("/generate")
    def generate(body: QueryBody):
        _check(body)
        ctx, record = pipeline.generate(body.retriever, body.spec, body.model, body.k)
        return {"ocl": record.output_ocl, "chunks": [i.text for i in ctx.items], "prompt": record.prompt,
                "truncated": record.truncated}

    return app


def serve_api(pipeline: Pipeline, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(pipeline), host=host, port=port)
