"""HTTP service exposing /v1/qg, /v1/qa, and /v1/embed.

Checkpoint directory layout: <dir>/qg, <dir>/saqa, <dir>/embed. Requests
are stateless; sampling uses a per-request generator seeded from the
request, so identical requests give identical responses regardless of
interleaving.
"""

from __future__ import annotations

import argparse
import logging
from pathlib import Path

import torch
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .models import load_embedder, load_qg, load_saqa, predict_span
from .sampling import parse_marked_sequence, sample_sequence

logger = logging.getLogger(__name__)


class QgBody(BaseModel):
    context: str
    topic: str
    num_samples: int
    top_p: float
    seed: int


class QaBody(BaseModel):
    question: str
    guidance: str
    contexts: list[str]
    max_span_tokens: int


class EmbedBody(BaseModel):
    texts: list[str]


def create_app(checkpoint_dir) -> FastAPI:
    root = Path(checkpoint_dir)
    for leaf in ("qg", "saqa", "embed"):
        if not (root / leaf).is_dir():
            raise FileNotFoundError(f"missing checkpoint directory {root / leaf}")
    qg_model, qg_vocab = load_qg(root / "qg")
    saqa_model, saqa_vocab = load_saqa(root / "saqa")
    embedder = load_embedder(root / "embed")

    app = FastAPI(title="modelservice")

    @app.exception_handler(RequestValidationError)
    async def invalid_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors())})

    @app.exception_handler(Exception)
    async def model_failure(request: Request, exc: Exception):
        logger.exception("model failure on %s", request.url.path)
        return JSONResponse(status_code=500, content={"error": str(exc)})

    @app.post("/v1/qg")
    def qg(body: QgBody):
        if body.num_samples < 1:
            return JSONResponse(
                status_code=400, content={"error": "num_samples must be >= 1"}
            )
        if not 0 < body.top_p <= 1:
            return JSONResponse(
                status_code=400, content={"error": "top_p must be in (0, 1]"}
            )
        generator = torch.Generator().manual_seed(body.seed & 0x7FFFFFFFFFFFFFFF)
        pairs = []
        for _ in range(body.num_samples):
            tokens = sample_sequence(
                qg_model, qg_vocab, body.topic, body.context, body.top_p, generator
            )
            parsed = parse_marked_sequence(tokens)
            if parsed is not None:
                pairs.append({"question": parsed[0], "entity": parsed[1]})
        return {"pairs": pairs}

    @app.post("/v1/qa")
    def qa(body: QaBody):
        if not body.contexts:
            return JSONResponse(
                status_code=400, content={"error": "contexts must be non-empty"}
            )
        if body.max_span_tokens < 1:
            return JSONResponse(
                status_code=400, content={"error": "max_span_tokens must be >= 1"}
            )
        best = None
        for ci, context in enumerate(body.contexts):
            span = predict_span(
                saqa_model,
                saqa_vocab,
                body.question,
                body.guidance,
                context,
                body.max_span_tokens,
            )
            if span is None:
                continue
            if best is None or span.score > best[1].score:
                best = (ci, span)
        if best is None:
            return {"no_answer": True}
        ci, span = best
        return {
            "answer": body.contexts[ci][span.char_start : span.char_end],
            "score": span.score,
            "context_index": ci,
            "char_start": span.char_start,
            "char_end": span.char_end,
        }

    @app.post("/v1/embed")
    def embed(body: EmbedBody):
        if not body.texts:
            return JSONResponse(
                status_code=400, content={"error": "texts must be non-empty"}
            )
        return {"vectors": [embedder.embed(text) for text in body.texts]}

    return app


def main(argv: list[str] | None = None) -> int:
    import uvicorn

    parser = argparse.ArgumentParser(prog="python -m modelservice.serve")
    parser.add_argument("--checkpoints", required=True)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8600)
    args = parser.parse_args(argv)
    app = create_app(args.checkpoints)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
