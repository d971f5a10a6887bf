"""HTTP service for the review workflow.

Thin JSON layer over a CurationSession: list pending utterances, stream
segment audio (with Range support so players can seek), record decisions,
report progress, export the curated corpus. The reviewer UI is served as a
static bundle from the same process so a deployment is one command.
"""

from __future__ import annotations

import re
from pathlib import Path
from urllib.parse import quote

from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .curation import CurationSession

_RANGE_RE = re.compile(r"bytes=(\d*)-(\d*)$")

_FALLBACK_PAGE = """<!doctype html>
<meta charset="utf-8">
<title>curation service</title>
<h1>curation service is running</h1>
<p>No UI bundle was found. The JSON API lives under <code>/api/</code>:
<code>/api/pending</code>, <code>/api/audio/{id}</code>,
<code>/api/decisions</code>, <code>/api/stats</code>,
<code>/api/export</code>.</p>
"""


class DecisionBody(BaseModel):
    utterance_id: str
    verdict: str
    edited_transcript: str | None = None
    reason: str | None = None
    reviewer: str = "anonymous"


class ExportBody(BaseModel):
    out_dir: str | None = None


def _audio_url(utterance_id: str) -> str:
    # ids may contain "#", which must not be read as a URL fragment
    return "/api/audio/" + quote(utterance_id, safe="")


def _parse_range(header: str, size: int) -> tuple[int, int] | None:
    """Resolve a single-range header to inclusive (start, end) byte offsets.

    Returns None for syntax we don't serve (multi-range, non-byte units);
    raises HTTPException(416) for a well-formed but unsatisfiable range.
    """
    m = _RANGE_RE.match(header.strip())
    if m is None:
        return None
    start_s, end_s = m.groups()
    if start_s == "" and end_s == "":
        return None
    unsatisfiable = HTTPException(
        416, f"range not satisfiable for {size} bytes",
        headers={"Content-Range": f"bytes */{size}"})
    if start_s == "":
        # suffix form: last N bytes
        suffix = int(end_s)
        if suffix == 0:
            raise unsatisfiable
        return max(0, size - suffix), size - 1
    start = int(start_s)
    end = int(end_s) if end_s else size - 1
    if start >= size or start > end:
        raise unsatisfiable
    return start, min(end, size - 1)


def create_app(
    session: CurationSession,
    ui_dir=None,
    export_dir=None,
) -> FastAPI:
    app = FastAPI(title="corpusforge curation")

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        return JSONResponse({"error": exc.detail}, status_code=exc.status_code,
                            headers=getattr(exc, "headers", None))

    @app.get("/api/pending")
    def pending(limit: int = Query(default=50, ge=1, le=500),
                cursor: str | None = None):
        try:
            items, next_cursor = session.pending_page(limit, cursor)
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {
            "items": [
                {
                    "id": u.id,
                    "transcript": u.transcript,
                    "duration_s": u.duration_s,
                    "source": u.source,
                    "audio_url": _audio_url(u.id),
                }
                for u in items
            ],
            "cursor": next_cursor,
        }

    @app.get("/api/audio/{utterance_id}")
    def audio(utterance_id: str, request: Request):
        try:
            path = session.audio_file(utterance_id)
        except KeyError:
            raise HTTPException(404, f"no utterance {utterance_id!r}")
        if not path.is_file():
            raise HTTPException(404, f"audio for {utterance_id!r} missing on disk")
        data = path.read_bytes()
        base_headers = {"Accept-Ranges": "bytes"}
        range_header = request.headers.get("range")
        if range_header:
            resolved = _parse_range(range_header, len(data))
            if resolved is not None:
                start, end = resolved
                return Response(
                    content=data[start:end + 1],
                    status_code=206,
                    media_type="audio/wav",
                    headers={
                        **base_headers,
                        "Content-Range": f"bytes {start}-{end}/{len(data)}",
                    })
        return Response(content=data, media_type="audio/wav",
                        headers=base_headers)

    @app.post("/api/decisions")
    def post_decision(body: DecisionBody):
        try:
            d = session.decide(
                body.utterance_id, body.verdict, body.edited_transcript,
                body.reason, body.reviewer)
        except KeyError:
            raise HTTPException(404, f"no utterance {body.utterance_id!r}")
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {"sequence": d.sequence, "utterance_id": d.utterance_id,
                "verdict": d.verdict}

    @app.get("/api/stats")
    def stats():
        return session.stats()

    @app.post("/api/export")
    def export(body: ExportBody | None = None):
        out = (body.out_dir if body and body.out_dir else export_dir)
        if not out:
            raise HTTPException(
                400, "no out_dir in request and no default export dir")
        manifest = session.export(out)
        return {"out_dir": str(out), "count": len(manifest)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/", response_class=HTMLResponse)
        def index():
            return _FALLBACK_PAGE

    return app


def run_server(app: FastAPI, host: str = "127.0.0.1", port: int = 8765) -> None:
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")
