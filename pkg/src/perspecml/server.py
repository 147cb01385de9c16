"""HTTP facade over the catalog, documents, analysis, rendering and sessions.

Sessions are persisted as append-only event logs in the data directory and
rebuilt from disk on demand, so a restarted server sees every acknowledged
decision. Mutations to one session are serialized behind a per-session
lock; everything else is pure over its inputs.

No authentication: this is a workshop tool, bind it to loopback.
"""

from __future__ import annotations

import os
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse, PlainTextResponse

from . import analysis, catalog as cat, render, session as ses, specformat
from .diagnostics import PerspecmlError, SessionError

DEFAULT_BIND = "127.0.0.1:8765"

_PLACEHOLDER = """<!doctype html>
<html><head><title>perspecml</title></head>
<body>
<h1>perspecml server</h1>
<p>The web board assets are not installed. The JSON API is available under
<code>/api</code> (catalog, documents, sessions, renders).</p>
</body></html>
"""


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, extra: dict | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.extra = extra or {}


class SessionStore:
    """Event-log-backed session registry with per-session write locks."""

    def __init__(self, directory: Path, catalog: cat.Catalog):
        self.directory = Path(directory)
        self.catalog = catalog
        self._cache: dict[str, ses.Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def create(self, seed: specformat.SpecDocument | None, project: str = "") -> ses.Session:
        session = ses.start_session(self.catalog, seed=seed, project=project)
        with self._lock_for(session.id):
            ses.append_events(ses.log_path(self.directory, session.id), list(session.log))
            self._cache[session.id] = session
        return session

    def get(self, session_id: str) -> ses.Session:
        with self._lock_for(session_id):
            return self._load_locked(session_id)

    def _load_locked(self, session_id: str) -> ses.Session:
        if session_id in self._cache:
            return self._cache[session_id]
        path = ses.log_path(self.directory, session_id)
        if not path.exists():
            raise ApiError(404, "E-SES-UNKNOWN", f"no session {session_id!r}")
        session = ses.load_session(self.catalog, path)
        self._cache[session_id] = session
        return session

    def mutate(self, session_id: str, fn) -> ses.Session:
        """Apply fn under the session lock, persisting any new events."""
        with self._lock_for(session_id):
            before = self._load_locked(session_id)
            after = fn(before)
            new_events = list(after.log[len(before.log):])
            if new_events:
                ses.append_events(ses.log_path(self.directory, session_id), new_events)
            self._cache[session_id] = after
            return after

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.psml-log"))


def _prompt_payload(catalog: cat.Catalog, session: ses.Session) -> dict:
    prompt = ses.next_prompt(catalog, session)
    if prompt is None:
        return {"done": True, "pass": session.pass_no}
    return {
        "done": False,
        "pass": prompt.pass_no,
        "position": prompt.position,
        "total": prompt.total,
        "concern": {
            "id": prompt.concern.id,
            "name": prompt.concern.name,
            "prompt": prompt.concern.prompt,
            "description": prompt.concern.description,
            "experimental": prompt.experimental,
        },
        "perspective": {
            "id": prompt.perspective.id,
            "display_name": prompt.perspective.display_name,
            "color": prompt.perspective.color,
        },
        "task": {
            "id": prompt.task.id,
            "name": prompt.task.name,
            "suggested_roles": list(prompt.task.suggested_roles),
        }
        if prompt.task
        else None,
        "related": [
            {
                "concern": rs.related.concern.id,
                "name": rs.related.concern.name,
                "kind": rs.related.relationship.kind,
                "direction": rs.related.direction,
                "rationale": rs.related.relationship.rationale,
                "status": rs.status,
            }
            for rs in prompt.related
        ],
    }


def _session_payload(catalog: cat.Catalog, session: ses.Session) -> dict:
    doc = ses.export_spec(session)
    state = session.to_state_dict()
    state["coverage"] = analysis.coverage(catalog, doc).to_dict()
    return state


def _decision_from_body(body: dict) -> tuple[str, ses.Decision]:
    if not isinstance(body, dict):
        raise ApiError(422, "E-SES-DEC", "decision body must be a JSON object")
    concern = body.get("concern")
    if not isinstance(concern, str):
        raise ApiError(422, "E-SES-DEC", "decision needs a 'concern' id")
    kind = body.get("kind")
    if kind not in ("applicable", "not_applicable", "skip"):
        raise ApiError(422, "E-SES-DEC", "kind must be applicable, not_applicable or skip")
    if kind == "applicable" and body.get("relevance") not in specformat.RELEVANCES:
        raise ApiError(
            422, "E-SES-DEC", f"applicable decision needs relevance in {specformat.RELEVANCES}"
        )
    by = body.get("by", [])
    if not isinstance(by, list) or not all(isinstance(b, str) for b in by):
        raise ApiError(422, "E-SES-DEC", "'by' must be an array of role codes")
    status = body.get("status")
    if status is not None and status not in specformat.STATUSES:
        raise ApiError(422, "E-SES-DEC", f"status must be one of {specformat.STATUSES}")
    decision = ses.Decision(
        kind=kind,
        relevance=body.get("relevance"),
        spec_text=body.get("spec", "") or "",
        by=tuple(sorted(set(by))),
        status=status,
        experimental_override=True if body.get("experimental") else None,
        reason=body.get("reason"),
    )
    return concern, decision


def create_app(
    catalog: cat.Catalog | None = None,
    data_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    catalog = catalog or cat.load_catalog()
    data_dir = Path(data_dir or os.environ.get("PERSPECML_DATA_DIR") or "perspecml-data")
    data_dir.mkdir(parents=True, exist_ok=True)
    sessions_dir = data_dir / "sessions"
    sessions_dir.mkdir(exist_ok=True)
    documents_dir = data_dir / "documents"
    documents_dir.mkdir(exist_ok=True)
    store = SessionStore(sessions_dir, catalog)

    if static_dir is None:
        static_dir = os.environ.get("PERSPECML_STATIC_DIR")
    static_path = Path(static_dir) if static_dir else None

    app = FastAPI(title="perspecml", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.catalog = catalog

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        body = {"code": exc.code, "message": exc.message}
        body.update(exc.extra)
        return JSONResponse(body, status_code=exc.status)

    @app.exception_handler(PerspecmlError)
    async def _domain_error(_request: Request, exc: PerspecmlError):
        status = 409 if exc.code == "E-SES-ORDER" else 422 if isinstance(exc, SessionError) else 400
        return JSONResponse({"code": exc.code, "message": exc.message}, status_code=status)

    # --- catalog ----------------------------------------------------------

    @app.get("/api/catalog")
    def get_catalog():
        return catalog.to_dict()

    # --- documents --------------------------------------------------------

    @app.get("/api/documents")
    def list_documents():
        return {"documents": sorted(p.stem for p in documents_dir.glob("*.psml"))}

    @app.post("/api/documents", status_code=201)
    async def upload_document(request: Request):
        body = await request.json()
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str):
            raise ApiError(422, "E-DOC-BODY", "body must carry the .psml source under 'text'")
        result = specformat.parse_spec(text, catalog)
        if not result.ok:
            raise ApiError(
                422,
                "E-DOC-PARSE",
                "document has syntax errors",
                {"findings": [f.to_dict() for f in result.findings]},
            )
        doc = result.document
        name = body.get("name") or (doc.project_name or "untitled").replace("/", "_") or "untitled"
        path = documents_dir / f"{name}.psml"
        path.write_text(specformat.serialize_spec(doc), "utf-8")
        return {"name": name, "entries": len(doc.entries)}

    @app.get("/api/documents/{name}")
    def get_document(name: str):
        path = documents_dir / f"{name}.psml"
        if not path.exists():
            raise ApiError(404, "E-DOC-UNKNOWN", f"no document {name!r}")
        return PlainTextResponse(path.read_text("utf-8"))

    @app.post("/api/documents/check")
    async def check_document(request: Request):
        body = await request.json()
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str):
            raise ApiError(422, "E-DOC-BODY", "body must carry the .psml source under 'text'")
        result = specformat.parse_spec(text, catalog)
        if not result.ok:
            return {
                "valid": False,
                "findings": [f.to_dict() for f in result.findings],
                "coverage": None,
            }
        findings = analysis.check(catalog, result.document)
        return {
            "valid": True,
            "findings": [f.to_dict() for f in findings],
            "coverage": analysis.coverage(catalog, result.document).to_dict(),
        }

    # --- sessions ---------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    async def create_session(request: Request):
        raw = await request.body()
        body = await request.json() if raw else {}
        seed = None
        if isinstance(body, dict) and body.get("seed"):
            result = specformat.from_json(
                body["seed"] if isinstance(body["seed"], str) else _json_text(body["seed"]),
                catalog,
            )
            if not result.ok:
                raise ApiError(
                    422,
                    "E-SES-SEED",
                    "seed document is invalid",
                    {"findings": [f.to_dict() for f in result.findings]},
                )
            seed = result.document
        project = body.get("project", "") if isinstance(body, dict) else ""
        session = store.create(seed, project=project)
        return _session_payload(catalog, session)

    @app.get("/api/sessions")
    def list_sessions():
        return {"sessions": store.ids()}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_payload(catalog, store.get(session_id))

    @app.get("/api/sessions/{session_id}/prompt")
    def get_prompt(session_id: str):
        return _prompt_payload(catalog, store.get(session_id))

    @app.post("/api/sessions/{session_id}/decision")
    async def post_decision(session_id: str, request: Request):
        body = await request.json()
        concern, decision = _decision_from_body(body)
        session = store.mutate(
            session_id,
            lambda s: ses.submit_decision(catalog, s, concern, decision),
        )
        payload = _prompt_payload(catalog, session)
        payload["coverage"] = analysis.coverage(catalog, ses.export_spec(session)).to_dict()
        return payload

    @app.post("/api/sessions/{session_id}/revisit")
    async def post_revisit(session_id: str, request: Request):
        body = await request.json()
        concern = body.get("concern") if isinstance(body, dict) else None
        if not isinstance(concern, str):
            raise ApiError(422, "E-SES-REV", "revisit needs a 'concern' id")
        session = store.mutate(session_id, lambda s: ses.revisit(catalog, s, concern))
        return _prompt_payload(catalog, session)

    @app.get("/api/sessions/{session_id}/export")
    def export_session(session_id: str):
        doc = ses.export_spec(store.get(session_id))
        return PlainTextResponse(specformat.serialize_spec(doc))

    @app.get("/api/sessions/{session_id}/render/{kind}")
    def render_session(session_id: str, kind: str):
        doc = ses.export_spec(store.get(session_id))
        if kind == "diagram":
            text = render.render_diagram(catalog, render.DiagramOptions(overlay=doc))
            return PlainTextResponse(text, media_type="text/vnd.graphviz")
        if kind == "template":
            text = render.render_template(catalog, doc)
            return PlainTextResponse(text, media_type="text/markdown")
        raise ApiError(400, "E-REN-KIND", f"unknown render kind {kind!r} (diagram or template)")

    # --- static board -----------------------------------------------------

    @app.get("/", include_in_schema=False)
    def board_index():
        if static_path and (static_path / "index.html").exists():
            return FileResponse(static_path / "index.html")
        return HTMLResponse(_PLACEHOLDER)

    @app.get("/assets/{name}", include_in_schema=False)
    def board_asset(name: str):
        if static_path:
            target = (static_path / name).resolve()
            if target.is_file() and target.parent == static_path.resolve():
                return FileResponse(target)
        raise ApiError(404, "E-STATIC", f"no asset {name!r}")

    return app


def _json_text(value) -> str:
    import json

    return json.dumps(value)


def serve(
    bind: str = DEFAULT_BIND,
    data_dir: str | Path | None = None,
    catalog: cat.Catalog | None = None,
    static_dir: str | Path | None = None,
) -> None:
    """Run the HTTP service until interrupted; raises on bind failure."""
    import uvicorn

    directory = Path(data_dir or os.environ.get("PERSPECML_DATA_DIR") or "perspecml-data")
    if directory.exists() and not directory.is_dir():
        raise PerspecmlError("E-SRV-DATA", f"data path {directory} is not a directory")
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise PerspecmlError("E-SRV-BIND", f"bind address must be host:port, got {bind!r}")
    app = create_app(catalog=catalog, data_dir=directory, static_dir=static_dir)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
