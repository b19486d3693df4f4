"""HTTP JSON facade over editing sessions, one lock per session.

Paths in the create-session request are read server side; every mutating call
is serialized through its session's lock so concurrent clients cannot
interleave half-applied edits.
"""
from __future__ import annotations

import os
import threading
import uuid

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import editor
from .graph import load_graph, to_geojson


class CreateSessionBody(BaseModel):
    base_graph_path: str
    inferred_graph_path: str


class StatusBody(BaseModel):
    action: str


class PruneBody(BaseModel):
    min_component_len: float | None = None
    keep_importance_min: int | None = None


def segment_feature(session: editor.Session, seg: editor.OverlaySegment) -> dict:
    proj = session.base.projection
    coords = [[round(c, 7) for c in proj.unproject(*seg.a_pos)],
              [round(c, 7) for c in proj.unproject(*seg.b_pos)]]
    return {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {"segment_id": seg.id, "status": seg.status,
                       "support": seg.support},
    }


def overlay_geojson(session: editor.Session) -> dict:
    features = [segment_feature(session, seg)
                for _, seg in sorted(session.segments.items())]
    return {"type": "FeatureCollection", "features": features}


def make_app(data_dir: str | None = None, merge_radius: float = 10.0,
             static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="trajmap editor")
    sessions: dict[str, editor.Session] = {}
    locks: dict[str, threading.RLock] = {}

    def get_session(session_id: str) -> editor.Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")
        return session

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(body: CreateSessionBody) -> dict:
        try:
            base = load_graph(body.base_graph_path)
            inferred = load_graph(body.inferred_graph_path)
        except (OSError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        session_id = uuid.uuid4().hex[:12]
        log_path = None
        if data_dir:
            os.makedirs(data_dir, exist_ok=True)
            log_path = os.path.join(data_dir, f"{session_id}.jsonl")
        session = editor.create_session(base, inferred, session_id,
                                        merge_radius=merge_radius,
                                        log_path=log_path)
        sessions[session_id] = session
        locks[session_id] = threading.RLock()
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}/overlay")
    def get_overlay(session_id: str) -> dict:
        return overlay_geojson(get_session(session_id))

    @app.get("/sessions/{session_id}/base")
    def get_base(session_id: str) -> dict:
        return to_geojson(get_session(session_id).base)

    @app.post("/sessions/{session_id}/segments/{segment_id}/status")
    def post_status(session_id: str, segment_id: int, body: StatusBody) -> dict:
        session = get_session(session_id)
        with locks[session_id]:
            try:
                seg = editor.set_status(session, segment_id, body.action)
            except KeyError as exc:
                raise HTTPException(status_code=404, detail=str(exc))
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        return segment_feature(session, seg)

    @app.post("/sessions/{session_id}/prune")
    def post_prune(session_id: str, body: PruneBody | None = None) -> dict:
        session = get_session(session_id)
        kwargs = {}
        if body and body.min_component_len is not None:
            kwargs["min_component_len"] = body.min_component_len
        if body and body.keep_importance_min is not None:
            kwargs["keep_importance_min"] = body.keep_importance_min
        with locks[session_id]:
            rejected = editor.prune(session, **kwargs)
        return {"rejected_ids": rejected}

    @app.post("/sessions/{session_id}/teleport")
    def post_teleport(session_id: str) -> dict:
        session = get_session(session_id)
        with locks[session_id]:
            return editor.teleport(session)

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str) -> PlainTextResponse:
        session = get_session(session_id)
        with locks[session_id]:
            return PlainTextResponse(editor.export_text(session))

    @app.get("/sessions/{session_id}/counts")
    def get_counts(session_id: str) -> dict:
        return get_session(session_id).counts()

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
