"""HTTP facade over the knowledge base and visibility queries.

One service instance hosts one project file. All mutations funnel through
the knowledge base's single-writer lock; the event stream is served as
server-sent events so clients can mirror state changes in revision order.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator, Literal

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from tracegraph import knowledge
from tracegraph.knowledge import (
    Annotation,
    ChangeEvent,
    InvalidUri,
    KnowledgeBase,
    KnowledgeObject,
    RevisionTooOld,
    SelfContainment,
    UnknownId,
    UnknownType,
)
from tracegraph.query import SelectionQuery, compute_visibility, tree_children, tree_roots

API_PREFIX = "/api/v1"


class LinkBody(BaseModel):
    linkTypeId: str
    parentId: str
    childId: str


class AnnotationBody(BaseModel):
    kind: Literal["Note", "DocumentLink"]
    text: str | None = None
    uri: str | None = None


class QueryBody(BaseModel):
    displayedTypeIds: list[str]
    checked: dict[str, list[str]] = {}
    enabledLinkTypeIds: list[str] | None = None


def _object_json(obj: KnowledgeObject) -> dict:
    return {
        "id": obj.id,
        "typeId": obj.type_id,
        "displayName": obj.display_name,
        "qualifiedName": obj.qualified_name,
        "access": obj.access.value,
        "kindTag": obj.kind_tag,
        "annotations": [
            {"kind": a.kind.value, "text": a.text, "uri": a.uri, "createdAt": a.created_at}
            for a in obj.annotations
        ],
    }


def _event_json(ev: ChangeEvent) -> dict:
    return {"revision": ev.revision, "kind": ev.kind.value, "payload": ev.payload}


def create_app(kb: KnowledgeBase, kb_path: Path | None = None) -> FastAPI:
    app = FastAPI(title="tracegraph", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "MalformedBody", "detail": str(exc)})

    @app.exception_handler(UnknownId)
    @app.exception_handler(UnknownType)
    async def unknown_id(_req: Request, exc: Exception):
        return JSONResponse(status_code=404, content={"error": type(exc).__name__, "detail": str(exc)})

    @app.exception_handler(SelfContainment)
    @app.exception_handler(RevisionTooOld)
    async def constraint(_req: Request, exc: Exception):
        return JSONResponse(status_code=409, content={"error": type(exc).__name__, "detail": str(exc)})

    @app.exception_handler(InvalidUri)
    async def invalid_uri(_req: Request, exc: InvalidUri):
        return JSONResponse(status_code=400, content={"error": "InvalidUri", "detail": str(exc)})

    @app.get(API_PREFIX + "/types")
    def list_types():
        return {
            "revision": kb.revision,
            "types": [
                {"id": t.id, "name": t.name, "colorKey": t.color_key.value, "builtin": t.builtin}
                for t in kb.knowledge_types
            ],
        }

    @app.get(API_PREFIX + "/link-types")
    def list_link_types():
        return {
            "revision": kb.revision,
            "linkTypes": [
                {"id": t.id, "name": t.name, "builtin": t.builtin} for t in kb.link_types
            ],
        }

    @app.get(API_PREFIX + "/objects")
    def list_objects(type: str, roots: bool = False):
        objs = tree_roots(kb, type) if roots else kb.objects_of_type(type)
        return {"revision": kb.revision, "objects": [_object_json(o) for o in objs]}

    @app.get(API_PREFIX + "/objects/{obj_id}/children")
    def object_children(obj_id: str, links: str | None = Query(default=None)):
        if links is None:
            enabled = {t.id for t in kb.link_types}
        else:
            enabled = {part for part in links.split(",") if part}
        rows = tree_children(kb, obj_id, enabled)
        return {
            "revision": kb.revision,
            "children": [
                {"linkTypeName": name, "object": _object_json(child)} for name, child in rows
            ],
        }

    @app.post(API_PREFIX + "/query")
    def run_query(body: QueryBody):
        if body.enabledLinkTypeIds is None:
            enabled = {t.id for t in kb.link_types}
        else:
            enabled = set(body.enabledLinkTypeIds)
        query = SelectionQuery(
            displayed_type_ids=body.displayedTypeIds,
            checked={t: set(ids) for t, ids in body.checked.items()},
            enabled_link_type_ids=enabled,
        )
        result = compute_visibility(kb, query)
        return {
            "revision": result.revision,
            "visible": {t: sorted(ids) for t, ids in result.visible.items()},
        }

    @app.post(API_PREFIX + "/links")
    def add_link(body: LinkBody):
        link = kb.add_link(body.linkTypeId, body.parentId, body.childId)
        return {
            "revision": kb.revision,
            "link": {
                "id": link.id,
                "linkTypeId": link.link_type_id,
                "parentId": link.parent_id,
                "childId": link.child_id,
            },
        }

    @app.delete(API_PREFIX + "/links/{link_id:path}")
    def delete_link(link_id: str):
        kb.remove_link(link_id)
        return {"revision": kb.revision, "removed": link_id}

    @app.post(API_PREFIX + "/objects/{obj_id}/annotations")
    def add_annotation(obj_id: str, body: AnnotationBody):
        if body.kind == "Note":
            if body.text is None:
                return JSONResponse(
                    status_code=400,
                    content={"error": "MalformedBody", "detail": "a note requires text"},
                )
            annotation = Annotation.note(body.text)
        else:
            annotation = Annotation.document_link(body.uri or "")
        kb.annotate(obj_id, annotation)
        return {"revision": kb.revision, "object": _object_json(kb.object(obj_id))}

    @app.get(API_PREFIX + "/events")
    def events(since: int = 0, limit: int | None = None):
        kb.events_since(since)  # validates the cursor before streaming
        return StreamingResponse(
            _event_stream(kb, since, limit), media_type="text/event-stream"
        )

    @app.post(API_PREFIX + "/save")
    def save_project():
        if kb_path is None:
            return JSONResponse(
                status_code=409,
                content={"error": "NoProjectFile", "detail": "service started without a file"},
            )
        kb_path.write_bytes(knowledge.save(kb))
        return {"revision": kb.revision, "path": str(kb_path)}

    return app


def _event_stream(kb: KnowledgeBase, since: int, limit: int | None) -> Iterator[str]:
    cursor = since
    sent = 0
    while True:
        for ev in kb.events_since(cursor):
            cursor = ev.revision
            yield f"id: {ev.revision}\ndata: {json.dumps(_event_json(ev))}\n\n"
            sent += 1
            if limit is not None and sent >= limit:
                return
        if not kb.wait_for_revision(cursor + 1, timeout=0.5):
            yield ": keep-alive\n\n"


def serve(kb_file: str | Path, bind: str = "127.0.0.1:8077") -> None:
    """Run the service for one project file until interrupted."""
    import uvicorn

    path = Path(kb_file)
    kb = knowledge.load(path.read_bytes())
    app = create_app(kb, path)
    host, _, port = bind.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
