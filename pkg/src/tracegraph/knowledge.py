"""Typed traceability graph: object/link registries with change events.

The knowledge base holds knowledge types (one column each in a UI), link
types, objects keyed by deterministic ids, directed links, and user
annotations. Every successful mutation bumps the revision by exactly one and
emits a change event carrying enough payload to rebuild the state by replay.
Mutations are serialized through one internal lock (single-writer contract);
subscribers receive events in revision order without blocking the writer.
"""

from __future__ import annotations

import json
import re
import threading
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum

from tracegraph.codemodel import Access


class KnowledgeError(Exception):
    pass


class DuplicateName(KnowledgeError):
    pass


class UnknownType(KnowledgeError):
    pass


class UnknownId(KnowledgeError):
    pass


class SelfContainment(KnowledgeError):
    pass


class InvalidUri(KnowledgeError):
    pass


class FormatError(KnowledgeError):
    pass


class VersionMismatch(KnowledgeError):
    pass


class RevisionTooOld(KnowledgeError):
    pass


class ColorKey(Enum):
    GREY = "grey"
    BLUE = "blue"
    TEAL = "teal"
    RED = "red"
    PURPLE = "purple"
    MAGENTA = "magenta"
    OLIVE = "olive"
    CYAN = "cyan"
    ORANGE = "orange"
    NEUTRAL = "neutral"


class AnnotationKind(Enum):
    NOTE = "Note"
    DOCUMENT_LINK = "DocumentLink"


class EventKind(Enum):
    TYPE_ADDED = "TypeAdded"
    OBJECT_ADDED = "ObjectAdded"
    OBJECT_REMOVED = "ObjectRemoved"
    LINK_ADDED = "LinkAdded"
    LINK_REMOVED = "LinkRemoved"
    ANNOTATION_CHANGED = "AnnotationChanged"


# The eight builtin knowledge types, in default column order.
BUILTIN_TYPES: tuple[tuple[str, str, ColorKey], ...] = (
    ("namespace", "Namespace", ColorKey.GREY),
    ("class", "Class", ColorKey.BLUE),
    ("constructor", "Constructor", ColorKey.TEAL),
    ("method", "Method", ColorKey.RED),
    ("property", "Property", ColorKey.PURPLE),
    ("variable", "Variable", ColorKey.MAGENTA),
    ("delegate", "Delegate", ColorKey.OLIVE),
    ("event", "Event", ColorKey.CYAN),
)

BUILTIN_LINK_TYPES: tuple[tuple[str, str], ...] = (
    ("contains", "Contains"),
    ("calls", "Calls"),
    ("uses", "Uses"),
    ("parameter-of", "ParameterOf"),
    ("handles", "Handles"),
    ("instantiates", "Instantiates"),
    ("user-defined", "UserDefined"),
)

CONTAINS = "contains"
CALLS = "calls"
USES = "uses"
PARAMETER_OF = "parameter-of"
HANDLES = "handles"
INSTANTIATES = "instantiates"
USER_DEFINED = "user-defined"

SAVE_FORMAT_VERSION = "1.0"

# RFC 3986-ish sanity check: a scheme followed by characters URIs may contain.
_URI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[A-Za-z0-9\-._~:/?#\[\]@!$&'()*+,;=%]*$")


@dataclass(frozen=True)
class KnowledgeType:
    id: str
    name: str
    color_key: ColorKey
    builtin: bool


@dataclass(frozen=True)
class LinkType:
    id: str
    name: str
    builtin: bool


@dataclass(frozen=True)
class Annotation:
    kind: AnnotationKind
    text: str | None = None
    uri: str | None = None
    created_at: str = ""

    @staticmethod
    def note(text: str, created_at: str | None = None) -> Annotation:
        return Annotation(AnnotationKind.NOTE, text=text, created_at=created_at or _now())

    @staticmethod
    def document_link(uri: str, created_at: str | None = None) -> Annotation:
        return Annotation(AnnotationKind.DOCUMENT_LINK, uri=uri, created_at=created_at or _now())


@dataclass
class KnowledgeObject:
    id: str
    type_id: str
    display_name: str
    qualified_name: str
    access: Access
    kind_tag: str | None = None
    annotations: list[Annotation] = field(default_factory=list)


@dataclass(frozen=True)
class LinkObject:
    id: str
    link_type_id: str
    parent_id: str
    child_id: str


@dataclass(frozen=True)
class ChangeEvent:
    revision: int
    kind: EventKind
    payload: dict


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def object_id(type_id: str, qualified_name: str) -> str:
    return f"{type_id}:{qualified_name}"


def link_id(link_type_id: str, parent_id: str, child_id: str) -> str:
    return f"{link_type_id}|{parent_id}|{child_id}"


def is_valid_uri(uri: str) -> bool:
    return bool(_URI_RE.match(uri))


class Subscription:
    """Buffered view of a knowledge base's event stream, in revision order."""

    def __init__(self, kb: KnowledgeBase):
        self._kb = kb
        self._pending: deque[ChangeEvent] = deque()
        self._closed = False

    def _push(self, event: ChangeEvent) -> None:
        self._pending.append(event)

    def drain(self) -> list[ChangeEvent]:
        """Return and clear all buffered events without blocking."""
        with self._kb._cond:
            events = list(self._pending)
            self._pending.clear()
        return events

    def wait(self, timeout: float | None = None) -> list[ChangeEvent]:
        """Block until at least one event is buffered or the timeout passes."""
        with self._kb._cond:
            self._kb._cond.wait_for(lambda: self._pending or self._closed, timeout)
            events = list(self._pending)
            self._pending.clear()
        return events

    def close(self) -> None:
        with self._kb._cond:
            self._closed = True
            if self in self._kb._subscribers:
                self._kb._subscribers.remove(self)
            self._kb._cond.notify_all()


class KnowledgeBase:
    """Single-writer, multi-reader store for the traceability graph.

    A fresh instance already contains the eight builtin knowledge types and
    seven builtin link types at revision 0.
    """

    def __init__(self, history_limit: int | None = None):
        self.knowledge_types: list[KnowledgeType] = [
            KnowledgeType(i, n, c, True) for i, n, c in BUILTIN_TYPES
        ]
        self.link_types: list[LinkType] = [
            LinkType(i, n, True) for i, n in BUILTIN_LINK_TYPES
        ]
        self.objects: dict[str, KnowledgeObject] = {}
        self.links: dict[str, LinkObject] = {}
        self.revision = 0
        self._history: list[ChangeEvent] = []
        self._history_base = 0  # revision of the oldest retained event minus one
        self._history_limit = history_limit
        self._subscribers: list[Subscription] = []
        self._cond = threading.Condition()

    # -- lookups

    def type_by_id(self, type_id: str) -> KnowledgeType:
        for t in self.knowledge_types:
            if t.id == type_id:
                return t
        raise UnknownType(f"unknown knowledge type {type_id!r}")

    def type_by_name(self, name: str) -> KnowledgeType | None:
        for t in self.knowledge_types:
            if t.name == name:
                return t
        return None

    def link_type_by_id(self, link_type_id: str) -> LinkType:
        for t in self.link_types:
            if t.id == link_type_id:
                return t
        raise UnknownId(f"unknown link type {link_type_id!r}")

    def object(self, obj_id: str) -> KnowledgeObject:
        obj = self.objects.get(obj_id)
        if obj is None:
            raise UnknownId(f"unknown object {obj_id!r}")
        return obj

    def link(self, lk_id: str) -> LinkObject:
        lk = self.links.get(lk_id)
        if lk is None:
            raise UnknownId(f"unknown link {lk_id!r}")
        return lk

    def objects_of_type(self, type_id: str) -> list[KnowledgeObject]:
        self.type_by_id(type_id)
        return sorted(
            (o for o in self.objects.values() if o.type_id == type_id),
            key=lambda o: (o.display_name, o.id),
        )

    def has_builtins(self) -> bool:
        type_ids = {t.id for t in self.knowledge_types}
        link_ids = {t.id for t in self.link_types}
        return {i for i, _, _ in BUILTIN_TYPES} <= type_ids and {
            i for i, _ in BUILTIN_LINK_TYPES
        } <= link_ids

    # -- mutations

    def add_type(self, name: str, color_key: ColorKey) -> KnowledgeType:
        with self._cond:
            if self.type_by_name(name) is not None:
                raise DuplicateName(f"knowledge type {name!r} already exists")
            new_type = KnowledgeType(self._slug_for(name), name, color_key, False)
            self.knowledge_types.append(new_type)
            self._commit(
                EventKind.TYPE_ADDED,
                {
                    "typeId": new_type.id,
                    "name": new_type.name,
                    "colorKey": new_type.color_key.value,
                },
            )
            return new_type

    def _slug_for(self, name: str) -> str:
        slug = re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-") or "type"
        taken = {t.id for t in self.knowledge_types}
        if slug not in taken:
            return slug
        n = 2
        while f"{slug}-{n}" in taken:
            n += 1
        return f"{slug}-{n}"

    def add_object(
        self,
        type_id: str,
        qualified_name: str,
        display_name: str,
        access: Access,
        kind_tag: str | None = None,
    ) -> KnowledgeObject:
        with self._cond:
            self.type_by_id(type_id)
            obj_id = object_id(type_id, qualified_name)
            existing = self.objects.get(obj_id)
            if existing is not None:
                return existing  # idempotent: same id means same extraction
            obj = KnowledgeObject(obj_id, type_id, display_name, qualified_name, access, kind_tag)
            self.objects[obj_id] = obj
            self._commit(
                EventKind.OBJECT_ADDED,
                {
                    "objectId": obj_id,
                    "typeId": type_id,
                    "qualifiedName": qualified_name,
                    "displayName": display_name,
                    "access": access.value,
                    "kindTag": kind_tag,
                },
            )
            return obj

    def add_link(self, link_type_id: str, parent_id: str, child_id: str) -> LinkObject:
        with self._cond:
            self.link_type_by_id(link_type_id)
            self.object(parent_id)
            self.object(child_id)
            if link_type_id == CONTAINS and parent_id == child_id:
                raise SelfContainment(f"object {parent_id!r} cannot contain itself")
            lk_id = link_id(link_type_id, parent_id, child_id)
            existing = self.links.get(lk_id)
            if existing is not None:
                return existing  # duplicate insertion is a no-op
            lk = LinkObject(lk_id, link_type_id, parent_id, child_id)
            self.links[lk_id] = lk
            self._commit(
                EventKind.LINK_ADDED,
                {
                    "linkId": lk_id,
                    "linkTypeId": link_type_id,
                    "parentId": parent_id,
                    "childId": child_id,
                },
            )
            return lk

    def remove_link(self, lk_id: str) -> None:
        with self._cond:
            self.link(lk_id)
            del self.links[lk_id]
            self._commit(EventKind.LINK_REMOVED, {"linkId": lk_id})

    def remove_object(self, obj_id: str) -> None:
        with self._cond:
            self.object(obj_id)
            incident = sorted(
                lk.id
                for lk in self.links.values()
                if lk.parent_id == obj_id or lk.child_id == obj_id
            )
            for lk_id in incident:
                del self.links[lk_id]
                self._commit(EventKind.LINK_REMOVED, {"linkId": lk_id})
            del self.objects[obj_id]
            self._commit(EventKind.OBJECT_REMOVED, {"objectId": obj_id})

    def annotate(self, obj_id: str, annotation: Annotation) -> None:
        with self._cond:
            obj = self.object(obj_id)
            if annotation.kind is AnnotationKind.DOCUMENT_LINK:
                if not annotation.uri or not is_valid_uri(annotation.uri):
                    raise InvalidUri(f"not a valid URI: {annotation.uri!r}")
            obj.annotations.append(annotation)
            self._commit(
                EventKind.ANNOTATION_CHANGED,
                {
                    "objectId": obj_id,
                    "kind": annotation.kind.value,
                    "text": annotation.text,
                    "uri": annotation.uri,
                    "createdAt": annotation.created_at,
                },
            )

    def _commit(self, kind: EventKind, payload: dict) -> None:
        self.revision += 1
        event = ChangeEvent(self.revision, kind, payload)
        self._history.append(event)
        if self._history_limit is not None and len(self._history) > self._history_limit:
            dropped = len(self._history) - self._history_limit
            self._history = self._history[dropped:]
            self._history_base += dropped
        for sub in self._subscribers:
            sub._push(event)
        self._cond.notify_all()

    # -- events

    def subscribe(self) -> Subscription:
        with self._cond:
            sub = Subscription(self)
            self._subscribers.append(sub)
            return sub

    def events_since(self, revision: int) -> list[ChangeEvent]:
        """Events with revision strictly greater than the cursor."""
        with self._cond:
            if revision < self._history_base:
                raise RevisionTooOld(
                    f"history before revision {self._history_base} was compacted"
                )
            start = max(revision - self._history_base, 0)
            return list(self._history[start:])

    def wait_for_revision(self, revision: int, timeout: float) -> bool:
        """Block until the revision counter reaches the target."""
        with self._cond:
            return self._cond.wait_for(lambda: self.revision >= revision, timeout)

    # -- equality (content only; subscribers, history and revision excluded)

    def _state(self):
        return (
            [(t.id, t.name, t.color_key, t.builtin) for t in self.knowledge_types],
            [(t.id, t.name, t.builtin) for t in self.link_types],
            {
                o.id: (o.type_id, o.display_name, o.qualified_name, o.access, o.kind_tag, tuple(o.annotations))
                for o in self.objects.values()
            },
            set(self.links),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return self._state() == other._state()


# ---------------------------------------------------------------------------
# Replay


def replay_events(events: list[ChangeEvent], kb: KnowledgeBase) -> KnowledgeBase:
    """Apply a recorded event stream to a knowledge base, usually a fresh one."""
    for ev in events:
        p = ev.payload
        if ev.kind is EventKind.TYPE_ADDED:
            kb.add_type(p["name"], ColorKey(p["colorKey"]))
        elif ev.kind is EventKind.OBJECT_ADDED:
            kb.add_object(
                p["typeId"], p["qualifiedName"], p["displayName"],
                Access(p["access"]), p.get("kindTag"),
            )
        elif ev.kind is EventKind.OBJECT_REMOVED:
            kb.remove_object(p["objectId"])
        elif ev.kind is EventKind.LINK_ADDED:
            kb.add_link(p["linkTypeId"], p["parentId"], p["childId"])
        elif ev.kind is EventKind.LINK_REMOVED:
            kb.remove_link(p["linkId"])
        elif ev.kind is EventKind.ANNOTATION_CHANGED:
            kind = AnnotationKind(p["kind"])
            kb.annotate(
                p["objectId"],
                Annotation(kind, text=p.get("text"), uri=p.get("uri"), created_at=p["createdAt"]),
            )
    return kb


# ---------------------------------------------------------------------------
# Persistence


def save(kb: KnowledgeBase) -> bytes:
    """Serialize to the versioned JSON project format, arrays sorted by id."""
    annotations = []
    for obj in sorted(kb.objects.values(), key=lambda o: o.id):
        for a in obj.annotations:
            annotations.append(
                {
                    "objectId": obj.id,
                    "kind": a.kind.value,
                    "text": a.text,
                    "uri": a.uri,
                    "createdAt": a.created_at,
                }
            )
    doc = {
        "version": SAVE_FORMAT_VERSION,
        "knowledgeTypes": [
            {"id": t.id, "name": t.name, "colorKey": t.color_key.value, "builtin": t.builtin}
            for t in kb.knowledge_types
        ],
        "linkTypes": [
            {"id": t.id, "name": t.name, "builtin": t.builtin} for t in kb.link_types
        ],
        "objects": sorted(
            (
                {
                    "id": o.id,
                    "typeId": o.type_id,
                    "displayName": o.display_name,
                    "qualifiedName": o.qualified_name,
                    "access": o.access.value,
                    "kindTag": o.kind_tag,
                }
                for o in kb.objects.values()
            ),
            key=lambda d: d["id"],
        ),
        "links": sorted(
            (
                {
                    "id": lk.id,
                    "linkTypeId": lk.link_type_id,
                    "parentId": lk.parent_id,
                    "childId": lk.child_id,
                }
                for lk in kb.links.values()
            ),
            key=lambda d: d["id"],
        ),
        "annotations": annotations,
    }
    return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode("utf-8")


def load(data: bytes) -> KnowledgeBase:
    """Rebuild a knowledge base from its JSON project format."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"not a valid project file: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("project file must hold a JSON object")
    missing = {"version", "knowledgeTypes", "linkTypes", "objects", "links", "annotations"} - set(doc)
    if missing:
        raise FormatError(f"missing keys: {', '.join(sorted(missing))}")
    if doc["version"] != SAVE_FORMAT_VERSION:
        raise VersionMismatch(f"unsupported project version {doc['version']!r}")
    kb = KnowledgeBase()
    try:
        kb.knowledge_types = [
            KnowledgeType(t["id"], t["name"], ColorKey(t["colorKey"]), bool(t["builtin"]))
            for t in doc["knowledgeTypes"]
        ]
        kb.link_types = [
            LinkType(t["id"], t["name"], bool(t["builtin"])) for t in doc["linkTypes"]
        ]
        for o in doc["objects"]:
            kb.objects[o["id"]] = KnowledgeObject(
                o["id"], o["typeId"], o["displayName"], o["qualifiedName"],
                Access(o["access"]), o.get("kindTag"),
            )
        for lk in doc["links"]:
            kb.links[lk["id"]] = LinkObject(
                lk["id"], lk["linkTypeId"], lk["parentId"], lk["childId"]
            )
        for a in doc["annotations"]:
            obj = kb.objects.get(a["objectId"])
            if obj is None:
                raise FormatError(f"annotation references unknown object {a['objectId']!r}")
            obj.annotations.append(
                Annotation(
                    AnnotationKind(a["kind"]), text=a.get("text"),
                    uri=a.get("uri"), created_at=a["createdAt"],
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed project file: {exc}") from exc
    for lk in kb.links.values():
        if lk.parent_id not in kb.objects or lk.child_id not in kb.objects:
            raise FormatError(f"link {lk.id!r} references a missing object")
        if all(t.id != lk.link_type_id for t in kb.link_types):
            raise FormatError(f"link {lk.id!r} has unknown link type")
    type_ids = {t.id for t in kb.knowledge_types}
    for obj in kb.objects.values():
        if obj.type_id not in type_ids:
            raise FormatError(f"object {obj.id!r} has unknown type")
    return kb
