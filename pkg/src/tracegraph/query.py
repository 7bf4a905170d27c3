"""Checkbox-driven visibility queries and tree expansion.

Checked objects seed an undirected reachability pass over the enabled
links. Columns with checked nodes contribute only those nodes to the
traversal universe, so a checked column restricts what indirect paths may
flow through it; unchecked columns contribute all of their objects. Hidden
(undisplayed) columns stay out of the universe entirely.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from tracegraph.knowledge import (
    CONTAINS,
    KnowledgeBase,
    KnowledgeObject,
    UnknownId,
)


@dataclass
class SelectionQuery:
    displayed_type_ids: list[str]
    checked: dict[str, set[str]] = field(default_factory=dict)
    enabled_link_type_ids: set[str] = field(default_factory=set)


@dataclass
class VisibilityResult:
    visible: dict[str, set[str]]
    revision: int


def _validate(kb: KnowledgeBase, query: SelectionQuery) -> None:
    for type_id in query.displayed_type_ids:
        kb.type_by_id(type_id)
    displayed = set(query.displayed_type_ids)
    for type_id, ids in query.checked.items():
        if type_id not in displayed:
            raise UnknownId(f"checked type {type_id!r} is not displayed")
        for obj_id in ids:
            obj = kb.objects.get(obj_id)
            if obj is None or obj.type_id != type_id:
                raise UnknownId(f"checked object {obj_id!r} is not a current {type_id!r} object")
    for link_type_id in query.enabled_link_type_ids:
        kb.link_type_by_id(link_type_id)


def compute_visibility(kb: KnowledgeBase, query: SelectionQuery) -> VisibilityResult:
    """Resolve a selection into the visible object set per displayed column."""
    _validate(kb, query)
    revision = kb.revision
    objects_by_type = {
        t: {o.id for o in kb.objects.values() if o.type_id == t}
        for t in query.displayed_type_ids
    }
    checked = {t: set(ids) for t, ids in query.checked.items() if ids}
    if not checked:
        return VisibilityResult(objects_by_type, revision)

    active: dict[str, set[str]] = {}
    for t in query.displayed_type_ids:
        active[t] = checked.get(t) or objects_by_type[t]
    universe: set[str] = set()
    for ids in active.values():
        universe |= ids

    adjacency: dict[str, list[str]] = {}
    for link in kb.links.values():
        if link.link_type_id not in query.enabled_link_type_ids:
            continue
        if link.parent_id in universe and link.child_id in universe:
            adjacency.setdefault(link.parent_id, []).append(link.child_id)
            adjacency.setdefault(link.child_id, []).append(link.parent_id)

    seeds = set()
    for ids in checked.values():
        seeds |= ids
    visible_ids = set(seeds)
    frontier = deque(seeds)
    while frontier:
        node = frontier.popleft()
        for neighbor in adjacency.get(node, ()):
            if neighbor not in visible_ids:
                visible_ids.add(neighbor)
                frontier.append(neighbor)

    visible = {t: visible_ids & objects_by_type[t] for t in query.displayed_type_ids}
    return VisibilityResult(visible, revision)


def tree_children(
    kb: KnowledgeBase, obj_id: str, enabled_link_type_ids: set[str]
) -> list[tuple[str, KnowledgeObject]]:
    """Links where the object is the parent, as (link type name, child) pairs."""
    kb.object(obj_id)
    for link_type_id in enabled_link_type_ids:
        kb.link_type_by_id(link_type_id)
    rows = []
    for link in kb.links.values():
        if link.parent_id != obj_id or link.link_type_id not in enabled_link_type_ids:
            continue
        child = kb.objects[link.child_id]
        name = kb.link_type_by_id(link.link_type_id).name
        rows.append((name, child))
    rows.sort(key=lambda row: (row[0], row[1].display_name, row[1].id))
    return rows


def tree_roots(kb: KnowledgeBase, type_id: str) -> list[KnowledgeObject]:
    """Column top level: objects not contained by another object of the
    same type, so methods list flat while nested classes fold under their
    outer class."""
    kb.type_by_id(type_id)
    contained = {
        link.child_id
        for link in kb.links.values()
        if link.link_type_id == CONTAINS
        and kb.objects[link.parent_id].type_id == type_id
        and kb.objects[link.child_id].type_id == type_id
    }
    roots = [
        o for o in kb.objects.values() if o.type_id == type_id and o.id not in contained
    ]
    roots.sort(key=lambda o: (o.display_name, o.id))
    return roots
