"""Graphviz DOT rendering of a knowledge base.

Containment becomes nested clusters; every other link type becomes a
labeled directed edge. Output is deterministic for a given knowledge base
content, so it can serve as a golden artifact.
"""

from __future__ import annotations

from tracegraph.knowledge import CONTAINS, KnowledgeBase

_COLOR_FOR_DOT = {"neutral": "black"}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(kb: KnowledgeBase) -> str:
    ids = sorted(kb.objects)
    node_name = {obj_id: f"n{i}" for i, obj_id in enumerate(ids)}
    colors = {t.id: _COLOR_FOR_DOT.get(t.color_key.value, t.color_key.value) for t in kb.knowledge_types}

    children: dict[str, list[str]] = {}
    claimed: set[str] = set()
    loose_contains = []
    for link in sorted(kb.links.values(), key=lambda lk: lk.id):
        if link.link_type_id != CONTAINS:
            continue
        if link.child_id in claimed or link.child_id == link.parent_id:
            loose_contains.append(link)
            continue
        claimed.add(link.child_id)
        children.setdefault(link.parent_id, []).append(link.child_id)

    lines = ["digraph tracegraph {", "  graph [rankdir=LR];", "  node [shape=box];"]
    visited: set[str] = set()

    def node_stmt(obj_id: str, depth: int) -> str:
        obj = kb.objects[obj_id]
        color = colors.get(obj.type_id, "black")
        pad = "  " * depth
        return f"{pad}{node_name[obj_id]} [label={_quote(obj.display_name)}, color={_quote(color)}];"

    def walk(obj_id: str, depth: int) -> None:
        visited.add(obj_id)
        kids = children.get(obj_id)
        if not kids:
            lines.append(node_stmt(obj_id, depth))
            return
        pad = "  " * depth
        lines.append(f"{pad}subgraph cluster_{node_name[obj_id]} {{")
        lines.append(f"{pad}  label={_quote(kb.objects[obj_id].display_name)};")
        lines.append(node_stmt(obj_id, depth + 1))
        for kid in kids:
            walk(kid, depth + 1)
        lines.append(f"{pad}}}")

    for obj_id in ids:
        if obj_id not in claimed and obj_id not in visited:
            walk(obj_id, 1)
    for obj_id in ids:  # containment cycles leave orphans; render them flat
        if obj_id not in visited:
            lines.append(node_stmt(obj_id, 1))

    link_names = {t.id: t.name for t in kb.link_types}
    for link in sorted(kb.links.values(), key=lambda lk: lk.id):
        if link.link_type_id == CONTAINS and link not in loose_contains:
            continue
        label = link_names.get(link.link_type_id, link.link_type_id)
        lines.append(
            f"  {node_name[link.parent_id]} -> {node_name[link.child_id]}"
            f" [label={_quote(label)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
