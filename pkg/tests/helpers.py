"""Shared test utilities: golden rendering, generators, and oracles."""

from __future__ import annotations

import random
import string

from tracegraph.codemodel import (
    Access,
    ClassDecl,
    ClassKind,
    CodeModel,
    ConstructorDecl,
    DelegateDecl,
    EventDecl,
    FieldDecl,
    MethodDecl,
    NamespaceDecl,
    ParamDecl,
    PropertyDecl,
    Reference,
    RefKind,
    ReportEntry,
)
from tracegraph.knowledge import KnowledgeBase
from tracegraph.lexer import SourcePosition, Token
from tracegraph.parser import merge_models
from tracegraph.query import SelectionQuery


def render_token_table(tokens: list[Token]) -> str:
    """One token per line: kind, escaped text, line:column (tab separated)."""
    lines = []
    for t in tokens:
        text = (
            t.text.replace("\\", "\\\\")
            .replace("\t", "\\t")
            .replace("\n", "\\n")
            .replace("\r", "\\r")
        )
        lines.append(f"{t.kind.value}\t{text}\t{t.pos.line}:{t.pos.column}")
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# Randomized code models (canonical via merge_models)

_NAMES = ["Alpha", "Beta", "Gamma", "Delta", "Omega", "Run", "Item", "Core", "Grid"]
_TYPES = ["int", "string", "bool", "double", "Alpha", "Beta", "List<int>", "Grid[]"]


def _pos(rng: random.Random) -> SourcePosition:
    return SourcePosition(
        f"src/{rng.randint(0, 3)}.cs", rng.randint(1, 400), rng.randint(1, 80)
    )


def _class_kind_for(name: str) -> ClassKind:
    # Derive kind from the name so random duplicates never conflict on merge.
    return (ClassKind.CLASS, ClassKind.STRUCT, ClassKind.INTERFACE)[len(name) % 3]


def _random_params(rng: random.Random) -> list[ParamDecl]:
    count = rng.randint(0, 3)
    names = rng.sample(["sender", "e", "value", "index", "target"], count)
    return [ParamDecl(n, rng.choice(_TYPES)) for n in names]


def _random_refs(rng: random.Random) -> list[Reference]:
    refs = []
    seen = set()
    for _ in range(rng.randint(0, 4)):
        kind = rng.choice(list(RefKind))
        name = rng.choice(_NAMES + ["Init", "glControl"])
        if (kind, name) in seen:
            continue
        seen.add((kind, name))
        refs.append(Reference(kind, name, _pos(rng)))
    return refs


def _random_class(rng: random.Random, depth: int = 0) -> ClassDecl:
    name = rng.choice(_NAMES)
    cls = ClassDecl(name=name, access=rng.choice(list(Access)), kind=_class_kind_for(name))
    cls.base_types = rng.sample(_TYPES, rng.randint(0, 2))
    for _ in range(rng.randint(0, 2)):
        ctor = ConstructorDecl(name, rng.choice(list(Access)), _random_params(rng), _random_refs(rng))
        cls.constructors.append(ctor)
    for _ in range(rng.randint(0, 3)):
        cls.methods.append(
            MethodDecl(
                rng.choice(_NAMES),
                rng.choice(list(Access)),
                rng.choice(_TYPES),
                _random_params(rng),
                _random_refs(rng),
                rng.random() < 0.3,
            )
        )
    for _ in range(rng.randint(0, 2)):
        cls.properties.append(PropertyDecl(rng.choice(_NAMES), rng.choice(list(Access)), rng.choice(_TYPES)))
    for _ in range(rng.randint(0, 3)):
        cls.fields.append(FieldDecl(rng.choice(_NAMES).lower(), rng.choice(list(Access)), rng.choice(_TYPES)))
    for _ in range(rng.randint(0, 2)):
        cls.events.append(EventDecl(rng.choice(_NAMES), rng.choice(list(Access)), rng.choice(_TYPES)))
    for _ in range(rng.randint(0, 1)):
        cls.delegates.append(
            DelegateDecl(rng.choice(_NAMES), rng.choice(list(Access)), f"void({rng.choice(_TYPES)})")
        )
    if depth == 0:
        for _ in range(rng.randint(0, 2)):
            cls.nested_classes.append(_random_class(rng, depth + 1))
    return cls


def random_code_model(rng: random.Random) -> CodeModel:
    """A canonical model shaped like merge_models output."""
    model = CodeModel()
    for _ in range(rng.randint(0, 3)):
        ns = NamespaceDecl(".".join(rng.sample(_NAMES, rng.randint(1, 2))))
        ns.usings = rng.sample(["System", "System.IO", "System.Collections"], rng.randint(0, 2))
        for _ in range(rng.randint(0, 3)):
            ns.classes.append(_random_class(rng))
        for _ in range(rng.randint(0, 2)):
            ns.delegates.append(
                DelegateDecl(rng.choice(_NAMES), rng.choice(list(Access)), "void(int)")
            )
        model.namespaces.append(ns)
    for _ in range(rng.randint(0, 2)):
        model.unresolved_report.append(ReportEntry(rng.choice(_NAMES), _pos(rng)))
    return merge_models([model])


# ---------------------------------------------------------------------------
# Randomized knowledge bases and an independent visibility oracle

_QUAL = ["App.Draw", "App.Draw.Canvas", "App.Core", "Kit.Text"]


def random_kb(rng: random.Random, max_objects: int = 200, max_links: int = 600) -> KnowledgeBase:
    kb = KnowledgeBase()
    type_ids = [t.id for t in kb.knowledge_types]
    object_count = rng.randint(1, max_objects)
    for k in range(object_count):
        kb.add_object(
            rng.choice(type_ids),
            f"{rng.choice(_QUAL)}.N{k}",
            f"N{k}",
            rng.choice(list(Access)),
        )
    obj_ids = list(kb.objects)
    link_type_ids = [t.id for t in kb.link_types]
    for _ in range(rng.randint(0, max_links)):
        parent, child = rng.choice(obj_ids), rng.choice(obj_ids)
        lt = rng.choice(link_type_ids)
        if lt == "contains" and parent == child:
            continue
        kb.add_link(lt, parent, child)
    return kb


def random_query(rng: random.Random, kb: KnowledgeBase) -> SelectionQuery:
    type_ids = [t.id for t in kb.knowledge_types]
    displayed = rng.sample(type_ids, rng.randint(1, len(type_ids)))
    checked: dict[str, set[str]] = {}
    for t in displayed:
        objs = [o.id for o in kb.objects.values() if o.type_id == t]
        if objs and rng.random() < 0.5:
            picked = set(rng.sample(objs, rng.randint(1, min(3, len(objs)))))
            checked[t] = picked
    link_type_ids = [t.id for t in kb.link_types]
    enabled = set(rng.sample(link_type_ids, rng.randint(0, len(link_type_ids))))
    return SelectionQuery(displayed, checked, enabled)


def naive_visibility(kb: KnowledgeBase, query: SelectionQuery) -> dict[str, set[str]]:
    """Brute-force fixed-point oracle for compute_visibility."""
    objects_by_type = {
        t: {o.id for o in kb.objects.values() if o.type_id == t}
        for t in query.displayed_type_ids
    }
    checked = {t: ids for t, ids in query.checked.items() if ids}
    if not checked:
        return objects_by_type
    allowed: set[str] = set()
    for t in query.displayed_type_ids:
        allowed |= checked.get(t) or objects_by_type[t]
    visible: set[str] = set()
    for ids in checked.values():
        visible |= ids
    changed = True
    while changed:
        changed = False
        for link in kb.links.values():
            if link.link_type_id not in query.enabled_link_type_ids:
                continue
            a, b = link.parent_id, link.child_id
            if a in allowed and b in allowed:
                if a in visible and b not in visible:
                    visible.add(b)
                    changed = True
                if b in visible and a not in visible:
                    visible.add(a)
                    changed = True
    return {t: visible & objects_by_type[t] for t in query.displayed_type_ids}


# ---------------------------------------------------------------------------
# Minimal DOT syntax check (structure only, no semantics)

_DOT_ID_CHARS = set(string.ascii_letters + string.digits + "_.")


def check_dot_syntax(text: str) -> None:
    """Validate quoted strings, brace balance and statement shape; raises
    AssertionError with a message on the first violation."""
    i = 0
    depth = 0
    statements: list[str] = []
    current: list[str] = []
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == '"':
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"':
                    break
                j += 1
            assert j < n, "unterminated quoted string in DOT output"
            current.append(text[i : j + 1])
            i = j + 1
            continue
        if ch == "{":
            depth += 1
            current.clear()
            i += 1
            continue
        if ch == "}":
            depth -= 1
            assert depth >= 0, "unbalanced '}' in DOT output"
            current.clear()
            i += 1
            continue
        if ch in ";\n":
            if current:
                statements.append("".join(current).strip())
            current.clear()
            i += 1
            continue
        current.append(ch)
        i += 1
    assert depth == 0, "unbalanced '{' in DOT output"
    assert statements, "no statements found in DOT output"
    header = statements[0].split()
    assert header and header[0] in ("digraph", "graph"), "missing graph header"
    for stmt in statements[1:]:
        bare = stmt.replace("->", " ").replace("[", " [").replace("=", " = ")
        head = bare.split()[0]
        ok = (
            head in ("graph", "node", "edge", "subgraph", "label", "digraph")
            or head.startswith('"')
            or all(c in _DOT_ID_CHARS for c in head)
        )
        assert ok, f"unexpected DOT statement: {stmt!r}"
