"""Populate a knowledge base from a code model.

Creates one knowledge object per declaration, wires the builtin link
taxonomy (containment, calls, uses, parameter-of, handles, instantiates)
and resolves reference names best-effort: same class first, then same
namespace, then the whole model, linking every candidate at the first
nonempty tier. Unresolved and ambiguous references are only counted,
never fabricated as objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from tracegraph.codemodel import (
    Access,
    ClassDecl,
    CodeModel,
    NamespaceDecl,
    RefKind,
    split_ordinal,
)
from tracegraph.knowledge import (
    CALLS,
    CONTAINS,
    HANDLES,
    INSTANTIATES,
    PARAMETER_OF,
    USES,
    KnowledgeBase,
    KnowledgeError,
    object_id,
)
from tracegraph.lexer import LexError, tokenize
from tracegraph.parser import UnbalancedBraces, merge_models, parse_file


class MissingBuiltins(KnowledgeError):
    pass


class NoSourcesFound(Exception):
    pass


@dataclass
class PopulationReport:
    objects_by_type: dict[str, int] = field(default_factory=dict)
    links_by_type: dict[str, int] = field(default_factory=dict)
    unresolved_calls: int = 0
    unresolved_uses: int = 0
    unresolved_instantiates: int = 0
    ambiguous_calls: int = 0
    ambiguous_uses: int = 0
    ambiguous_instantiates: int = 0
    source_files: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def render_table(self) -> str:
        lines = ["Objects by type:"]
        for name, count in self.objects_by_type.items():
            lines.append(f"  {name:<12} {count:>5}")
        lines.append("Links by type:")
        for name, count in self.links_by_type.items():
            lines.append(f"  {name:<12} {count:>5}")
        lines.append(
            "Unresolved references: "
            f"calls={self.unresolved_calls}, uses={self.unresolved_uses}, "
            f"instantiates={self.unresolved_instantiates}"
        )
        lines.append(
            "Ambiguous references: "
            f"calls={self.ambiguous_calls}, uses={self.ambiguous_uses}, "
            f"instantiates={self.ambiguous_instantiates}"
        )
        return "\n".join(lines) + "\n"


@dataclass
class _ClassEntry:
    namespace: str
    qualified_name: str
    decl: ClassDecl
    methods: dict[str, list[str]] = field(default_factory=dict)  # base name -> object ids
    fields: dict[str, list[str]] = field(default_factory=dict)
    events: dict[str, list[str]] = field(default_factory=dict)
    constructors: list[str] = field(default_factory=list)
    nested_names: dict[str, list[_ClassEntry]] = field(default_factory=dict)


def populate(model: CodeModel, kb: KnowledgeBase) -> PopulationReport:
    """Fill the knowledge base from a canonical code model."""
    if not kb.has_builtins():
        raise MissingBuiltins("knowledge base lacks the builtin type registry")
    report = PopulationReport()
    entries: list[_ClassEntry] = []
    for ns in model.namespaces:
        _populate_namespace(ns, kb, entries)
    index = _Index(entries)
    for entry in entries:
        _link_references(entry, kb, index, report)
    for t in kb.knowledge_types:
        report.objects_by_type[t.name] = sum(
            1 for o in kb.objects.values() if o.type_id == t.id
        )
    for lt in kb.link_types:
        report.links_by_type[lt.name] = sum(
            1 for lk in kb.links.values() if lk.link_type_id == lt.id
        )
    return report


def _populate_namespace(ns: NamespaceDecl, kb: KnowledgeBase, entries: list[_ClassEntry]) -> None:
    ns_obj = kb.add_object("namespace", ns.qualified_name, ns.qualified_name, Access.OTHER)
    for cls in ns.classes:
        cls_obj_id = _populate_class(ns.qualified_name, ns.qualified_name, cls, kb, entries, None)
        kb.add_link(CONTAINS, ns_obj.id, cls_obj_id)
    for d in ns.delegates:
        qn = f"{ns.qualified_name}.{d.name}"
        kb.add_object("delegate", qn, d.name, d.access)


def _populate_class(
    namespace: str,
    container_qn: str,
    cls: ClassDecl,
    kb: KnowledgeBase,
    entries: list[_ClassEntry],
    parent_entry: _ClassEntry | None,
) -> str:
    qn = f"{container_qn}.{cls.name}"
    cls_obj = kb.add_object("class", qn, cls.name, cls.access)
    entry = _ClassEntry(namespace, qn, cls)
    entries.append(entry)
    if parent_entry is not None:
        parent_entry.nested_names.setdefault(split_ordinal(cls.name)[0], []).append(entry)

    for ctor in cls.constructors:
        member_qn = f"{qn}.{ctor.name}"
        obj = kb.add_object("constructor", member_qn, ctor.name, ctor.access)
        kb.add_link(CONTAINS, cls_obj.id, obj.id)
        entry.constructors.append(obj.id)
        _populate_params(member_qn, ctor.parameters, obj.id, kb)
    for m in cls.methods:
        member_qn = f"{qn}.{m.name}"
        obj = kb.add_object("method", member_qn, m.name, m.access)
        kb.add_link(CONTAINS, cls_obj.id, obj.id)
        entry.methods.setdefault(split_ordinal(m.name)[0], []).append(obj.id)
        _populate_params(member_qn, m.parameters, obj.id, kb)
    for p in cls.properties:
        obj = kb.add_object("property", f"{qn}.{p.name}", p.name, p.access)
        kb.add_link(CONTAINS, cls_obj.id, obj.id)
    for f in cls.fields:
        obj = kb.add_object("variable", f"{qn}.{f.name}", f.name, f.access, kind_tag="field")
        kb.add_link(CONTAINS, cls_obj.id, obj.id)
        entry.fields.setdefault(split_ordinal(f.name)[0], []).append(obj.id)
    for ev in cls.events:
        obj = kb.add_object("event", f"{qn}.{ev.name}", ev.name, ev.access)
        kb.add_link(CONTAINS, cls_obj.id, obj.id)
        entry.events.setdefault(split_ordinal(ev.name)[0], []).append(obj.id)
    for d in cls.delegates:
        obj = kb.add_object("delegate", f"{qn}.{d.name}", d.name, d.access)
        kb.add_link(CONTAINS, cls_obj.id, obj.id)
    for nested in cls.nested_classes:
        nested_id = _populate_class(namespace, qn, nested, kb, entries, entry)
        kb.add_link(CONTAINS, cls_obj.id, nested_id)
    return cls_obj.id


def _populate_params(member_qn: str, params, member_obj_id: str, kb: KnowledgeBase) -> None:
    for p in params:
        obj = kb.add_object(
            "variable", f"{member_qn}.{p.name}", p.name, Access.OTHER, kind_tag="parameter"
        )
        kb.add_link(PARAMETER_OF, obj.id, member_obj_id)


class _Index:
    """Name lookup tables for the namespace and whole-model tiers."""

    def __init__(self, entries: list[_ClassEntry]):
        self.by_namespace: dict[str, list[_ClassEntry]] = {}
        self.all_entries = entries
        self.classes_by_base: dict[str, list[_ClassEntry]] = {}
        for entry in entries:
            self.by_namespace.setdefault(entry.namespace, []).append(entry)
            base = split_ordinal(entry.decl.name)[0]
            self.classes_by_base.setdefault(base, []).append(entry)

    def namespace_entries(self, namespace: str) -> list[_ClassEntry]:
        return self.by_namespace.get(namespace, [])


def _tiered(
    name: str,
    own: dict[str, list[str]],
    entry: _ClassEntry,
    index: _Index,
    table: str,
) -> list[str]:
    """Collect all candidates at the first nonempty tier: class, namespace, model."""
    hit = own.get(name)
    if hit:
        return list(hit)
    for scope in (index.namespace_entries(entry.namespace), index.all_entries):
        found: list[str] = []
        for other in scope:
            found.extend(getattr(other, table).get(name, ()))
        if found:
            return found
    return []


def _class_candidates(name: str, entry: _ClassEntry, index: _Index) -> list[_ClassEntry]:
    own: list[_ClassEntry] = []
    if split_ordinal(entry.decl.name)[0] == name:
        own.append(entry)
    own.extend(entry.nested_names.get(name, ()))
    if own:
        return own
    scoped = [e for e in index.namespace_entries(entry.namespace) if split_ordinal(e.decl.name)[0] == name]
    if scoped:
        return scoped
    return index.classes_by_base.get(name, [])


def _link_references(entry: _ClassEntry, kb: KnowledgeBase, index: _Index, report: PopulationReport) -> None:
    members = [(m, "method") for m in entry.decl.methods] + [
        (c, "constructor") for c in entry.decl.constructors
    ]
    for member, type_id in members:
        member_obj_id = object_id(type_id, f"{entry.qualified_name}.{member.name}")
        param_ids = {
            split_ordinal(p.name)[0]: object_id(
                "variable", f"{entry.qualified_name}.{member.name}.{p.name}"
            )
            for p in member.parameters
        }
        for ref in member.references:
            base = split_ordinal(ref.name)[0]
            if ref.kind is RefKind.CALL:
                targets = _tiered(base, entry.methods, entry, index, "methods")
                for t in targets:
                    kb.add_link(CALLS, member_obj_id, t)
                if not targets:
                    report.unresolved_calls += 1
                elif len(targets) > 1:
                    report.ambiguous_calls += 1
            elif ref.kind is RefKind.USE:
                if base in param_ids:
                    kb.add_link(USES, member_obj_id, param_ids[base])
                    continue
                fields = _tiered(base, entry.fields, entry, index, "fields")
                for t in fields:
                    kb.add_link(USES, member_obj_id, t)
                events = _tiered(base, entry.events, entry, index, "events")
                for t in events:
                    kb.add_link(HANDLES, member_obj_id, t)
                if not fields and not events:
                    report.unresolved_uses += 1
                elif len(fields) + len(events) > 1:
                    report.ambiguous_uses += 1
            else:  # instantiation
                classes = _class_candidates(base, entry, index)
                targets = [ctor_id for c in classes for ctor_id in c.constructors]
                for t in targets:
                    kb.add_link(INSTANTIATES, member_obj_id, t)
                if not targets:
                    report.unresolved_instantiates += 1
                elif len(targets) > 1:
                    report.ambiguous_instantiates += 1


# ---------------------------------------------------------------------------
# End-to-end extraction


def extract_project(root_dir: str | Path) -> tuple[CodeModel, KnowledgeBase, PopulationReport]:
    """Tokenize, parse, merge and populate every ``*.cs`` file under a root.

    File-level failures (bad encoding, lexer aborts, unbalanced braces) are
    reported as diagnostics and never abort the project.
    """
    root = Path(root_dir)
    files = sorted(
        (p for p in root.rglob("*.cs") if p.is_file()),
        key=lambda p: p.relative_to(root).as_posix(),
    )
    if not files:
        raise NoSourcesFound(f"no .cs files under {root}")
    models = []
    diagnostics: list[str] = []
    for path in files:
        rel = path.relative_to(root).as_posix()
        try:
            text = path.read_text(encoding="utf-8")
        except (UnicodeDecodeError, OSError) as exc:
            diagnostics.append(f"{rel}: unreadable: {exc}")
            continue
        try:
            tokens = tokenize(text, rel)
        except LexError as exc:
            diagnostics.append(f"{rel}: {exc}")
            continue
        try:
            models.append(parse_file(tokens))
        except UnbalancedBraces as exc:
            diagnostics.append(f"{rel}: {exc}")
    model = merge_models(models)
    kb = KnowledgeBase()
    report = populate(model, kb)
    report.source_files = len(files)
    report.diagnostics = diagnostics
    return model, kb, report
