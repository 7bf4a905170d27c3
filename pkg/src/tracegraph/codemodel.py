"""Declaration-tree model extracted from C# sources.

The model keeps what impact analysis needs (namespaces, types, members,
flattened per-body references) and nothing else: statement structure is
gone by design. Models produced by ``merge_models`` are in canonical
form: every collection except parameter lists is sorted, and name
collisions carry ``#k`` ordinal suffixes assigned in declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from tracegraph.lexer import SourcePosition


class Access(Enum):
    PUBLIC = "public"
    PRIVATE = "private"
    OTHER = "other"


class ClassKind(Enum):
    CLASS = "class"
    STRUCT = "struct"
    INTERFACE = "interface"


class RefKind(Enum):
    CALL = "call"
    USE = "use"
    INSTANTIATE = "instantiate"


@dataclass
class Reference:
    kind: RefKind
    name: str
    pos: SourcePosition


@dataclass
class ParamDecl:
    name: str
    type_name: str


@dataclass
class MethodDecl:
    name: str
    access: Access
    return_type: str
    parameters: list[ParamDecl] = field(default_factory=list)
    references: list[Reference] = field(default_factory=list)
    is_static: bool = False


@dataclass
class ConstructorDecl:
    name: str
    access: Access
    parameters: list[ParamDecl] = field(default_factory=list)
    references: list[Reference] = field(default_factory=list)


@dataclass
class FieldDecl:
    name: str
    access: Access
    type_name: str


@dataclass
class PropertyDecl:
    name: str
    access: Access
    type_name: str


@dataclass
class EventDecl:
    name: str
    access: Access
    type_name: str


@dataclass
class DelegateDecl:
    name: str
    access: Access
    signature: str


@dataclass
class ClassDecl:
    name: str
    access: Access
    kind: ClassKind
    base_types: list[str] = field(default_factory=list)
    constructors: list[ConstructorDecl] = field(default_factory=list)
    methods: list[MethodDecl] = field(default_factory=list)
    properties: list[PropertyDecl] = field(default_factory=list)
    fields: list[FieldDecl] = field(default_factory=list)
    events: list[EventDecl] = field(default_factory=list)
    delegates: list[DelegateDecl] = field(default_factory=list)
    nested_classes: list[ClassDecl] = field(default_factory=list)

    def members_in_category_order(self) -> list:
        """Nested classes first, then the remaining member categories.

        This is the scope order used for ordinal assignment, chosen so that
        mergeable declarations (nested classes) keep their plain names.
        """
        return (
            list(self.nested_classes)
            + list(self.constructors)
            + list(self.methods)
            + list(self.properties)
            + list(self.fields)
            + list(self.events)
            + list(self.delegates)
        )


@dataclass
class NamespaceDecl:
    qualified_name: str
    classes: list[ClassDecl] = field(default_factory=list)
    delegates: list[DelegateDecl] = field(default_factory=list)
    usings: list[str] = field(default_factory=list)


@dataclass
class ReportEntry:
    """A construct the parser could not place, kept for diagnostics."""

    name: str
    pos: SourcePosition


@dataclass
class CodeModel:
    namespaces: list[NamespaceDecl] = field(default_factory=list)
    unresolved_report: list[ReportEntry] = field(default_factory=list)


# Namespace used for type declarations outside any namespace block. Angle
# brackets keep it from colliding with a real C# namespace name.
GLOBAL_NAMESPACE = "<global>"


def split_ordinal(name: str) -> tuple[str, int]:
    """Split a possibly ``#k``-suffixed name into (base, ordinal)."""
    base, sep, tail = name.rpartition("#")
    if sep and tail.isdigit():
        return base, int(tail)
    return name, 1


def ordinal_key(name: str) -> tuple[str, int]:
    """Sort key that orders ``Foo`` < ``Foo#2`` < ``Foo#10`` numerically."""
    return split_ordinal(name)


def assign_ordinals(decls: list) -> None:
    """Disambiguate same-named declarations with ``#k`` suffixes, in order.

    Existing suffixes are stripped first so reassignment is idempotent on
    already-disambiguated scopes.
    """
    counts: dict[str, int] = {}
    for decl in decls:
        base, _ = split_ordinal(decl.name)
        n = counts.get(base, 0) + 1
        counts[base] = n
        decl.name = base if n == 1 else f"{base}#{n}"


def canonicalize(model: CodeModel) -> CodeModel:
    """Sort every collection except parameter lists, in place."""
    model.namespaces.sort(key=lambda ns: ns.qualified_name)
    for ns in model.namespaces:
        ns.usings = sorted(set(ns.usings))
        ns.classes.sort(key=lambda c: ordinal_key(c.name))
        ns.delegates.sort(key=lambda d: ordinal_key(d.name))
        for cls in ns.classes:
            _canonicalize_class(cls)
    model.unresolved_report.sort(
        key=lambda e: (e.name, e.pos.file, e.pos.line, e.pos.column)
    )
    return model


def _canonicalize_class(cls: ClassDecl) -> None:
    cls.base_types = sorted(set(cls.base_types))
    for lst in (
        cls.constructors,
        cls.methods,
        cls.properties,
        cls.fields,
        cls.events,
        cls.delegates,
        cls.nested_classes,
    ):
        lst.sort(key=lambda d: ordinal_key(d.name))
    for member in cls.constructors + cls.methods:
        member.references.sort(key=lambda r: (r.name, r.kind.value))
    for nested in cls.nested_classes:
        _canonicalize_class(nested)
