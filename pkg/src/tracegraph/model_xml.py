"""Canonical XML serialization of code models.

The document format is frozen at version 1.0 so other tools can consume the
extraction output: 2-space indent, LF newlines, UTF-8, attributes in a fixed
order, children grouped by element name with name-sorted siblings (parameter
lists keep declaration order, which is significant). ``emit_xml`` is a pure
function; equal models produce byte-identical documents, and ``parse_xml``
is its exact inverse.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET

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
from tracegraph.lexer import SourcePosition

SCHEMA_VERSION = "1.0"

_ATTR_ORDER = (
    "version",
    "name",
    "qualifiedName",
    "access",
    "kind",
    "type",
    "returnType",
    "signature",
    "refKind",
    "line",
    "column",
    "file",
)

_ALLOWED_ATTRS = {
    "CodeModel": {"version"},
    "Namespace": {"name", "qualifiedName"},
    "Class": {"name", "access", "kind"},
    "Constructor": {"name", "access"},
    "Method": {"name", "access", "kind", "returnType"},
    "Property": {"name", "access", "type"},
    "Variable": {"name", "access", "type"},
    "Event": {"name", "access", "type"},
    "Delegate": {"name", "access", "signature"},
    "Parameter": {"name", "type"},
    "Reference": {"name", "refKind", "line", "column", "file"},
}

_ALLOWED_CHILDREN = {
    "CodeModel": {"Namespace", "Reference"},
    "Namespace": {"Class", "Delegate", "Reference"},
    "Class": {
        "Class", "Constructor", "Delegate", "Event", "Method", "Property",
        "Reference", "Variable",
    },
    "Constructor": {"Parameter", "Reference"},
    "Method": {"Parameter", "Reference"},
    "Property": set(),
    "Variable": set(),
    "Event": set(),
    "Delegate": set(),
    "Parameter": set(),
    "Reference": set(),
}


class SchemaViolation(Exception):
    pass


class VersionMismatch(Exception):
    pass


def _escape(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
        .replace("\t", "&#9;")
        .replace("\n", "&#10;")
        .replace("\r", "&#13;")
    )


class _Node:
    __slots__ = ("tag", "attrs", "children")

    def __init__(self, tag: str, attrs: list[tuple[str, str]], children: list[_Node] | None = None):
        self.tag = tag
        self.attrs = sorted(attrs, key=lambda kv: _ATTR_ORDER.index(kv[0]))
        self.children = children or []

    def render(self, out: list[str], depth: int) -> None:
        pad = "  " * depth
        attr_text = "".join(f' {k}="{_escape(v)}"' for k, v in self.attrs)
        if not self.children:
            out.append(f"{pad}<{self.tag}{attr_text}/>")
            return
        out.append(f"{pad}<{self.tag}{attr_text}>")
        for child in self.children:
            child.render(out, depth + 1)
        out.append(f"{pad}</{self.tag}>")


def emit_xml(model: CodeModel) -> str:
    """Serialize a canonical model to its frozen XML form."""
    root = _Node("CodeModel", [("version", SCHEMA_VERSION)])
    for ns in model.namespaces:
        root.children.append(_namespace_node(ns))
    for entry in model.unresolved_report:
        root.children.append(
            _Node("Reference", [("name", entry.name)] + _pos_attrs(entry.pos))
        )
    lines: list[str] = []
    root.render(lines, 0)
    return "\n".join(lines) + "\n"


def _pos_attrs(pos: SourcePosition) -> list[tuple[str, str]]:
    return [("line", str(pos.line)), ("column", str(pos.column)), ("file", pos.file)]


def _namespace_node(ns: NamespaceDecl) -> _Node:
    simple = ns.qualified_name.rsplit(".", 1)[-1]
    node = _Node("Namespace", [("name", simple), ("qualifiedName", ns.qualified_name)])
    for cls in ns.classes:
        node.children.append(_class_node(cls))
    for d in ns.delegates:
        node.children.append(_delegate_node(d))
    for using in ns.usings:
        node.children.append(_Node("Reference", [("name", using), ("refKind", RefKind.USE.value)]))
    return node


def _class_node(cls: ClassDecl) -> _Node:
    node = _Node(
        "Class",
        [("name", cls.name), ("access", cls.access.value), ("kind", cls.kind.value)],
    )
    for nested in cls.nested_classes:
        node.children.append(_class_node(nested))
    for ctor in cls.constructors:
        node.children.append(_constructor_node(ctor))
    for d in cls.delegates:
        node.children.append(_delegate_node(d))
    for ev in cls.events:
        node.children.append(_typed_member_node("Event", ev.name, ev.access, ev.type_name))
    for m in cls.methods:
        node.children.append(_method_node(m))
    for p in cls.properties:
        node.children.append(_typed_member_node("Property", p.name, p.access, p.type_name))
    for base in cls.base_types:
        node.children.append(_Node("Reference", [("name", base), ("refKind", RefKind.USE.value)]))
    for f in cls.fields:
        node.children.append(_typed_member_node("Variable", f.name, f.access, f.type_name))
    return node


def _typed_member_node(tag: str, name: str, access: Access, type_name: str) -> _Node:
    return _Node(tag, [("name", name), ("access", access.value), ("type", type_name)])


def _delegate_node(d: DelegateDecl) -> _Node:
    return _Node(
        "Delegate",
        [("name", d.name), ("access", d.access.value), ("signature", d.signature)],
    )


def _method_node(m: MethodDecl) -> _Node:
    attrs: list[tuple[str, str]] = [("name", m.name), ("access", m.access.value)]
    if m.is_static:
        attrs.append(("kind", "static"))
    attrs.append(("returnType", m.return_type))
    node = _Node("Method", attrs)
    _append_params_and_refs(node, m.parameters, m.references)
    return node


def _constructor_node(ctor: ConstructorDecl) -> _Node:
    node = _Node("Constructor", [("name", ctor.name), ("access", ctor.access.value)])
    _append_params_and_refs(node, ctor.parameters, ctor.references)
    return node


def _append_params_and_refs(node: _Node, params: list[ParamDecl], refs: list[Reference]) -> None:
    for p in params:
        node.children.append(_Node("Parameter", [("name", p.name), ("type", p.type_name)]))
    for r in refs:
        node.children.append(
            _Node(
                "Reference",
                [("name", r.name), ("refKind", r.kind.value)] + _pos_attrs(r.pos),
            )
        )


# ---------------------------------------------------------------------------
# Parsing


def parse_xml(document: str | bytes) -> CodeModel:
    """Parse a version-1.0 document back into a code model.

    Exact inverse of ``emit_xml`` on its output; raises SchemaViolation for
    unknown elements or attributes and VersionMismatch for other versions.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        raise SchemaViolation(f"not well-formed XML: {exc}") from exc
    if root.tag != "CodeModel":
        raise SchemaViolation(f"unexpected root element <{root.tag}>")
    version = root.attrib.get("version")
    if version is None:
        raise SchemaViolation("missing required attribute 'version'")
    if version != SCHEMA_VERSION:
        raise VersionMismatch(f"unsupported document version {version!r}")
    _check_element(root)
    model = CodeModel()
    for child in root:
        _check_element(child, parent="CodeModel")
        if child.tag == "Namespace":
            model.namespaces.append(_parse_namespace(child))
        else:
            if "refKind" in child.attrib:
                raise SchemaViolation("report entries must not carry refKind")
            model.unresolved_report.append(
                ReportEntry(_require(child, "name"), _parse_pos(child))
            )
    return model


def _parse_name_reference(elem: ET.Element, context: str) -> str:
    """References under Namespace or Class carry only a name and 'use'."""
    if elem.attrib.get("refKind") != RefKind.USE.value:
        raise SchemaViolation(f"{context} references must have refKind 'use'")
    for attr in ("line", "column", "file"):
        if attr in elem.attrib:
            raise SchemaViolation(f"{context} references must not carry positions")
    return _require(elem, "name")


def _check_element(elem: ET.Element, parent: str | None = None) -> None:
    if elem.tag not in _ALLOWED_ATTRS:
        raise SchemaViolation(f"unknown element <{elem.tag}>")
    if parent is not None and elem.tag not in _ALLOWED_CHILDREN[parent]:
        raise SchemaViolation(f"element <{elem.tag}> not allowed inside <{parent}>")
    for attr in elem.attrib:
        if attr not in _ALLOWED_ATTRS[elem.tag]:
            raise SchemaViolation(f"unknown attribute {attr!r} on <{elem.tag}>")
    if elem.text and elem.text.strip():
        raise SchemaViolation(f"unexpected text content in <{elem.tag}>")
    for child in elem:
        if child.tail and child.tail.strip():
            raise SchemaViolation(f"unexpected text content in <{elem.tag}>")


def _require(elem: ET.Element, attr: str) -> str:
    value = elem.attrib.get(attr)
    if value is None:
        raise SchemaViolation(f"missing required attribute {attr!r} on <{elem.tag}>")
    return value


def _parse_access(elem: ET.Element) -> Access:
    raw = _require(elem, "access")
    try:
        return Access(raw)
    except ValueError:
        raise SchemaViolation(f"bad access value {raw!r} on <{elem.tag}>") from None


def _parse_pos(elem: ET.Element) -> SourcePosition:
    line = _require(elem, "line")
    column = _require(elem, "column")
    file = _require(elem, "file")
    if not (line.isdigit() and column.isdigit() and int(line) >= 1 and int(column) >= 1):
        raise SchemaViolation(f"bad position on <{elem.tag}>")
    return SourcePosition(file, int(line), int(column))


def _parse_namespace(elem: ET.Element) -> NamespaceDecl:
    ns = NamespaceDecl(_require(elem, "qualifiedName"))
    _require(elem, "name")
    for child in elem:
        _check_element(child, parent="Namespace")
        if child.tag == "Class":
            ns.classes.append(_parse_class(child))
        elif child.tag == "Delegate":
            ns.delegates.append(_parse_delegate(child))
        else:  # a using directive recorded as a namespace reference
            ns.usings.append(_parse_name_reference(child, "namespace"))
    return ns


def _parse_class(elem: ET.Element) -> ClassDecl:
    raw_kind = _require(elem, "kind")
    try:
        kind = ClassKind(raw_kind)
    except ValueError:
        raise SchemaViolation(f"bad class kind {raw_kind!r}") from None
    cls = ClassDecl(name=_require(elem, "name"), access=_parse_access(elem), kind=kind)
    for child in elem:
        _check_element(child, parent="Class")
        if child.tag == "Class":
            cls.nested_classes.append(_parse_class(child))
        elif child.tag == "Constructor":
            cls.constructors.append(_parse_constructor(child))
        elif child.tag == "Delegate":
            cls.delegates.append(_parse_delegate(child))
        elif child.tag == "Event":
            cls.events.append(EventDecl(_require(child, "name"), _parse_access(child), _require(child, "type")))
        elif child.tag == "Method":
            cls.methods.append(_parse_method(child))
        elif child.tag == "Property":
            cls.properties.append(PropertyDecl(_require(child, "name"), _parse_access(child), _require(child, "type")))
        elif child.tag == "Reference":
            cls.base_types.append(_parse_name_reference(child, "base-type"))
        else:
            cls.fields.append(FieldDecl(_require(child, "name"), _parse_access(child), _require(child, "type")))
    return cls


def _parse_delegate(elem: ET.Element) -> DelegateDecl:
    return DelegateDecl(_require(elem, "name"), _parse_access(elem), _require(elem, "signature"))


def _parse_method(elem: ET.Element) -> MethodDecl:
    kind = elem.attrib.get("kind")
    if kind not in (None, "static"):
        raise SchemaViolation(f"bad method kind {kind!r}")
    method = MethodDecl(
        name=_require(elem, "name"),
        access=_parse_access(elem),
        return_type=_require(elem, "returnType"),
        is_static=kind == "static",
    )
    _parse_params_and_refs(elem, method)
    return method


def _parse_constructor(elem: ET.Element) -> ConstructorDecl:
    ctor = ConstructorDecl(name=_require(elem, "name"), access=_parse_access(elem))
    _parse_params_and_refs(elem, ctor)
    return ctor


def _parse_params_and_refs(elem: ET.Element, member) -> None:
    for child in elem:
        _check_element(child, parent=elem.tag)
        if child.tag == "Parameter":
            member.parameters.append(
                ParamDecl(_require(child, "name"), _require(child, "type"))
            )
        else:
            raw = _require(child, "refKind")
            try:
                ref_kind = RefKind(raw)
            except ValueError:
                raise SchemaViolation(f"bad refKind {raw!r}") from None
            member.references.append(
                Reference(ref_kind, _require(child, "name"), _parse_pos(child))
            )
