"""Declaration parser for C# token streams.

Builds a :class:`~tracegraph.codemodel.CodeModel` covering namespaces,
classes, structs, interfaces and their members, and flattens every method
or constructor body into a reference list (calls, uses, instantiations).
Statement structure is deliberately discarded; control-flow keywords never
reach the model.

The parser is tolerant by contract: unknown constructs inside a member body
never abort a file, and top-level failures skip to the next brace-balanced
declaration while recording a report entry.
"""

from __future__ import annotations

import copy

from tracegraph.codemodel import (
    Access,
    ClassDecl,
    ClassKind,
    CodeModel,
    ConstructorDecl,
    DelegateDecl,
    EventDecl,
    FieldDecl,
    GLOBAL_NAMESPACE,
    MethodDecl,
    NamespaceDecl,
    ParamDecl,
    PropertyDecl,
    Reference,
    RefKind,
    ReportEntry,
    assign_ordinals,
    canonicalize,
)
from tracegraph.lexer import SourcePosition, Token, TokenKind


class UnbalancedBraces(Exception):
    """File-level brace mismatch; the whole file is rejected."""

    def __init__(self, message: str, pos: SourcePosition):
        super().__init__(f"{pos}: {message}")
        self.pos = pos


class ConflictingDeclaration(Exception):
    """Two same-named types disagree on kind (class vs interface vs struct)."""


PRIMITIVE_TYPES = frozenset(
    """
    bool byte char decimal double float int long object sbyte short string
    uint ulong ushort void
    """.split()
)

_MODIFIERS = frozenset(
    """
    public private protected internal static readonly const virtual override
    abstract sealed extern unsafe new volatile fixed
    """.split()
)

_TYPE_KIND_KEYWORDS = {"class": ClassKind.CLASS, "struct": ClassKind.STRUCT, "interface": ClassKind.INTERFACE}

_PARAM_MODIFIERS = frozenset({"ref", "out", "params", "this"})


class _Cursor:
    __slots__ = ("toks", "i")

    def __init__(self, tokens: list[Token], start: int = 0):
        self.toks = tokens
        self.i = start

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def peek(self, k: int = 0) -> Token | None:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def text(self, k: int = 0) -> str:
        tok = self.peek(k)
        return tok.text if tok else ""

    def kind(self, k: int = 0) -> TokenKind | None:
        tok = self.peek(k)
        return tok.kind if tok else None

    def take(self) -> Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def pos(self) -> SourcePosition:
        tok = self.peek() or (self.toks[-1] if self.toks else None)
        if tok is None:
            return SourcePosition("<empty>", 1, 1)
        return tok.pos


def parse_file(tokens: list[Token]) -> CodeModel:
    """Parse one file's token stream into a canonical partial model.

    Raises UnbalancedBraces when the file's brace structure cannot support
    declaration recovery; all other problems become report entries.
    """
    _check_brace_balance(tokens)
    parser = _FileParser(tokens)
    raw = parser.parse()
    return _merge([raw], strict=False)


def merge_models(models: list[CodeModel]) -> CodeModel:
    """Merge per-file models into one canonical project model.

    Same-named namespaces unify; same-named classes merge member-wise
    (partial classes); member name collisions across files gain ``#k``
    ordinals in merge order. Raises ConflictingDeclaration when two
    same-named classes disagree on kind.
    """
    return _merge(models, strict=True)


def _check_brace_balance(tokens: list[Token]) -> None:
    depth = 0
    for tok in tokens:
        if tok.kind is TokenKind.PUNCTUATOR:
            if tok.text == "{":
                depth += 1
            elif tok.text == "}":
                depth -= 1
                if depth < 0:
                    raise UnbalancedBraces("unmatched '}'", tok.pos)
    if depth != 0:
        raise UnbalancedBraces("unclosed '{'", tokens[-1].pos)


# ---------------------------------------------------------------------------
# Reference extraction


def extract_references(
    body_tokens: list[Token],
    locals_: set[str],
    params: set[str],
    fields: set[str],
) -> list[Reference]:
    """Flatten a member body into deduplicated references.

    Identifiers naming declared locals are dropped entirely (declaration
    sites included); an identifier followed by ``(`` is a call, one after
    ``new`` an instantiation, everything else a use. In dotted chains only
    the first segment (the receiver) and the final segment survive.
    Duplicate (kind, name) pairs collapse to the first occurrence.
    """
    _, suppressed = scan_local_declarations(body_tokens, params | fields)
    refs: list[Reference] = []
    seen: set[tuple[RefKind, str]] = set()

    def emit(kind: RefKind, name: str, pos: SourcePosition) -> None:
        if name in locals_:
            return
        key = (kind, name)
        if key not in seen:
            seen.add(key)
            refs.append(Reference(kind, name, pos))

    toks = body_tokens
    i = 0
    while i < len(toks):
        tok = toks[i]
        if tok.kind is TokenKind.KEYWORD and tok.text == "new":
            i = _scan_new_expression(toks, i, emit)
            continue
        if tok.kind is TokenKind.IDENTIFIER and i not in suppressed:
            i = _scan_name_chain(toks, i, emit)
            continue
        i += 1
    return refs


def _scan_new_expression(toks: list[Token], i: int, emit) -> int:
    """Consume ``new Type...`` and emit an instantiation of the type name."""
    j = i + 1
    if j >= len(toks) or toks[j].kind is not TokenKind.IDENTIFIER:
        return i + 1  # array of primitive or malformed; nothing to record
    last = j
    while (
        last + 2 < len(toks)
        and toks[last + 1].text == "."
        and toks[last + 2].kind is TokenKind.IDENTIFIER
    ):
        last += 2
    emit(RefKind.INSTANTIATE, toks[last].text, toks[last].pos)
    end = _skip_generic_group_tokens(toks, last + 1)
    return end


def _scan_name_chain(toks: list[Token], i: int, emit) -> int:
    prev = toks[i - 1] if i > 0 else None
    attached = prev is not None and prev.text == "."
    if attached and i >= 2 and toks[i - 2].kind is TokenKind.KEYWORD and toks[i - 2].text in ("this", "base"):
        attached = False  # implicit receiver; treat the chain as rooted here
    segments = [i]
    j = i
    while (
        j + 2 < len(toks)
        and toks[j + 1].text == "."
        and toks[j + 2].kind is TokenKind.IDENTIFIER
    ):
        j += 2
        segments.append(j)
    followed_by_call = j + 1 < len(toks) and toks[j + 1].text == "("
    last_idx = segments[-1]
    last_kind = RefKind.CALL if followed_by_call else RefKind.USE
    if not attached and len(segments) > 1:
        first = toks[segments[0]]
        emit(RefKind.USE, first.text, first.pos)
    emit(last_kind, toks[last_idx].text, toks[last_idx].pos)
    return j + 1


def scan_local_declarations(
    tokens: list[Token], known_values: set[str]
) -> tuple[set[str], set[int]]:
    """Single left-to-right pass over a body collecting local declarations.

    Recognizes ``Type name [= ...][, name ...];`` statements and
    ``foreach (Type name in ...)`` headers. Returns the declared name set
    and the token indices of declaration sites (type tokens and declarator
    names), which reference extraction must skip. ``known_values`` holds
    names (fields, parameters) that cannot plausibly be a declaration's
    type, guarding against misreading expressions.
    """
    declared: set[str] = set()
    suppressed: set[int] = set()
    cur = _Cursor(tokens)
    while not cur.at_end():
        start = cur.i
        type_name = _try_type_name(cur)
        if (
            type_name is not None
            and cur.kind() is TokenKind.IDENTIFIER
            and cur.text(1) in ("=", ";", ",", "in")
        ):
            bare_type = type_name.isidentifier()
            if bare_type and type_name in (known_values | declared):
                cur.i = start + 1  # looks like an expression, not a declaration
                continue
            suppressed.update(range(start, cur.i))
            name_tok = cur.take()
            suppressed.add(cur.i - 1)
            declared.add(name_tok.text)
            if cur.text() in ("=", ","):
                _scan_extra_declarators(cur, declared, suppressed)
            continue
        cur.i = start + 1
    return declared, suppressed


def _scan_extra_declarators(cur: _Cursor, declared: set[str], suppressed: set[int]) -> None:
    depth = 0
    while not cur.at_end():
        text = cur.text()
        if text in ("(", "[", "{"):
            depth += 1
        elif text in (")", "]", "}"):
            if depth == 0:
                return
            depth -= 1
        elif depth == 0:
            if text == ";":
                return
            if text == ",":
                if cur.kind(1) is TokenKind.IDENTIFIER and cur.text(2) in ("=", ",", ";"):
                    cur.take()
                    declared.add(cur.text())
                    suppressed.add(cur.i)
                    cur.take()
                    continue
                return
        cur.take()


def _try_type_name(cur: _Cursor) -> str | None:
    """Parse a type name (dotted, generic, nullable, array) or back off."""
    start = cur.i
    tok = cur.peek()
    if tok is None:
        return None
    if tok.kind is TokenKind.KEYWORD and tok.text in PRIMITIVE_TYPES:
        parts = [cur.take().text]
    elif tok.kind is TokenKind.IDENTIFIER:
        parts = [cur.take().text]
    else:
        return None
    while cur.text() == "." and cur.kind(1) is TokenKind.IDENTIFIER:
        cur.take()
        parts.append("." + cur.take().text)
    if cur.text() == "<":
        group = _try_generic_group(cur)
        if group is not None:
            parts.append(group)
    if cur.text() == "?":
        cur.take()
        parts.append("?")
    while cur.text() == "[":
        save = cur.i
        cur.take()
        commas = 0
        while cur.text() == ",":
            commas += 1
            cur.take()
        if cur.text() == "]":
            cur.take()
            parts.append("[" + "," * commas + "]")
        else:
            cur.i = save
            break
    if cur.i == start:
        return None
    return "".join(parts)


def _try_generic_group(cur: _Cursor) -> str | None:
    """Fold ``<...>`` into the type name when its content is type-like."""
    save = cur.i
    cur.take()  # '<'
    args: list[str] = []
    while True:
        inner = _try_type_name(cur)
        if inner is None:
            cur.i = save
            return None
        args.append(inner)
        if cur.text() == ",":
            cur.take()
            continue
        if cur.text() == ">":
            cur.take()
            return "<" + ", ".join(args) + ">"
        cur.i = save
        return None


def _skip_generic_group_tokens(toks: list[Token], i: int) -> int:
    """Return the index after a type-like ``<...>`` group, else ``i``."""
    if i < len(toks) and toks[i].text == "<":
        cur = _Cursor(toks, i)
        if _try_generic_group(cur) is not None:
            return cur.i
    return i


# ---------------------------------------------------------------------------
# Declaration parsing


class _PendingBody:
    __slots__ = ("member", "tokens", "params")

    def __init__(self, member, tokens: list[Token], params: list[ParamDecl]):
        self.member = member
        self.tokens = tokens
        self.params = params


class _FileParser:
    def __init__(self, tokens: list[Token]):
        self.cur = _Cursor(tokens)
        self.report: list[ReportEntry] = []
        self.namespaces: dict[str, NamespaceDecl] = {}

    def parse(self) -> CodeModel:
        cur = self.cur
        top_usings: list[str] = []
        while not cur.at_end():
            before = cur.i
            text = cur.text()
            if text == "using":
                u = self._parse_using()
                if u:
                    top_usings.append(u)
            elif text == "namespace":
                self._parse_namespace("")
            elif self._at_type_declaration():
                self._parse_namespace_member(self._namespace(GLOBAL_NAMESPACE))
            else:
                self._diagnose()
                self._recover()
            if cur.i == before:  # safety net: always make progress
                self._diagnose()
                cur.take()
        for ns in self.namespaces.values():  # file-level usings are in scope everywhere
            ns.usings.extend(top_usings)
        return CodeModel(list(self.namespaces.values()), self.report)

    # -- shared helpers

    def _namespace(self, qualified: str) -> NamespaceDecl:
        ns = self.namespaces.get(qualified)
        if ns is None:
            ns = NamespaceDecl(qualified)
            self.namespaces[qualified] = ns
        return ns

    def _diagnose(self, tag: str | None = None) -> None:
        tok = self.cur.peek()
        name = tag if tag is not None else (tok.text if tok else "<eof>")
        self.report.append(ReportEntry(name, self.cur.pos()))

    def _recover(self) -> None:
        """Skip to the end of the current declaration: ``;`` or a balanced
        brace group at this level; an unconsumed ``}`` closes the caller."""
        cur = self.cur
        depth = 0
        while not cur.at_end():
            text = cur.text()
            if text == "{":
                depth += 1
            elif text == "}":
                if depth == 0:
                    return
                depth -= 1
                cur.take()
                if depth == 0:
                    return
                continue
            elif text == ";" and depth == 0:
                cur.take()
                return
            cur.take()

    def _expect(self, text: str) -> bool:
        if self.cur.text() == text:
            self.cur.take()
            return True
        self._diagnose()
        self._recover()
        return False

    def _take_balanced_braces(self) -> list[Token]:
        """Consume ``{ ... }`` and return the inner token slice."""
        cur = self.cur
        cur.take()  # '{'
        start = cur.i
        depth = 1
        while not cur.at_end():
            text = cur.take().text
            if text == "{":
                depth += 1
            elif text == "}":
                depth -= 1
                if depth == 0:
                    return cur.toks[start : cur.i - 1]
        return cur.toks[start : cur.i]  # unreachable given balance pre-check

    def _at_type_declaration(self) -> bool:
        cur = self.cur
        k = 0
        while True:
            text = cur.text(k)
            if text in _MODIFIERS:
                k += 1
                continue
            if text == "partial" and cur.text(k + 1) in _TYPE_KIND_KEYWORDS:
                k += 1
                continue
            return text in _TYPE_KIND_KEYWORDS or text == "delegate" or text == "enum"

    # -- using / namespace

    def _parse_using(self) -> str | None:
        cur = self.cur
        cur.take()  # 'using'
        if cur.kind() is not TokenKind.IDENTIFIER:
            self._diagnose("using")
            self._recover()
            return None
        parts = [cur.take().text]
        if cur.text() == "=":  # alias directive: record the target
            cur.take()
            if cur.kind() is not TokenKind.IDENTIFIER:
                self._diagnose("using")
                self._recover()
                return None
            parts = [cur.take().text]
        while cur.text() == "." and cur.kind(1) is TokenKind.IDENTIFIER:
            cur.take()
            parts.append(cur.take().text)
        self._expect(";")
        return ".".join(parts)

    def _parse_namespace(self, prefix: str) -> None:
        cur = self.cur
        cur.take()  # 'namespace'
        if cur.kind() is not TokenKind.IDENTIFIER:
            self._diagnose("namespace")
            self._recover()
            return
        parts = [cur.take().text]
        while cur.text() == "." and cur.kind(1) is TokenKind.IDENTIFIER:
            cur.take()
            parts.append(cur.take().text)
        qualified = (prefix + "." if prefix else "") + ".".join(parts)
        if not self._expect("{"):
            return
        ns = self._namespace(qualified)
        while not cur.at_end() and cur.text() != "}":
            before = cur.i
            text = cur.text()
            if text == "using":
                u = self._parse_using()
                if u:
                    ns.usings.append(u)
            elif text == "namespace":
                self._parse_namespace(qualified)
            else:
                self._parse_namespace_member(ns)
            if cur.i == before:
                self._diagnose()
                cur.take()
        if cur.text() == "}":
            cur.take()
        if cur.text() == ";":
            cur.take()

    def _parse_namespace_member(self, ns: NamespaceDecl) -> None:
        modifiers = self._parse_modifiers()
        text = self.cur.text()
        if text in _TYPE_KIND_KEYWORDS:
            cls = self._parse_class(modifiers, top_level=True)
            if cls is not None:
                existing = _find_same_name(ns.classes, cls.name)
                if existing is not None:
                    _merge_class(existing, cls, strict=False, report=self.report)
                else:
                    ns.classes.append(cls)
        elif text == "delegate":
            d = self._parse_delegate(modifiers, top_level=True)
            if d is not None:
                ns.delegates.append(d)
        elif text == "enum":
            self._diagnose("enum")
            self._recover()
        else:
            self._diagnose()
            self._recover()

    # -- type declarations

    def _parse_modifiers(self) -> set[str]:
        cur = self.cur
        mods: set[str] = set()
        while True:
            text = cur.text()
            if text in _MODIFIERS and text != "event":
                mods.add(cur.take().text)
            elif text == "partial" and cur.text(1) in _TYPE_KIND_KEYWORDS:
                mods.add(cur.take().text)
            else:
                return mods

    def _member_access(self, modifiers: set[str]) -> Access:
        if "public" in modifiers:
            return Access.PUBLIC
        if "protected" in modifiers or "internal" in modifiers:
            return Access.OTHER
        if "private" in modifiers:
            return Access.PRIVATE
        return Access.PRIVATE

    def _type_access(self, modifiers: set[str]) -> Access:
        if "public" in modifiers:
            return Access.PUBLIC
        if "private" in modifiers:
            return Access.PRIVATE
        return Access.OTHER

    def _parse_class(self, modifiers: set[str], top_level: bool) -> ClassDecl | None:
        cur = self.cur
        kind = _TYPE_KIND_KEYWORDS[cur.take().text]
        if cur.kind() is not TokenKind.IDENTIFIER:
            self._diagnose("class")
            self._recover()
            return None
        name = cur.take().text
        if cur.text() == "<":
            _try_generic_group(cur)  # generic parameter list is not modeled
        base_types: list[str] = []
        if cur.text() == ":":
            cur.take()
            while True:
                t = _try_type_name(cur)
                if t is None:
                    break
                base_types.append(t)
                if cur.text() == ",":
                    cur.take()
                    continue
                break
        while not cur.at_end() and cur.text() != "{":  # where-constraints etc.
            cur.take()
        if not self._expect("{"):
            return None
        access = self._type_access(modifiers) if top_level else self._member_access(modifiers)
        cls = ClassDecl(name=name, access=access, kind=kind, base_types=base_types)
        pending: list[_PendingBody] = []
        while not cur.at_end() and cur.text() != "}":
            before = cur.i
            self._parse_member(cls, pending)
            if cur.i == before:
                self._diagnose()
                cur.take()
        if cur.text() == "}":
            cur.take()
        if cur.text() == ";":
            cur.take()
        self._extract_member_references(cls, pending)
        return cls

    def _extract_member_references(self, cls: ClassDecl, pending: list[_PendingBody]) -> None:
        field_names = {f.name for f in cls.fields}
        for item in pending:
            param_names = {p.name for p in item.params}
            declared, _ = scan_local_declarations(item.tokens, param_names | field_names)
            item.member.references = extract_references(
                item.tokens, declared, param_names, field_names
            )

    def _parse_member(self, cls: ClassDecl, pending: list[_PendingBody]) -> None:
        cur = self.cur
        modifiers = self._parse_modifiers()
        text = cur.text()
        if text in _TYPE_KIND_KEYWORDS:
            nested = self._parse_class(modifiers, top_level=False)
            if nested is not None:
                existing = _find_same_name(cls.nested_classes, nested.name)
                if existing is not None:
                    _merge_class(existing, nested, strict=False, report=self.report)
                else:
                    cls.nested_classes.append(nested)
            return
        if text == "delegate":
            d = self._parse_delegate(modifiers, top_level=False)
            if d is not None:
                cls.delegates.append(d)
            return
        if text == "event":
            self._parse_event(cls, modifiers)
            return
        if text == "~":
            self._diagnose("finalizer")
            self._recover()
            return
        if text in ("implicit", "explicit"):
            self._diagnose("operator")
            self._recover()
            return
        if (
            cur.kind() is TokenKind.IDENTIFIER
            and cur.text() == cls.name
            and cur.text(1) == "("
        ):
            self._parse_constructor(cls, modifiers, pending)
            return

        type_name = _try_type_name(cur)
        if type_name is None:
            self._diagnose()
            self._recover()
            return
        if cur.text() == "operator":
            self._diagnose("operator")
            self._recover()
            return
        if cur.text() == "this":
            self._diagnose("indexer")
            self._recover()
            return
        if cur.kind() is not TokenKind.IDENTIFIER:
            self._diagnose()
            self._recover()
            return
        name = cur.take().text
        if cur.text() == "<":
            _try_generic_group(cur)  # generic method type parameters
        access = self._member_access(modifiers)
        if cur.text() == "(":
            self._parse_method(cls, name, access, type_name, modifiers, pending)
        elif cur.text() == "{":
            self._take_balanced_braces()  # accessor bodies are not retained
            if cur.text() == "=":  # auto-property initializer
                self._skip_to_semicolon()
            cls.properties.append(PropertyDecl(name, access, type_name))
        elif cur.text() in (";", "=", ","):
            self._parse_field_declarators(cls, name, access, type_name)
        else:
            self._diagnose()
            self._recover()

    def _parse_method(
        self,
        cls: ClassDecl,
        name: str,
        access: Access,
        return_type: str,
        modifiers: set[str],
        pending: list[_PendingBody],
    ) -> None:
        params = self._parse_params()
        cur = self.cur
        while not cur.at_end() and cur.text() not in ("{", ";", "=>"):
            cur.take()  # where-constraints
        method = MethodDecl(
            name=name,
            access=access,
            return_type=return_type,
            parameters=params,
            is_static="static" in modifiers,
        )
        body = self._parse_member_body()
        cls.methods.append(method)
        if body:
            pending.append(_PendingBody(method, body, params))

    def _parse_constructor(
        self, cls: ClassDecl, modifiers: set[str], pending: list[_PendingBody]
    ) -> None:
        cur = self.cur
        name = cur.take().text
        params = self._parse_params()
        body_prefix: list[Token] = []
        if cur.text() == ":":  # this(...)/base(...) initializer
            cur.take()
            if cur.text() in ("this", "base"):
                cur.take()
            if cur.text() == "(":
                body_prefix = self._take_balanced_parens()
        ctor = ConstructorDecl(name=name, access=self._member_access(modifiers), parameters=params)
        body = self._parse_member_body()
        cls.constructors.append(ctor)
        if body or body_prefix:
            pending.append(_PendingBody(ctor, body_prefix + (body or []), params))

    def _parse_member_body(self) -> list[Token] | None:
        cur = self.cur
        if cur.text() == ";":
            cur.take()
            return None
        if cur.text() == "=>":  # expression body: scan it for references
            cur.take()
            start = cur.i
            self._skip_to_semicolon()
            end = cur.i
            if end > start and cur.toks[end - 1].text == ";":
                end -= 1
            return cur.toks[start:end]
        if cur.text() == "{":
            return self._take_balanced_braces()
        self._diagnose()
        self._recover()
        return None

    def _skip_to_semicolon(self) -> None:
        cur = self.cur
        depth = 0
        while not cur.at_end():
            text = cur.text()
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                if depth == 0:
                    return
                depth -= 1
            elif text == ";" and depth == 0:
                cur.take()
                return
            cur.take()

    def _take_balanced_parens(self) -> list[Token]:
        cur = self.cur
        cur.take()  # '('
        start = cur.i
        depth = 1
        while not cur.at_end():
            text = cur.take().text
            if text == "(":
                depth += 1
            elif text == ")":
                depth -= 1
                if depth == 0:
                    return cur.toks[start : cur.i - 1]
        return cur.toks[start : cur.i]

    def _parse_params(self) -> list[ParamDecl]:
        cur = self.cur
        params: list[ParamDecl] = []
        if cur.text() != "(":
            return params
        cur.take()
        while not cur.at_end() and cur.text() != ")":
            while cur.text() in _PARAM_MODIFIERS:
                cur.take()
            type_name = _try_type_name(cur)
            if type_name is None:
                self._skip_param()
                continue
            if cur.kind() is TokenKind.IDENTIFIER:
                name = cur.take().text
            else:
                name = f"p{len(params) + 1}"
            if cur.text() == "=":  # default value
                self._skip_param_default()
            params.append(ParamDecl(name, type_name))
            if cur.text() == ",":
                cur.take()
        if cur.text() == ")":
            cur.take()
        assign_ordinals(params)
        return params

    def _skip_param(self) -> None:
        cur = self.cur
        depth = 0
        while not cur.at_end():
            text = cur.text()
            if text in ("(", "["):
                depth += 1
            elif text in (")", "]"):
                if depth == 0:
                    return
                depth -= 1
            elif text == "," and depth == 0:
                cur.take()
                return
            cur.take()

    def _skip_param_default(self) -> None:
        cur = self.cur
        cur.take()  # '='
        depth = 0
        while not cur.at_end():
            text = cur.text()
            if text in ("(", "["):
                depth += 1
            elif text in (")", "]"):
                if depth == 0:
                    return
                depth -= 1
            elif text == "," and depth == 0:
                return
            cur.take()

    def _parse_field_declarators(
        self, cls: ClassDecl, first_name: str, access: Access, type_name: str
    ) -> None:
        cur = self.cur
        cls.fields.append(FieldDecl(first_name, access, type_name))
        while True:
            if cur.text() == "=":
                self._skip_field_initializer()
            if cur.text() == ",":
                cur.take()
                if cur.kind() is TokenKind.IDENTIFIER:
                    cls.fields.append(FieldDecl(cur.take().text, access, type_name))
                    continue
                self._diagnose()
                self._recover()
                return
            break
        if cur.text() == ";":
            cur.take()
        else:
            self._diagnose()
            self._recover()

    def _skip_field_initializer(self) -> None:
        cur = self.cur
        cur.take()  # '='
        depth = 0
        while not cur.at_end():
            text = cur.text()
            if text in ("(", "[", "{"):
                depth += 1
            elif text in (")", "]", "}"):
                if depth == 0:
                    return
                depth -= 1
            elif depth == 0 and text in (",", ";"):
                return
            cur.take()

    def _parse_event(self, cls: ClassDecl, modifiers: set[str]) -> None:
        cur = self.cur
        cur.take()  # 'event'
        type_name = _try_type_name(cur)
        if type_name is None or cur.kind() is not TokenKind.IDENTIFIER:
            self._diagnose("event")
            self._recover()
            return
        access = self._member_access(modifiers)
        name = cur.take().text
        if cur.text() == "{":  # add/remove accessors
            self._take_balanced_braces()
            cls.events.append(EventDecl(name, access, type_name))
            return
        cls.events.append(EventDecl(name, access, type_name))
        while True:
            if cur.text() == "=":
                self._skip_field_initializer()
            if cur.text() == ",":
                cur.take()
                if cur.kind() is TokenKind.IDENTIFIER:
                    cls.events.append(EventDecl(cur.take().text, access, type_name))
                    continue
                self._diagnose()
                self._recover()
                return
            break
        if cur.text() == ";":
            cur.take()
        else:
            self._diagnose()
            self._recover()

    def _parse_delegate(self, modifiers: set[str], top_level: bool) -> DelegateDecl | None:
        cur = self.cur
        cur.take()  # 'delegate'
        return_type = _try_type_name(cur)
        if return_type is None or cur.kind() is not TokenKind.IDENTIFIER:
            self._diagnose("delegate")
            self._recover()
            return None
        name = cur.take().text
        if cur.text() == "<":
            _try_generic_group(cur)
        param_types: list[str] = []
        if cur.text() == "(":
            cur.take()
            while not cur.at_end() and cur.text() != ")":
                while cur.text() in _PARAM_MODIFIERS:
                    cur.take()
                t = _try_type_name(cur)
                if t is None:
                    self._skip_param()
                    continue
                param_types.append(t)
                if cur.kind() is TokenKind.IDENTIFIER:
                    cur.take()  # parameter name, not part of the signature
                if cur.text() == ",":
                    cur.take()
            if cur.text() == ")":
                cur.take()
        while not cur.at_end() and cur.text() != ";":
            cur.take()  # where-constraints
        if cur.text() == ";":
            cur.take()
        access = self._type_access(modifiers) if top_level else self._member_access(modifiers)
        signature = f"{return_type}({', '.join(param_types)})"
        return DelegateDecl(name, access, signature)


# ---------------------------------------------------------------------------
# Merging


def _find_same_name(classes: list[ClassDecl], name: str) -> ClassDecl | None:
    for cls in classes:
        if cls.name == name:
            return cls
    return None


def _merge_class(
    target: ClassDecl, incoming: ClassDecl, strict: bool, report: list[ReportEntry]
) -> None:
    if target.kind is not incoming.kind:
        if strict:
            raise ConflictingDeclaration(
                f"'{target.name}' declared as both {target.kind.value} and {incoming.kind.value}"
            )
        report.append(
            ReportEntry(incoming.name, SourcePosition("<merge>", 1, 1))
        )
        return
    if target.access is Access.OTHER and incoming.access is not Access.OTHER:
        target.access = incoming.access
    target.base_types.extend(incoming.base_types)
    target.constructors.extend(incoming.constructors)
    target.methods.extend(incoming.methods)
    target.properties.extend(incoming.properties)
    target.fields.extend(incoming.fields)
    target.events.extend(incoming.events)
    target.delegates.extend(incoming.delegates)
    for nested in incoming.nested_classes:
        existing = _find_same_name(target.nested_classes, nested.name)
        if existing is not None:
            _merge_class(existing, nested, strict, report)
        else:
            target.nested_classes.append(nested)


def _assign_scope_ordinals(cls: ClassDecl) -> None:
    assign_ordinals(cls.members_in_category_order())
    for nested in cls.nested_classes:
        _assign_scope_ordinals(nested)


def _merge(models: list[CodeModel], strict: bool) -> CodeModel:
    merged = CodeModel()
    ns_map: dict[str, NamespaceDecl] = {}
    for model in models:
        model = copy.deepcopy(model)
        merged.unresolved_report.extend(model.unresolved_report)
        for ns in model.namespaces:
            target = ns_map.get(ns.qualified_name)
            if target is None:
                ns_map[ns.qualified_name] = ns
                continue
            target.usings.extend(ns.usings)
            target.delegates.extend(ns.delegates)
            for cls in ns.classes:
                existing = _find_same_name(target.classes, cls.name)
                if existing is not None:
                    _merge_class(existing, cls, strict, merged.unresolved_report)
                else:
                    target.classes.append(cls)
    merged.namespaces = list(ns_map.values())
    for ns in merged.namespaces:
        assign_ordinals(list(ns.classes) + list(ns.delegates))
        for cls in ns.classes:
            _assign_scope_ordinals(cls)
    return canonicalize(merged)
