"""Populator tests: object/link creation, tiered resolution, extraction."""

from __future__ import annotations

from pathlib import Path

import pytest

from tracegraph.codemodel import CodeModel
from tracegraph.knowledge import CONTAINS, KnowledgeBase, KnowledgeType
from tracegraph.lexer import tokenize
from tracegraph.model_xml import emit_xml
from tracegraph.parser import merge_models, parse_file
from tracegraph.populate import (
    MissingBuiltins,
    NoSourcesFound,
    extract_project,
    populate,
)


def build(src: str) -> tuple[KnowledgeBase, object]:
    model = parse_file(tokenize(src, "mem.cs"))
    kb = KnowledgeBase()
    report = populate(model, kb)
    return kb, report


def links_of(kb: KnowledgeBase, link_type: str) -> set[tuple[str, str]]:
    return {
        (lk.parent_id, lk.child_id)
        for lk in kb.links.values()
        if lk.link_type_id == link_type
    }


def test_empty_model():
    kb = KnowledgeBase()
    report = populate(CodeModel(), kb)
    assert not kb.objects and not kb.links
    assert sum(report.objects_by_type.values()) == 0
    assert sum(report.links_by_type.values()) == 0


def test_missing_builtins():
    kb = KnowledgeBase()
    kb.knowledge_types = [KnowledgeType("other", "Other", None, False)]
    with pytest.raises(MissingBuiltins):
        populate(CodeModel(), kb)


def test_method_snippet_counts():
    src = (
        "namespace GeomKernel.CmdsCleanUp { class C { "
        "void SplitVertex(object sender, EventArgs e) { Init(); } } }"
    )
    kb, report = build(src)
    assert report.objects_by_type == {
        "Namespace": 1, "Class": 1, "Constructor": 0, "Method": 1,
        "Property": 0, "Variable": 2, "Delegate": 0, "Event": 0,
    }
    assert report.links_by_type == {
        "Contains": 2, "Calls": 0, "Uses": 0, "ParameterOf": 2,
        "Handles": 0, "Instantiates": 0, "UserDefined": 0,
    }
    assert report.unresolved_calls == 1
    params = {o.qualified_name for o in kb.objects.values() if o.kind_tag == "parameter"}
    assert params == {
        "GeomKernel.CmdsCleanUp.C.SplitVertex.sender",
        "GeomKernel.CmdsCleanUp.C.SplitVertex.e",
    }


def test_parameter_of_direction_and_uses_params():
    src = "namespace N { class C { void M(int count) { total = count; } int total; } }"
    kb, _ = build(src)
    method = "method:N.C.M"
    param = "variable:N.C.M.count"
    assert (param, method) in links_of(kb, "parameter-of")
    assert (method, param) in links_of(kb, "uses")
    assert (method, "variable:N.C.total") in links_of(kb, "uses")


def test_containment_tree():
    src = "namespace N { class Outer { class Inner { int x; } void M() { } } }"
    kb, _ = build(src)
    contains = links_of(kb, CONTAINS)
    assert ("namespace:N", "class:N.Outer") in contains
    assert ("class:N.Outer", "class:N.Outer.Inner") in contains
    assert ("class:N.Outer.Inner", "variable:N.Outer.Inner.x") in contains
    assert ("class:N.Outer", "method:N.Outer.M") in contains
    assert ("namespace:N", "class:N.Outer.Inner") not in contains


def test_calls_resolve_same_class_all_overloads():
    src = """
    namespace N { class C {
      void Caller() { Run(); }
      void Run() { }
      void Run(int n) { }
    } }
    """
    kb, report = build(src)
    calls = links_of(kb, "calls")
    assert ("method:N.C.Caller", "method:N.C.Run") in calls
    assert ("method:N.C.Caller", "method:N.C.Run#2") in calls
    assert report.ambiguous_calls == 1
    assert report.unresolved_calls == 0


def test_calls_fall_back_to_namespace_then_model():
    src = """
    namespace N {
      class A { void Go() { Helper(); Far(); } }
      class B { void Helper() { } }
    }
    namespace M {
      class D { void Far() { } }
    }
    """
    kb, report = build(src)
    calls = links_of(kb, "calls")
    assert ("method:N.A.Go", "method:N.B.Helper") in calls
    assert ("method:N.A.Go", "method:M.D.Far") in calls
    assert report.unresolved_calls == 0


def test_same_class_tier_shadows_namespace_tier():
    src = """
    namespace N {
      class A { void Go() { Work(); } void Work() { } }
      class B { void Work() { } }
    }
    """
    kb, _ = build(src)
    calls = links_of(kb, "calls")
    assert ("method:N.A.Go", "method:N.A.Work") in calls
    assert ("method:N.A.Go", "method:N.B.Work") not in calls


def test_uses_prefers_own_parameter_over_field():
    src = "namespace N { class C { int value; void M(int value) { x = value; } int x; } }"
    kb, _ = build(src)
    uses = links_of(kb, "uses")
    assert ("method:N.C.M", "variable:N.C.M.value") in uses
    assert ("method:N.C.M", "variable:N.C.value") not in uses


def test_handles_links_event_uses():
    src = """
    namespace N { class C {
      event Handler Changed;
      void Wire() { Changed = null; }
    } }
    """
    kb, report = build(src)
    assert ("method:N.C.Wire", "event:N.C.Changed") in links_of(kb, "handles")
    assert report.unresolved_uses == 0


def test_instantiates_links_all_constructors():
    src = """
    namespace N {
      class Pen { Pen() { } Pen(int width) { } }
      class C { void M() { p = new Pen(); } Pen p; }
    }
    """
    kb, report = build(src)
    inst = links_of(kb, "instantiates")
    assert ("method:N.C.M", "constructor:N.Pen.Pen") in inst
    assert ("method:N.C.M", "constructor:N.Pen.Pen#2") in inst
    assert report.ambiguous_instantiates == 1


def test_instantiate_without_declared_constructor_is_unresolved():
    src = "namespace N { class Pen { } class C { void M() { x = new Pen(); } object x; } }"
    _, report = build(src)
    assert report.unresolved_instantiates == 1


def test_namespace_delegate_has_no_contains_parent():
    src = "namespace N { delegate void D(int x); class C { } }"
    kb, _ = build(src)
    assert "delegate:N.D" in kb.objects
    assert all(child != "delegate:N.D" for _, child in links_of(kb, CONTAINS))


def test_class_delegate_is_contained():
    src = "namespace N { class C { delegate void D(int x); } }"
    kb, _ = build(src)
    assert ("class:N.C", "delegate:N.C.D") in links_of(kb, CONTAINS)


def test_populate_is_idempotent():
    src = "namespace N { class C { void M() { Init(); } void Init() { } } }"
    model = parse_file(tokenize(src, "mem.cs"))
    kb = KnowledgeBase()
    populate(model, kb)
    before_objects = dict(kb.objects)
    before_links = set(kb.links)
    populate(model, kb)
    assert dict(kb.objects) == before_objects
    assert set(kb.links) == before_links


def test_contains_forms_a_forest():
    src = """
    namespace N { class A { class B { void M(int p) { } } }
       class C { int f; } }
    namespace M2 { class D { } }
    """
    kb, _ = build(src)
    parents: dict[str, list[str]] = {}
    for parent, child in links_of(kb, CONTAINS):
        parents.setdefault(child, []).append(parent)
    assert all(len(ps) == 1 for ps in parents.values())
    # no cycles: walking up from any node terminates
    up = {child: ps[0] for child, ps in parents.items()}
    for start in up:
        seen = set()
        node = start
        while node in up:
            assert node not in seen
            seen.add(node)
            node = up[node]


def test_parameter_object_conservation():
    src = """
    namespace N { class C {
      void A(int x, int y) { }
      void A(string s) { }
      C(double d) { }
    } }
    """
    kb, _ = build(src)
    params = [o for o in kb.objects.values() if o.kind_tag == "parameter"]
    assert len(params) == 4


def test_report_table_renders():
    _, report = build("namespace N { class C { } }")
    table = report.render_table()
    assert "Objects by type:" in table
    assert "Namespace" in table and "Links by type:" in table


# -- extract_project


def _write_corpus(tmp_path, files: dict[str, str]) -> None:
    for rel, text in files.items():
        target = tmp_path / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")


def test_extract_project_empty_dir(tmp_path):
    with pytest.raises(NoSourcesFound):
        extract_project(tmp_path)


def test_extract_project_matches_manual_pipeline(tmp_path):
    files = {
        "a/One.cs": "namespace P { class A { void M() { Helper(); } } }",
        "b/Two.cs": "namespace P { class B { void Helper() { } } }",
    }
    _write_corpus(tmp_path, files)
    model, kb, report = extract_project(tmp_path)

    models = []
    for rel in sorted(files):
        models.append(parse_file(tokenize(files[rel], rel)))
    manual = merge_models(models)
    assert emit_xml(model) == emit_xml(manual)

    manual_kb = KnowledgeBase()
    populate(manual, manual_kb)
    assert kb == manual_kb
    assert report.source_files == 2
    assert report.diagnostics == []


def test_extract_project_survives_unlexable_file(tmp_path):
    _write_corpus(
        tmp_path,
        {
            "Good.cs": "namespace P { class A { } }",
            "Bad.cs": 'namespace P { class B { string s = "unterminated; } }',
        },
    )
    model, kb, report = extract_project(tmp_path)
    assert len(report.diagnostics) == 1
    assert "Bad.cs" in report.diagnostics[0]
    assert "class:P.A" in kb.objects
    assert "class:P.B" not in kb.objects


def test_corpus_qualified_names_unique_and_containment_forest():
    corpus = Path(__file__).parent / "fixtures" / "corpus"
    _, kb, _ = extract_project(corpus)
    per_type = [(obj.type_id, obj.qualified_name) for obj in kb.objects.values()]
    assert len(set(per_type)) == len(per_type)
    parents: dict[str, list[str]] = {}
    for parent, child in links_of(kb, CONTAINS):
        parents.setdefault(child, []).append(parent)
    assert all(len(ps) == 1 for ps in parents.values())
    up = {child: ps[0] for child, ps in parents.items()}
    for start in up:
        node, seen = start, set()
        while node in up:
            assert node not in seen
            seen.add(node)
            node = up[node]


def test_extract_project_deterministic_file_order(tmp_path):
    _write_corpus(
        tmp_path,
        {
            "z/Late.cs": "namespace P { partial class A { void M2() { } } }",
            "a/Early.cs": "namespace P { partial class A { void M2(int x) { } } }",
        },
    )
    model, _, _ = extract_project(tmp_path)
    (cls,) = model.namespaces[0].classes
    by_name = {m.name: len(m.parameters) for m in cls.methods}
    assert by_name == {"M2": 1, "M2#2": 0}  # a/Early.cs parses first
