/**
 * Column explorer: one column per knowledge type, checkboxed tree nodes,
 * color-coded names and access indicators, link-type filters, drag-to-link
 * and an annotation panel. The DOM is re-rendered from state; live changes
 * arrive only through the event stream (no optimistic updates).
 */

import { ApiClient, ApiError } from "./api.js";
import { indicatorColorFor, textColorFor } from "./colors.js";
import {
  ColumnState,
  displayedColumns,
  loadColumnStates,
  moveColumn,
  saveColumnStates,
} from "./columns.js";
import { subscribeEvents, EventStreamHandle } from "./sse.js";
import type {
  ChangeEventDto,
  ChildRowDto,
  KnowledgeObjectDto,
  KnowledgeTypeDto,
  LinkTypeDto,
} from "./types.js";

const URI_PATTERN = /^[A-Za-z][A-Za-z0-9+.\-]*:[A-Za-z0-9\-._~:/?#[\]@!$&'()*+,;=%]*$/;

interface ChildrenCacheEntry {
  revision: number;
  rows: ChildRowDto[];
}

export class ExplorerApp {
  types: KnowledgeTypeDto[] = [];
  linkTypes: LinkTypeDto[] = [];
  columnStates: ColumnState[] = [];
  enabledLinks = new Set<string>();
  objectsByType = new Map<string, KnowledgeObjectDto[]>();
  objectsById = new Map<string, KnowledgeObjectDto>();
  visibleIds: Map<string, Set<string>> | null = null;
  selectedObjectId: string | null = null;
  revision = 0;
  queryCount = 0;
  childrenFetches = 0;
  annotationError = "";
  private childrenCache = new Map<string, ChildrenCacheEntry>();
  private stream: EventStreamHandle | null = null;
  private pickerState: { sourceId: string; targetId: string } | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private storage: Storage,
    private baseUrl = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  async start(): Promise<void> {
    const typesBody = await this.api.types();
    this.revision = typesBody.revision;
    this.types = typesBody.types;
    this.linkTypes = (await this.api.linkTypes()).linkTypes;
    this.enabledLinks = new Set(this.linkTypes.map((lt) => lt.id));
    this.columnStates = loadColumnStates(this.storage, this.types.map((t) => t.id));
    await this.reloadObjects();
    this.render();
    this.stream = subscribeEvents(
      this.baseUrl,
      this.revision,
      (ev) => void this.onChangeEvent(ev),
      this.fetchImpl,
    );
  }

  stop(): void {
    this.stream?.close();
  }

  // -- data loading

  private async reloadObjects(): Promise<void> {
    for (const column of displayedColumns(this.columnStates)) {
      const body = await this.api.objects(column.typeId, false);
      this.revision = Math.max(this.revision, body.revision);
      this.objectsByType.set(column.typeId, body.objects);
      for (const obj of body.objects) {
        this.objectsById.set(obj.id, obj);
      }
    }
  }

  private checkedAnywhere(): boolean {
    return this.columnStates.some((c) => c.checked.size > 0);
  }

  /** Issues exactly one visibility query and replaces every column's list. */
  async runQuery(): Promise<void> {
    const displayed = displayedColumns(this.columnStates);
    const checked: Record<string, string[]> = {};
    for (const column of displayed) {
      if (column.checked.size > 0) {
        checked[column.typeId] = [...column.checked].sort();
      }
    }
    this.queryCount += 1;
    const result = await this.api.query({
      displayedTypeIds: displayed.map((c) => c.typeId),
      checked,
      enabledLinkTypeIds: [...this.enabledLinks].sort(),
    });
    if (result.revision < this.revision) {
      return; // stale response; an event-driven refresh is already on the way
    }
    this.revision = result.revision;
    this.visibleIds = new Map(
      Object.entries(result.visible).map(([t, ids]) => [t, new Set(ids)]),
    );
    this.render();
  }

  async onCheckToggle(typeId: string, objectId: string): Promise<void> {
    const column = this.columnStates.find((c) => c.typeId === typeId);
    if (!column) {
      return;
    }
    if (column.checked.has(objectId)) {
      column.checked.delete(objectId);
    } else {
      column.checked.add(objectId);
    }
    if (this.checkedAnywhere()) {
      await this.runQuery();
    } else {
      this.visibleIds = null; // no checks: every displayed object shows
      this.render();
    }
  }

  async onExpandToggle(columnTypeId: string, objectId: string): Promise<void> {
    const column = this.columnStates.find((c) => c.typeId === columnTypeId);
    if (!column) {
      return;
    }
    if (column.expanded.has(objectId)) {
      column.expanded.delete(objectId);
      this.render();
      return;
    }
    column.expanded.add(objectId);
    await this.fetchChildren(objectId);
    this.render();
  }

  private async fetchChildren(objectId: string): Promise<ChildRowDto[]> {
    const cached = this.childrenCache.get(objectId);
    if (cached && cached.revision === this.revision) {
      return cached.rows;
    }
    this.childrenFetches += 1;
    const body = await this.api.children(objectId, [...this.enabledLinks].sort());
    this.childrenCache.set(objectId, { revision: body.revision, rows: body.children });
    for (const row of body.children) {
      this.objectsById.set(row.object.id, row.object);
    }
    return body.children;
  }

  // -- event stream

  async onChangeEvent(event: ChangeEventDto): Promise<void> {
    this.revision = event.revision;
    const payload = event.payload as { parentId?: string; childId?: string; objectId?: string };
    if (event.kind === "LinkAdded" || event.kind === "LinkRemoved") {
      if (payload.parentId) {
        this.childrenCache.delete(payload.parentId);
      } else {
        this.childrenCache.clear(); // LinkRemoved carries only the link id
      }
      await this.refreshAfterChange();
    } else if (event.kind === "ObjectAdded" || event.kind === "ObjectRemoved") {
      this.childrenCache.clear();
      await this.reloadObjects();
      await this.refreshAfterChange();
    } else if (event.kind === "AnnotationChanged" && payload.objectId) {
      const obj = this.objectsById.get(payload.objectId);
      if (obj) {
        const p = event.payload as Record<string, never>;
        obj.annotations.push({
          kind: p["kind"],
          text: p["text"],
          uri: p["uri"],
          createdAt: p["createdAt"],
        });
      }
      this.render();
    } else {
      this.render();
    }
  }

  private async refreshAfterChange(): Promise<void> {
    await this.refetchExpanded();
    if (this.checkedAnywhere()) {
      await this.runQuery();
    } else {
      this.render();
    }
  }

  /** Expanded nodes whose cache was invalidated reload their children. */
  private async refetchExpanded(): Promise<void> {
    for (const column of this.columnStates) {
      for (const objectId of column.expanded) {
        if (!this.childrenCache.has(objectId)) {
          await this.fetchChildren(objectId);
        }
      }
    }
  }

  // -- drag to link

  onDragStart(objectId: string, data: Pick<DataTransfer, "setData">): void {
    data.setData("text/tracegraph-object", objectId);
  }

  onDrop(targetId: string, data: Pick<DataTransfer, "getData">): void {
    const sourceId = data.getData("text/tracegraph-object");
    if (!sourceId || sourceId === targetId) {
      return;
    }
    this.pickerState = { sourceId, targetId };
    this.render();
  }

  async confirmLinkPicker(linkTypeId: string): Promise<void> {
    const picker = this.pickerState;
    this.pickerState = null;
    if (!picker) {
      return;
    }
    try {
      // target receives the drop and becomes the parent of the new link
      await this.api.addLink(linkTypeId, picker.targetId, picker.sourceId);
    } catch (error) {
      this.annotationError = error instanceof ApiError ? error.message : String(error);
    }
    this.render(); // the edge itself appears via the event stream
  }

  cancelLinkPicker(): void {
    this.pickerState = null;
    this.render();
  }

  // -- annotations

  async submitAnnotation(
    kind: "Note" | "DocumentLink",
    value: string,
  ): Promise<void> {
    if (!this.selectedObjectId) {
      return;
    }
    this.annotationError = "";
    if (kind === "DocumentLink" && !URI_PATTERN.test(value)) {
      this.annotationError = "not a valid URI";
      this.render();
      return;
    }
    const body = kind === "Note" ? { kind, text: value } : { kind, uri: value };
    try {
      await this.api.annotate(this.selectedObjectId, body);
    } catch (error) {
      this.annotationError = error instanceof ApiError ? error.message : String(error);
      this.render();
    }
  }

  selectObject(objectId: string): void {
    this.selectedObjectId = objectId;
    this.render();
  }

  // -- rendering

  private columnNodes(column: ColumnState): KnowledgeObjectDto[] {
    const all = this.objectsByType.get(column.typeId) ?? [];
    if (!this.visibleIds || !this.checkedAnywhere()) {
      return all;
    }
    const visible = this.visibleIds.get(column.typeId) ?? new Set<string>();
    // checked nodes are always rendered, even when a query hides them
    return all.filter((o) => visible.has(o.id) || column.checked.has(o.id));
  }

  render(): void {
    this.root.textContent = "";
    this.root.appendChild(this.renderLinkFilter());
    this.root.appendChild(this.renderColumnChooser());
    const board = el("div", "board");
    for (const column of displayedColumns(this.columnStates)) {
      board.appendChild(this.renderColumn(column));
    }
    this.root.appendChild(board);
    this.root.appendChild(this.renderAnnotationPanel());
    if (this.pickerState) {
      this.root.appendChild(this.renderLinkPicker());
    }
  }

  private renderLinkFilter(): HTMLElement {
    const panel = el("div", "link-filter");
    panel.id = "link-filter";
    for (const linkType of this.linkTypes) {
      const label = el("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = this.enabledLinks.has(linkType.id);
      box.dataset.linkTypeId = linkType.id;
      box.addEventListener("change", () => {
        if (box.checked) {
          this.enabledLinks.add(linkType.id);
        } else {
          this.enabledLinks.delete(linkType.id);
        }
        this.childrenCache.clear();
        void this.refreshAfterChange();
      });
      label.appendChild(box);
      label.appendChild(text(linkType.name));
      panel.appendChild(label);
    }
    return panel;
  }

  private renderColumnChooser(): HTMLElement {
    const chooser = el("div", "column-chooser");
    chooser.id = "column-chooser";
    for (const state of [...this.columnStates].sort((a, b) => a.position - b.position)) {
      const ktype = this.types.find((t) => t.id === state.typeId);
      const label = el("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = state.visible;
      box.dataset.typeId = state.typeId;
      box.addEventListener("change", () => {
        state.visible = box.checked;
        saveColumnStates(this.storage, this.columnStates);
        void (async () => {
          if (state.visible && !this.objectsByType.has(state.typeId)) {
            const body = await this.api.objects(state.typeId, false);
            this.objectsByType.set(state.typeId, body.objects);
            for (const obj of body.objects) {
              this.objectsById.set(obj.id, obj);
            }
          }
          await this.refreshAfterChange();
        })();
      });
      label.appendChild(box);
      label.appendChild(text(ktype?.name ?? state.typeId));
      chooser.appendChild(label);
    }
    return chooser;
  }

  private renderColumn(column: ColumnState): HTMLElement {
    const ktype = this.types.find((t) => t.id === column.typeId);
    const section = el("section", "column");
    section.dataset.typeId = column.typeId;

    const header = el("header");
    header.appendChild(el("span", "column-title", ktype?.name ?? column.typeId));
    const left = el("button", "move-left", "<");
    left.addEventListener("click", () => {
      moveColumn(this.columnStates, column.typeId, -1);
      saveColumnStates(this.storage, this.columnStates);
      this.render();
    });
    const right = el("button", "move-right", ">");
    right.addEventListener("click", () => {
      moveColumn(this.columnStates, column.typeId, +1);
      saveColumnStates(this.storage, this.columnStates);
      this.render();
    });
    header.appendChild(left);
    header.appendChild(right);
    section.appendChild(header);

    const list = el("ul", "nodes");
    for (const obj of this.columnNodes(column)) {
      list.appendChild(this.renderNode(column, obj, [obj.id]));
    }
    section.appendChild(list);
    return section;
  }

  private renderNode(
    column: ColumnState,
    obj: KnowledgeObjectDto,
    path: string[],
  ): HTMLElement {
    const item = el("li", "node");
    item.dataset.objectId = obj.id;
    const row = el("div", "node-row");
    row.draggable = true;
    row.addEventListener("dragstart", (ev) => {
      if (ev.dataTransfer) {
        this.onDragStart(obj.id, ev.dataTransfer);
      }
    });
    row.addEventListener("dragover", (ev) => ev.preventDefault());
    row.addEventListener("drop", (ev) => {
      ev.preventDefault();
      if (ev.dataTransfer) {
        this.onDrop(obj.id, ev.dataTransfer);
      }
    });

    const check = document.createElement("input");
    check.type = "checkbox";
    check.className = "check";
    check.checked = column.checked.has(obj.id);
    check.addEventListener("change", () => void this.onCheckToggle(column.typeId, obj.id));
    row.appendChild(check);

    const ball = el("span", "ball");
    ball.style.backgroundColor = indicatorColorFor(obj.access);
    ball.dataset.access = obj.access;
    row.appendChild(ball);

    const name = el("span", "name", obj.displayName);
    name.style.color = textColorFor(obj.typeId, obj.kindTag);
    name.title = obj.qualifiedName;
    name.addEventListener("click", () => this.selectObject(obj.id));
    row.appendChild(name);

    const expand = el("button", "expand", column.expanded.has(obj.id) ? "v" : ">");
    expand.addEventListener("click", () => void this.onExpandToggle(column.typeId, obj.id));
    row.appendChild(expand);
    item.appendChild(row);

    if (column.expanded.has(obj.id)) {
      const cached = this.childrenCache.get(obj.id);
      if (cached) {
        item.appendChild(this.renderChildren(column, cached.rows, path));
      }
    }
    return item;
  }

  private renderChildren(
    column: ColumnState,
    rows: ChildRowDto[],
    path: string[],
  ): HTMLElement {
    const groups = new Map<string, ChildRowDto[]>();
    for (const row of rows) {
      const group = groups.get(row.linkTypeName) ?? [];
      group.push(row);
      groups.set(row.linkTypeName, group);
    }
    const container = el("ul", "children");
    for (const [linkTypeName, group] of groups) {
      const groupItem = el("li", "child-group");
      groupItem.appendChild(el("span", "group-label", linkTypeName));
      const groupList = el("ul");
      for (const row of group) {
        if (path.includes(row.object.id)) {
          continue; // containment cycles stop here
        }
        groupList.appendChild(
          this.renderNode(column, row.object, [...path, row.object.id]),
        );
      }
      groupItem.appendChild(groupList);
      container.appendChild(groupItem);
    }
    return container;
  }

  private renderAnnotationPanel(): HTMLElement {
    const panel = el("div", "annotation-panel");
    panel.id = "annotation-panel";
    const obj = this.selectedObjectId
      ? this.objectsById.get(this.selectedObjectId)
      : undefined;
    if (!obj) {
      panel.appendChild(el("p", "hint", "Select an object to see its notes."));
      return panel;
    }
    panel.appendChild(el("h3", "selected-name", obj.qualifiedName));
    const list = el("ul", "annotations");
    for (const annotation of obj.annotations) {
      const li = el("li", "annotation");
      const body =
        annotation.kind === "Note" ? annotation.text ?? "" : annotation.uri ?? "";
      li.appendChild(el("span", "annotation-kind", annotation.kind));
      li.appendChild(text(" " + body));
      list.appendChild(li);
    }
    panel.appendChild(list);

    const form = el("div", "annotation-form");
    const kindSelect = document.createElement("select");
    for (const kind of ["Note", "DocumentLink"]) {
      const option = document.createElement("option");
      option.value = kind;
      option.textContent = kind;
      kindSelect.appendChild(option);
    }
    const input = document.createElement("input");
    input.type = "text";
    input.className = "annotation-input";
    const submit = el("button", "annotation-submit", "Add");
    submit.addEventListener("click", () => {
      void this.submitAnnotation(
        kindSelect.value as "Note" | "DocumentLink",
        input.value,
      );
    });
    form.appendChild(kindSelect);
    form.appendChild(input);
    form.appendChild(submit);
    if (this.annotationError) {
      form.appendChild(el("span", "error", this.annotationError));
    }
    panel.appendChild(form);
    return panel;
  }

  private renderLinkPicker(): HTMLElement {
    const overlay = el("div", "picker");
    overlay.id = "picker";
    const box = el("div", "picker-box");
    box.appendChild(el("p", "picker-title", "Link type for new relationship"));
    const select = document.createElement("select");
    select.className = "picker-select";
    for (const linkType of this.linkTypes) {
      const option = document.createElement("option");
      option.value = linkType.id;
      option.textContent = linkType.name;
      if (linkType.id === "user-defined") {
        option.selected = true; // manual links default to UserDefined
      }
      select.appendChild(option);
    }
    const confirm = el("button", "picker-confirm", "Create");
    confirm.addEventListener("click", () => void this.confirmLinkPicker(select.value));
    const cancel = el("button", "picker-cancel", "Cancel");
    cancel.addEventListener("click", () => this.cancelLinkPicker());
    box.appendChild(select);
    box.appendChild(confirm);
    box.appendChild(cancel);
    overlay.appendChild(box);
    return overlay;
  }
}

function el(tag: string, className?: string, textContent?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (textContent !== undefined) {
    node.textContent = textContent;
  }
  return node;
}

function text(value: string): Text {
  return document.createTextNode(value);
}
