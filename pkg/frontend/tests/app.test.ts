/** Explorer behavior against the in-memory fake service (3-node fixture). */

import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { ExplorerApp } from "../src/app.js";
import { FakeService, makeObject } from "./fake-service.js";

const M = "method:N.C.M";
const V = "variable:N.C.V";
const W = "variable:N.C.W";
const C = "class:N.C";

function fixtureService(): FakeService {
  const service = new FakeService();
  service.addObject(makeObject("class", "N.C", "public"));
  service.addObject(makeObject("method", "N.C.M", "private"));
  service.addObject(makeObject("variable", "N.C.V", "private", "field"));
  service.addObject(makeObject("variable", "N.C.W", "private", "field"));
  service.addLink("contains", C, M);
  service.addLink("uses", M, V);
  return service;
}

async function startApp(service: FakeService) {
  document.body.innerHTML = '<div id="app"></div>';
  localStorage.clear();
  const root = document.getElementById("app")!;
  const api = new ApiClient("", service.fetch);
  const app = new ExplorerApp(root, api, localStorage, "", service.fetch);
  await app.start();
  return { app, root };
}

function namesIn(root: HTMLElement, typeId: string): string[] {
  const column = root.querySelector(`.column[data-type-id="${typeId}"]`);
  return [...(column?.querySelectorAll(".node-row > .name") ?? [])].map(
    (n) => n.textContent ?? "",
  );
}

function settle(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 25));
}

describe("explorer app", () => {
  let service: FakeService;

  beforeEach(() => {
    service = fixtureService();
  });

  it("renders the default columns and offers all eight", async () => {
    const { root } = await startApp(service);
    const shown = [...root.querySelectorAll(".column")].map(
      (c) => (c as HTMLElement).dataset.typeId,
    );
    expect(shown).toEqual(["namespace", "class", "method", "variable"]);
    expect(root.querySelectorAll("#column-chooser input")).toHaveLength(8);
    expect(namesIn(root, "variable")).toEqual(["V", "W"]);
  });

  it("colors names and access balls per the scheme", async () => {
    const { root } = await startApp(service);
    const methodName = root.querySelector(
      `.node[data-object-id="${M}"] .name`,
    ) as HTMLElement;
    expect(methodName.style.color).toBe("red");
    const ball = root.querySelector(
      `.node[data-object-id="${M}"] .ball`,
    ) as HTMLElement;
    expect(ball.dataset.access).toBe("private");
    expect(ball.style.backgroundColor).toBe("red");
  });

  it("issues exactly one query per toggle and filters columns", async () => {
    const { app, root } = await startApp(service);
    await app.onCheckToggle("method", M);
    expect(app.queryCount).toBe(1);
    expect(namesIn(root, "variable")).toEqual(["V"]); // W hidden
    expect(namesIn(root, "method")).toEqual(["M"]);
    const checkbox = root.querySelector(
      `.node[data-object-id="${M}"] input.check`,
    ) as HTMLInputElement;
    expect(checkbox.checked).toBe(true);
  });

  it("unchecking restores the full lists without a second query", async () => {
    const { app, root } = await startApp(service);
    await app.onCheckToggle("method", M);
    await app.onCheckToggle("method", M);
    expect(app.queryCount).toBe(1); // the uncheck clears all checks locally
    expect(namesIn(root, "variable")).toEqual(["V", "W"]);
  });

  it("checking in two columns restricts pass-through, checked stay visible", async () => {
    const { app, root } = await startApp(service);
    await app.onCheckToggle("variable", W);
    await app.onCheckToggle("method", M);
    // the checked Variable column restricts its universe to W, so V drops
    // out even though M uses it; both checked nodes remain rendered
    expect(namesIn(root, "variable")).toEqual(["W"]);
    expect(namesIn(root, "method")).toEqual(["M"]);
    expect(app.queryCount).toBe(2);
  });

  it("expands children once per revision and caches re-expansion", async () => {
    const { app, root } = await startApp(service);
    await app.onExpandToggle("class", C);
    expect(app.childrenFetches).toBe(1);
    const group = root.querySelector(
      `.node[data-object-id="${C}"] .child-group .group-label`,
    );
    expect(group?.textContent).toBe("Contains");
    await app.onExpandToggle("class", C); // collapse
    await app.onExpandToggle("class", C); // re-expand at the same revision
    expect(app.childrenFetches).toBe(1);
  });

  it("drag to link opens the picker with UserDefined preselected", async () => {
    const { app, root } = await startApp(service);
    const payload = new Map<string, string>();
    app.onDragStart(V, { setData: (k: string, v: string) => void payload.set(k, v) });
    app.onDrop(M, { getData: (k: string) => payload.get(k) ?? "" });
    const select = document.querySelector("#picker select") as HTMLSelectElement;
    expect(select).toBeTruthy();
    expect(select.value).toBe("user-defined");
    expect(service.requests.filter((r) => r.path === "/api/v1/links")).toHaveLength(0);
    void root;
  });

  it("confirming the picker posts the link; the edge lands via events", async () => {
    const { app, root } = await startApp(service);
    await app.onExpandToggle("method", M);
    const payload = new Map<string, string>();
    app.onDragStart(W, { setData: (k, v) => void payload.set(k, v) });
    app.onDrop(M, { getData: (k) => payload.get(k) ?? "" });
    await app.confirmLinkPicker("uses");
    const posts = service.requests.filter(
      (r) => r.method === "POST" && r.path === "/api/v1/links",
    );
    expect(posts).toHaveLength(1);
    expect(posts[0].body).toEqual({ linkTypeId: "uses", parentId: M, childId: W });
    // no optimistic update: the expanded method still shows the old children
    expect(
      root.querySelectorAll(`.node[data-object-id="${M}"] .child-group li.node`),
    ).toHaveLength(1);
    service.pushEvent({
      revision: service.revision,
      kind: "LinkAdded",
      payload: { linkId: `uses|${M}|${W}`, linkTypeId: "uses", parentId: M, childId: W },
    });
    await settle();
    const children = root.querySelectorAll(
      `.node[data-object-id="${M}"] .child-group li.node`,
    );
    expect(children.length).toBe(2);
  });

  it("cancelling the picker sends nothing", async () => {
    const { app } = await startApp(service);
    const payload = new Map<string, string>();
    app.onDragStart(V, { setData: (k, v) => void payload.set(k, v) });
    app.onDrop(M, { getData: (k) => payload.get(k) ?? "" });
    app.cancelLinkPicker();
    expect(service.requests.filter((r) => r.path === "/api/v1/links")).toHaveLength(0);
    expect(document.querySelector("#picker")).toBeNull();
  });

  it("dropping an object onto itself does nothing", async () => {
    const { app } = await startApp(service);
    const payload = new Map<string, string>();
    app.onDragStart(M, { setData: (k, v) => void payload.set(k, v) });
    app.onDrop(M, { getData: (k) => payload.get(k) ?? "" });
    expect(document.querySelector("#picker")).toBeNull();
  });

  it("annotation panel lists notes after the change event arrives", async () => {
    const { app, root } = await startApp(service);
    app.selectObject(M);
    await app.submitAnnotation("Note", "fragile redraw path");
    const posts = service.requests.filter((r) => r.path.endsWith("/annotations"));
    expect(posts).toHaveLength(1);
    service.pushEvent({
      revision: service.revision,
      kind: "AnnotationChanged",
      payload: {
        objectId: M,
        kind: "Note",
        text: "fragile redraw path",
        uri: null,
        createdAt: "2006-01-01T00:00:00Z",
      },
    });
    await settle();
    const notes = [...root.querySelectorAll("#annotation-panel .annotation")];
    expect(notes.some((n) => n.textContent?.includes("fragile redraw path"))).toBe(true);
  });

  it("rejects invalid URIs inline without a request", async () => {
    const { app, root } = await startApp(service);
    app.selectObject(M);
    await app.submitAnnotation("DocumentLink", "notauri^^");
    expect(service.requests.filter((r) => r.path.endsWith("/annotations"))).toHaveLength(0);
    expect(root.querySelector("#annotation-panel .error")?.textContent).toContain(
      "not a valid URI",
    );
  });

  it("switching selection swaps the panel contents", async () => {
    const { app, root } = await startApp(service);
    app.selectObject(M);
    expect(root.querySelector(".selected-name")?.textContent).toBe("N.C.M");
    app.selectObject(V);
    expect(root.querySelector(".selected-name")?.textContent).toBe("N.C.V");
  });

  it("re-rendering from the same state yields identical markup", async () => {
    const { app, root } = await startApp(service);
    await app.onCheckToggle("method", M);
    const first = root.innerHTML;
    app.render();
    expect(root.innerHTML).toBe(first);
  });
});
