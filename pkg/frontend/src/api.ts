/** Thin typed client for the /api/v1 endpoints. */

import type {
  ChildRowDto,
  KnowledgeObjectDto,
  KnowledgeTypeDto,
  LinkDto,
  LinkTypeDto,
  VisibilityDto,
} from "./types.js";

export interface SelectionQueryBody {
  displayedTypeIds: string[];
  checked: Record<string, string[]>;
  enabledLinkTypeIds: string[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public errorName: string,
    detail: string,
  ) {
    super(`${errorName}: ${detail}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let name = `HTTP ${response.status}`;
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { error?: string; detail?: string };
      name = body.error ?? name;
      detail = body.detail ?? detail;
    } catch {
      // keep the HTTP-level description
    }
    throw new ApiError(response.status, name, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private get(path: string) {
    return this.fetchImpl(`${this.baseUrl}/api/v1${path}`);
  }

  private send(method: string, path: string, body: unknown) {
    return this.fetchImpl(`${this.baseUrl}/api/v1${path}`, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async types(): Promise<{ revision: number; types: KnowledgeTypeDto[] }> {
    return parseOrThrow(await this.get("/types"));
  }

  async linkTypes(): Promise<{ revision: number; linkTypes: LinkTypeDto[] }> {
    return parseOrThrow(await this.get("/link-types"));
  }

  async objects(
    typeId: string,
    roots: boolean,
  ): Promise<{ revision: number; objects: KnowledgeObjectDto[] }> {
    const flag = roots ? "true" : "false";
    return parseOrThrow(
      await this.get(`/objects?type=${encodeURIComponent(typeId)}&roots=${flag}`),
    );
  }

  async children(
    objectId: string,
    enabledLinkTypeIds: string[],
  ): Promise<{ revision: number; children: ChildRowDto[] }> {
    const links = encodeURIComponent(enabledLinkTypeIds.join(","));
    return parseOrThrow(
      await this.get(`/objects/${encodeURIComponent(objectId)}/children?links=${links}`),
    );
  }

  async query(body: SelectionQueryBody): Promise<VisibilityDto> {
    return parseOrThrow(await this.send("POST", "/query", body));
  }

  async addLink(
    linkTypeId: string,
    parentId: string,
    childId: string,
  ): Promise<{ revision: number; link: LinkDto }> {
    return parseOrThrow(
      await this.send("POST", "/links", { linkTypeId, parentId, childId }),
    );
  }

  async annotate(
    objectId: string,
    annotation: { kind: "Note" | "DocumentLink"; text?: string; uri?: string },
  ): Promise<{ revision: number; object: KnowledgeObjectDto }> {
    return parseOrThrow(
      await this.send(
        "POST",
        `/objects/${encodeURIComponent(objectId)}/annotations`,
        annotation,
      ),
    );
  }
}
