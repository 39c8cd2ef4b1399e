/** Thin typed client for the studio API. Every mutation carries the caller's
 * revision as If-Match; the store layer owns the refetch-on-conflict policy.
 */

import type {
  FleetNodeDoc,
  ItemDoc,
  PreviewResponse,
  ProjectResponse,
  ReleaseDoc,
  SimStatsDoc,
  ValidationIssue,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
    readonly issues: ValidationIssue[] = [],
  ) {
    super(`${code}: ${detail}`);
  }
}

export class RevisionConflict extends ApiError {
  constructor(readonly serverRevision: number) {
    super(409, "RevisionMismatch", `server is at revision ${serverRevision}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorFrom(response: Response): Promise<ApiError> {
  let doc: Record<string, unknown> = {};
  try {
    doc = (await response.json()) as Record<string, unknown>;
  } catch {
    /* non-JSON error body */
  }
  if (response.status === 409) {
    return new RevisionConflict((doc.revision as number) ?? 0);
  }
  if (Array.isArray(doc.errors)) {
    const issues = doc.errors as ValidationIssue[];
    const first = issues[0];
    return new ApiError(response.status, first?.code ?? "Invalid",
      first?.detail ?? "", issues);
  }
  return new ApiError(response.status, (doc.error as string) ?? `HTTP ${response.status}`,
    (doc.detail as string) ?? "");
}

export class StudioClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    revision?: number,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers["Content-Type"] = "application/json";
    if (revision !== undefined) headers["If-Match"] = String(revision);
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as T;
  }

  getProject(): Promise<ProjectResponse> {
    return this.request("GET", "/api/project");
  }

  patchProject(fields: Record<string, unknown>, revision: number): Promise<{ revision: number }> {
    return this.request("PATCH", "/api/project", fields, revision);
  }

  addPage(parentId: number, title: string, position: number, revision: number):
      Promise<{ revision: number; id: number }> {
    return this.request("POST", "/api/pages",
      { parent_id: parentId, title, position }, revision);
  }

  renamePage(pageId: number, title: string, revision: number): Promise<{ revision: number }> {
    return this.request("PATCH", `/api/pages/${pageId}`, { title }, revision);
  }

  movePage(pageId: number, newParentId: number, position: number, revision: number):
      Promise<{ revision: number }> {
    return this.request("POST", `/api/pages/${pageId}/move`,
      { new_parent_id: newParentId, position }, revision);
  }

  reorderContent(pageId: number, from: number, to: number, revision: number):
      Promise<{ revision: number }> {
    return this.request("POST", `/api/pages/${pageId}/reorder`, { from, to }, revision);
  }

  setContents(pageId: number, contents: ItemDoc[], revision: number): Promise<{ revision: number }> {
    return this.request("PUT", `/api/pages/${pageId}/contents`, { contents }, revision);
  }

  deletePage(pageId: number, revision: number): Promise<{ revision: number }> {
    return this.request("DELETE", `/api/pages/${pageId}`, undefined, revision);
  }

  async uploadAsset(filename: string, data: Blob | ArrayBuffer | Uint8Array):
      Promise<{ asset: { path: string; mime: string } }> {
    const response = await this.fetchFn(this.baseUrl + "/api/assets", {
      method: "POST",
      headers: { "X-Filename": filename },
      body: data as BodyInit,
    });
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as { asset: { path: string; mime: string } };
  }

  preview(): Promise<PreviewResponse> {
    return this.request("POST", "/api/preview");
  }

  publish(body: { url: string; app_id?: string; version?: number; category?: string }):
      Promise<{ release: ReleaseDoc }> {
    return this.request("POST", "/api/publish", body);
  }

  fleet(): Promise<{ nodes: FleetNodeDoc[] }> {
    return this.request("GET", "/api/fleet");
  }

  async simLatest(): Promise<SimStatsDoc | null> {
    const response = await this.fetchFn(this.baseUrl + "/api/sim/latest", { method: "GET" });
    if (response.status === 404) return null;
    if (!response.ok) throw await errorFrom(response);
    return (await response.json()) as SimStatsDoc;
  }
}
