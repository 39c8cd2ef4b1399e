/** Console state: the mirrored project document plus revision, selection,
 * locale and the last server verdicts.
 *
 * One mutation is in flight at a time. Every mutation sends the held
 * revision; on a 409 the document is re-fetched before a single retry, and
 * after every success the document is re-fetched so the UI always mirrors
 * the server's ordering. Validation verdicts are surfaced, never swallowed.
 */

import { ApiError, RevisionConflict, StudioClient } from "./api.js";
import { findPage, wouldFormCycle } from "./tree.js";
import type {
  ItemDoc,
  PreviewResponse,
  ProjectDoc,
  ReleaseDoc,
  ValidationIssue,
} from "./types.js";

export type Locale = "en" | "fa";
export type Listener = () => void;

export class ConsoleStore {
  project: ProjectDoc | null = null;
  revision = 0;
  selection: number | null = null;
  locale: Locale = "en";
  dirty = false;
  lastIssues: ValidationIssue[] = [];
  lastError: string | null = null;
  lastPreview: PreviewResponse | null = null;

  private listeners = new Set<Listener>();
  private queue: Promise<unknown> = Promise.resolve();

  constructor(readonly client: StudioClient) {}

  get direction(): "ltr" | "rtl" {
    return this.locale === "fa" ? "rtl" : "ltr";
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  setLocale(locale: Locale): void {
    this.locale = locale;
    this.notify();
  }

  select(pageId: number | null): void {
    this.selection = pageId;
    this.notify();
  }

  markDirty(): void {
    this.dirty = true;
    this.notify();
  }

  async load(): Promise<void> {
    const doc = await this.client.getProject();
    this.project = doc.project;
    this.revision = doc.revision;
    if (this.selection !== null && !findPage(doc.project.pages, this.selection)) {
      this.selection = null;
    }
    this.notify();
  }

  /** Serialize mutations; re-fetch and retry exactly once on a conflict. */
  private mutate<T extends { revision: number }>(
    send: (revision: number) => Promise<T>,
  ): Promise<T | null> {
    const task = this.queue.then(async (): Promise<T | null> => {
      this.lastIssues = [];
      this.lastError = null;
      try {
        let result: T;
        try {
          result = await send(this.revision);
        } catch (error) {
          if (!(error instanceof RevisionConflict)) throw error;
          await this.load();
          result = await send(this.revision);
        }
        this.revision = result.revision;
        await this.load();
        this.dirty = false;
        return result;
      } catch (error) {
        if (error instanceof ApiError) {
          this.lastIssues = error.issues;
          this.lastError = `${error.code}${error.detail ? `: ${error.detail}` : ""}`;
          this.notify();
          return null;
        }
        throw error;
      }
    });
    this.queue = task.catch(() => undefined);
    return task;
  }

  async addPage(parentId: number, title: string, position: number): Promise<number | null> {
    const result = await this.mutate((rev) =>
      this.client.addPage(parentId, title, position, rev));
    return result ? result.id : null;
  }

  renamePage(pageId: number, title: string): Promise<unknown> {
    return this.mutate((rev) => this.client.renamePage(pageId, title, rev));
  }

  /** Client-side cycle block is advisory; `force` sends anyway so the server
   * verdict stays the authority. */
  movePage(pageId: number, newParentId: number, position: number,
           opts: { force?: boolean } = {}): Promise<unknown> {
    if (!opts.force && this.project &&
        wouldFormCycle(this.project.pages, pageId, newParentId)) {
      this.lastError = "CycleWouldForm: a page cannot move under its own subtree";
      this.notify();
      return Promise.resolve(null);
    }
    return this.mutate((rev) =>
      this.client.movePage(pageId, newParentId, position, rev));
  }

  reorderContent(pageId: number, from: number, to: number): Promise<unknown> {
    return this.mutate((rev) => this.client.reorderContent(pageId, from, to, rev));
  }

  setContents(pageId: number, contents: ItemDoc[]): Promise<unknown> {
    return this.mutate((rev) => this.client.setContents(pageId, contents, rev));
  }

  deletePage(pageId: number): Promise<unknown> {
    return this.mutate((rev) => this.client.deletePage(pageId, rev)).then((r) => {
      if (r && this.selection === pageId) this.select(null);
      return r;
    });
  }

  setMeta(fields: Record<string, unknown>): Promise<unknown> {
    return this.mutate((rev) => this.client.patchProject(fields, rev));
  }

  setTheme(theme: Record<string, unknown>): Promise<unknown> {
    return this.mutate((rev) => this.client.patchProject({ theme }, rev));
  }

  async preview(): Promise<PreviewResponse | null> {
    this.lastIssues = [];
    this.lastError = null;
    try {
      this.lastPreview = await this.client.preview();
      this.notify();
      return this.lastPreview;
    } catch (error) {
      if (error instanceof ApiError) {
        this.lastIssues = error.issues;
        this.lastError = `${error.code}${error.detail ? `: ${error.detail}` : ""}`;
        this.notify();
        return null;
      }
      throw error;
    }
  }

  async publish(url: string): Promise<ReleaseDoc | null> {
    this.lastError = null;
    try {
      const result = await this.client.publish({ url });
      this.notify();
      return result.release;
    } catch (error) {
      if (error instanceof ApiError) {
        this.lastError = `${error.code}${error.detail ? `: ${error.detail}` : ""}`;
        this.notify();
        return null;
      }
      throw error;
    }
  }
}
