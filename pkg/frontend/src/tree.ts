/** Pure helpers over the nested page document. Structural rules live on the
 * server; these exist only so the UI can lay out rows and block obviously
 * doomed drags before a round trip.
 */

import type { PageDoc } from "./types.js";

export interface TreeRow {
  page: PageDoc;
  depth: number;
  parentId: number; // 0 for roots, mirroring the API's root sentinel
  index: number;    // position among siblings
}

export function flattenTree(pages: PageDoc[]): TreeRow[] {
  const rows: TreeRow[] = [];
  const walk = (list: PageDoc[], depth: number, parentId: number) => {
    list.forEach((page, index) => {
      rows.push({ page, depth, parentId, index });
      walk(page.children, depth + 1, page.id);
    });
  };
  walk(pages, 0, 0);
  return rows;
}

export function findPage(pages: PageDoc[], id: number): PageDoc | null {
  for (const page of pages) {
    if (page.id === id) return page;
    const hit = findPage(page.children, id);
    if (hit) return hit;
  }
  return null;
}

/** True when `candidateId` is `pageId` itself or sits anywhere inside its
 * subtree; moving a page under such a target would form a cycle. */
export function wouldFormCycle(pages: PageDoc[], pageId: number, candidateId: number): boolean {
  if (candidateId === 0) return false;
  const root = findPage(pages, pageId);
  if (!root) return false;
  const stack = [root];
  while (stack.length) {
    const page = stack.pop()!;
    if (page.id === candidateId) return true;
    stack.push(...page.children);
  }
  return false;
}

export function pathToPage(pages: PageDoc[], id: number): number[] {
  const walk = (list: PageDoc[], trail: number[]): number[] | null => {
    for (const page of list) {
      const here = [...trail, page.id];
      if (page.id === id) return here;
      const deeper = walk(page.children, here);
      if (deeper) return deeper;
    }
    return null;
  };
  return walk(pages, []) ?? [];
}

export function pageCount(pages: PageDoc[]): number {
  return flattenTree(pages).length;
}
