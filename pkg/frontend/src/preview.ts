/** Turns the server's render tree into flat draw operations for a
 * phone-shaped canvas. All shaping decisions (glyph boxes, directionality)
 * were made on the server; this only positions boxes in the viewport.
 */

import type { RenderItemDoc, RenderTreeDoc, ShapedLineDoc } from "./types.js";

export const PHONE_WIDTH = 240;
export const PHONE_HEIGHT = 320;
const MARGIN = 8;
const MEDIA_BLOCK_H = 36;

export type DrawOp =
  | { kind: "rect"; x: number; y: number; w: number; h: number; color: string }
  | { kind: "box"; x: number; y: number; w: number; h: number; color: string }
  | { kind: "text"; x: number; y: number; text: string; color: string; align: "left" | "right" };

export interface PageLayout {
  ops: DrawOp[];
  height: number;
  /** ids of child pages in menu order, for preview navigation clicks */
  childIds: number[];
  /** y ranges of the child menu rows, parallel to childIds */
  childRows: Array<{ y: number; h: number }>;
}

function lineOps(line: ShapedLineDoc, baseY: number, lineHeight: number,
                 direction: "ltr" | "rtl", color: string): DrawOp[] {
  const ops: DrawOp[] = [];
  const shift = direction === "rtl"
    ? PHONE_WIDTH - MARGIN - line.total_advance
    : MARGIN;
  for (const glyph of line.glyphs) {
    ops.push({
      kind: "box",
      x: shift + glyph.x + glyph.bearing,
      y: baseY + (lineHeight - glyph.height),
      w: glyph.width,
      h: glyph.height,
      color,
    });
  }
  return ops;
}

function itemLabel(item: RenderItemDoc): string {
  switch (item.type) {
    case "image":
    case "audio":
    case "video":
    case "animation":
      return `[${item.type}] ${item.caption ?? ""}`.trim();
    case "map_point":
      return `[map] ${item.label ?? ""} ${item.lat},${item.lon}`.trim();
    case "phone":
      return `[call] ${item.digits ?? ""}`;
    case "email":
      return `[mail] ${item.address ?? ""}`;
    case "web_link":
      return `[link] ${item.label || item.url || ""}`;
    default:
      return `[${item.type}]`;
  }
}

export function layoutPage(tree: RenderTreeDoc, pageId: number): PageLayout {
  const page = tree.pages.find((p) => p.id === pageId);
  if (!page) {
    return { ops: [], height: PHONE_HEIGHT, childIds: [], childRows: [] };
  }
  const theme = tree.theme;
  const lineHeight = tree.line_height ?? 14;
  const ops: DrawOp[] = [
    { kind: "rect", x: 0, y: 0, w: PHONE_WIDTH, h: PHONE_HEIGHT, color: theme.bg_color },
    { kind: "rect", x: 0, y: 0, w: PHONE_WIDTH, h: lineHeight + 2 * 4, color: theme.highlight_color },
  ];
  let y = 4;
  if (page.title_line) {
    ops.push(...lineOps(page.title_line, y, lineHeight, page.direction, theme.bg_color));
  } else {
    ops.push({
      kind: "text",
      x: page.direction === "rtl" ? PHONE_WIDTH - MARGIN : MARGIN,
      y: y + lineHeight,
      text: page.title,
      color: theme.bg_color,
      align: page.direction === "rtl" ? "right" : "left",
    });
  }
  y += lineHeight + 8 + 4;

  for (const item of page.items) {
    if (item.type === "text") {
      if (item.lines && item.lines.length) {
        for (const line of item.lines) {
          ops.push(...lineOps(line, y, lineHeight, page.direction, theme.fg_color));
          y += lineHeight + 2;
        }
      } else {
        for (const raw of (item.body ?? "").split("\n")) {
          ops.push({ kind: "text", x: MARGIN, y: y + lineHeight, text: raw,
                     color: theme.fg_color, align: "left" });
          y += lineHeight + 2;
        }
      }
    } else {
      ops.push({ kind: "rect", x: MARGIN, y, w: PHONE_WIDTH - 2 * MARGIN,
                 h: MEDIA_BLOCK_H, color: theme.highlight_color });
      ops.push({ kind: "text", x: MARGIN + 4, y: y + 22, text: itemLabel(item),
                 color: theme.bg_color, align: "left" });
      y += MEDIA_BLOCK_H + 4;
    }
  }

  const children = tree.pages.filter((p) => p.parent_id === pageId);
  const childIds: number[] = [];
  const childRows: Array<{ y: number; h: number }> = [];
  if (children.length) {
    y += 6;
    for (const child of children) {
      ops.push({ kind: "rect", x: MARGIN, y, w: PHONE_WIDTH - 2 * MARGIN,
                 h: lineHeight + 6, color: theme.fg_color });
      ops.push({
        kind: "text",
        x: child.direction === "rtl" ? PHONE_WIDTH - MARGIN - 4 : MARGIN + 4,
        y: y + lineHeight + 1,
        text: "▸ " + child.title,
        color: theme.bg_color,
        align: child.direction === "rtl" ? "right" : "left",
      });
      childIds.push(child.id);
      childRows.push({ y, h: lineHeight + 6 });
      y += lineHeight + 10;
    }
  }
  return { ops, height: Math.max(y, PHONE_HEIGHT), childIds, childRows };
}

export function rootMenuLayout(tree: RenderTreeDoc): PageLayout {
  const theme = tree.theme;
  const lineHeight = tree.line_height ?? 14;
  const ops: DrawOp[] = [
    { kind: "rect", x: 0, y: 0, w: PHONE_WIDTH, h: PHONE_HEIGHT, color: theme.bg_color },
  ];
  let y = 10;
  const roots = tree.pages.filter((p) => p.parent_id === null);
  const childIds: number[] = [];
  const childRows: Array<{ y: number; h: number }> = [];
  for (const page of roots) {
    ops.push({ kind: "rect", x: MARGIN, y, w: PHONE_WIDTH - 2 * MARGIN,
               h: lineHeight + 6, color: theme.highlight_color });
    if (page.title_line) {
      ops.push(...lineOps(page.title_line, y + 3, lineHeight, page.direction, theme.bg_color));
    } else {
      ops.push({
        kind: "text",
        x: page.direction === "rtl" ? PHONE_WIDTH - MARGIN - 4 : MARGIN + 4,
        y: y + lineHeight + 1,
        text: page.title,
        color: theme.bg_color,
        align: page.direction === "rtl" ? "right" : "left",
      });
    }
    childIds.push(page.id);
    childRows.push({ y, h: lineHeight + 6 });
    y += lineHeight + 10;
  }
  return { ops, height: Math.max(y, PHONE_HEIGHT), childIds, childRows };
}
