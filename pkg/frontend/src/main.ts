/** The operator console: a single-page app over the studio API. The store
 * owns consistency (revision handling, server-mirroring); this file only
 * renders state and translates gestures into store calls, one API call per
 * gesture.
 */

import { StudioClient } from "./api.js";
import { startPolling, type FleetView } from "./fleet.js";
import { dirFor, t, type StringKey } from "./i18n.js";
import { layoutPage, rootMenuLayout, PHONE_HEIGHT, PHONE_WIDTH, type PageLayout } from "./preview.js";
import { ConsoleStore } from "./store.js";
import { findPage, flattenTree } from "./tree.js";
import type { ItemDoc, PageDoc } from "./types.js";

const store = new ConsoleStore(new StudioClient(""));

let previewPage: number | null = null; // null = root menu
let previewLayout: PageLayout | null = null;
let fleetView: FleetView | null = null;
let draggedPage: number | null = null;

function tr(key: StringKey): string {
  return t(store.locale, key);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Array<Node | string>
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === "class") node.className = value;
    else node.setAttribute(key, value);
  }
  node.append(...children);
  return node;
}

function button(label: string, onClick: () => void, cls = "btn"): HTMLButtonElement {
  const b = el("button", { class: cls }, label);
  b.addEventListener("click", onClick);
  return b;
}

// -- tree panel --------------------------------------------------------------

function siblingListOf(pageId: number): { parentId: number; index: number; count: number } {
  const rows = flattenTree(store.project?.pages ?? []);
  const row = rows.find((r) => r.page.id === pageId);
  if (!row) return { parentId: 0, index: 0, count: 0 };
  const count = rows.filter((r) => r.parentId === row.parentId).length;
  return { parentId: row.parentId, index: row.index, count };
}

function treePanel(): HTMLElement {
  const panel = el("section", { class: "panel tree-panel" },
    el("h2", {}, tr("pages")));
  const list = el("div", { class: "tree" });
  for (const row of flattenTree(store.project?.pages ?? [])) {
    const label = el("span", { class: "tree-title" }, row.page.title);
    const node = el("div", {
      class: "tree-row" + (store.selection === row.page.id ? " selected" : ""),
      draggable: "true",
      "data-page": String(row.page.id),
    }, label);
    node.style.paddingInlineStart = `${8 + row.depth * 16}px`;
    node.addEventListener("click", () => store.select(row.page.id));
    node.addEventListener("dragstart", (e) => {
      draggedPage = row.page.id;
      e.dataTransfer?.setData("text/plain", String(row.page.id));
    });
    node.addEventListener("dragover", (e) => e.preventDefault());
    node.addEventListener("drop", (e) => {
      e.preventDefault();
      if (draggedPage !== null && draggedPage !== row.page.id) {
        void store.movePage(draggedPage, row.page.id, 0);
      }
      draggedPage = null;
    });
    list.append(node);
  }
  const rootDrop = el("div", { class: "tree-row root-drop" }, `⌂ ${tr("rootMenu")}`);
  rootDrop.addEventListener("dragover", (e) => e.preventDefault());
  rootDrop.addEventListener("drop", (e) => {
    e.preventDefault();
    if (draggedPage !== null) {
      void store.movePage(draggedPage, 0, store.project?.pages.length ?? 0);
    }
    draggedPage = null;
  });
  panel.append(rootDrop, list);

  const actions = el("div", { class: "actions" });
  actions.append(button(tr("addPage"), () => {
    const title = prompt(tr("addPage"), "New page");
    if (title) void store.addPage(0, title, store.project?.pages.length ?? 0);
  }));
  if (store.selection !== null) {
    const selected = store.selection;
    actions.append(
      button(tr("addChild"), () => {
        const title = prompt(tr("addChild"), "Subpage");
        const parent = store.project ? findPage(store.project.pages, selected) : null;
        if (title && parent) void store.addPage(selected, title, parent.children.length);
      }),
      button(tr("rename"), () => {
        const current = store.project ? findPage(store.project.pages, selected) : null;
        const title = prompt(tr("rename"), current?.title ?? "");
        if (title) void store.renamePage(selected, title);
      }),
      button(tr("moveUp"), () => {
        const pos = siblingListOf(selected);
        if (pos.index > 0) void store.movePage(selected, pos.parentId, pos.index - 1);
      }),
      button(tr("moveDown"), () => {
        const pos = siblingListOf(selected);
        if (pos.index < pos.count - 1) void store.movePage(selected, pos.parentId, pos.index + 1);
      }),
      button(tr("delete"), () => void store.deletePage(selected), "btn danger"),
    );
  }
  panel.append(actions);
  return panel;
}

// -- contents panel -----------------------------------------------------------

function itemSummary(item: ItemDoc): string {
  switch (item.type) {
    case "text": return `text: ${item.body.slice(0, 48)}`;
    case "image": case "audio": case "video": case "animation":
      return `${item.type}: ${item.path}`;
    case "map_point": return `map: ${item.label} (${item.lat}, ${item.lon})`;
    case "phone": return `phone: ${item.digits}`;
    case "email": return `email: ${item.address}`;
    case "web_link": return `link: ${item.label || item.url}`;
  }
}

function contentsPanel(page: PageDoc): HTMLElement {
  const panel = el("section", { class: "panel contents-panel" },
    el("h2", {}, `${tr("contents")} — ${page.title}`));
  page.contents.forEach((item, index) => {
    const row = el("div", { class: "item-row" },
      el("span", { class: "item-label" }, itemSummary(item)));
    const controls = el("span", { class: "item-controls" });
    controls.append(
      button("↑", () => {
        if (index > 0) void store.reorderContent(page.id, index, index - 1);
      }, "btn mini"),
      button("↓", () => {
        if (index < page.contents.length - 1) {
          void store.reorderContent(page.id, index, index + 1);
        }
      }, "btn mini"),
      button("×", () => {
        const next = page.contents.filter((_, i) => i !== index);
        void store.setContents(page.id, next);
      }, "btn mini danger"),
    );
    row.append(controls);
    panel.append(row);
    if (item.type === "text") {
      const area = el("textarea", { class: "body-edit" });
      area.value = item.body;
      area.addEventListener("input", () => store.markDirty());
      const apply = button(tr("applyBody"), () => {
        const next = page.contents.map((existing, i) =>
          i === index ? ({ type: "text", body: area.value } as ItemDoc) : existing);
        void store.setContents(page.id, next);
      }, "btn mini");
      panel.append(area, apply);
    }
  });

  const adders = el("div", { class: "actions" });
  const append = (item: ItemDoc) =>
    void store.setContents(page.id, [...page.contents, item]);
  adders.append(
    button(tr("addText"), () => append({ type: "text", body: "..." })),
    button(tr("addLink"), () => {
      const url = prompt("https://", "https://example.org");
      if (url) append({ type: "web_link", url, label: url });
    }),
    button(tr("addPhone"), () => {
      const digits = prompt("+", "+98210000");
      if (digits) append({ type: "phone", digits });
    }),
  );
  const upload = el("input", { type: "file", class: "asset-upload" }) as HTMLInputElement;
  upload.addEventListener("change", async () => {
    const file = upload.files?.[0];
    if (!file) return;
    const uploaded = await store.client.uploadAsset(file.name, file);
    append({ type: "image", path: uploaded.asset.path,
             mime: uploaded.asset.mime, caption: file.name });
  });
  adders.append(upload);
  panel.append(adders);
  return panel;
}

// -- theme panel ---------------------------------------------------------------

function themePanel(): HTMLElement {
  const theme = store.project?.theme;
  const panel = el("section", { class: "panel theme-panel" }, el("h2", {}, tr("theme")));
  if (!theme) return panel;
  const fields: Array<[StringKey, "fg_color" | "bg_color" | "highlight_color"]> = [
    ["foreground", "fg_color"],
    ["background", "bg_color"],
    ["highlight", "highlight_color"],
  ];
  for (const [label, key] of fields) {
    const input = el("input", { type: "color", value: theme[key] }) as HTMLInputElement;
    input.addEventListener("change", () => {
      void store.setTheme({ ...store.project!.theme, [key]: input.value.toUpperCase() });
    });
    panel.append(el("label", { class: "theme-field" }, tr(label), input));
  }
  return panel;
}

// -- preview panel ---------------------------------------------------------------

function drawPreview(canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx || !store.lastPreview) return;
  const tree = store.lastPreview.render_tree;
  previewLayout = previewPage === null
    ? rootMenuLayout(tree)
    : layoutPage(tree, previewPage);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (const op of previewLayout.ops) {
    if (op.kind === "rect" || op.kind === "box") {
      ctx.fillStyle = op.color;
      ctx.fillRect(op.x, op.y, op.w, op.h);
    } else {
      ctx.fillStyle = op.color;
      ctx.font = "11px sans-serif";
      ctx.textAlign = op.align;
      ctx.fillText(op.text, op.x, op.y, PHONE_WIDTH - 16);
    }
  }
}

function previewPanel(): HTMLElement {
  const panel = el("section", { class: "panel preview-panel" }, el("h2", {}, tr("preview")));
  const canvas = el("canvas", {
    width: String(PHONE_WIDTH),
    height: String(PHONE_HEIGHT),
    class: "phone",
  }) as HTMLCanvasElement;
  canvas.addEventListener("click", (e) => {
    if (!previewLayout) return;
    const rect = canvas.getBoundingClientRect();
    const y = e.clientY - rect.top;
    for (let i = 0; i < previewLayout.childRows.length; i++) {
      const row = previewLayout.childRows[i]!;
      if (y >= row.y && y <= row.y + row.h) {
        previewPage = previewLayout.childIds[i]!;
        drawPreview(canvas);
        return;
      }
    }
  });
  const controls = el("div", { class: "actions" });
  controls.append(
    button(tr("refreshPreview"), async () => {
      const result = await store.preview();
      if (result) {
        previewPage = null;
        render();
      }
    }),
    button(tr("back"), () => {
      if (previewPage !== null && store.lastPreview) {
        const page = store.lastPreview.render_tree.pages.find((p) => p.id === previewPage);
        previewPage = page?.parent_id ?? null;
        drawPreview(canvas);
      }
    }),
  );
  panel.append(controls);
  if (store.lastPreview) {
    panel.append(el("div", { class: "digest" },
      `digest ${store.lastPreview.digest.slice(0, 16)}…`));
    panel.append(canvas);
    drawPreview(canvas);
  } else {
    panel.append(el("div", { class: "placeholder" }, tr("noPreview")));
  }
  return panel;
}

// -- fleet panel ------------------------------------------------------------------

function fleetPanel(): HTMLElement {
  const panel = el("section", { class: "panel fleet-panel" }, el("h2", {}, tr("fleet")));
  if (fleetView) {
    for (const node of fleetView.nodes) {
      const badge = node.ok
        ? el("span", { class: "badge ok" }, `${node.role} seq=${node.seq} apps=${node.held_count}`)
        : el("span", { class: "badge off" }, tr("offline"));
      panel.append(el("div", { class: "fleet-row" },
        el("code", {}, node.url), " ", badge));
    }
    panel.append(el("h2", {}, tr("broadcast")));
    if (fleetView.stats) {
      const s = fleetView.stats;
      const row = el("div", { class: "sim-row" },
        `${tr("attempts")} ${s.attempts} · ${tr("successes")} ${s.successes} · ` +
        `${tr("failures")} ${s.failures} · ${tr("rejections")} ${s.rejections}`);
      if (!fleetView.statsConsistent) row.classList.add("inconsistent");
      panel.append(row);
    } else {
      panel.append(el("div", { class: "placeholder" }, "—"));
    }
  }
  return panel;
}

// -- header + shell ----------------------------------------------------------------

function headerBar(): HTMLElement {
  const header = el("header", { class: "topbar" });
  const title = el("input", { class: "project-title", value: store.project?.title ?? "" }) as HTMLInputElement;
  title.addEventListener("change", () => void store.setMeta({ title: title.value }));
  header.append(
    el("span", { class: "brand" }, "mcms"),
    title,
    el("span", { class: "meta" },
      `${store.project?.app_id ?? ""} v${store.project?.version ?? ""} rev ${store.revision}` +
      (store.dirty ? " ✎" : "")),
  );
  const locale = el("select", { class: "locale" });
  for (const code of ["en", "fa"] as const) {
    const opt = el("option", { value: code }, code);
    if (store.locale === code) opt.setAttribute("selected", "selected");
    locale.append(opt);
  }
  locale.addEventListener("change", () =>
    store.setLocale((locale as HTMLSelectElement).value as "en" | "fa"));
  const url = el("input", { class: "central-url", placeholder: tr("centralUrl") }) as HTMLInputElement;
  url.value = localStorage.getItem("central_url") ?? "";
  url.addEventListener("change", () => localStorage.setItem("central_url", url.value));
  header.append(locale, url, button(tr("publish"), async () => {
    if (!url.value) return;
    const release = await store.publish(url.value);
    if (release) {
      alert(`${release.app_id} v${release.version} seq=${release.published_seq}`);
    }
  }));
  return header;
}

function errorBanner(): HTMLElement | null {
  if (!store.lastError && store.lastIssues.length === 0) return null;
  const banner = el("div", { class: "error-banner" }, el("strong", {}, tr("errors")), " ");
  if (store.lastError) banner.append(el("span", {}, store.lastError));
  for (const issue of store.lastIssues) {
    banner.append(el("div", {},
      `${issue.code}${issue.page_id !== null ? ` (page ${issue.page_id})` : ""}: ${issue.detail}`));
  }
  return banner;
}

function render(): void {
  const app = document.getElementById("app");
  if (!app) return;
  document.documentElement.dir = dirFor(store.locale);
  app.replaceChildren();
  app.append(headerBar());
  const banner = errorBanner();
  if (banner) app.append(banner);
  const main = el("main", { class: "columns" });
  main.append(treePanel());
  const middle = el("div", { class: "column" });
  const selected = store.selection !== null && store.project
    ? findPage(store.project.pages, store.selection)
    : null;
  if (selected) middle.append(contentsPanel(selected));
  middle.append(themePanel());
  main.append(middle);
  const right = el("div", { class: "column" });
  right.append(previewPanel(), fleetPanel());
  main.append(right);
  app.append(main);
}

async function boot(): Promise<void> {
  store.subscribe(render);
  await store.load();
  startPolling(store.client, (view) => {
    fleetView = view;
    render();
  });
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot();
}
