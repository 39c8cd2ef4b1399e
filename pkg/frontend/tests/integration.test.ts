/** Opt-in round trip against a live studio server.
 *
 *   STUDIO_URL=http://127.0.0.1:8787 vitest run tests/integration.test.ts
 *
 * With MCMS_PROJECT_DIR also set (the directory the studio serves), the
 * preview digest is compared against a fresh CLI compile of that directory.
 * With CENTRAL_URL set (a live central node listed in the studio's --fleet),
 * the publish flow and the fleet dashboard are exercised too.
 */

import { execFileSync } from "node:child_process";
import { createHash } from "node:crypto";
import { readFileSync, mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { StudioClient } from "../src/api.js";
import { pollOnce } from "../src/fleet.js";
import { ConsoleStore } from "../src/store.js";
import { findPage } from "../src/tree.js";

const STUDIO_URL = process.env.STUDIO_URL ?? "";
const PROJECT_DIR = process.env.MCMS_PROJECT_DIR ?? "";
const CENTRAL_URL = process.env.CENTRAL_URL ?? "";

describe.skipIf(!STUDIO_URL)("live studio round trip", () => {
  it("edits, previews and reloads against the real API", async () => {
    const store = new ConsoleStore(new StudioClient(STUDIO_URL));
    await store.load();

    const added = await store.addPage(0, "Console页", store.project!.pages.length);
    expect(added).not.toBeNull();
    await store.setContents(added!, [
      { type: "text", body: "from the console" },
      { type: "phone", digits: "+4912345" },
    ]);
    await store.reorderContent(added!, 1, 0);
    await store.renamePage(added!, "Console page");
    await store.setTheme({ ...store.project!.theme, highlight_color: "#AA4400" });
    expect(store.lastError).toBeNull();

    const preview = await store.preview();
    expect(preview).not.toBeNull();

    // a fresh session (the "reload") sees exactly the same document
    const reloaded = new ConsoleStore(new StudioClient(STUDIO_URL));
    await reloaded.load();
    expect(JSON.stringify(reloaded.project)).toBe(JSON.stringify(store.project));

    const page = findPage(reloaded.project!.pages, added!)!;
    expect(page.title).toBe("Console page");
    expect(page.contents[0]!.type).toBe("phone");

    if (PROJECT_DIR) {
      const out = join(mkdtempSync(join(tmpdir(), "console-")), "cli.amb");
      execFileSync("python3", ["-m", "mcms.cli", "compile", PROJECT_DIR, "-o", out]);
      const digest = createHash("sha256").update(readFileSync(out)).digest("hex");
      expect(digest).toBe(preview!.digest);
    }

    if (CENTRAL_URL) {
      // unique version per run keeps the central's monotonicity rule happy
      await store.setMeta({ version: Math.floor(Date.now() / 1000) });
      const release = await store.publish(CENTRAL_URL);
      expect(release).not.toBeNull();
      const view = await pollOnce(store.client);
      const central = view.nodes.find((n) => n.url === CENTRAL_URL);
      expect(central?.ok).toBe(true);
      expect(central?.seq).toBe(release!.published_seq);
      expect(central?.held_count).toBeGreaterThan(0);
      if (view.stats) expect(view.statsConsistent).toBe(true);
    }

    // tidy up so repeated runs keep growing the same tree politely
    await store.deletePage(added!);
  }, 30_000);
});
