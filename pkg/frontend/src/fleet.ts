/** Fleet and simulation dashboard data: poll the studio proxies on a fixed
 * interval and sanity-check the outcome accounting client-side (advisory
 * only; the simulator enforces it for real).
 */

import type { StudioClient } from "./api.js";
import type { FleetNodeDoc, SimStatsDoc } from "./types.js";

export const POLL_INTERVAL_MS = 2000;

export interface FleetView {
  nodes: FleetNodeDoc[];
  stats: SimStatsDoc | null;
  statsConsistent: boolean;
}

export function statsAccountingHolds(stats: SimStatsDoc): boolean {
  return stats.attempts === stats.successes + stats.failures + stats.rejections;
}

export async function pollOnce(client: StudioClient): Promise<FleetView> {
  const [fleet, stats] = await Promise.all([client.fleet(), client.simLatest()]);
  return {
    nodes: fleet.nodes,
    stats,
    statsConsistent: stats === null || statsAccountingHolds(stats),
  };
}

export function startPolling(
  client: StudioClient,
  onUpdate: (view: FleetView) => void,
  onError: (error: unknown) => void = () => undefined,
  intervalMs: number = POLL_INTERVAL_MS,
): () => void {
  let stopped = false;
  const tick = async () => {
    if (stopped) return;
    try {
      onUpdate(await pollOnce(client));
    } catch (error) {
      onError(error);
    }
  };
  void tick();
  const timer = setInterval(tick, intervalMs);
  return () => {
    stopped = true;
    clearInterval(timer);
  };
}
