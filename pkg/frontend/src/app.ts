/**
 * Browser entry point: wires the poller, tiles, gate panel and history
 * charts into the page. Configuration comes from query parameters:
 *   index.html?base=http://127.0.0.1:8080&hive=H1&read=TOKEN&op=TOKEN
 */

import { HiveClient } from "./api.js";
import { Channel, renderHistoryHtml } from "./chart.js";
import { GateControl, renderGateHtml } from "./gate.js";
import { POLL_INTERVAL_MS, StatusPoller } from "./status.js";
import { renderTilesHtml, statusTiles } from "./tiles.js";

const CHANNELS: Channel[] = ["weight_g", "temp_c", "humidity_pct", "syrup_ml"];
const HISTORY_REFRESH_MS = 30_000;

export function initDashboard(root: Document = document): void {
  const params = new URLSearchParams(root.defaultView?.location.search ?? "");
  const baseUrl = params.get("base") ?? "http://127.0.0.1:8080";
  const hive = params.get("hive") ?? "H1";
  const client = new HiveClient({
    baseUrl,
    readToken: params.get("read") ?? "",
    operatorToken: params.get("op") ?? "",
  });

  const tilesEl = root.getElementById("status")!;
  const gateEl = root.getElementById("gate")!;
  const historyEl = root.getElementById("history")!;
  const titleEl = root.getElementById("hive-title");
  if (titleEl) titleEl.textContent = hive;

  const gateControl = new GateControl(client, hive);
  const poller = new StatusPoller(client, hive);

  const redrawGate = () => {
    gateEl.innerHTML = renderGateHtml(gateControl.view());
    const bind = (id: string, action: "open" | "close" | "auto") => {
      const ttl = action === "auto" ? undefined : 60;
      root.getElementById(id)?.addEventListener("click", () => {
        redrawGate(); // disable immediately
        void gateControl.send(action, ttl).then(redrawGate);
      });
    };
    bind("gate-open", "open");
    bind("gate-close", "close");
    bind("gate-auto", "auto");
  };

  poller.start((view) => {
    tilesEl.innerHTML = renderTilesHtml(statusTiles(view));
    if (view.status) {
      gateControl.observe(view.status.gate);
      redrawGate();
    }
  }, POLL_INTERVAL_MS);
  redrawGate();

  root.getElementById("ack-events")?.addEventListener("click", () => {
    void client
      .ackEvents(hive)
      .then(() => poller.pollOnce())
      .then((view) => {
        tilesEl.innerHTML = renderTilesHtml(statusTiles(view));
      });
  });

  const refreshHistory = async () => {
    try {
      const [readings, events] = await Promise.all([
        client.getReadings(hive),
        client.getEvents(hive),
      ]);
      historyEl.innerHTML = renderHistoryHtml(
        readings,
        CHANNELS,
        events,
        client.readingsCsvUrl(hive),
      );
    } catch {
      // the status banner already reports connectivity problems
    }
  };
  void refreshHistory();
  setInterval(() => void refreshHistory(), HISTORY_REFRESH_MS);
}

declare global {
  interface Window {
    hivelinkDashboard?: () => void;
  }
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  window.hivelinkDashboard = () => initDashboard(document);
}
