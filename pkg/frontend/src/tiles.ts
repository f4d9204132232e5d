/**
 * Status tiles: a pure view-model over the server's status JSON.
 *
 * Numbers are rendered exactly as the server reported them (minimal
 * digits, no client-side rounding or recomputation).
 */

import { HiveStatus } from "./api.js";
import { StatusView } from "./status.js";

export interface StatusTiles {
  temperature: string;
  humidity: string;
  syrup: string;
  weight: string;
  light: string;
  gate: string;
  flow: string;
  refill: string;
  unacknowledged: string;
  banner: string | null; // offline / stale / error notice, null when healthy
}

export const NO_DATA = "no data";

/** Minimal-digit rendering matching the server's CSV discipline. */
export function fmtValue(value: number): string {
  return String(value);
}

function flowLabel(status: HiveStatus): string {
  const flow = status.forecasts.honey_flow;
  if (!flow) return NO_DATA;
  let label = `${flow.classification} (${fmtValue(flow.slope_g_per_day)} g/day)`;
  if (flow.eta_days_to_full !== null) {
    label += `, full in ${fmtValue(flow.eta_days_to_full)} d`;
  }
  return label;
}

function refillLabel(status: HiveStatus): string {
  const refill = status.forecasts.refill;
  if (!refill) return NO_DATA;
  let label = `${fmtValue(refill.current_ml)} mL`;
  if (refill.eta_hours_to_empty !== null) {
    label += `, empty in ${fmtValue(refill.eta_hours_to_empty)} h`;
  }
  return label;
}

export function statusTiles(view: StatusView): StatusTiles {
  const status = view.status;
  const reading = status?.latest_reading ?? null;
  let banner: string | null = null;
  if (view.state === "offline") {
    banner = "server unreachable — showing last known data";
  } else if (view.state === "error") {
    banner = view.errorMessage ?? "request failed";
  } else if (view.stale) {
    banner = "data is stale (no update for over a minute)";
  }
  return {
    temperature: reading ? `${fmtValue(reading.temp_c)} °C` : NO_DATA,
    humidity: reading ? `${fmtValue(reading.humidity_pct)} %` : NO_DATA,
    syrup: reading ? `${fmtValue(reading.syrup_ml)} mL` : NO_DATA,
    weight: reading ? `${fmtValue(reading.weight_g)} g` : NO_DATA,
    light: reading ? (reading.light ? "daylight" : "dark") : NO_DATA,
    gate: status ? `${status.gate.position} (${status.gate.mode})` : NO_DATA,
    flow: status ? flowLabel(status) : NO_DATA,
    refill: status ? refillLabel(status) : NO_DATA,
    unacknowledged: status ? String(status.unacknowledged_events) : "0",
    banner,
  };
}

export function renderTilesHtml(tiles: StatusTiles): string {
  const tile = (label: string, value: string, id: string) =>
    `<div class="tile"><div class="label">${label}</div>` +
    `<div class="value" id="${id}">${value}</div></div>`;
  const banner = tiles.banner
    ? `<div class="banner" id="banner">${tiles.banner}</div>`
    : "";
  return (
    banner +
    `<div class="tiles">` +
    tile("Temperature", tiles.temperature, "tile-temp") +
    tile("Humidity", tiles.humidity, "tile-hum") +
    tile("Supplement", tiles.syrup, "tile-syrup") +
    tile("Weight", tiles.weight, "tile-weight") +
    tile("Light", tiles.light, "tile-light") +
    tile("Gate", tiles.gate, "tile-gate") +
    tile("Honey flow", tiles.flow, "tile-flow") +
    tile("Refill", tiles.refill, "tile-refill") +
    tile("Unread events", tiles.unacknowledged, "tile-unacked") +
    `</div>`
  );
}
