/**
 * History charts: one line per requested channel, with event windows
 * overlaid as markers. The model is plain data so tests can assert
 * geometry without a DOM; renderSvg turns it into markup.
 */

import { HiveEvent, Reading } from "./api.js";

export type Channel = "temp_c" | "humidity_pct" | "syrup_ml" | "weight_g";

export const CHANNEL_LABELS: Record<Channel, string> = {
  temp_c: "Temperature (°C)",
  humidity_pct: "Humidity (%)",
  syrup_ml: "Supplement (mL)",
  weight_g: "Weight (g)",
};

export interface ChartPoint {
  x: number;
  y: number;
  t: number; // epoch ms
  v: number; // channel value
}

export interface ChartMarker {
  kind: string;
  severity: string;
  x0: number;
  x1: number;
  t0: number;
  t1: number;
}

export interface ChartModel {
  channel: Channel;
  label: string;
  width: number;
  height: number;
  points: ChartPoint[];
  markers: ChartMarker[];
  tMin: number;
  tMax: number;
  vMin: number;
  vMax: number;
}

const PAD = 8;

export function buildChart(
  readings: Reading[],
  channel: Channel,
  events: HiveEvent[],
  width = 800,
  height = 220,
): ChartModel {
  const model: ChartModel = {
    channel,
    label: CHANNEL_LABELS[channel],
    width,
    height,
    points: [],
    markers: [],
    tMin: 0,
    tMax: 0,
    vMin: 0,
    vMax: 0,
  };
  if (readings.length === 0) {
    return model;
  }
  const times = readings.map((r) => Date.parse(r.timestamp));
  const values = readings.map((r) => r[channel]);
  const tMin = Math.min(...times);
  const tMax = Math.max(...times);
  const vMin = Math.min(...values);
  const vMax = Math.max(...values);
  const tSpan = tMax - tMin || 1;
  const vSpan = vMax - vMin || 1;
  const xOf = (t: number) => PAD + ((t - tMin) / tSpan) * (width - 2 * PAD);
  const yOf = (v: number) => height - PAD - ((v - vMin) / vSpan) * (height - 2 * PAD);

  model.tMin = tMin;
  model.tMax = tMax;
  model.vMin = vMin;
  model.vMax = vMax;
  model.points = readings.map((r, i) => ({
    x: xOf(times[i]),
    y: yOf(values[i]),
    t: times[i],
    v: values[i],
  }));
  model.markers = events
    .map((e) => {
      const t0 = Date.parse(e.window_start);
      const t1 = Date.parse(e.window_end);
      return {
        kind: e.kind,
        severity: e.severity,
        t0,
        t1,
        x0: xOf(Math.max(t0, tMin)),
        x1: xOf(Math.min(Math.max(t1, tMin), tMax)),
      };
    })
    .filter((m) => m.t1 >= tMin && m.t0 <= tMax);
  return model;
}

export function renderSvg(model: ChartModel): string {
  const { width, height } = model;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
      `class="chart chart-${model.channel}" role="img" aria-label="${model.label}">`,
  ];
  for (const marker of model.markers) {
    const x = marker.x0.toFixed(1);
    const markerWidth = Math.max(marker.x1 - marker.x0, 2).toFixed(1);
    parts.push(
      `<rect class="marker marker-${marker.kind}" data-kind="${marker.kind}" ` +
        `x="${x}" y="0" width="${markerWidth}" height="${height}"></rect>`,
    );
    parts.push(
      `<text class="marker-label" x="${x}" y="12" data-kind="${marker.kind}">` +
        `${marker.kind}</text>`,
    );
  }
  if (model.points.length > 0) {
    const path = model.points
      .map((p) => `${p.x.toFixed(1)},${p.y.toFixed(1)}`)
      .join(" ");
    parts.push(`<polyline class="series" fill="none" points="${path}"></polyline>`);
  } else {
    parts.push(`<text class="empty" x="${width / 2}" y="${height / 2}">no data</text>`);
  }
  parts.push("</svg>");
  return parts.join("");
}

export function renderHistoryHtml(
  readings: Reading[],
  channels: Channel[],
  events: HiveEvent[],
  csvUrl: string,
): string {
  const charts = channels
    .map((channel) => {
      const model = buildChart(readings, channel, events);
      return (
        `<figure class="history"><figcaption>${model.label}</figcaption>` +
        renderSvg(model) +
        `</figure>`
      );
    })
    .join("");
  return (
    charts +
    `<p><a class="csv-download" href="${csvUrl}" download>Download CSV</a></p>`
  );
}
