/**
 * Typed client for the hivelink HTTP API.
 *
 * The dashboard is read-mostly: the only mutating calls are the gate
 * override and event acknowledgment. Every number shown in the UI comes
 * from these responses; the client never recomputes detections.
 */

export interface Reading {
  hive_id: string;
  timestamp: string;
  temp_c: number;
  humidity_pct: number;
  syrup_ml: number;
  weight_g: number;
  light: boolean;
}

export interface GateState {
  position: "OPEN" | "CLOSED";
  mode: "AUTO" | "OVERRIDE_OPEN" | "OVERRIDE_CLOSED";
  override_expiry: string | null;
  debounced_light: boolean | null;
  last_transition: string | null;
}

export interface FlowForecast {
  slope_g_per_day: number;
  classification: "NO_FLOW" | "ACTIVE_FLOW" | "IDEAL_FLOW";
  accumulated_g: number;
  eta_days_to_full: number | null;
}

export interface RefillForecast {
  current_ml: number;
  slope_ml_per_hour: number;
  eta_hours_to_empty: number | null;
}

export interface HiveStatus {
  hive_id: string;
  latest_reading: Reading | null;
  gate: GateState;
  forecasts: {
    honey_flow: FlowForecast | null;
    refill: RefillForecast | null;
  };
  unacknowledged_events: number;
  counters: Record<string, number>;
}

export interface HiveEvent {
  seq: number;
  hive_id: string;
  kind: string;
  severity: "INFO" | "WARNING" | "CRITICAL";
  window_start: string;
  window_end: string;
  detected_at: string;
  evidence: Record<string, number>;
}

export type GateAction = "open" | "close" | "auto";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ClientConfig {
  baseUrl: string;
  readToken: string;
  operatorToken?: string;
  fetchFn?: typeof fetch;
}

export class HiveClient {
  private readonly baseUrl: string;
  private readonly readToken: string;
  private readonly operatorToken: string;
  private readonly fetchFn: typeof fetch;

  constructor(config: ClientConfig) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, "");
    this.readToken = config.readToken;
    this.operatorToken = config.operatorToken ?? "";
    this.fetchFn = config.fetchFn ?? fetch;
  }

  private async getJson<T>(path: string, params: Record<string, string>): Promise<T> {
    const url = new URL(this.baseUrl + path);
    for (const [key, value] of Object.entries(params)) {
      url.searchParams.set(key, value);
    }
    const resp = await this.fetchFn(url.toString());
    if (!resp.ok) {
      throw new ApiError(resp.status, `${path}: HTTP ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  getStatus(hive: string): Promise<HiveStatus> {
    return this.getJson<HiveStatus>(`/hives/${hive}/status`, { token: this.readToken });
  }

  async getEvents(hive: string, from?: string, to?: string): Promise<HiveEvent[]> {
    const params: Record<string, string> = { token: this.readToken };
    if (from) params.from = from;
    if (to) params.to = to;
    const body = await this.getJson<{ events: HiveEvent[] }>(`/hives/${hive}/events`, params);
    return body.events;
  }

  async getReadings(hive: string, from?: string, to?: string): Promise<Reading[]> {
    const params: Record<string, string> = { token: this.readToken, format: "structured" };
    if (from) params.from = from;
    if (to) params.to = to;
    const body = await this.getJson<{ readings: Reading[] }>(
      `/hives/${hive}/readings`,
      params,
    );
    return body.readings;
  }

  /** Href for the CSV download button; the export endpoint does the work. */
  readingsCsvUrl(hive: string, from?: string, to?: string): string {
    const url = new URL(`${this.baseUrl}/hives/${hive}/readings`);
    url.searchParams.set("token", this.readToken);
    url.searchParams.set("format", "csv");
    if (from) url.searchParams.set("from", from);
    if (to) url.searchParams.set("to", to);
    return url.toString();
  }

  async sendGateOverride(
    hive: string,
    action: GateAction,
    ttlMin?: number,
  ): Promise<GateState> {
    const resp = await this.fetchFn(`${this.baseUrl}/hives/${hive}/gate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        action,
        ttl_min: ttlMin ?? null,
        token: this.operatorToken,
      }),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, `gate override: HTTP ${resp.status}`);
    }
    const body = (await resp.json()) as { gate: GateState };
    return body.gate;
  }

  async ackEvents(hive: string, upTo?: number): Promise<number> {
    const resp = await this.fetchFn(`${this.baseUrl}/hives/${hive}/events/ack`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ up_to: upTo, token: this.operatorToken }),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, `ack: HTTP ${resp.status}`);
    }
    const body = (await resp.json()) as { unacknowledged: number };
    return body.unacknowledged;
  }
}
