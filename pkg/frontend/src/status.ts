/**
 * Status polling with staleness and offline handling.
 *
 * Polls at most every 10 s; data older than 60 s is flagged stale; when
 * the server is unreachable the last known data is retained behind an
 * offline banner.
 */

import { ApiError, HiveClient, HiveStatus } from "./api.js";

export const POLL_INTERVAL_MS = 10_000;
export const STALE_AFTER_MS = 60_000;

export type ConnectionState = "ok" | "offline" | "error";

export interface StatusView {
  state: ConnectionState;
  status: HiveStatus | null;
  stale: boolean;
  lastUpdatedMs: number | null;
  errorMessage: string | null;
}

export class StatusPoller {
  private status: HiveStatus | null = null;
  private state: ConnectionState = "ok";
  private lastUpdatedMs: number | null = null;
  private errorMessage: string | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private readonly now: () => number;

  constructor(
    private readonly client: HiveClient,
    private readonly hive: string,
    options: { now?: () => number } = {},
  ) {
    this.now = options.now ?? Date.now;
  }

  async pollOnce(): Promise<StatusView> {
    try {
      this.status = await this.client.getStatus(this.hive);
      this.state = "ok";
      this.errorMessage = null;
      this.lastUpdatedMs = this.now();
    } catch (err) {
      if (err instanceof ApiError) {
        this.state = "error";
        this.errorMessage = err.message;
      } else {
        // transport failure: offline banner, keep the last data
        this.state = "offline";
        this.errorMessage = String(err);
      }
    }
    return this.view();
  }

  view(): StatusView {
    const stale =
      this.lastUpdatedMs !== null && this.now() - this.lastUpdatedMs > STALE_AFTER_MS;
    return {
      state: this.state,
      status: this.status,
      stale,
      lastUpdatedMs: this.lastUpdatedMs,
      errorMessage: this.errorMessage,
    };
  }

  start(onChange: (view: StatusView) => void, intervalMs: number = POLL_INTERVAL_MS): void {
    this.stop();
    void this.pollOnce().then(onChange);
    this.timer = setInterval(() => {
      void this.pollOnce().then(onChange);
    }, intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
