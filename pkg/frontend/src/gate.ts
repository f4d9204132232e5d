/**
 * Gate override controls: mirrors server state, disables buttons while a
 * request is pending, asks for re-auth on 401, and leaves local state
 * untouched when the server errors.
 */

import { ApiError, GateAction, GateState, HiveClient } from "./api.js";

export interface GateControlView {
  gate: GateState | null;
  pending: boolean;
  needsAuth: boolean;
  error: string | null;
}

export class GateControl {
  private gate: GateState | null = null;
  private pending = false;
  private needsAuth = false;
  private error: string | null = null;

  constructor(
    private readonly client: HiveClient,
    private readonly hive: string,
  ) {}

  view(): GateControlView {
    return {
      gate: this.gate,
      pending: this.pending,
      needsAuth: this.needsAuth,
      error: this.error,
    };
  }

  buttonsDisabled(): boolean {
    return this.pending;
  }

  /** Adopt gate state seen in a status poll (keeps the panel current). */
  observe(gate: GateState): void {
    if (!this.pending) {
      this.gate = gate;
    }
  }

  async send(action: GateAction, ttlMin?: number): Promise<GateControlView> {
    if (this.pending) {
      return this.view();
    }
    this.pending = true;
    this.error = null;
    try {
      this.gate = await this.client.sendGateOverride(this.hive, action, ttlMin);
      this.needsAuth = false;
    } catch (err) {
      if (err instanceof ApiError && err.status === 401) {
        this.needsAuth = true;
      } else {
        this.error = String(err); // state unchanged, surfaced as a toast
      }
    } finally {
      this.pending = false;
    }
    return this.view();
  }
}

export function renderGateHtml(view: GateControlView): string {
  const disabled = view.pending ? " disabled" : "";
  const gate = view.gate;
  const overrideBadge =
    gate && gate.mode !== "AUTO"
      ? `<span class="badge" id="gate-override">${gate.mode}` +
        (gate.override_expiry ? ` until ${gate.override_expiry}` : "") +
        `</span>`
      : "";
  const authPrompt = view.needsAuth
    ? `<div class="reauth" id="gate-reauth">operator token rejected — sign in again</div>`
    : "";
  const toast = view.error ? `<div class="toast" id="gate-error">${view.error}</div>` : "";
  return (
    `<div class="gate-panel">` +
    `<div class="gate-state" id="gate-position">${gate ? gate.position : "unknown"}</div>` +
    overrideBadge +
    `<button id="gate-open"${disabled}>Open</button>` +
    `<button id="gate-close"${disabled}>Close</button>` +
    `<button id="gate-auto"${disabled}>Auto</button>` +
    authPrompt +
    toast +
    `</div>`
  );
}
