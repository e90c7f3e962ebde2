/**
 * Typed client for the engine's HTTP/JSON API.
 *
 * All amounts arrive as decimal strings (the journal wire form) and are kept
 * as strings end to end; the console never does money arithmetic.
 */

export interface EngineState {
  mode: "Running" | "Paused" | "Stopped";
  last_step_date: string | null;
  journal_seq: number;
  digest: string;
  instances: Record<string, { state: string; product_type: string }>;
  accounts: Record<string, string>;
  parties: string[];
  open_authorizations: number;
}

export interface ObligationRow {
  obligation_id: string;
  instance_id: string;
  payer: string;
  payee: string;
  currency: string;
  amount: string;
  outstanding: string;
  due_date: string;
  status: string;
  origin: string;
  netted_into: string | null;
}

export interface EventRow {
  event_id: string;
  kind: string;
  class: string;
  affected_parties: string[];
  status: string;
  grace_deadline: string | null;
  transaction_ids: string[];
  waived: boolean;
}

export interface PendingRequest {
  request_id: string;
  party: string;
  question: string;
  menu: string[];
  context: Record<string, unknown>;
  created_seq: number;
  status: string;
}

export interface JournalEntry {
  seq: number;
  kind: string;
  payload: Record<string, any>;
  digest: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ConsoleApi {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: {
        "X-Party-Token": this.token,
        ...(body !== undefined ? { "Content-Type": "application/json" } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const data = await response.json().catch(() => ({}));
    if (!response.ok) {
      throw new ApiError(response.status, (data as any).error ?? `HTTP ${response.status}`);
    }
    return data as T;
  }

  state(): Promise<EngineState> {
    return this.request("GET", "/state");
  }

  obligations(status?: string): Promise<ObligationRow[]> {
    const query = status ? `?status=${encodeURIComponent(status)}` : "";
    return this.request("GET", `/obligations${query}`);
  }

  events(): Promise<EventRow[]> {
    return this.request("GET", "/events");
  }

  pending(party: string, waitMs = 0): Promise<PendingRequest[]> {
    return this.request(
      "GET",
      `/authorizations/pending?party=${encodeURIComponent(party)}&wait_ms=${waitMs}`,
    );
  }

  answer(requestId: string, response: string): Promise<{ queued_seq: string }> {
    return this.request("POST", `/authorizations/${requestId}/answer`, { response });
  }

  postObservation(datum: Record<string, unknown>): Promise<{ queued_seq: string }> {
    return this.request("POST", "/observations", datum);
  }

  postCommand(datum: Record<string, unknown>): Promise<{ queued_seq: string }> {
    return this.request("POST", "/commands", datum);
  }

  control(command: "pause" | "resume" | "stop", reason?: string): Promise<{ mode: string }> {
    return this.request("POST", `/control/${command}`, reason ? { reason } : {});
  }

  step(date?: string): Promise<{ date: string }> {
    return this.request("POST", "/control/step", date ? { date } : {});
  }

  journal(from: number): Promise<{ entries: JournalEntry[]; head: string }> {
    return this.request("GET", `/journal?from=${from}`);
  }
}
