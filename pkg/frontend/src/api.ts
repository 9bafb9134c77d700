import { BackendBinding } from "./backends.js";
import { AlertRecord } from "./feed.js";

export interface SessionInfo {
  session_id: string;
  backend: string;
  source: string;
  started_at: number;
  stopped_at: number | null;
  running: boolean;
}

export interface StatsResponse {
  backend: string;
  running: boolean;
  session: SessionInfo | null;
  snapshot: Record<string, any>;
}

export interface AlertPage {
  alerts: AlertRecord[];
  total: number;
  limit: number;
  offset: number;
}

export interface UploadResult {
  descriptor: string;
  frames: number;
  filename: string;
}

export interface LoggedRequest {
  method: string;
  url: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string
  ) {
    super(detail || code);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * REST client bound to one backend prefix at a time.
 *
 * Every request goes through request() so the log captures the full URL;
 * tests assert prefix purity against it. rebind() is the only way the
 * prefix changes.
 */
export class ApiClient {
  readonly log: LoggedRequest[] = [];

  constructor(
    private binding: BackendBinding,
    private fetchImpl: FetchLike,
    private base = ""
  ) {}

  get bound(): BackendBinding {
    return this.binding;
  }

  rebind(binding: BackendBinding): void {
    this.binding = binding;
  }

  private async request(
    method: string,
    path: string,
    init: RequestInit = {}
  ): Promise<Response> {
    const url = `${this.base}${this.binding.apiPrefix}${path}`;
    this.log.push({ method, url: `${this.binding.apiPrefix}${path}` });
    const resp = await this.fetchImpl(url, { ...init, method });
    if (!resp.ok) {
      let code = `HTTP_${resp.status}`;
      let detail = "";
      try {
        const body = await resp.json();
        code = body.error ?? code;
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? "");
      } catch {
        // non-JSON error body; keep the status code
      }
      throw new ApiError(resp.status, code, detail);
    }
    return resp;
  }

  async startStream(source: string): Promise<SessionInfo> {
    const resp = await this.request("POST", "/stream/start", {
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ source }),
    });
    return resp.json();
  }

  async stopStream(): Promise<SessionInfo> {
    const resp = await this.request("POST", "/stream/stop");
    return resp.json();
  }

  async stats(): Promise<StatsResponse> {
    const resp = await this.request("GET", "/stats");
    return resp.json();
  }

  async alerts(params: { limit?: number; offset?: number; level?: string } = {}): Promise<AlertPage> {
    const query = new URLSearchParams();
    if (params.limit !== undefined) query.set("limit", String(params.limit));
    if (params.offset !== undefined) query.set("offset", String(params.offset));
    if (params.level) query.set("level", params.level);
    const suffix = query.toString() ? `?${query}` : "";
    const resp = await this.request("GET", `/alerts${suffix}`);
    return resp.json();
  }

  async fetchClip(alertId: number): Promise<Uint8Array> {
    const resp = await this.request("GET", `/alerts/${alertId}/clip`);
    return new Uint8Array(await resp.arrayBuffer());
  }

  thumbnailUrl(alertId: number): string {
    return `${this.base}${this.binding.apiPrefix}/alerts/${alertId}/thumbnail`;
  }

  async upload(filename: string, bytes: Uint8Array | Blob): Promise<UploadResult> {
    const form = new FormData();
    // copy so the Blob owns a plain ArrayBuffer (never a shared view)
    const blob = bytes instanceof Blob ? bytes : new Blob([Uint8Array.from(bytes).buffer]);
    form.append("file", blob, filename);
    const resp = await this.request("POST", "/upload", { body: form });
    return resp.json();
  }
}
