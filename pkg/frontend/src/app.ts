import { ApiClient, ApiError, FetchLike, StatsResponse } from "./api.js";
import { BackendBinding, BackendLabel, bindingFor } from "./backends.js";
import { ClipFormatError, parseClip, pngDataUrl } from "./clipfmt.js";
import { clear, el, fmtTimestamp } from "./dom.js";
import { AlertFeed, AlertRecord } from "./feed.js";
import { LiveChannel, WsFactory } from "./live.js";
import { styleToken } from "./styleTokens.js";

export interface AppDeps {
  fetchImpl: FetchLike;
  wsFactory: WsFactory;
  base?: string;
  wsBase?: string;
  clock?: () => number;
  schedule?: (fn: () => void, ms: number) => unknown;
}

const FEED_PAGE = 50;
const STATS_POLL_MS = 1000;
const RETRY_BASE_MS = 1000;
const RETRY_MAX_MS = 15000;
const PLAYBACK_MS = 100;

interface Els {
  backendName: HTMLElement;
  connBadge: HTMLElement;
  statusBadge: HTMLElement;
  retryBanner: HTMLElement;
  monitor: HTMLImageElement;
  statsPanel: HTMLElement;
  feedList: HTMLElement;
  feedTotal: HTMLElement;
  toasts: HTMLElement;
  modal: HTMLElement;
  sourceInput: HTMLInputElement;
  startBtn: HTMLButtonElement;
  stopBtn: HTMLButtonElement;
  uploadInput: HTMLInputElement;
  controlError: HTMLElement;
  switchBtns: Map<BackendLabel, HTMLButtonElement>;
}

export class DashboardApp {
  readonly api: ApiClient;
  readonly feed = new AlertFeed();
  readonly live: LiveChannel;
  binding: BackendBinding;
  running = false;

  private els!: Els;
  private base: string;
  private wsBase: string;
  private schedule: (fn: () => void, ms: number) => unknown;
  private pollTimer: unknown = null;
  private retryDelay = RETRY_BASE_MS;
  private retryPending = false;
  private playbackTimer: unknown = null;
  private destroyed = false;

  constructor(
    private root: HTMLElement,
    deps: AppDeps,
    initial: BackendLabel = "SKELETON"
  ) {
    this.base = deps.base ?? "";
    this.wsBase = deps.wsBase ?? "";
    this.schedule = deps.schedule ?? ((fn, ms) => setTimeout(fn, ms));
    this.binding = bindingFor(initial);
    this.api = new ApiClient(this.binding, deps.fetchImpl, this.base);
    this.live = new LiveChannel(
      deps.wsFactory,
      {
        onEvent: (event) => this.onSocketEvent(event),
        onState: () => this.renderConnState(),
      },
      deps.clock
    );
  }

  mount(): void {
    const switchBtns = new Map<BackendLabel, HTMLButtonElement>();
    for (const label of ["SKELETON", "VLM"] as BackendLabel[]) {
      const btn = el("button", { class: "switch-btn", "data-backend": label }, label);
      btn.addEventListener("click", () => void this.switchBackend(label));
      switchBtns.set(label, btn);
    }

    const sourceInput = el("input", {
      class: "source-input",
      placeholder: "fixtures/two_person_punch.jsonl or scenario:fall",
    });
    const startBtn = el("button", { class: "start-btn" }, "Start");
    const stopBtn = el("button", { class: "stop-btn", disabled: "" }, "Stop");
    const uploadInput = el("input", { class: "upload-input", type: "file" });
    startBtn.addEventListener("click", () => void this.startAction());
    stopBtn.addEventListener("click", () => void this.stopAction());
    uploadInput.addEventListener("change", () => void this.uploadAction());

    this.els = {
      backendName: el("span", { class: "backend-name" }, this.binding.label),
      connBadge: el("span", { class: "conn-badge" }, "idle"),
      statusBadge: el("span", { class: "status-badge" }, "no status"),
      retryBanner: el("div", { class: "retry-banner hidden" }),
      monitor: el("img", { class: "monitor-frame", alt: "live monitor" }),
      statsPanel: el("dl", { class: "stats-panel" }),
      feedList: el("ul", { class: "alert-feed" }),
      feedTotal: el("span", { class: "feed-total" }, "0 alerts"),
      toasts: el("div", { class: "toasts" }),
      modal: el("div", { class: "modal hidden" }),
      sourceInput,
      startBtn,
      stopBtn,
      uploadInput,
      controlError: el("span", { class: "control-error" }),
      switchBtns,
    };

    clear(this.root);
    this.root.append(
      el(
        "header",
        { class: "topbar" },
        this.els.backendName,
        ...switchBtns.values(),
        this.els.connBadge,
        this.els.statusBadge
      ),
      this.els.retryBanner,
      el(
        "main",
        { class: "panels" },
        el("section", { class: "monitor" }, this.els.monitor),
        el(
          "section",
          { class: "sidebar" },
          el("h2", {}, "Metrics"),
          this.els.statsPanel,
          el("h2", {}, "Alerts ", this.els.feedTotal),
          this.els.feedList
        )
      ),
      el(
        "footer",
        { class: "controls" },
        sourceInput,
        startBtn,
        stopBtn,
        uploadInput,
        this.els.controlError
      ),
      this.els.toasts,
      this.els.modal
    );
  }

  /** Initial data load, socket attach, and the 1 s stats poll loop. */
  async start(): Promise<void> {
    this.live.connect(this.binding.wsPrefix, this.wsBase);
    await this.refreshAll();
    const loop = () => {
      if (this.destroyed) return;
      void this.pollOnce();
      this.pollTimer = this.schedule(loop, STATS_POLL_MS);
    };
    this.pollTimer = this.schedule(loop, STATS_POLL_MS);
  }

  destroy(): void {
    this.destroyed = true;
    this.live.disconnect();
  }

  async switchBackend(label: BackendLabel): Promise<void> {
    if (label === this.binding.label) return; // same target: no-op
    this.binding = bindingFor(label);
    this.api.rebind(this.binding);
    this.els.backendName.textContent = this.binding.label;
    this.feed.clear();
    this.renderFeed();
    this.live.connect(this.binding.wsPrefix, this.wsBase);
    await this.refreshAll();
  }

  /** Draw the newest live frame; call once per animation tick. */
  renderTick(): void {
    const frame = this.live.takeFrame();
    if (frame) {
      this.els.monitor.src = pngDataUrl(frame);
    }
  }

  async pollOnce(): Promise<void> {
    this.live.tick();
    this.renderConnState();
    try {
      const stats = await this.api.stats();
      this.clearRetry();
      this.applyStats(stats);
    } catch {
      this.scheduleRetry();
    }
  }

  private async refreshAll(): Promise<void> {
    try {
      const [stats, page] = await Promise.all([
        this.api.stats(),
        this.api.alerts({ limit: FEED_PAGE }),
      ]);
      this.clearRetry();
      this.applyStats(stats);
      this.feed.merge(page.alerts);
      this.feed.total = page.total;
      this.renderFeed();
    } catch {
      this.scheduleRetry();
    }
  }

  private scheduleRetry(): void {
    this.els.retryBanner.textContent =
      `backend unreachable, retrying in ${Math.round(this.retryDelay / 1000)}s`;
    this.els.retryBanner.classList.remove("hidden");
    if (this.retryPending || this.destroyed) return;
    this.retryPending = true;
    this.schedule(() => {
      this.retryPending = false;
      this.retryDelay = Math.min(this.retryDelay * 2, RETRY_MAX_MS);
      void this.refreshAll();
    }, this.retryDelay);
  }

  private clearRetry(): void {
    this.retryDelay = RETRY_BASE_MS;
    this.els.retryBanner.classList.add("hidden");
  }

  private applyStats(stats: StatsResponse): void {
    this.running = stats.running;
    this.els.startBtn.disabled = stats.running;
    this.els.stopBtn.disabled = !stats.running;
    this.renderStats(stats.snapshot, stats.session?.source);
  }

  private renderStats(snapshot: Record<string, any>, source?: string): void {
    const rows: Array<[string, string]> = [
      ["frames in", String(snapshot.frames_in ?? 0)],
      ["processed", String(snapshot.frames_processed ?? 0)],
      ["dropped", String(snapshot.frames_dropped ?? 0)],
      ["eFPS", Number(snapshot.efps ?? 0).toFixed(1)],
      ["clips", String(snapshot.clips_emitted ?? 0)],
      ["end-to-end ms", Number(snapshot.end_to_end_ms_mean ?? 0).toFixed(0)],
    ];
    if (source) rows.push(["source", source]);
    clear(this.els.statsPanel);
    for (const [term, value] of rows) {
      this.els.statsPanel.append(el("dt", {}, term), el("dd", {}, value));
    }
  }

  private renderConnState(): void {
    this.els.connBadge.textContent = this.live.state;
    this.els.connBadge.className = `conn-badge conn-${this.live.state}`;
  }

  private onSocketEvent(event: Record<string, any>): void {
    switch (event.type) {
      case "alert": {
        const record = event.alert as AlertRecord;
        this.feed.push(record);
        this.renderFeed();
        this.toast(`${record.level}: ${record.summary}`, record.level);
        break;
      }
      case "status":
        this.els.statusBadge.textContent = event.level;
        this.els.statusBadge.setAttribute("style", `color: ${styleToken(event.level)}`);
        break;
      case "stats":
        this.renderStats(event.snapshot ?? {});
        break;
      case "session":
        this.running = event.state === "started";
        this.els.startBtn.disabled = this.running;
        this.els.stopBtn.disabled = !this.running;
        break;
      default:
        break; // clip markers etc. need no UI yet
    }
  }

  private renderFeed(): void {
    clear(this.els.feedList);
    this.els.feedTotal.textContent = `${this.feed.total} alerts`;
    for (const record of this.feed.list()) {
      const item = el(
        "li",
        { class: "alert-item", "data-alert-id": String(record.alert_id) },
        el("span", {
          class: "level-dot",
          style: `background: ${styleToken(record.level)}`,
        }),
        el("span", { class: "alert-level" }, record.level),
        el("span", { class: "alert-summary" }, record.summary),
        el("time", { class: "alert-time" }, fmtTimestamp(record.created_at))
      );
      item.addEventListener("click", () => void this.reviewAlert(record.alert_id));
      this.els.feedList.append(item);
    }
  }

  async reviewAlert(alertId: number): Promise<void> {
    const record = this.feed.get(alertId);
    const modal = this.els.modal;
    clear(modal);
    modal.classList.remove("hidden", "modal-error");

    const closeBtn = el("button", { class: "modal-close" }, "Close");
    closeBtn.addEventListener("click", () => this.closeModal());
    const badgeLevel = record?.level ?? "SAFE";
    modal.append(
      el(
        "div",
        { class: "modal-head" },
        el("span", {
          class: "modal-badge",
          style: `background: ${styleToken(badgeLevel)}`,
        }, badgeLevel),
        el("span", { class: "modal-summary" }, record?.summary ?? `alert ${alertId}`),
        el("time", {}, record ? fmtTimestamp(record.created_at) : ""),
        closeBtn
      )
    );

    let frames: Uint8Array[];
    let meta: Record<string, unknown>;
    try {
      const clip = parseClip(await this.api.fetchClip(alertId));
      frames = clip.frames;
      meta = clip.metadata;
    } catch (err) {
      modal.classList.add("modal-error");
      const reason =
        err instanceof ApiError ? `clip unavailable (${err.code})`
        : err instanceof ClipFormatError ? `clip unreadable (${err.message})`
        : "clip unavailable";
      modal.append(el("p", { class: "modal-message" }, reason));
      return;
    }

    const player = el("img", { class: "clip-player", alt: "alert clip" });
    const span = Array.isArray(meta.timestamps_ms) && meta.timestamps_ms.length
      ? `${meta.timestamps_ms[0]} .. ${meta.timestamps_ms[meta.timestamps_ms.length - 1]} ms`
      : "";
    modal.append(player, el("p", { class: "clip-span" }, `${frames.length} frames ${span}`));

    let at = 0;
    const step = () => {
      if (modal.classList.contains("hidden") || !modal.contains(player)) return;
      player.src = pngDataUrl(frames[at]);
      at = (at + 1) % frames.length;
      this.playbackTimer = this.schedule(step, PLAYBACK_MS);
    };
    step();
  }

  closeModal(): void {
    this.els.modal.classList.add("hidden");
    clear(this.els.modal); // stream view underneath stays untouched
  }

  private async startAction(): Promise<void> {
    const source = this.els.sourceInput.value.trim();
    if (!source) {
      this.els.controlError.textContent = "enter a source first";
      return; // client-side validation, no request
    }
    this.els.controlError.textContent = "";
    try {
      await this.api.startStream(source);
      this.running = true;
      this.els.startBtn.disabled = true;
      this.els.stopBtn.disabled = false;
    } catch (err) {
      this.els.controlError.textContent =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }

  private async stopAction(): Promise<void> {
    try {
      await this.api.stopStream();
    } catch (err) {
      if (!(err instanceof ApiError && err.code === "NOT_RUNNING")) {
        this.els.controlError.textContent = String(err);
      }
    }
    this.running = false;
    this.els.startBtn.disabled = false;
    this.els.stopBtn.disabled = true;
  }

  private async uploadAction(): Promise<void> {
    const file = this.els.uploadInput.files?.[0];
    if (!file) return;
    try {
      const stored = await this.api.upload(file.name, file);
      this.els.sourceInput.value = stored.descriptor;
      this.toast(`uploaded ${stored.filename} (${stored.frames} frames)`, "SAFE");
    } catch (err) {
      this.els.controlError.textContent =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }

  private toast(message: string, level: string): void {
    const node = el("div", {
      class: "toast",
      style: `border-color: ${styleToken(level)}`,
    }, message);
    this.els.toasts.append(node);
    this.schedule(() => node.remove(), 4000);
  }
}
