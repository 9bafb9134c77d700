// Live channel over the backend's /<ws-prefix>/live socket.  Binary
// messages are overlay frames (lossy by design), text messages are JSON
// events (never dropped upstream).  Frames land in a latest-wins slot the
// renderer drains on its own tick, so a slow paint can never back up the
// socket.

export interface WsLike {
  binaryType: string;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

export type ChannelState = "idle" | "connecting" | "open" | "stalled" | "closed";

export interface LiveHandlers {
  onEvent?: (event: Record<string, any>) => void;
  onState?: (state: ChannelState) => void;
}

const STALL_AFTER_MS = 3000;

export class LiveChannel {
  private socket: WsLike | null = null;
  private frame: Uint8Array | null = null;
  private frameDirty = false;
  private lastFrameAt = 0;
  private opened = false;
  private stateValue: ChannelState = "idle";

  constructor(
    private wsFactory: WsFactory,
    private handlers: LiveHandlers = {},
    private clock: () => number = () => Date.now()
  ) {}

  get state(): ChannelState {
    return this.stateValue;
  }

  /** Open the live socket on a prefix, closing any previous one first. */
  connect(wsPrefix: string, base = ""): void {
    this.disconnect();
    this.setState("connecting");
    const socket = this.wsFactory(`${base}${wsPrefix}/live`);
    socket.binaryType = "arraybuffer";
    socket.onopen = () => {
      this.opened = true;
      this.lastFrameAt = this.clock();
      this.setState("open");
    };
    socket.onclose = () => {
      if (this.socket === socket) {
        this.opened = false;
        this.setState("closed");
      }
    };
    socket.onerror = () => {
      if (this.socket === socket) {
        this.opened = false;
        this.setState("closed");
      }
    };
    socket.onmessage = (ev) => {
      if (this.socket !== socket) return;
      if (typeof ev.data === "string") {
        this.handlers.onEvent?.(JSON.parse(ev.data));
      } else {
        this.frame = toBytes(ev.data);
        this.frameDirty = true;
        this.lastFrameAt = this.clock();
        if (this.stateValue === "stalled") this.setState("open");
      }
    };
    this.socket = socket;
  }

  disconnect(): void {
    if (this.socket) {
      const old = this.socket;
      this.socket = null;
      this.opened = false;
      old.onmessage = null;
      old.onclose = null;
      old.onerror = null;
      old.close();
      this.setState("closed");
    }
    this.frame = null;
    this.frameDirty = false;
  }

  /** Latest frame if one arrived since the previous take, else null. */
  takeFrame(): Uint8Array | null {
    if (!this.frameDirty) return null;
    this.frameDirty = false;
    return this.frame;
  }

  /** Re-evaluate staleness; call from the UI poll loop. */
  tick(): void {
    if (this.opened && this.stateValue === "open"
        && this.clock() - this.lastFrameAt > STALL_AFTER_MS) {
      this.setState("stalled");
    }
  }

  private setState(next: ChannelState): void {
    if (this.stateValue !== next) {
      this.stateValue = next;
      this.handlers.onState?.(next);
    }
  }
}

function toBytes(data: unknown): Uint8Array {
  if (data instanceof Uint8Array) return data;
  if (data instanceof ArrayBuffer) return new Uint8Array(data);
  throw new TypeError("unsupported binary frame payload");
}
