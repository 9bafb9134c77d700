import { WsLike } from "../src/live.js";

export function writeClip(metadata: object, frames: Uint8Array[]): Uint8Array {
  const enc = new TextEncoder();
  const meta = enc.encode(JSON.stringify(metadata));
  let size = 8 + 4 + meta.length;
  for (const f of frames) size += 4 + f.length;
  const out = new Uint8Array(size);
  const view = new DataView(out.buffer);
  out.set(enc.encode("EWCLIP01"), 0);
  let pos = 8;
  view.setUint32(pos, meta.length, true);
  pos += 4;
  out.set(meta, pos);
  pos += meta.length;
  for (const f of frames) {
    view.setUint32(pos, f.length, true);
    pos += 4;
    out.set(f, pos);
    pos += f.length;
  }
  return out;
}

export class FakeSocket implements WsLike {
  binaryType = "blob";
  onopen: ((ev?: unknown) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  closed = false;

  constructor(readonly url: string) {}

  close(): void {
    this.closed = true;
    this.onclose?.();
  }

  open(): void {
    this.onopen?.();
  }

  frame(bytes: Uint8Array): void {
    this.onmessage?.({ data: bytes });
  }

  text(event: object): void {
    this.onmessage?.({ data: JSON.stringify(event) });
  }
}

export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
