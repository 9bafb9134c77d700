import { describe, expect, it } from "vitest";

import { ClipFormatError, parseClip, pngDataUrl } from "../src/clipfmt.js";

function writeClip(metadata: object, frames: Uint8Array[]): Uint8Array {
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

const FRAMES = [
  Uint8Array.from([0x89, 0x50, 0x4e, 0x47, 1, 2, 3]),
  Uint8Array.from([0x89, 0x50, 0x4e, 0x47, 9]),
];
const META = { session_id: "s1", frame_indices: [10, 11], timestamps_ms: [333, 366] };

describe("clip container parsing", () => {
  it("round-trips metadata and frames", () => {
    const clip = parseClip(writeClip(META, FRAMES));
    expect(clip.metadata).toEqual(META);
    expect(clip.frames.length).toBe(2);
    expect([...clip.frames[0]]).toEqual([...FRAMES[0]]);
    expect([...clip.frames[1]]).toEqual([...FRAMES[1]]);
  });

  it("accepts an empty frame list", () => {
    const clip = parseClip(writeClip(META, []));
    expect(clip.frames).toEqual([]);
  });

  it("rejects a bad magic", () => {
    const bytes = writeClip(META, FRAMES);
    bytes[0] = 0x58;
    expect(() => parseClip(bytes)).toThrow(ClipFormatError);
    expect(() => parseClip(bytes)).toThrow(/magic/);
  });

  it("rejects truncation inside metadata", () => {
    const bytes = writeClip(META, FRAMES).subarray(0, 14);
    expect(() => parseClip(bytes)).toThrow(/metadata/);
  });

  it("rejects truncation inside a frame payload", () => {
    const whole = writeClip(META, FRAMES);
    expect(() => parseClip(whole.subarray(0, whole.length - 2))).toThrow(/frame 1/);
  });

  it("rejects a dangling length field", () => {
    const whole = writeClip(META, []);
    const withStub = new Uint8Array(whole.length + 2);
    withStub.set(whole, 0);
    expect(() => parseClip(withStub)).toThrow(/frame 0 length/);
  });

  it("encodes playable data urls", () => {
    const url = pngDataUrl(FRAMES[0]);
    expect(url.startsWith("data:image/png;base64,")).toBe(true);
    const decoded = Uint8Array.from(atob(url.split(",")[1]), (c) => c.charCodeAt(0));
    expect([...decoded]).toEqual([...FRAMES[0]]);
  });
});
