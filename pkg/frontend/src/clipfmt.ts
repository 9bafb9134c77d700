// Alert clip container: "EWCLIP01" magic, u32le metadata length, JSON
// metadata, then per frame a u32le byte length followed by PNG bytes.
// Parsed client-side so playback needs no codec support.

const MAGIC = "EWCLIP01";

export interface ClipMetadata {
  session_id?: string;
  frame_indices?: number[];
  timestamps_ms?: number[];
  thumbnail_frame?: number;
  [key: string]: unknown;
}

export interface ClipArchive {
  metadata: ClipMetadata;
  frames: Uint8Array[];
}

export class ClipFormatError extends Error {}

export function parseClip(data: ArrayBuffer | Uint8Array): ClipArchive {
  const bytes = data instanceof Uint8Array ? data : new Uint8Array(data);
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);

  if (bytes.length < MAGIC.length + 4) {
    throw new ClipFormatError("clip truncated before header");
  }
  const magic = new TextDecoder().decode(bytes.subarray(0, MAGIC.length));
  if (magic !== MAGIC) {
    throw new ClipFormatError(`bad clip magic ${JSON.stringify(magic)}`);
  }

  let pos = MAGIC.length;
  const metaLen = view.getUint32(pos, true);
  pos += 4;
  if (pos + metaLen > bytes.length) {
    throw new ClipFormatError("clip truncated inside metadata");
  }
  const metadata = JSON.parse(
    new TextDecoder().decode(bytes.subarray(pos, pos + metaLen))
  ) as ClipMetadata;
  pos += metaLen;

  const frames: Uint8Array[] = [];
  while (pos < bytes.length) {
    if (pos + 4 > bytes.length) {
      throw new ClipFormatError(`clip truncated at frame ${frames.length} length`);
    }
    const frameLen = view.getUint32(pos, true);
    pos += 4;
    if (pos + frameLen > bytes.length) {
      throw new ClipFormatError(`clip truncated inside frame ${frames.length}`);
    }
    frames.push(bytes.subarray(pos, pos + frameLen));
    pos += frameLen;
  }
  return { metadata, frames };
}

export function pngDataUrl(png: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < png.length; i += chunk) {
    binary += String.fromCharCode(...png.subarray(i, i + chunk));
  }
  return `data:image/png;base64,${btoa(binary)}`;
}
