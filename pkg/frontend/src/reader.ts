// Reader for the FCVT tensor container written by the fcv toolkit.
//
// Layout (header integers big-endian, payload little-endian):
//   magic "FCVT" | version u8 | kind u8 (0 frequency, 1 temporal)
//   | fbs_k u8 | ndim u8 | dims u32 * ndim
//   | meta_len u16 | metadata JSON (UTF-8)
//   | payload float32-LE, row-major

import { readFileSync } from 'fs';

export type TensorKind = 'frequency' | 'temporal';

export interface TensorRecord {
  kind: TensorKind;
  fbsK: number;
  dims: number[];
  metadata: Record<string, unknown>;
  values: Float32Array;
}

const MAGIC = 'FCVT';
const VERSION = 1;
const KINDS: TensorKind[] = ['frequency', 'temporal'];

function ascii(view: DataView, offset: number, length: number): string {
  let out = '';
  for (let i = 0; i < length; i++) {
    out += String.fromCharCode(view.getUint8(offset + i));
  }
  return out;
}

/** Parse an FCVT buffer into a TensorRecord. */
export function parse(buffer: ArrayBuffer): TensorRecord {
  if (buffer.byteLength < 8) {
    throw new Error('file too short for an FCVT header');
  }
  const view = new DataView(buffer);
  let pos = 0;
  if (ascii(view, 0, 4) !== MAGIC) {
    throw new Error(`bad magic ${JSON.stringify(ascii(view, 0, 4))}`);
  }
  pos += 4;
  const version = view.getUint8(pos++);
  if (version !== VERSION) {
    throw new Error(`unsupported version ${version}`);
  }
  const kindCode = view.getUint8(pos++);
  if (kindCode >= KINDS.length) {
    throw new Error(`unknown tensor kind code ${kindCode}`);
  }
  const fbsK = view.getUint8(pos++);
  const ndim = view.getUint8(pos++);
  if (buffer.byteLength < pos + 4 * ndim + 2) {
    throw new Error('header truncated inside dims');
  }
  const dims: number[] = [];
  for (let i = 0; i < ndim; i++) {
    dims.push(view.getUint32(pos, false));
    pos += 4;
  }
  const metaLen = view.getUint16(pos, false);
  pos += 2;
  if (buffer.byteLength < pos + metaLen) {
    throw new Error('header truncated inside metadata');
  }
  const metaText = new TextDecoder('utf-8').decode(
    new Uint8Array(buffer, pos, metaLen),
  );
  let metadata: Record<string, unknown>;
  try {
    metadata = JSON.parse(metaText);
  } catch (err) {
    throw new Error(`metadata does not parse: ${err}`);
  }
  pos += metaLen;

  const count = dims.reduce((a, b) => a * b, 1);
  const expected = 4 * count;
  const actual = buffer.byteLength - pos;
  if (actual !== expected) {
    throw new Error(`payload holds ${actual} bytes, expected ${expected}`);
  }
  // payload is little-endian; typed arrays need 4-byte alignment, so copy
  const payload = new Uint8Array(buffer, pos, expected).slice();
  const values = new Float32Array(payload.buffer);
  return { kind: KINDS[kindCode], fbsK, dims, metadata, values };
}

/** Read and parse an FCVT file from disk. */
export function read(path: string): TensorRecord {
  const raw = readFileSync(path);
  const copy = raw.buffer.slice(raw.byteOffset, raw.byteOffset + raw.byteLength);
  return parse(copy);
}
