/**
 * Writer for the UMLG logit exchange format consumed by the evaluation
 * toolkit: "UMLG" magic, version 0x01 0x00, two reserved zero bytes, dtype
 * code 0x01 (float32 LE), order code 0x01 (row-major), w and q as uint32 LE,
 * a uint32 LE metadata length, UTF-8 JSON metadata, then w*q*4 payload
 * bytes. A reader lives here too for round-trip tests.
 */

export interface LogitMetadata {
  utterance_id: string;
  model_id: string;
  logit_source: string;
  dropout_p: number;
  num_passes: number;
  sample_rate_hz: number;
  /** Job seed; an extra key beyond the exchange schema, readers ignore it. */
  seed: number;
}

const MAGIC = "UMLG";
const HEADER_SIZE = 22;

export function encodeLogitFile(
  rows: number,
  cols: number,
  values: Float64Array | Float32Array,
  meta: LogitMetadata
): Buffer {
  if (values.length !== rows * cols) {
    throw new Error(`payload has ${values.length} values, expected ${rows * cols}`);
  }
  const metaKeys = Object.keys(meta).sort() as (keyof LogitMetadata)[];
  const sorted: Record<string, unknown> = {};
  for (const key of metaKeys) sorted[key] = meta[key];
  const metaBytes = Buffer.from(JSON.stringify(sorted), "utf-8");

  const header = Buffer.alloc(HEADER_SIZE);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt8(1, 4);
  header.writeUInt8(0, 5);
  header.writeUInt8(0, 6);
  header.writeUInt8(0, 7);
  header.writeUInt8(1, 8); // float32 little-endian
  header.writeUInt8(1, 9); // row-major
  header.writeUInt32LE(rows, 10);
  header.writeUInt32LE(cols, 14);
  header.writeUInt32LE(metaBytes.length, 18);

  const payload = Buffer.alloc(rows * cols * 4);
  for (let i = 0; i < values.length; i++) {
    const v = Math.fround(values[i]);
    if (!Number.isFinite(v)) {
      throw new Error(`non-finite logit at flat index ${i}`);
    }
    payload.writeFloatLE(v, i * 4);
  }
  return Buffer.concat([header, metaBytes, payload]);
}

export interface DecodedLogitFile {
  rows: number;
  cols: number;
  values: Float32Array;
  meta: LogitMetadata;
}

export function decodeLogitFile(buf: Buffer): DecodedLogitFile {
  if (buf.length < HEADER_SIZE || buf.toString("ascii", 0, 4) !== MAGIC) {
    throw new Error("bad magic");
  }
  if (buf.readUInt8(4) !== 1 || buf.readUInt8(5) !== 0) throw new Error("bad version");
  if (buf.readUInt8(8) !== 1) throw new Error("bad dtype code");
  if (buf.readUInt8(9) !== 1) throw new Error("bad order code");
  const rows = buf.readUInt32LE(10);
  const cols = buf.readUInt32LE(14);
  const metaLen = buf.readUInt32LE(18);
  const meta = JSON.parse(
    buf.toString("utf-8", HEADER_SIZE, HEADER_SIZE + metaLen)
  ) as LogitMetadata;
  const payload = buf.subarray(HEADER_SIZE + metaLen);
  if (payload.length !== rows * cols * 4) {
    throw new Error(`payload is ${payload.length} bytes, expected ${rows * cols * 4}`);
  }
  const values = new Float32Array(rows * cols);
  for (let i = 0; i < values.length; i++) values[i] = payload.readFloatLE(i * 4);
  return { rows, cols, values, meta };
}
