/**
 * Minimal RIFF/WAVE reader: PCM16, PCM24, PCM32 and float32, mono or
 * multi-channel (averaged down to mono), plus linear resampling to the
 * model rate. Also a PCM16 writer used by tests and fixture tooling.
 */

export class AudioDecodeFailure extends Error {}

export interface AudioClip {
  samples: Float64Array; // mono, in [-1, 1]
  sampleRateHz: number;
}

function readChunks(buf: Buffer): Map<string, Buffer> {
  if (buf.length < 12 || buf.toString("ascii", 0, 4) !== "RIFF" || buf.toString("ascii", 8, 12) !== "WAVE") {
    throw new AudioDecodeFailure("not a RIFF/WAVE file");
  }
  const chunks = new Map<string, Buffer>();
  let offset = 12;
  while (offset + 8 <= buf.length) {
    const id = buf.toString("ascii", offset, offset + 4);
    const size = buf.readUInt32LE(offset + 4);
    const start = offset + 8;
    if (start + size > buf.length) {
      throw new AudioDecodeFailure(`truncated chunk ${id}`);
    }
    if (!chunks.has(id)) {
      chunks.set(id, buf.subarray(start, start + size));
    }
    offset = start + size + (size % 2); // chunks are word-aligned
  }
  return chunks;
}

export function decodeWav(buf: Buffer): AudioClip {
  const chunks = readChunks(buf);
  const fmt = chunks.get("fmt ");
  const data = chunks.get("data");
  if (!fmt || fmt.length < 16) throw new AudioDecodeFailure("missing fmt chunk");
  if (!data) throw new AudioDecodeFailure("missing data chunk");

  const format = fmt.readUInt16LE(0);
  const channels = fmt.readUInt16LE(2);
  const sampleRateHz = fmt.readUInt32LE(4);
  const bits = fmt.readUInt16LE(14);
  if (channels < 1) throw new AudioDecodeFailure("zero channels");
  if (sampleRateHz < 1) throw new AudioDecodeFailure("zero sample rate");

  let decode: (frame: number, channel: number) => number;
  let bytesPerSample: number;
  if (format === 1 && bits === 16) {
    bytesPerSample = 2;
    decode = (f, c) => data.readInt16LE((f * channels + c) * 2) / 32768;
  } else if (format === 1 && bits === 24) {
    bytesPerSample = 3;
    decode = (f, c) => {
      const i = (f * channels + c) * 3;
      let v = data[i] | (data[i + 1] << 8) | (data[i + 2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608;
    };
  } else if (format === 1 && bits === 32) {
    bytesPerSample = 4;
    decode = (f, c) => data.readInt32LE((f * channels + c) * 4) / 2147483648;
  } else if (format === 3 && bits === 32) {
    bytesPerSample = 4;
    decode = (f, c) => data.readFloatLE((f * channels + c) * 4);
  } else {
    throw new AudioDecodeFailure(`unsupported encoding: format=${format} bits=${bits}`);
  }

  const frames = Math.floor(data.length / (bytesPerSample * channels));
  if (frames === 0) throw new AudioDecodeFailure("empty data chunk");
  const samples = new Float64Array(frames);
  for (let f = 0; f < frames; f++) {
    let acc = 0;
    for (let c = 0; c < channels; c++) acc += decode(f, c);
    samples[f] = acc / channels;
  }
  return { samples, sampleRateHz };
}

/** Linear-interpolation resample; identity when rates already match. */
export function resample(clip: AudioClip, targetRateHz: number): AudioClip {
  if (clip.sampleRateHz === targetRateHz) return clip;
  const ratio = clip.sampleRateHz / targetRateHz;
  const outLength = Math.max(1, Math.floor(clip.samples.length / ratio));
  const out = new Float64Array(outLength);
  for (let i = 0; i < outLength; i++) {
    const pos = i * ratio;
    const lo = Math.floor(pos);
    const hi = Math.min(lo + 1, clip.samples.length - 1);
    const frac = pos - lo;
    out[i] = clip.samples[lo] * (1 - frac) + clip.samples[hi] * frac;
  }
  return { samples: out, sampleRateHz: targetRateHz };
}

/** PCM16 mono encoder for fixtures and round-trip tests. */
export function encodeWavPcm16(samples: Float64Array | number[], sampleRateHz: number): Buffer {
  const n = samples.length;
  const data = Buffer.alloc(n * 2);
  for (let i = 0; i < n; i++) {
    const clamped = Math.max(-1, Math.min(1, samples[i]));
    data.writeInt16LE(Math.round(clamped * 32767), i * 2);
  }
  const header = Buffer.alloc(44);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(36 + data.length, 4);
  header.write("WAVE", 8, "ascii");
  header.write("fmt ", 12, "ascii");
  header.writeUInt32LE(16, 16);
  header.writeUInt16LE(1, 20); // PCM
  header.writeUInt16LE(1, 22); // mono
  header.writeUInt32LE(sampleRateHz, 24);
  header.writeUInt32LE(sampleRateHz * 2, 28);
  header.writeUInt16LE(2, 32);
  header.writeUInt16LE(16, 34);
  header.write("data", 36, "ascii");
  header.writeUInt32LE(data.length, 40);
  return Buffer.concat([header, data.subarray(0, n * 2)]);
}
