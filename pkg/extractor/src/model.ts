/**
 * wav2vec-family inference on local JSON checkpoints.
 *
 * The architecture mirrors the published wav2vec2 geometry where it matters
 * for the exchange contract: a 7-layer convolutional feature encoder with
 * kernels (10,3,3,3,3,2,2) and strides (5,2,2,2,2,2,2), i.e. one window per
 * 320 input samples (20 ms at 16 kHz) with a 400-sample receptive field, so
 * one second of 16 kHz audio yields 49 windows. On top sits a single
 * pre-norm transformer block and, depending on the checkpoint, an ASR head
 * (token logits), a contrastive codebook (latent-token scores), or nothing,
 * in which case the raw encoder output serves as the logits.
 *
 * Checkpoints are JSON ("umx-checkpoint-v1"); pretrained weights are not
 * bundled -- `makeCheckpoint` generates seeded random ones for self-tests
 * and demos.
 */

import { readFileSync } from "node:fs";
import { Xorshift64Star, streamSeed } from "./rng.js";
import { AudioDecodeFailure } from "./wav.js";

export class ModelLoadFailure extends Error {}

export const CHECKPOINT_FORMAT = "umx-checkpoint-v1";
export const CONV_KERNELS = [10, 3, 3, 3, 3, 2, 2];
export const CONV_STRIDES = [5, 2, 2, 2, 2, 2, 2];

export type LogitSource = "contrastive" | "asr_head" | "encoder_raw";
export type ModelFamily = "wav2vec" | "wav2vec2";

export interface ConvLayer {
  inChannels: number;
  outChannels: number;
  kernel: number;
  stride: number;
  weight: Float64Array; // [out][in][kernel]
  bias: Float64Array; // [out]
}

export interface EncoderBlock {
  dim: number;
  hidden: number;
  ln1Gain: Float64Array;
  ln1Bias: Float64Array;
  wq: Float64Array; // [dim][dim]
  wk: Float64Array;
  wv: Float64Array;
  wo: Float64Array;
  ln2Gain: Float64Array;
  ln2Bias: Float64Array;
  mlpW1: Float64Array; // [dim][hidden]
  mlpB1: Float64Array;
  mlpW2: Float64Array; // [hidden][dim]
  mlpB2: Float64Array;
}

export interface AsrHead {
  weight: Float64Array; // [dim][vocab]
  bias: Float64Array;
  vocab: string[];
  blankIndex: number;
  wordDelimIndex: number;
}

export interface Model {
  modelId: string;
  family: ModelFamily;
  sampleRateHz: number;
  conv: ConvLayer[];
  encoder: EncoderBlock;
  asrHead: AsrHead | null;
  codebook: Float64Array | null; // [codes][dim]
  codebookSize: number;
}

/** Rows-by-cols matrix stored flat, row-major. */
export interface Mat {
  rows: number;
  cols: number;
  data: Float64Array;
}

export function checkSourceCompatible(model: Model, source: LogitSource): void {
  if (source === "contrastive") {
    if (model.family !== "wav2vec") {
      throw new ModelLoadFailure(
        `contrastive logits need a wav2vec-family checkpoint, ${model.modelId} is ${model.family}`
      );
    }
    if (!model.codebook) {
      throw new ModelLoadFailure(`${model.modelId} has no codebook for contrastive scoring`);
    }
  }
  if (source === "asr_head" && !model.asrHead) {
    throw new ModelLoadFailure(`${model.modelId} has no ASR output layer`);
  }
}

export function logitWidth(model: Model, source: LogitSource): number {
  if (source === "contrastive") return model.codebookSize;
  if (source === "asr_head") return model.asrHead!.vocab.length;
  return model.encoder.dim;
}

// ---------------------------------------------------------------------------
// inference
// ---------------------------------------------------------------------------

function gelu(x: number): number {
  // tanh approximation, the variant used by the reference encoders
  return 0.5 * x * (1 + Math.tanh(Math.sqrt(2 / Math.PI) * (x + 0.044715 * x * x * x)));
}

export function convFrameCount(inputLength: number): number {
  let n = inputLength;
  for (let i = 0; i < CONV_KERNELS.length; i++) {
    n = Math.floor((n - CONV_KERNELS[i]) / CONV_STRIDES[i]) + 1;
    if (n < 1) return 0;
  }
  return n;
}

/** Convolutional feature encoder: mono samples -> (frames, dim) features. */
export function featureEncoder(model: Model, samples: Float64Array): Mat {
  let frames = samples.length;
  let channels = 1;
  let current = samples;
  for (const layer of model.conv) {
    const outFrames = Math.floor((frames - layer.kernel) / layer.stride) + 1;
    if (outFrames < 1) {
      throw new AudioDecodeFailure(
        `audio too short: ${samples.length} samples yield no analysis window`
      );
    }
    const out = new Float64Array(outFrames * layer.outChannels);
    for (let t = 0; t < outFrames; t++) {
      const start = t * layer.stride;
      for (let o = 0; o < layer.outChannels; o++) {
        let acc = layer.bias[o];
        const wBase = o * layer.inChannels * layer.kernel;
        for (let c = 0; c < layer.inChannels; c++) {
          const wRow = wBase + c * layer.kernel;
          for (let k = 0; k < layer.kernel; k++) {
            acc += layer.weight[wRow + k] * current[(start + k) * channels + c];
          }
        }
        out[t * layer.outChannels + o] = gelu(acc);
      }
    }
    current = out;
    frames = outFrames;
    channels = layer.outChannels;
  }
  return { rows: frames, cols: channels, data: current };
}

function layerNorm(x: Mat, gain: Float64Array, bias: Float64Array): Mat {
  const out = new Float64Array(x.rows * x.cols);
  for (let r = 0; r < x.rows; r++) {
    let mean = 0;
    for (let c = 0; c < x.cols; c++) mean += x.data[r * x.cols + c];
    mean /= x.cols;
    let variance = 0;
    for (let c = 0; c < x.cols; c++) {
      const d = x.data[r * x.cols + c] - mean;
      variance += d * d;
    }
    variance /= x.cols;
    const inv = 1 / Math.sqrt(variance + 1e-5);
    for (let c = 0; c < x.cols; c++) {
      out[r * x.cols + c] = (x.data[r * x.cols + c] - mean) * inv * gain[c] + bias[c];
    }
  }
  return { rows: x.rows, cols: x.cols, data: out };
}

function matmul(x: Mat, w: Float64Array, wCols: number): Mat {
  const out = new Float64Array(x.rows * wCols);
  for (let r = 0; r < x.rows; r++) {
    for (let k = 0; k < x.cols; k++) {
      const xv = x.data[r * x.cols + k];
      if (xv === 0) continue;
      const wBase = k * wCols;
      const oBase = r * wCols;
      for (let c = 0; c < wCols; c++) {
        out[oBase + c] += xv * w[wBase + c];
      }
    }
  }
  return { rows: x.rows, cols: wCols, data: out };
}

function selfAttention(x: Mat, block: EncoderBlock): Mat {
  const d = block.dim;
  const q = matmul(x, block.wq, d);
  const k = matmul(x, block.wk, d);
  const v = matmul(x, block.wv, d);
  const scale = 1 / Math.sqrt(d);
  const mixed = new Float64Array(x.rows * d);
  const scores = new Float64Array(x.rows);
  for (let i = 0; i < x.rows; i++) {
    let max = -Infinity;
    for (let j = 0; j < x.rows; j++) {
      let dot = 0;
      for (let c = 0; c < d; c++) dot += q.data[i * d + c] * k.data[j * d + c];
      scores[j] = dot * scale;
      if (scores[j] > max) max = scores[j];
    }
    let denom = 0;
    for (let j = 0; j < x.rows; j++) {
      scores[j] = Math.exp(scores[j] - max);
      denom += scores[j];
    }
    for (let j = 0; j < x.rows; j++) {
      const wgt = scores[j] / denom;
      if (wgt === 0) continue;
      for (let c = 0; c < d; c++) mixed[i * d + c] += wgt * v.data[j * d + c];
    }
  }
  return matmul({ rows: x.rows, cols: d, data: mixed }, block.wo, d);
}

/** Pre-norm transformer block over the (possibly dropped-out) features. */
export function encode(model: Model, features: Mat): Mat {
  const block = model.encoder;
  const d = block.dim;
  const attn = selfAttention(layerNorm(features, block.ln1Gain, block.ln1Bias), block);
  const h = new Float64Array(features.rows * d);
  for (let i = 0; i < h.length; i++) h[i] = features.data[i] + attn.data[i];
  const hm: Mat = { rows: features.rows, cols: d, data: h };

  const normed = layerNorm(hm, block.ln2Gain, block.ln2Bias);
  const inner = matmul(normed, block.mlpW1, block.hidden);
  for (let r = 0; r < inner.rows; r++) {
    for (let c = 0; c < block.hidden; c++) {
      inner.data[r * block.hidden + c] = gelu(
        inner.data[r * block.hidden + c] + block.mlpB1[c]
      );
    }
  }
  const mlp = matmul(inner, block.mlpW2, d);
  const out = new Float64Array(features.rows * d);
  for (let r = 0; r < features.rows; r++) {
    for (let c = 0; c < d; c++) {
      out[r * d + c] = h[r * d + c] + mlp.data[r * d + c] + block.mlpB2[c];
    }
  }
  return { rows: features.rows, cols: d, data: out };
}

/** Encoder states -> logits for the requested source. */
export function projectLogits(model: Model, encoded: Mat, source: LogitSource): Mat {
  if (source === "encoder_raw") return encoded;
  if (source === "asr_head") {
    const head = model.asrHead!;
    const v = head.vocab.length;
    const out = matmul(encoded, head.weight, v);
    for (let r = 0; r < out.rows; r++) {
      for (let c = 0; c < v; c++) out.data[r * v + c] += head.bias[c];
    }
    return out;
  }
  // contrastive: dot products of encoder states against the codebook
  const codes = model.codebookSize;
  const d = model.encoder.dim;
  const out = new Float64Array(encoded.rows * codes);
  for (let r = 0; r < encoded.rows; r++) {
    for (let q = 0; q < codes; q++) {
      let dot = 0;
      for (let c = 0; c < d; c++) {
        dot += encoded.data[r * d + c] * model.codebook![q * d + c];
      }
      out[r * codes + q] = dot;
    }
  }
  return { rows: encoded.rows, cols: codes, data: out };
}

// ---------------------------------------------------------------------------
// checkpoint I/O
// ---------------------------------------------------------------------------

function asArray(value: unknown, name: string, expected: number): Float64Array {
  if (!Array.isArray(value) || value.length !== expected) {
    throw new ModelLoadFailure(`checkpoint field ${name} must be a ${expected}-element array`);
  }
  const out = new Float64Array(expected);
  for (let i = 0; i < expected; i++) {
    const v = value[i];
    if (typeof v !== "number" || !Number.isFinite(v)) {
      throw new ModelLoadFailure(`checkpoint field ${name}[${i}] is not a finite number`);
    }
    out[i] = v;
  }
  return out;
}

export function parseCheckpoint(json: string, pathForErrors: string): Model {
  let obj: any;
  try {
    obj = JSON.parse(json);
  } catch (exc) {
    throw new ModelLoadFailure(`${pathForErrors}: not valid JSON: ${exc}`);
  }
  if (obj?.format !== CHECKPOINT_FORMAT) {
    throw new ModelLoadFailure(`${pathForErrors}: unknown checkpoint format ${obj?.format}`);
  }
  if (obj.family !== "wav2vec" && obj.family !== "wav2vec2") {
    throw new ModelLoadFailure(`${pathForErrors}: unknown family ${obj.family}`);
  }
  const convLayers = obj.conv_layers;
  if (!Array.isArray(convLayers) || convLayers.length !== CONV_KERNELS.length) {
    throw new ModelLoadFailure(`${pathForErrors}: expected ${CONV_KERNELS.length} conv layers`);
  }
  const conv: ConvLayer[] = convLayers.map((layer: any, i: number) => {
    if (layer.kernel !== CONV_KERNELS[i] || layer.stride !== CONV_STRIDES[i]) {
      throw new ModelLoadFailure(
        `${pathForErrors}: conv layer ${i} geometry must be kernel=${CONV_KERNELS[i]} stride=${CONV_STRIDES[i]}`
      );
    }
    return {
      inChannels: layer.in,
      outChannels: layer.out,
      kernel: layer.kernel,
      stride: layer.stride,
      weight: asArray(layer.weight, `conv[${i}].weight`, layer.out * layer.in * layer.kernel),
      bias: asArray(layer.bias, `conv[${i}].bias`, layer.out),
    };
  });
  if (conv[0].inChannels !== 1) {
    throw new ModelLoadFailure(`${pathForErrors}: first conv layer must take 1 channel`);
  }

  const e = obj.encoder;
  const dim = e?.dim;
  const hidden = e?.hidden;
  if (!Number.isInteger(dim) || dim < 2 || !Number.isInteger(hidden) || hidden < 1) {
    throw new ModelLoadFailure(`${pathForErrors}: bad encoder dims`);
  }
  if (conv[conv.length - 1].outChannels !== dim) {
    throw new ModelLoadFailure(`${pathForErrors}: conv output width must equal encoder dim`);
  }
  const encoder: EncoderBlock = {
    dim,
    hidden,
    ln1Gain: asArray(e.ln1_gain, "encoder.ln1_gain", dim),
    ln1Bias: asArray(e.ln1_bias, "encoder.ln1_bias", dim),
    wq: asArray(e.wq, "encoder.wq", dim * dim),
    wk: asArray(e.wk, "encoder.wk", dim * dim),
    wv: asArray(e.wv, "encoder.wv", dim * dim),
    wo: asArray(e.wo, "encoder.wo", dim * dim),
    ln2Gain: asArray(e.ln2_gain, "encoder.ln2_gain", dim),
    ln2Bias: asArray(e.ln2_bias, "encoder.ln2_bias", dim),
    mlpW1: asArray(e.mlp_w1, "encoder.mlp_w1", dim * hidden),
    mlpB1: asArray(e.mlp_b1, "encoder.mlp_b1", hidden),
    mlpW2: asArray(e.mlp_w2, "encoder.mlp_w2", hidden * dim),
    mlpB2: asArray(e.mlp_b2, "encoder.mlp_b2", dim),
  };

  let asrHead: AsrHead | null = null;
  if (obj.asr_head) {
    const h = obj.asr_head;
    if (!Array.isArray(h.vocab) || h.vocab.length < 2) {
      throw new ModelLoadFailure(`${pathForErrors}: asr head needs a vocab of >= 2 tokens`);
    }
    asrHead = {
      vocab: h.vocab.map(String),
      blankIndex: h.blank_index,
      wordDelimIndex: h.word_delim_index,
      weight: asArray(h.weight, "asr_head.weight", dim * h.vocab.length),
      bias: asArray(h.bias, "asr_head.bias", h.vocab.length),
    };
    if (
      !Number.isInteger(asrHead.blankIndex) ||
      asrHead.blankIndex < 0 ||
      asrHead.blankIndex >= asrHead.vocab.length
    ) {
      throw new ModelLoadFailure(`${pathForErrors}: asr head blank_index out of range`);
    }
  }

  let codebook: Float64Array | null = null;
  let codebookSize = 0;
  if (obj.codebook) {
    codebookSize = obj.codebook.size;
    if (!Number.isInteger(codebookSize) || codebookSize < 2) {
      throw new ModelLoadFailure(`${pathForErrors}: codebook size must be >= 2`);
    }
    codebook = asArray(obj.codebook.vectors, "codebook.vectors", codebookSize * dim);
  }

  const sampleRateHz = obj.sample_rate_hz;
  if (!Number.isInteger(sampleRateHz) || sampleRateHz < 1) {
    throw new ModelLoadFailure(`${pathForErrors}: bad sample_rate_hz`);
  }

  return {
    modelId: String(obj.model_id ?? "unnamed"),
    family: obj.family,
    sampleRateHz,
    conv,
    encoder,
    asrHead,
    codebook,
    codebookSize,
  };
}

export function loadCheckpoint(path: string): Model {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch (exc) {
    throw new ModelLoadFailure(`cannot read checkpoint ${path}: ${exc}`);
  }
  return parseCheckpoint(text, path);
}

// ---------------------------------------------------------------------------
// seeded checkpoint generation (test/demo stand-in for pretrained weights)
// ---------------------------------------------------------------------------

export interface MakeCheckpointOptions {
  modelId: string;
  family: ModelFamily;
  dim?: number;
  hidden?: number;
  seed?: number;
  withAsrHead?: boolean;
  codebookSize?: number; // wav2vec family only; 0 disables
}

export const DEFAULT_VOCAB = ["-", "|", ..."abcdefghijklmnopqrstuvwxyz'"];

export function makeCheckpoint(options: MakeCheckpointOptions): object {
  const dim = options.dim ?? 24;
  const hidden = options.hidden ?? 4 * dim;
  const rng = new Xorshift64Star(streamSeed(BigInt(options.seed ?? 0), 0n));
  const gauss = (n: number, scale: number) => {
    const out = new Array<number>(n);
    for (let i = 0; i < n; i++) out[i] = rng.nextGaussian() * scale;
    return out;
  };
  const ones = (n: number) => new Array<number>(n).fill(1);
  const zeros = (n: number) => new Array<number>(n).fill(0);

  const channels = [1, dim, dim, dim, dim, dim, dim, dim];
  const conv_layers = CONV_KERNELS.map((kernel, i) => ({
    in: channels[i],
    out: channels[i + 1],
    kernel,
    stride: CONV_STRIDES[i],
    weight: gauss(channels[i + 1] * channels[i] * kernel, 1 / Math.sqrt(channels[i] * kernel)),
    bias: zeros(channels[i + 1]),
  }));

  const proj = () => gauss(dim * dim, 1 / Math.sqrt(dim));
  const checkpoint: any = {
    format: CHECKPOINT_FORMAT,
    model_id: options.modelId,
    family: options.family,
    sample_rate_hz: 16000,
    conv_layers,
    encoder: {
      dim,
      hidden,
      ln1_gain: ones(dim),
      ln1_bias: zeros(dim),
      wq: proj(),
      wk: proj(),
      wv: proj(),
      wo: proj(),
      ln2_gain: ones(dim),
      ln2_bias: zeros(dim),
      mlp_w1: gauss(dim * hidden, 1 / Math.sqrt(dim)),
      mlp_b1: zeros(hidden),
      mlp_w2: gauss(hidden * dim, 1 / Math.sqrt(hidden)),
      mlp_b2: zeros(dim),
    },
    asr_head: null,
    codebook: null,
  };

  if (options.withAsrHead ?? true) {
    checkpoint.asr_head = {
      vocab: DEFAULT_VOCAB,
      blank_index: 0,
      word_delim_index: 1,
      weight: gauss(dim * DEFAULT_VOCAB.length, 1 / Math.sqrt(dim)),
      bias: zeros(DEFAULT_VOCAB.length),
    };
  }
  const codebookSize = options.codebookSize ?? (options.family === "wav2vec" ? 32 : 0);
  if (codebookSize > 0) {
    checkpoint.codebook = {
      size: codebookSize,
      vectors: gauss(codebookSize * dim, 1 / Math.sqrt(dim)),
    };
  }
  return checkpoint;
}
