/**
 * Extraction jobs: audio in, UMLG logit files out.
 *
 * The dropout handicap computes the convolutional feature representation
 * once per utterance, replicates it k times, zeroes each replica's values
 * independently with probability p (plain zeroing, no inverted-dropout
 * rescaling), runs the transformer encoder and logit head on every replica,
 * and averages the k logit matrices elementwise in logit space. With p = 0
 * the path reduces to plain single-pass extraction.
 *
 * Determinism: all randomness comes from per-utterance xorshift64* streams
 * split from the job seed by a stable hash of the utterance id, so jobs are
 * byte-reproducible and utterance order does not matter.
 */

import { readFileSync, writeFileSync, mkdirSync } from "node:fs";
import { basename, join } from "node:path";

import { greedyDecode } from "./ctc.js";
import { encodeLogitFile } from "./logit_file.js";
import {
  LogitSource,
  Mat,
  Model,
  checkSourceCompatible,
  encode,
  featureEncoder,
  projectLogits,
} from "./model.js";
import { Xorshift64Star, utteranceRng } from "./rng.js";
import { AudioDecodeFailure, decodeWav, resample } from "./wav.js";

export interface ExtractionJob {
  audioPaths: string[];
  modelId: string;
  logitSource: LogitSource;
  dropoutP: number;
  numPasses: number;
  seed: number;
  outDir: string;
}

export interface JobReport {
  model_id: string;
  logit_source: LogitSource;
  dropout_p: number;
  num_passes: number;
  seed: number;
  successes: { audio: string; logit_path: string; w: number; q: number }[];
  failures: { audio: string; error: string }[];
}

export function validateJob(job: ExtractionJob): void {
  if (!(job.dropoutP >= 0 && job.dropoutP < 1)) {
    throw new RangeError(`dropout_p must be in [0, 1), got ${job.dropoutP}`);
  }
  if (!Number.isInteger(job.numPasses) || job.numPasses < 1) {
    throw new RangeError(`num_passes must be a positive integer, got ${job.numPasses}`);
  }
  if (job.dropoutP === 0 && job.numPasses !== 1) {
    throw new RangeError("dropout_p = 0 forces num_passes = 1");
  }
  if (job.dropoutP > 0 && job.numPasses < 2) {
    throw new RangeError("dropout_p > 0 requires num_passes >= 2");
  }
}

export function utteranceIdFor(audioPath: string): string {
  return basename(audioPath).replace(/\.[^.]*$/, "");
}

function dropoutMaskApply(features: Mat, p: number, rng: Xorshift64Star): Mat {
  const out = new Float64Array(features.data.length);
  for (let i = 0; i < out.length; i++) {
    out[i] = rng.bernoulli(p) ? 0 : features.data[i];
  }
  return { rows: features.rows, cols: features.cols, data: out };
}

/**
 * Encoder+head over k dropout-perturbed replicas of the features, averaged
 * in logit space. k = 1 with p = 0 is the plain single-pass path.
 */
export function handicappedLogits(
  model: Model,
  features: Mat,
  source: LogitSource,
  p: number,
  k: number,
  rng: Xorshift64Star
): Mat {
  let sum: Float64Array | null = null;
  let rows = 0;
  let cols = 0;
  for (let pass = 0; pass < k; pass++) {
    const replica = p > 0 ? dropoutMaskApply(features, p, rng) : features;
    const logits = projectLogits(model, encode(model, replica), source);
    if (sum === null) {
      sum = new Float64Array(logits.data.length);
      rows = logits.rows;
      cols = logits.cols;
    }
    for (let i = 0; i < sum.length; i++) sum[i] += logits.data[i];
  }
  for (let i = 0; i < sum!.length; i++) sum![i] /= k;
  return { rows, cols, data: sum! };
}

export function extractUtterance(
  model: Model,
  job: ExtractionJob,
  audioPath: string
): { logits: Mat; utteranceId: string } {
  const clip = resample(decodeWav(readFileSync(audioPath)), model.sampleRateHz);
  const features = featureEncoder(model, clip.samples);
  const utteranceId = utteranceIdFor(audioPath);
  const rng = utteranceRng(job.seed, utteranceId);
  const logits = handicappedLogits(
    model,
    features,
    job.logitSource,
    job.dropoutP,
    job.numPasses,
    rng
  );
  return { logits, utteranceId };
}

/** Run a whole job; per-file decode failures are recorded, not fatal. */
export function extract(model: Model, job: ExtractionJob): JobReport {
  validateJob(job);
  checkSourceCompatible(model, job.logitSource);
  mkdirSync(join(job.outDir), { recursive: true });

  const report: JobReport = {
    model_id: model.modelId,
    logit_source: job.logitSource,
    dropout_p: job.dropoutP,
    num_passes: job.numPasses,
    seed: job.seed,
    successes: [],
    failures: [],
  };
  for (const audioPath of job.audioPaths) {
    try {
      const { logits, utteranceId } = extractUtterance(model, job, audioPath);
      const outPath = join(job.outDir, `${utteranceId}.umlg`);
      const bytes = encodeLogitFile(logits.rows, logits.cols, logits.data, {
        utterance_id: utteranceId,
        model_id: model.modelId,
        logit_source: job.logitSource,
        dropout_p: job.dropoutP,
        num_passes: job.numPasses,
        sample_rate_hz: model.sampleRateHz,
      });
      writeFileSync(outPath, bytes);
      report.successes.push({
        audio: audioPath,
        logit_path: outPath,
        w: logits.rows,
        q: logits.cols,
      });
    } catch (exc) {
      if (exc instanceof AudioDecodeFailure || (exc as NodeJS.ErrnoException)?.code === "ENOENT") {
        report.failures.push({ audio: audioPath, error: String(exc) });
      } else {
        throw exc;
      }
    }
  }
  writeFileSync(
    join(job.outDir, "job_report.json"),
    JSON.stringify(report, null, 2) + "\n"
  );
  return report;
}

/**
 * Transcribe audio files with the checkpoint's ASR head; one hypothesis
 * line per input, order preserved, suitable for WER scoring against a
 * line-aligned reference file.
 */
export function transcribe(model: Model, audioPaths: string[], seed = 0): string[] {
  if (!model.asrHead) {
    throw new Error(`${model.modelId} has no ASR output layer`);
  }
  const job: ExtractionJob = {
    audioPaths,
    modelId: model.modelId,
    logitSource: "asr_head",
    dropoutP: 0,
    numPasses: 1,
    seed,
    outDir: "",
  };
  return audioPaths.map((audioPath) => {
    const { logits } = extractUtterance(model, job, audioPath);
    return greedyDecode(logits, model.asrHead!).join(" ");
  });
}
