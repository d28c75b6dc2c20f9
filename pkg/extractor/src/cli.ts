#!/usr/bin/env node
/**
 * umx-extract: produce UMLG logit files and transcripts from audio.
 *
 *   umx-extract extract --model M --source S --dropout P --passes K \
 *       --seed N --out DIR AUDIO...
 *   umx-extract transcribe --model M [--seed N] [--out FILE] AUDIO...
 *   umx-extract make-model --id NAME --family wav2vec|wav2vec2 [--dim D] \
 *       [--seed N] [--no-asr-head] [--codebook Q] --out FILE
 *   umx-extract vocab --model M [--out FILE]
 *
 * --model takes a checkpoint path, or a name resolved as
 * <--model-dir>/<name>.json (default model dir: $UMX_MODEL_DIR or cwd).
 * Exit codes: 0 ok, 1 job error, 2 usage error, 3 model/format error.
 */

import { existsSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";

import { extract, transcribe } from "./extract.js";
import {
  LogitSource,
  Model,
  ModelFamily,
  ModelLoadFailure,
  loadCheckpoint,
  makeCheckpoint,
} from "./model.js";

function usageError(message: string): never {
  process.stderr.write(`umx-extract: error: ${message}\n`);
  process.exit(2);
}

function resolveModel(name: string, modelDir: string | undefined): Model {
  const candidates = existsSync(name)
    ? [name]
    : [join(modelDir ?? process.env.UMX_MODEL_DIR ?? ".", `${name}.json`)];
  for (const candidate of candidates) {
    if (existsSync(candidate)) return loadCheckpoint(candidate);
  }
  throw new ModelLoadFailure(`cannot resolve model ${name} (looked at ${candidates.join(", ")})`);
}

function cmdExtract(argv: string[]): number {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      model: { type: "string" },
      "model-dir": { type: "string" },
      source: { type: "string", default: "asr_head" },
      dropout: { type: "string", default: "0" },
      passes: { type: "string" },
      seed: { type: "string", default: "0" },
      out: { type: "string" },
    },
  });
  if (!values.model) usageError("--model is required");
  if (!values.out) usageError("--out is required");
  if (positionals.length === 0) usageError("no audio files given");
  const source = values.source as LogitSource;
  if (!["contrastive", "asr_head", "encoder_raw"].includes(source)) {
    usageError(`unknown --source ${values.source}`);
  }
  const dropoutP = Number(values.dropout);
  if (!Number.isFinite(dropoutP)) usageError(`bad --dropout ${values.dropout}`);
  const numPasses = values.passes ? Number(values.passes) : dropoutP > 0 ? 100 : 1;

  const model = resolveModel(values.model, values["model-dir"]);
  const report = extract(model, {
    audioPaths: positionals,
    modelId: model.modelId,
    logitSource: source,
    dropoutP,
    numPasses,
    seed: Number(values.seed),
    outDir: values.out,
  });
  process.stdout.write(
    `${report.successes.length} extracted, ${report.failures.length} failed; ` +
      `report: ${join(values.out, "job_report.json")}\n`
  );
  return report.successes.length > 0 || report.failures.length === 0 ? 0 : 1;
}

function cmdTranscribe(argv: string[]): number {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      model: { type: "string" },
      "model-dir": { type: "string" },
      seed: { type: "string", default: "0" },
      out: { type: "string" },
    },
  });
  if (!values.model) usageError("--model is required");
  if (positionals.length === 0) usageError("no audio files given");
  const model = resolveModel(values.model, values["model-dir"]);
  const lines = transcribe(model, positionals, Number(values.seed));
  const text = lines.join("\n") + "\n";
  if (values.out) {
    writeFileSync(values.out, text);
  } else {
    process.stdout.write(text);
  }
  return 0;
}

function cmdMakeModel(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      id: { type: "string" },
      family: { type: "string", default: "wav2vec2" },
      dim: { type: "string", default: "24" },
      seed: { type: "string", default: "0" },
      out: { type: "string" },
      "no-asr-head": { type: "boolean", default: false },
      codebook: { type: "string" },
    },
  });
  if (!values.id) usageError("--id is required");
  if (!values.out) usageError("--out is required");
  const family = values.family as ModelFamily;
  if (family !== "wav2vec" && family !== "wav2vec2") {
    usageError(`unknown --family ${values.family}`);
  }
  const checkpoint = makeCheckpoint({
    modelId: values.id,
    family,
    dim: Number(values.dim),
    seed: Number(values.seed),
    withAsrHead: !values["no-asr-head"],
    codebookSize: values.codebook ? Number(values.codebook) : undefined,
  });
  writeFileSync(values.out, JSON.stringify(checkpoint) + "\n");
  process.stdout.write(`${values.out}\n`);
  return 0;
}

function cmdVocab(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: "string" },
      "model-dir": { type: "string" },
      out: { type: "string" },
    },
  });
  if (!values.model) usageError("--model is required");
  const model = resolveModel(values.model, values["model-dir"]);
  if (!model.asrHead) {
    throw new ModelLoadFailure(`${model.modelId} has no ASR head, so no vocabulary`);
  }
  const head = model.asrHead;
  const lines = [
    `#blank=${head.blankIndex}`,
    `#word_delim=${head.wordDelimIndex}`,
    ...head.vocab,
  ];
  const text = lines.join("\n") + "\n";
  if (values.out) {
    writeFileSync(values.out, text);
  } else {
    process.stdout.write(text);
  }
  return 0;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    switch (command) {
      case "extract":
        return cmdExtract(rest);
      case "transcribe":
        return cmdTranscribe(rest);
      case "make-model":
        return cmdMakeModel(rest);
      case "vocab":
        return cmdVocab(rest);
      default:
        usageError(`unknown command ${command ?? "(none)"}; see the header of this tool`);
    }
  } catch (exc) {
    if (exc instanceof ModelLoadFailure) {
      process.stderr.write(`umx-extract: error: ModelLoadFailure: ${exc.message}\n`);
      return 3;
    }
    if (
      exc instanceof RangeError ||
      String((exc as NodeJS.ErrnoException)?.code).startsWith("ERR_PARSE_ARGS")
    ) {
      process.stderr.write(`umx-extract: error: ${(exc as Error).message}\n`);
      return 2;
    }
    process.stderr.write(`umx-extract: error: ${exc}\n`);
    return 1;
  }
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url === pathToFileURL(process.argv[1]).href;
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
