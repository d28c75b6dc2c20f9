/**
 * Greedy CTC decoding of ASR-head logits: per-window argmax (ties to the
 * lowest index), collapse consecutive repeats, drop blanks, join tokens
 * into words at the word-delimiter token.
 */

import type { AsrHead } from "./model.js";
import type { Mat } from "./model.js";

export function greedyDecode(logits: Mat, head: AsrHead): string[] {
  const ids: number[] = [];
  for (let r = 0; r < logits.rows; r++) {
    let best = 0;
    let bestValue = logits.data[r * logits.cols];
    for (let c = 1; c < logits.cols; c++) {
      const v = logits.data[r * logits.cols + c];
      if (v > bestValue) {
        best = c;
        bestValue = v;
      }
    }
    if (ids.length === 0 || ids[ids.length - 1] !== best) ids.push(best);
  }
  const words: string[] = [];
  let current = "";
  for (const id of ids) {
    if (id === head.blankIndex) continue;
    if (id === head.wordDelimIndex) {
      if (current) words.push(current);
      current = "";
    } else {
      current += head.vocab[id];
    }
  }
  if (current) words.push(current);
  return words;
}
