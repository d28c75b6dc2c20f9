"""Word error rate and greedy CTC decoding.

WER uses minimum-edit-distance alignment with unit costs; among minimal
alignments, ties are broken preferring substitutions over deletion+insertion
pairs. Tokenization for text inputs is whitespace split and case fold, with
no punctuation stripping.

The greedy decoder is the zero-dependency stand-in for LM-rescored
transcripts: per-window argmax, collapse consecutive repeats, drop blanks,
split into words on the word-delimiter token.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyReference, VocabFileError, VocabSizeMismatch
from .logit_io import LogitMatrix


@dataclass(frozen=True)
class WerBreakdown:
    """Word error counts for one reference/hypothesis pair."""

    substitutions: int
    deletions: int
    insertions: int
    ref_words: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        # may exceed 1.0 for insertion-heavy hypotheses
        return self.errors / self.ref_words


def wer_tokens(text: str) -> list[str]:
    """Whitespace-split, case-folded tokens; punctuation kept as-is."""
    return text.casefold().split()


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> WerBreakdown:
    """Align hypothesis to reference and count S/D/I at minimum edit cost."""
    ref = list(reference)
    hyp = list(hypothesis)
    if not ref:
        raise EmptyReference("reference word sequence is empty")

    # Cell = (edits, deletions + insertions); lexicographic minimum prefers
    # one substitution over a deletion+insertion pair at equal edit count.
    prev = [(j, j) for j in range(len(hyp) + 1)]
    for i in range(1, len(ref) + 1):
        cur = [(i, i)]
        for j in range(1, len(hyp) + 1):
            if ref[i - 1] == hyp[j - 1]:
                diag = prev[j - 1]
            else:
                diag = (prev[j - 1][0] + 1, prev[j - 1][1])
            delete = (prev[j][0] + 1, prev[j][1] + 1)
            insert = (cur[j - 1][0] + 1, cur[j - 1][1] + 1)
            cur.append(min(diag, delete, insert))
        prev = cur

    edits, del_plus_ins = prev[len(hyp)]
    # D and I are pinned by del_plus_ins and the length difference.
    deletions = (del_plus_ins - (len(hyp) - len(ref))) // 2
    insertions = del_plus_ins - deletions
    return WerBreakdown(
        substitutions=edits - del_plus_ins,
        deletions=deletions,
        insertions=insertions,
        ref_words=len(ref),
    )


@dataclass(frozen=True)
class Vocab:
    """Token list mapping logit columns to symbols.

    File format: optional leading directive lines "#blank=<index>" and
    "#word_delim=<index>", then one token per line; line index after the
    directives is the logit column.
    """

    tokens: tuple[str, ...]
    blank_index: int
    word_delim_index: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.blank_index < len(self.tokens):
            raise VocabFileError(
                f"blank index {self.blank_index} out of range for {len(self.tokens)} tokens"
            )
        if self.word_delim_index is not None and not 0 <= self.word_delim_index < len(
            self.tokens
        ):
            raise VocabFileError(
                f"word_delim index {self.word_delim_index} out of range for "
                f"{len(self.tokens)} tokens"
            )

    @property
    def size(self) -> int:
        return len(self.tokens)


def read_vocab(path: str | Path) -> Vocab:
    """Parse a vocabulary file (see Vocab for the format)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    blank: int | None = None
    word_delim: int | None = None
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        line = lines[i]
        try:
            key, value = line[1:].split("=", 1)
            index = int(value)
        except ValueError as exc:
            raise VocabFileError(f"{path}:{i + 1}: bad directive {line!r}") from exc
        if key == "blank":
            blank = index
        elif key == "word_delim":
            word_delim = index
        else:
            raise VocabFileError(f"{path}:{i + 1}: unknown directive {key!r}")
        i += 1
    tokens = tuple(lines[i:])
    if blank is None:
        raise VocabFileError(f"{path}: missing '#blank=<index>' directive")
    if not tokens:
        raise VocabFileError(f"{path}: no tokens")
    return Vocab(tokens=tokens, blank_index=blank, word_delim_index=word_delim)


def ctc_greedy_decode(matrix: LogitMatrix, vocab: Vocab) -> list[str]:
    """Greedy CTC decode of a logit matrix into a word sequence.

    Argmax ties resolve to the lowest index. Without a word delimiter in the
    vocabulary, each surviving token is its own word.
    """
    if vocab.size != matrix.q:
        raise VocabSizeMismatch(
            f"vocab has {vocab.size} tokens but matrix has q={matrix.q}"
        )
    ids = np.argmax(matrix.values, axis=1)
    collapsed = [int(k) for k, _ in itertools.groupby(ids)]
    symbols = [k for k in collapsed if k != vocab.blank_index]
    if vocab.word_delim_index is None:
        return [vocab.tokens[k] for k in symbols]
    words: list[str] = []
    current: list[str] = []
    for k in symbols:
        if k == vocab.word_delim_index:
            if current:
                words.append("".join(current))
                current = []
        else:
            current.append(vocab.tokens[k])
    if current:
        words.append("".join(current))
    return words
