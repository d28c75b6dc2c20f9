"""Audio-level uncertainty measures from a logit matrix.

Each window row is treated as the logits of a categorical distribution.
The entropy measure is the window average of H(softmax(row)); the mean,
max and sd measures reduce the raw logits per window and average over
windows. Entropy is reported in nats; sd is the population standard
deviation (the window is the whole population of logits, not a sample).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput
from .logit_io import LogitMatrix

UM_NAMES = ("mean", "max", "sd", "entropy")
REDUCTIONS = ("mean", "max", "sd")


@dataclass(frozen=True)
class UMVector:
    """The four uncertainty measures of one utterance."""

    um_mean: float
    um_max: float
    um_sd: float
    um_entropy: float

    def as_dict(self) -> dict[str, float]:
        return {
            "mean": self.um_mean,
            "max": self.um_max,
            "sd": self.um_sd,
            "entropy": self.um_entropy,
        }


def _row_entropies(z: np.ndarray) -> np.ndarray:
    """Entropy of softmax(row) for each row of a float64 (w, q) array.

    Stable scheme: with m the row max, e = exp(z - m) and s = sum(e),
    H = log(s) - sum(e * (z - m)) / s. Contributions with p = 0 vanish
    because exp underflows to 0 before the multiply. Results are clipped
    into the mathematically guaranteed [0, log q].
    """
    m = np.max(z, axis=1, keepdims=True)
    e = np.exp(z - m)
    s = np.sum(e, axis=1)
    h = np.log(s) - np.sum(e * (z - m), axis=1) / s
    np.clip(h, 0.0, np.log(z.shape[1]), out=h)
    return h


def window_entropy(logit_row) -> float:
    """Entropy in nats of the categorical defined by one window's logits."""
    z = np.asarray(logit_row, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError(f"expected a 1-D logit row, got ndim={z.ndim}")
    if z.shape[0] < 2:
        raise ValueError(f"need q >= 2 logits, got {z.shape[0]}")
    if not np.isfinite(z).all():
        raise NonFiniteInput("non-finite value in logit row")
    return float(_row_entropies(z[np.newaxis, :])[0])


def um_entropy(matrix: LogitMatrix) -> float:
    """Window-averaged entropy of the utterance, in nats."""
    z = matrix.values.astype(np.float64)
    return float(np.mean(_row_entropies(z)))


def um_reduce(matrix: LogitMatrix, r: str) -> float:
    """Apply reduction r (mean, max or sd) per window, then average windows.

    Reductions act on the raw logits, not on probabilities.
    """
    z = matrix.values.astype(np.float64)
    if r == "mean":
        per_window = np.mean(z, axis=1)
    elif r == "max":
        per_window = np.max(z, axis=1)
    elif r == "sd":
        per_window = np.std(z, axis=1)  # population sd, divides by q
    else:
        raise ValueError(f"unknown reduction {r!r}, expected one of {REDUCTIONS}")
    return float(np.mean(per_window))


def compute_um_vector(matrix: LogitMatrix) -> UMVector:
    """All four measures; bit-identical to the individual operations."""
    return UMVector(
        um_mean=um_reduce(matrix, "mean"),
        um_max=um_reduce(matrix, "max"),
        um_sd=um_reduce(matrix, "sd"),
        um_entropy=um_entropy(matrix),
    )
