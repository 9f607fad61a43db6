"""k-electron correlation functions of the chaotic state and detection probabilities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, ProbabilityOverflow
from .field_model import DetectorConfig, KernelBundle
from .hermitian_linalg import determinant

NORMALIZED_SLACK = 1e-12


@dataclass(frozen=True)
class CorrelationValue:
    order: int
    value: float              # det of the cross-correlation block, intensity**order
    normalized: float         # det of the coherence block, clamped to [0, 1]
    normalized_raw: float     # unclamped determinant, kept for diagnostics
    singles_product: float

    def __post_init__(self):
        if not -NORMALIZED_SLACK <= self.normalized_raw <= 1.0 + NORMALIZED_SLACK:
            # a PSD kernel cannot produce this; surface it instead of clamping it away
            raise ArithmeticError(
                f"normalized correlation {self.normalized_raw!r} outside [0, 1]; "
                "kernel is not a valid coherence matrix")


def _check_indices(bundle: KernelBundle, indices):
    idx = tuple(int(i) for i in indices)
    if not idx:
        raise IndexOutOfRange("at least one index is required")
    if len(set(idx)) != len(idx):
        raise IndexOutOfRange(f"indices must be distinct: {idx}")
    for i in idx:
        if not 0 <= i < bundle.dim:
            raise IndexOutOfRange(f"index {i} outside 0..{bundle.dim - 1}")
    return idx


def block_determinants(bundle: KernelBundle, indices):
    """(det of Gamma block, det of gamma block), memoized per index set."""
    key = tuple(sorted(indices))
    cached = bundle._det_cache.get(key)
    if cached is None:
        cached = (determinant(bundle.big_gamma.submatrix(key)),
                  determinant(bundle.gamma.submatrix(key)))
        bundle._det_cache[key] = cached
    return cached


def correlation(bundle: KernelBundle, indices) -> CorrelationValue:
    """Correlation function of the given (0-based) detector points."""
    idx = _check_indices(bundle, indices)
    value, norm = block_determinants(bundle, idx)
    return CorrelationValue(order=len(idx), value=value,
                            normalized=min(max(norm, 0.0), 1.0),
                            normalized_raw=norm,
                            singles_product=float(np.prod(bundle.singles[list(idx)])))


def detection_probability(corr: CorrelationValue, det: DetectorConfig) -> float:
    """Joint probability of one detection in each of the ``order`` short intervals."""
    p = corr.value * det.exposure ** corr.order
    if p > 1.0 + 1e-9:
        raise ProbabilityOverflow(
            f"detection probability {p:.6g} exceeds 1; the bin width is too coarse "
            "for this intensity")
    return min(max(p, 0.0), 1.0)


def pairwise_g2(bundle: KernelBundle, i: int, j: int) -> float:
    """Two-point correlation ``G1_i G1_j (1 - |gamma_ij|**2)``.

    Computed as a 2x2 determinant and cross-checked (under ``assert``) against
    the closed form.
    """
    if i == j:
        raise IndexOutOfRange("pairwise_g2 needs two distinct indices")
    value = correlation(bundle, (i, j)).value
    g1 = bundle.singles
    closed = g1[i] * g1[j] * (1.0 - abs(bundle.gamma[i, j]) ** 2)
    assert abs(value - closed) <= 1e-12 * g1[i] * g1[j], (value, closed)
    return value
