"""Determinant inequalities between correlation functions of different orders.

For a chaotic (determinantal) field the joint correlation of a point set never
exceeds the product of the correlations of the blocks of any partition of it,
with equality exactly when every cross-block coherence vanishes. The product
of singles is the finest-partition case.

Slacks are judged relative to the right-hand side (``1e-10 * |rhs|``). Equality
is read off the slack; ``equality_diagnosis`` reports the largest cross-block
``|gamma_ij|`` so the two views can be compared (``DIAG_TOL`` on the latter).
For more than two blocks the "all cross-block terms vanish" condition comes
from applying the two-block statement repeatedly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlations import _check_indices, block_determinants
from .errors import InvalidPartition, NotPSD, TooManyPartitions
from .field_model import KernelBundle
from .hermitian_linalg import (
    HermitianMatrix,
    definiteness,
    determinant,
    eigendecompose,
)

SLACK_RTOL = 1e-10
DIAG_TOL = 1e-9
MAX_SWEEP_DIM = 10


@dataclass(frozen=True)
class PartitionSpec:
    """Ordered partition of ``range(k)`` into disjoint, non-empty blocks."""
    k: int
    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if any(len(b) == 0 for b in blocks):
            raise InvalidPartition("partition blocks must be non-empty")
        flat = [i for b in blocks for i in b]
        if len(flat) != len(set(flat)):
            raise InvalidPartition(f"index repeated in partition {blocks}")
        if sorted(flat) != list(range(self.k)):
            raise InvalidPartition(f"partition {blocks} does not cover 0..{self.k - 1}")

    @classmethod
    def singletons(cls, k):
        return cls(k, tuple((i,) for i in range(k)))

    @classmethod
    def parse(cls, text: str, k: int | None = None) -> "PartitionSpec":
        """Parse the 1-based ``"1,2|3,5,7|4|6"`` notation."""
        try:
            blocks = [tuple(int(tok) - 1 for tok in part.split(",") if tok.strip())
                      for part in text.split("|")]
        except ValueError as exc:
            raise InvalidPartition(f"cannot parse partition {text!r}: {exc}") from exc
        if k is None:
            k = sum(len(b) for b in blocks)
        return cls(k, tuple(blocks))

    def one_based(self):
        return [[i + 1 for i in b] for b in self.blocks]

    def __str__(self):
        return "|".join(",".join(str(i) for i in b) for b in self.one_based())


@dataclass(frozen=True)
class InequalityReport:
    partition: tuple          # blocks, 0-based
    lhs: float
    rhs: float
    slack: float
    holds: bool
    is_equality: bool
    equality_diagnosis: float
    tolerance: float
    steps: tuple = ()         # (lhs, rhs) of each two-block fold step

    def to_json(self) -> dict:
        return {"partition": [[i + 1 for i in b] for b in self.partition],
                "lhs": self.lhs,
                "rhs": self.rhs,
                "slack": self.slack,
                "holds": self.holds,
                "is_equality": self.is_equality,
                "equality_diagnosis": self.equality_diagnosis,
                "tolerance": self.tolerance}


def _cross_block_max(gamma: HermitianMatrix, blocks) -> float:
    label = {}
    for b, block in enumerate(blocks):
        for i in block:
            label[i] = b
    idx = np.array(sorted(label))
    lab = np.array([label[i] for i in idx])
    cross = lab[:, None] != lab[None, :]
    if not cross.any():
        return 0.0
    sub = np.abs(gamma.entries[np.ix_(idx, idx)])
    return float(sub[cross].max())


def _partition_report(bundle: KernelBundle, blocks) -> InequalityReport:
    everything = tuple(i for b in blocks for i in b)
    lhs = block_determinants(bundle, everything)[0]
    block_dets = [block_determinants(bundle, b)[0] for b in blocks]
    rhs = float(np.prod(block_dets))
    # Left fold: G(b1 u rest) <= G(b1) G(rest), then recurse into rest.
    steps = []
    for n in range(len(blocks) - 1):
        rest = tuple(i for b in blocks[n + 1:] for i in b)
        whole = tuple(i for b in blocks[n:] for i in b)
        steps.append((block_determinants(bundle, whole)[0],
                      block_dets[n] * block_determinants(bundle, rest)[0]))
    tolerance = SLACK_RTOL * abs(rhs)
    step_ok = all(s_rhs - s_lhs >= -SLACK_RTOL * abs(s_rhs) for s_lhs, s_rhs in steps)
    slack = rhs - lhs
    return InequalityReport(partition=tuple(tuple(b) for b in blocks),
                            lhs=lhs, rhs=rhs, slack=slack,
                            holds=bool(slack >= -tolerance and step_ok),
                            is_equality=bool(abs(slack) <= tolerance),
                            equality_diagnosis=_cross_block_max(bundle.gamma, blocks),
                            tolerance=tolerance,
                            steps=tuple(steps))


def check_product_bound(bundle: KernelBundle, indices=None) -> InequalityReport:
    """Correlation of ``indices`` against the product of their singles."""
    if indices is None:
        indices = range(bundle.dim)
    idx = _check_indices(bundle, indices)
    return _partition_report(bundle, tuple((i,) for i in idx))


def check_partition_bound(bundle: KernelBundle, partition: PartitionSpec) -> InequalityReport:
    if partition.k != bundle.dim:
        raise InvalidPartition(
            f"partition is over {partition.k} points but the kernel has {bundle.dim}")
    return _partition_report(bundle, partition.blocks)


def fischer_cross_check(big_gamma: HermitianMatrix, l: int):
    """Block-unitary route to the two-block bound for the split ``[0, l) | [l, k)``.

    Diagonalizes both diagonal blocks, rotates the whole matrix with the
    block-diagonal unitary and returns ``(det D, det D', block_residual)``,
    where ``D'`` keeps only the (now diagonal) diagonal blocks of ``D`` and the
    residual is the largest off-diagonal-block entry of ``D``.
    """
    k = big_gamma.dim
    if not 1 <= l < k:
        raise InvalidPartition(f"split point l={l} must satisfy 1 <= l < {k}")
    verdict = definiteness(big_gamma)
    if not verdict.is_psd:
        raise NotPSD(verdict.min_eigenvalue)
    u = np.zeros((k, k), dtype=np.complex128)
    u[:l, :l] = eigendecompose(big_gamma.submatrix(range(l))).eigenvectors.conj().T
    u[l:, l:] = eigendecompose(big_gamma.submatrix(range(l, k))).eigenvectors.conj().T
    d = u @ big_gamma.entries @ u.conj().T
    d_prime = np.zeros_like(d)
    d_prime[:l, :l] = d[:l, :l]
    d_prime[l:, l:] = d[l:, l:]
    det_d = determinant(HermitianMatrix._trusted(d))
    det_d_prime = determinant(HermitianMatrix._trusted(d_prime))
    block_residual = float(np.abs(d[:l, l:]).max())
    return det_d, det_d_prime, block_residual


def set_partitions(k: int):
    """All set partitions of ``range(k)`` in restricted-growth-string order."""
    if k == 0:
        yield ()
        return
    a = [0] * k
    while True:
        blocks = [[] for _ in range(max(a) + 1)]
        for i, b in enumerate(a):
            blocks[b].append(i)
        yield tuple(tuple(b) for b in blocks)
        # next RGS: rightmost position that can still grow
        i = k - 1
        while i > 0 and a[i] > max(a[:i]):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        a[i + 1:] = [0] * (k - i - 1)


def sweep_partitions(bundle: KernelBundle, max_k: int = MAX_SWEEP_DIM):
    """One report per set partition of the full index set (Bell(k) of them)."""
    k = bundle.dim
    if max_k > MAX_SWEEP_DIM or k > max_k:
        raise TooManyPartitions(
            f"sweep over {k} points exceeds the limit of {min(max_k, MAX_SWEEP_DIM)}")
    return [_partition_report(bundle, blocks) for blocks in set_partitions(k)]
