"""Detection events on a time grid as a determinantal point process.

The kernel ``K_ij = Gamma(t_i, t_j) * eta * S * dt`` has the property that the
determinant of any principal block is the joint detection probability for the
corresponding bins, so the detection record of one run is a draw from the DPP
with marginal kernel ``K``.

Sampling is the spectral algorithm: keep eigenvector ``n`` with probability
``lambda_n``, then draw points one at a time from the projection kernel spanned
by the kept vectors, deflating it by a Gram-Schmidt step after each point.

Random streams: sample ``i`` under master seed ``s`` reads the ``i``-th block of
``stream_width(n_bins)`` doubles from ``Generator(Philox(key=s))``. A block of
samples can therefore be produced from any starting index and in any chunking
with identical results.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DeflationBreakdown, DimensionTooLarge, SpectrumOutOfRange
from .field_model import DetectorConfig, SpacetimePoint, SpectralModel, build_kernel, normalized_g2
from .hermitian_linalg import HermitianMatrix, eigendecompose

MAX_BINS = 512
EXACT_MAX_BINS = 12
SNAP_TOL = 1e-10
MAX_EXPOSURE = 0.5
RANK_TOL = 1e-12
PIVOT_TOL = 1e-12
SEED_MAX = 2**64 - 1


@dataclass(frozen=True)
class GridSpec:
    n_bins: int
    bin_width: float
    t_start: float = 0.0
    r: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not 1 <= self.n_bins <= MAX_BINS:
            raise ValueError(f"n_bins must lie in 1..{MAX_BINS}")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")

    def points(self):
        return [SpacetimePoint(self.r, self.t_start + i * self.bin_width)
                for i in range(self.n_bins)]

    def to_json(self):
        return {"n_bins": self.n_bins, "bin_width_s": self.bin_width,
                "t_start_s": self.t_start, "r": list(self.r)}


@dataclass(frozen=True, eq=False)
class SamplingKernel:
    K: HermitianMatrix
    eigenvalues: np.ndarray   # snapped into [0, 1]
    eigenvectors: np.ndarray

    @property
    def n_bins(self) -> int:
        return self.K.dim

    @classmethod
    def from_matrix(cls, k) -> "SamplingKernel":
        """Validate an explicit marginal kernel (spectrum must lie in [0, 1])."""
        if not isinstance(k, HermitianMatrix):
            k = HermitianMatrix(k)
        if k.dim > MAX_BINS:
            raise DimensionTooLarge(f"at most {MAX_BINS} bins are supported")
        eig = eigendecompose(k)
        w = np.array(eig.eigenvalues)
        if w[0] < -SNAP_TOL:
            raise SpectrumOutOfRange(float(w[-1]),
                                     f"sampling kernel has negative eigenvalue {w[0]:.6g}")
        if w[-1] > 1.0 + SNAP_TOL:
            raise SpectrumOutOfRange(float(w[-1]))
        w = np.clip(w, 0.0, 1.0)
        w.flags.writeable = False
        return cls(k, w, eig.eigenvectors)

    def rank(self) -> int:
        return int(np.sum(self.eigenvalues > RANK_TOL))


@dataclass(frozen=True)
class DetectionSample:
    occupied_bins: tuple
    seed: int
    index: int = 0


@dataclass(frozen=True)
class CoincidenceHistogram:
    lag_bins: np.ndarray
    pair_counts: np.ndarray
    singles_count: int
    n_samples: int
    n_bins: int
    g2_estimate: np.ndarray
    stderr: np.ndarray

    @property
    def singles_rate(self) -> float:
        """Empirical single-bin detection probability."""
        return self.singles_count / (self.n_samples * self.n_bins)

    def to_json(self) -> dict:
        return {"lags": self.lag_bins.tolist(),
                "g2": self.g2_estimate.tolist(),
                "stderr": self.stderr.tolist(),
                "pair_counts": self.pair_counts.tolist(),
                "singles_count": int(self.singles_count),
                "n_samples": int(self.n_samples),
                "singles_rate": self.singles_rate}


def build_sampling_kernel(model: SpectralModel, det: DetectorConfig, grid: GridSpec) -> SamplingKernel:
    """Marginal kernel for a single detector read out in ``grid.n_bins`` bins."""
    p_single = det.eta * det.area * grid.bin_width * model.intensity
    if p_single > MAX_EXPOSURE:
        raise SpectrumOutOfRange(
            p_single,
            f"single-bin detection probability eta*S*dt*G1 = {p_single:.6g} exceeds "
            f"{MAX_EXPOSURE}; reduce eta*S*dt")
    bundle = build_kernel(model, grid.points())
    k = bundle.big_gamma.entries * (det.eta * det.area * grid.bin_width)
    return SamplingKernel.from_matrix(HermitianMatrix._trusted(k))


def stream_width(n_bins: int) -> int:
    """Doubles consumed per sample (a multiple of 4, one Philox counter step)."""
    return 4 * ((2 * n_bins + 3) // 4)


def _uniforms(seed: int, start: int, count: int, n_bins: int) -> np.ndarray:
    if not 0 <= seed <= SEED_MAX:
        raise ValueError("seed must be a 64-bit unsigned integer")
    w = stream_width(n_bins)
    bit_gen = np.random.Philox(key=seed)
    bit_gen.advance(start * w // 4)
    return np.random.Generator(bit_gen).random((count, w))


def _draw(kernel: SamplingKernel, u: np.ndarray) -> list:
    """Occupied bins for each row of uniforms ``u`` (shape ``(N, stream_width)``)."""
    n = kernel.n_bins
    lam = kernel.eigenvalues
    vecs = kernel.eigenvectors
    keep = u[:, :n] < lam
    m = keep.sum(axis=1)
    n_samples = len(u)
    chosen = np.full((n_samples, n), -1, dtype=np.intp)
    steps = int(m.max()) if n_samples else 0
    if steps == 0:
        return [() for _ in range(n_samples)]
    proj = (vecs[None, :, :] * keep[:, None, :]) @ vecs.conj().T
    resid = proj.diagonal(axis1=1, axis2=2).real.copy()
    basis = np.zeros((n_samples, steps, n), dtype=np.complex128)
    rows = np.arange(n_samples)
    for t in range(steps):
        active = m > t
        w = np.where(active[:, None], np.clip(resid, 0.0, None), 0.0)
        cdf = np.cumsum(w, axis=1)
        target = u[:, n + t] * cdf[:, -1]
        y = np.minimum((cdf <= target[:, None]).sum(axis=1), n - 1)
        # round-off can land on a trailing zero-weight bin; step back to the last live one
        last_live = n - 1 - np.argmax((w > 0)[:, ::-1], axis=1)
        y = np.minimum(y, last_live)
        pivot = resid[rows, y]
        bad = active & (pivot <= PIVOT_TOL)
        if bad.any():
            raise DeflationBreakdown(
                f"projection deflation lost rank at step {t} (pivot {pivot[bad].min():.3e}); "
                "grid points are nearly coincident")
        col = proj[rows, :, y]
        if t:
            col = col - np.einsum("skn,sk->sn", basis[:, :t, :], basis[rows, :t, y].conj())
        e = col / np.sqrt(np.where(active, pivot, 1.0))[:, None]
        e[~active] = 0.0
        basis[:, t, :] = e
        resid = resid - np.abs(e) ** 2
        resid[rows[active], y[active]] = 0.0
        chosen[active, t] = y[active]
    return [tuple(sorted(int(b) for b in row[row >= 0])) for row in chosen]


def sample(kernel: SamplingKernel, seed: int, index: int = 0) -> DetectionSample:
    """Draw sample number ``index`` of the stream keyed by ``seed``."""
    u = _uniforms(seed, index, 1, kernel.n_bins)
    return DetectionSample(_draw(kernel, u)[0], seed, index)


def sample_many(kernel: SamplingKernel, n_samples: int, seed: int, start: int = 0,
                chunk_size: int | None = None, workers: int = 1):
    """Samples ``start .. start + n_samples - 1``; identical for any chunking."""
    return [DetectionSample(bins, seed, start + i)
            for i, bins in enumerate(_iter_bins(kernel, n_samples, seed, start,
                                                chunk_size, workers))]


def _default_chunk(n_bins: int) -> int:
    # keeps the batched (chunk, n, n) projection kernels around 64 MB
    return max(1, min(100_000, (4 * 1024 * 1024) // (n_bins * n_bins)))


def _chunks(n_samples, start, chunk_size):
    for lo in range(0, n_samples, chunk_size):
        yield start + lo, min(chunk_size, n_samples - lo)


def _iter_bins(kernel, n_samples, seed, start, chunk_size, workers):
    chunk_size = chunk_size or _default_chunk(kernel.n_bins)

    def run(job):
        lo, count = job
        return _draw(kernel, _uniforms(seed, lo, count, kernel.n_bins))

    jobs = list(_chunks(n_samples, start, chunk_size))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = pool.map(run, jobs)
            for block in results:
                yield from block
    else:
        for job in jobs:
            yield from run(job)


def exact_subset_probabilities(kernel: SamplingKernel) -> dict:
    """Probability of every exact configuration, ``|det(K - I_complement)|``.

    Enumerates all ``2**n`` subsets; determinants come from LAPACK so the
    result is independent of the Jacobi path used by the sampler.
    """
    n = kernel.n_bins
    if n > EXACT_MAX_BINS:
        raise DimensionTooLarge(f"exact enumeration limited to {EXACT_MAX_BINS} bins")
    k = np.asarray(kernel.K.entries)
    out = {}
    for mask in itertools.product((False, True), repeat=n):
        occupied = np.array(mask)
        m = k - np.diag((~occupied).astype(float))
        subset = tuple(int(i) for i in np.flatnonzero(occupied))
        out[subset] = abs(np.linalg.det(m))
    return out


def _accumulate(bins_iter, n_bins):
    pairs = np.zeros(n_bins, dtype=np.int64)
    singles = 0
    n = 0
    for bins in bins_iter:
        n += 1
        singles += len(bins)
        if len(bins) > 1:
            b = np.asarray(bins)
            lags = (b[None, :] - b[:, None])[np.triu_indices(len(b), 1)]
            pairs += np.bincount(lags, minlength=n_bins)
    return pairs, singles, n


def histogram_from_counts(pair_counts, singles_count: int, n_samples: int,
                          n_bins: int) -> CoincidenceHistogram:
    """g2 per lag from pair and singles counts.

    ``g2(l) = C_l / (N p^2 (n - l))`` with ``p = singles / (N n)``. The standard
    error treats ``C_l`` and the singles count as independent Poisson counts,
    which overstates the spread of sub-Poissonian (antibunched) records.
    """
    pair_counts = np.asarray(pair_counts, dtype=np.int64)
    lags = np.arange(1, n_bins)
    counts = pair_counts[1:n_bins] if n_bins > 1 else np.zeros(0, dtype=np.int64)
    p = singles_count / (n_samples * n_bins)
    if p > 0:
        expected_unit = n_samples * p * p * (n_bins - lags)
        g2 = counts / expected_unit
        rel = np.sqrt(1.0 / np.maximum(counts, 1) + 4.0 / singles_count)
        stderr = np.where(counts > 0, g2 * rel, 1.0 / expected_unit)
    else:
        g2 = np.full(len(lags), np.nan)
        stderr = np.full(len(lags), np.nan)
    return CoincidenceHistogram(lag_bins=lags, pair_counts=counts, singles_count=int(singles_count),
                                n_samples=int(n_samples), n_bins=n_bins,
                                g2_estimate=g2, stderr=stderr)


def estimate_g2(kernel: SamplingKernel, n_samples: int, seed: int,
                chunk_size: int | None = None, workers: int = 1) -> CoincidenceHistogram:
    """Coincidence histogram over lags ``1 .. n_bins - 1`` from ``n_samples`` runs.

    Lag 0 is absent: a bin holds at most one detection.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    pairs, singles, n = _accumulate(
        _iter_bins(kernel, n_samples, seed, 0, chunk_size, workers), kernel.n_bins)
    return histogram_from_counts(pairs, singles, n, kernel.n_bins)


def analytic_g2(model: SpectralModel, grid: GridSpec) -> np.ndarray:
    """``1 - |gamma(l dt)|**2`` for lags ``1 .. n_bins - 1``."""
    return normalized_g2(model, np.arange(1, grid.n_bins) * grid.bin_width)
