import numpy as np
import pytest

from fermicorr import SpectralModel
from fermicorr.hermitian_linalg import HermitianMatrix

TC = 1e-14


def ginibre(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_psd(rng, k, extra_rows=2):
    """B^H B with B of shape (k + extra_rows, k); extra_rows < 0 gives rank deficiency."""
    b = ginibre(rng, max(k + extra_rows, 1), k)
    return HermitianMatrix(b.conj().T @ b)


def random_hermitian(rng, k):
    z = ginibre(rng, k, k)
    return HermitianMatrix((z + z.conj().T) / 2)


def block_diagonal_psd(rng, sizes):
    k = sum(sizes)
    a = np.zeros((k, k), dtype=complex)
    lo = 0
    for s in sizes:
        a[lo:lo + s, lo:lo + s] = random_psd(rng, s).entries
        lo += s
    return a


@pytest.fixture
def model():
    return SpectralModel(omega0=2.0e15, coherence_time=TC, group_speed=1.0e6,
                         axis=(0.0, 0.0, 1.0), intensity=1.0e12)
