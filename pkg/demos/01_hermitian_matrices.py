"""
Hermitian matrices, eigenvalues and the Hadamard bound
======================================================

Everything downstream rests on one eigensolver. Here we diagonalize a
small coherence matrix, compare the eigenvalue-product determinant with the
permutation-sum one, and watch the Hadamard bound become an equality once
the off-diagonal coherences are switched off.
"""
import numpy as np

from fermicorr import (
    HermitianMatrix,
    definiteness,
    determinant,
    eigendecompose,
    leibniz_determinant_oracle,
    lemma_check,
    unit_diagonal_normalize,
)

a = HermitianMatrix([[1, 0.5, 0.25], [0.5, 1, 0.5], [0.25, 0.5, 1]])
eig = eigendecompose(a)
print("eigenvalues      ", eig.eigenvalues)
print("det (eigenvalues)", determinant(a))
print("det (Leibniz)    ", leibniz_determinant_oracle(a))
print("reconstruction error", np.abs(eig.reconstruct() - a.entries).max())

# A complex example: normalizing to unit diagonal gives a degree-of-coherence
# matrix, here a fully coherent pair with determinant zero.
b = HermitianMatrix([[2, 2j], [-2j, 2]])
g = unit_diagonal_normalize(b)
print(g.entries)
print(definiteness(g))

# Hadamard: det(A) never exceeds the product of the diagonal.
rng = np.random.default_rng(1)
z = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
psd = HermitianMatrix(z.conj().T @ z)
print(lemma_check(psd))
print(lemma_check(HermitianMatrix(np.diag(psd.diagonal()))))
