"""Dense complex Hermitian matrix algebra.

Everything here is built on one eigensolver, a cyclic Jacobi method with a
round-robin ("tournament") pair ordering so that the k/2 rotations of a round
act on disjoint index pairs and can be applied as whole-array numpy updates.
Determinants, definiteness and the Hadamard bound all go through it.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DimensionTooLarge,
    HermiticityError,
    IterationLimitExceeded,
    NotPSD,
    ZeroDiagonal,
)

HERMITIAN_RTOL = 1e-12
JACOBI_TOL = 1e-14
NEGLIGIBLE = 1e-18
RECON_TOL = 1e-10
LEIBNIZ_MAX_DIM = 8
DENSE_ROUND_MAX_DIM = 24
SPECTRUM_CACHE_MAX_DIM = 32


class HermitianMatrix:
    """Immutable complex Hermitian matrix.

    Inputs within ``1e-12`` (relative to the largest entry) of Hermitian are
    replaced by ``(A + A^H) / 2``; the diagonal is then exactly real. Larger
    violations raise :class:`HermiticityError`.
    """

    __slots__ = ("_a",)

    def __init__(self, entries):
        a = np.array(entries, dtype=np.complex128)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise HermiticityError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise HermiticityError("matrix entries must be finite")
        scale = np.max(np.abs(a))
        asym = np.max(np.abs(a - a.conj().T))
        if asym > HERMITIAN_RTOL * scale:
            raise HermiticityError(
                f"matrix is not Hermitian: max |A - A^H| = {asym:.3e} "
                f"exceeds {HERMITIAN_RTOL:g} x max|A| = {HERMITIAN_RTOL * scale:.3e}")
        a = 0.5 * (a + a.conj().T)
        a[np.diag_indices_from(a)] = a.diagonal().real
        a.flags.writeable = False
        self._a = a

    @classmethod
    def _trusted(cls, a):
        # Internal fast path for arrays that are Hermitian by construction.
        obj = cls.__new__(cls)
        a = np.array(a, dtype=np.complex128)
        a = 0.5 * (a + a.conj().T)
        a[np.diag_indices_from(a)] = a.diagonal().real
        a.flags.writeable = False
        obj._a = a
        return obj

    @property
    def dim(self) -> int:
        return self._a.shape[0]

    @property
    def entries(self) -> np.ndarray:
        """Read-only ``(dim, dim)`` complex array."""
        return self._a

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._a.copy()
        return self._a.astype(dtype)

    def __getitem__(self, key):
        return self._a[key]

    def __eq__(self, other):
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return self._a.shape == other._a.shape and bool(np.array_equal(self._a, other._a))

    def __hash__(self):
        return hash((self._a.shape, self._a.tobytes()))

    def __repr__(self):
        return f"HermitianMatrix(dim={self.dim})"

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._a)))

    def diagonal(self) -> np.ndarray:
        return self._a.diagonal().real.copy()

    def submatrix(self, indices) -> "HermitianMatrix":
        idx = np.asarray(indices, dtype=np.intp)
        return HermitianMatrix._trusted(self._a[np.ix_(idx, idx)])

    def is_diagonal(self) -> bool:
        off = self._a - np.diag(self._a.diagonal())
        return not np.any(off)

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "re": self._a.real.tolist(),
                "im": self._a.imag.tolist()}

    @classmethod
    def from_json(cls, obj) -> "HermitianMatrix":
        """Read the ``{"dim", "re", "im"}`` interchange object."""
        try:
            dim = int(obj["dim"])
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise HermiticityError(f"malformed matrix object: {exc}") from exc
        if re.shape != (dim, dim) or im.shape != (dim, dim):
            raise HermiticityError(
                f"matrix arrays must be {dim}x{dim}, got re {re.shape} and im {im.shape}")
        return cls(re + 1j * im)


def load_matrix(path) -> HermitianMatrix:
    with open(path) as fh:
        return HermitianMatrix.from_json(json.load(fh))


def save_matrix(matrix: HermitianMatrix, path) -> None:
    with open(path, "w") as fh:
        json.dump(matrix.to_json(), fh)


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray   # ascending, real
    eigenvectors: np.ndarray  # unitary, eigenvectors in columns

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


class Definiteness(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class DefinitenessVerdict:
    kind: Definiteness
    min_eigenvalue: float

    @property
    def is_psd(self) -> bool:
        return self.kind is not Definiteness.INDEFINITE


@dataclass(frozen=True)
class LemmaResult:
    holds: bool
    lhs: float
    rhs: float
    is_equality: bool


def psd_tolerance(a: HermitianMatrix) -> float:
    return 1e-10 * max(1.0, a.max_abs())


@lru_cache(maxsize=None)
def _round_robin(k: int):
    """Rounds of disjoint (p, q) pairs covering every pair exactly once."""
    n = k + (k % 2)
    players = list(range(n))
    rounds = []
    for _ in range(n - 1):
        pairs = [(players[i], players[n - 1 - i]) for i in range(n // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < k and q < k]
        if pairs:
            p, q = zip(*pairs)
            rounds.append((np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(rounds)


def _rotation(app, aqq, apq, cutoff):
    """(c, s*phase) of the rotation annihilating ``apq``; ``None`` if negligible."""
    r = abs(apq)
    if r <= cutoff:
        return None
    phase = apq / r
    zeta = (aqq - app) / (2.0 * r)
    t = (1.0 if zeta >= 0.0 else -1.0) / (abs(zeta) + math.hypot(1.0, zeta))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c * phase


@lru_cache(maxsize=None)
def _off_mask(k: int) -> np.ndarray:
    return ~np.eye(k, dtype=bool)


@lru_cache(maxsize=None)
def _identity(k: int) -> np.ndarray:
    eye = np.eye(k, dtype=np.complex128)
    eye.flags.writeable = False
    return eye


def _off_norm(a: np.ndarray) -> float:
    off = a[_off_mask(a.shape[0])]
    return math.sqrt(np.vdot(off, off).real)


def _jacobi(a: np.ndarray):
    """Diagonalize Hermitian ``a``; returns (diagonal, accumulated unitary).

    Each round applies the rotations for its disjoint pairs at once: as a
    dense rotation matrix for small k, as column/row slice updates otherwise.
    """
    k = a.shape[0]
    a = np.array(a, dtype=np.complex128)
    v = _identity(k).copy()
    if k == 1:
        return a.diagonal().real.copy(), v
    norm = math.sqrt(float(np.sum(np.abs(a) ** 2)))
    target = JACOBI_TOL * norm
    # entries this small cannot matter for the stopping rule and would overflow
    # the angle computation
    cutoff = NEGLIGIBLE * norm
    rounds = _round_robin(k)
    max_sweeps = 100 * k * k
    dense = k <= DENSE_ROUND_MAX_DIM
    for _ in range(max_sweeps):
        if _off_norm(a) <= target:
            a_diag = a.diagonal().real.copy()
            return a_diag, v
        for p, q in rounds:
            if dense:
                a, v = _dense_round(a, v, p, q, cutoff)
            else:
                _slice_round(a, v, p, q, cutoff)
    raise IterationLimitExceeded(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps (k={k})")


def _dense_round(a, v, p, q, cutoff):
    k = a.shape[0]
    d = a.diagonal().real.tolist()
    ii, mm, cs, sps = [], [], [], []
    for i, m, apq in zip(p.tolist(), q.tolist(), a[p, q].tolist()):
        # same arithmetic as _rotation, inlined: this loop is the hot path
        r = abs(apq)
        if r <= cutoff:
            continue
        zeta = (d[m] - d[i]) / (2.0 * r)
        t = (1.0 if zeta >= 0.0 else -1.0) / (abs(zeta) + math.hypot(1.0, zeta))
        c = 1.0 / math.sqrt(1.0 + t * t)
        ii.append(i)
        mm.append(m)
        cs.append(c)
        sps.append(t * c * (apq / r))
    if not ii:
        return a, v
    j = _identity(k).copy()
    flat = [i * k + i for i in ii] + [m * k + m for m in mm] \
        + [i * k + m for i, m in zip(ii, mm)] + [m * k + i for i, m in zip(ii, mm)]
    j.ravel()[flat] = cs + cs + sps + [-x.conjugate() for x in sps]
    a = j.conj().T @ a @ j
    a.ravel()[flat[2 * len(ii):]] = 0.0
    return a, v @ j


def _slice_round(a, v, p, q, cutoff):
    apq = a[p, q]
    r = np.abs(apq)
    live = r > cutoff
    if not live.any():
        return
    safe_r = np.where(live, r, 1.0)
    phase = np.where(live, apq / safe_r, 1.0)
    zeta = (a[q, q].real - a[p, p].real) / (2.0 * safe_r)
    t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
    t = np.where(live, t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    sp = s * phase
    spc = s * phase.conj()
    # A <- A J, V <- V J
    ap, aq = a[:, p], a[:, q]
    a[:, p] = c * ap - spc * aq
    a[:, q] = sp * ap + c * aq
    vp, vq = v[:, p], v[:, q]
    v[:, p] = c * vp - spc * vq
    v[:, q] = sp * vp + c * vq
    # A <- J^H A
    ap, aq = a[p, :], a[q, :]
    a[p, :] = c[:, None] * ap - sp[:, None] * aq
    a[q, :] = spc[:, None] * ap + c[:, None] * aq
    a[p, q] = 0.0
    a[q, p] = 0.0


def _canonical_order(w: np.ndarray, u: np.ndarray):
    # Phase-normalize each eigenvector so its first non-negligible component is
    # positive real, then sort ascending with ties broken by that component's
    # position (stable).
    k = len(w)
    mags = np.abs(u)
    lead = np.argmax(mags > 1e-8 * mags.max(axis=0), axis=0)
    cols = np.arange(k)
    u = u * (mags[lead, cols] / u[lead, cols])
    scale = max(1.0, float(np.max(np.abs(w))))
    groups = []
    for j in np.argsort(w, kind="stable"):
        if groups and w[j] - w[groups[-1][-1]] <= 1e-12 * scale:
            groups[-1].append(j)
        else:
            groups.append([j])
    order = [j for g in groups for j in sorted(g, key=lambda j: (lead[j], j))]
    order = np.array(order, dtype=np.intp)
    return w[order], u[:, order]


def _decompose(a: HermitianMatrix) -> EigenDecomposition:
    w, u = _jacobi(a.entries)
    w, u = _canonical_order(w, u)
    w.flags.writeable = False
    u.flags.writeable = False
    return EigenDecomposition(w, u)


_decompose_cached = lru_cache(maxsize=16384)(_decompose)


def eigendecompose(a: HermitianMatrix) -> EigenDecomposition:
    """Eigenvalues (ascending) and unitary eigenvectors of ``a``.

    Results for small matrices are memoized; values are read-only.
    """
    if a.dim <= SPECTRUM_CACHE_MAX_DIM:
        return _decompose_cached(a)
    return _decompose(a)


def eigenvalues(a: HermitianMatrix) -> np.ndarray:
    return eigendecompose(a).eigenvalues


def determinant(a: HermitianMatrix) -> float:
    """Product of the eigenvalues."""
    w = eigenvalues(a)
    return float(np.prod(w))


def definiteness(a: HermitianMatrix) -> DefinitenessVerdict:
    lam_min = float(eigenvalues(a)[0])
    tol = psd_tolerance(a)
    if lam_min > tol:
        kind = Definiteness.POSITIVE_DEFINITE
    elif lam_min >= -tol:
        kind = Definiteness.POSITIVE_SEMIDEFINITE
    else:
        kind = Definiteness.INDEFINITE
    return DefinitenessVerdict(kind, lam_min)


def unit_diagonal_normalize(a: HermitianMatrix) -> HermitianMatrix:
    """Rescale to unit diagonal: ``a_ij / sqrt(a_ii a_jj)``."""
    d = a.diagonal()
    for i, value in enumerate(d):
        if not value > 0.0:
            raise ZeroDiagonal(i, float(value))
    inv = 1.0 / np.sqrt(d)
    out = np.asarray(a.entries) * np.outer(inv, inv)
    out[np.diag_indices_from(out)] = 1.0
    return HermitianMatrix._trusted(out)


def lemma_check(a: HermitianMatrix) -> LemmaResult:
    """Hadamard bound ``det(A) <= prod(A_ii)`` for a PSD matrix with positive diagonal.

    ``is_equality`` is computed from the two numbers only; whether it lines up
    with ``a.is_diagonal()`` is left for callers (and tests) to confirm.
    """
    verdict = definiteness(a)
    if not verdict.is_psd:
        raise NotPSD(verdict.min_eigenvalue)
    d = a.diagonal()
    for i, value in enumerate(d):
        if not value > 0.0:
            raise ZeroDiagonal(i, float(value))
    lhs = determinant(a)
    rhs = float(np.prod(d))
    eq_tol = 1e-10 * rhs
    return LemmaResult(holds=lhs <= rhs + eq_tol, lhs=lhs, rhs=rhs,
                       is_equality=abs(lhs - rhs) <= eq_tol)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def leibniz_determinant_oracle(a) -> complex:
    """Permutation-sum determinant; test oracle only (factorial cost)."""
    m = np.asarray(a.entries if isinstance(a, HermitianMatrix) else a, dtype=np.complex128)
    k = m.shape[0]
    if k > LEIBNIZ_MAX_DIM:
        raise DimensionTooLarge(f"Leibniz oracle limited to dim <= {LEIBNIZ_MAX_DIM}, got {k}")
    total = 0j
    rows = range(k)
    for perm in itertools.permutations(rows):
        term = complex(_perm_sign(perm))
        for i in rows:
            term *= m[i, perm[i]]
        total += term
    return total


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a complex Ginibre matrix, phase-fixed)."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = r.diagonal()
    return q * (d / np.abs(d))
