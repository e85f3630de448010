"""! @package su_algebra
Dense complex linear algebra on su(m): validated skew-Hermitian traceless
elements, a fixed real basis, commutant dimensions and re-unitarization.

The real basis of su(m) is fixed once and used for every rank computation:

  1. elementary antisymmetric  E_ij - E_ji      (i < j, row-major)
  2. elementary i-symmetric    i (E_ij + E_ji)  (i < j, row-major)
  3. diagonal                  i (E_kk - E_k+1,k+1)  (k = 0..m-2)
"""
import logging
from functools import lru_cache

import numpy as np
import scipy.linalg

from isorb.exceptions import (
    DimensionMismatch,
    NotSkewHermitian,
    NotTraceless,
    SingularInput,
)

DEFAULT_TOL = 1e-12
DEFAULT_RANK_TOL = 1e-8

logger = logging.getLogger(__name__)


def _sequential_sum(values):
    total = 0.0
    for value in values:
        total += value
    return total


def _project_su(matrix):
    """! @brief Skew-symmetrize and make traceless.

    The last diagonal entry absorbs the trace so that a second projection is
    an exact no-op in floating point.
    """
    x = (matrix - matrix.conj().T) / 2
    diag = x.diagonal().imag.copy()
    if _sequential_sum(diag) != 0.0:
        diag -= _sequential_sum(diag) / len(diag)
        diag[-1] = -_sequential_sum(diag[:-1])
        x[np.diag_indices_from(x)] = 1j * diag
    return x


def _as_square(matrix):
    x = np.array(matrix, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionMismatch("square matrix", x.shape)
    return x


class SuElement:
    """! @brief Element of su(m), stored as a read-only m x m complex array."""

    def __init__(self, matrix):
        x = _as_square(matrix)
        if x.shape[0] < 2:
            raise DimensionMismatch("m >= 2", x.shape[0], "su(m) element")
        x = _project_su(x)
        x.setflags(write=False)
        self._matrix = x

    @property
    def matrix(self):
        return self._matrix

    @property
    def m(self):
        return self._matrix.shape[0]

    @classmethod
    def zero(cls, m):
        return cls(np.zeros((m, m), dtype=complex))

    def hermitian(self):
        """Returns the Hermitian matrix -iX."""
        return -1j * self._matrix

    def eigenvalues(self):
        """Ascending real eigenvalues of -iX."""
        return np.linalg.eigvalsh(self.hermitian())

    def conjugated(self, a):
        """Returns A X A^-1 for unitary A."""
        return SuElement(a @ self._matrix @ a.conj().T)

    def complex_conjugate(self):
        return SuElement(self._matrix.conj())

    def scaled(self, s):
        return SuElement(s * self._matrix)

    def commutator(self, other):
        return SuElement(self._matrix @ other.matrix - other.matrix @ self._matrix)

    def __add__(self, other):
        return SuElement(self._matrix + other.matrix)

    def __sub__(self, other):
        return SuElement(self._matrix - other.matrix)

    def __neg__(self):
        return SuElement(-self._matrix)

    def __repr__(self):
        return "SuElement(m={})".format(self.m)


def validate_su(matrix, tol=DEFAULT_TOL):
    """! @brief Checks that a matrix lies in su(m) and returns it as SuElement."""
    x = _as_square(matrix)
    skew_residual = float(np.max(np.abs(x + x.conj().T)))
    if skew_residual > tol:
        raise NotSkewHermitian(skew_residual, tol)
    trace_residual = float(abs(np.trace(x)))
    if trace_residual > tol:
        raise NotTraceless(trace_residual, tol)
    return SuElement(x)


@lru_cache(maxsize=None)
def _basis(m):
    basis = []
    pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
    for i, j in pairs:
        b = np.zeros((m, m), dtype=complex)
        b[i, j] = 1
        b[j, i] = -1
        basis.append(b)
    for i, j in pairs:
        b = np.zeros((m, m), dtype=complex)
        b[i, j] = 1j
        b[j, i] = 1j
        basis.append(b)
    for k in range(m - 1):
        b = np.zeros((m, m), dtype=complex)
        b[k, k] = 1j
        b[k + 1, k + 1] = -1j
        basis.append(b)
    for b in basis:
        b.setflags(write=False)
    return tuple(basis)


def su_basis(m):
    """Returns the fixed real basis of su(m) (m^2 - 1 read-only matrices)."""
    return _basis(m)


def su_dimension(m):
    return m * m - 1


def to_coordinates(x):
    """! @brief Real coordinates of X (array or SuElement) against su_basis."""
    x = x.matrix if isinstance(x, SuElement) else np.asarray(x)
    m = x.shape[0]
    iu, ju = np.triu_indices(m, 1)
    upper = x[iu, ju]
    diag = x.diagonal().imag
    return np.concatenate([upper.real, upper.imag, np.cumsum(diag)[:-1]])


def from_coordinates(coords, m):
    """Inverse of to_coordinates; returns a raw complex array."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (su_dimension(m),):
        raise DimensionMismatch(su_dimension(m), coords.shape, "su coordinates")
    npairs = m * (m - 1) // 2
    x = np.zeros((m, m), dtype=complex)
    iu, ju = np.triu_indices(m, 1)
    upper = coords[:npairs] + 1j * coords[npairs : 2 * npairs]
    x[iu, ju] = upper
    x[ju, iu] = -upper.conj()
    c = np.concatenate([[0.0], coords[2 * npairs :], [0.0]])
    x[np.diag_indices(m)] = 1j * (c[1:] - c[:-1])
    return x


def real_vector(matrix):
    return np.concatenate([matrix.real.ravel(), matrix.imag.ravel()])


def _check_common_dimension(generators):
    if len(generators) == 0:
        raise DimensionMismatch("at least one generator", 0, "generator list")
    m = generators[0].m
    for g in generators[1:]:
        if g.m != m:
            raise DimensionMismatch(m, g.m, "generator")
    return m


def commutant_dimension(generators, rank_tol=DEFAULT_RANK_TOL):
    """! @brief Real dimension of the commutant of the generators in su(m).

    Computed as (m^2 - 1) minus the numerical rank of the stacked real system
    X -> ([X, G])_G over su_basis; singular values below
    rank_tol * (largest singular value) count as zero.
    """
    m = _check_common_dimension(generators)
    columns = []
    for b in su_basis(m):
        columns.append(
            np.concatenate([real_vector(b @ g.matrix - g.matrix @ b) for g in generators])
        )
    system = np.array(columns).T
    sigma = np.linalg.svd(system, compute_uv=False)
    if sigma[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(sigma > rank_tol * sigma[0]))
    return su_dimension(m) - rank


def nearest_special_unitary(a):
    """! @brief Polar unitary factor of A with determinant fixed to 1.

    The determinant phase is removed by rescaling the last column.
    """
    a = _as_square(a)
    sigma = np.linalg.svd(a, compute_uv=False)
    if sigma[-1] <= a.shape[0] * np.finfo(float).eps * max(sigma[0], 1.0):
        raise SingularInput(float(sigma[-1]))
    u, _ = scipy.linalg.polar(a)
    det = np.linalg.det(u)
    u[:, -1] *= np.conj(det) / abs(det)
    return u


def remove_determinant_phase(u):
    """Multiplies a unitary by the scalar that makes its determinant 1."""
    det = np.linalg.det(u)
    return u * np.exp(-1j * np.angle(det) / u.shape[0])


def random_su(m, rng, scale=1.0):
    g = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return SuElement(scale * (g - g.conj().T) / 2)


def random_special_unitary(m, rng):
    """Haar-distributed element of SU(m) (QR of a complex Ginibre matrix)."""
    g = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    q, r = np.linalg.qr(g)
    d = r.diagonal()
    q = q * (d / np.abs(d))
    return remove_determinant_phase(q)
