"""Fixed-N bosonic Fock sectors over two arms of M modes each.

Flat mode layout: arm A occupies flat indices ``[0, M)`` and arm B occupies
``[M, 2M)``, so mode pair ``n`` is ``(n, M + n)``.

Basis states are ordered lexicographically *descending* on the occupation
vector, so index 0 is "all particles in flat mode 0" and ranking is a
combinatorial number-system computation rather than a search.
"""
from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Union

import numpy as np
import scipy.sparse as sp

from mmqi.errors import (
    DimensionCap,
    DimMismatch,
    InvalidArgs,
    NonHermitianCoeff,
    NonRealExpectation,
    NonPhysicalState,
    NormalizationError,
    NotInBasis,
)

DEFAULT_DIM_CAP = 200_000
DENSE_CAP = 4096

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
IMAG_TOL = 1e-10
EIG_TOL = 1e-10


def dimension_cap() -> int:
    """Current basis dimension cap (``MMQI_DIM_CAP`` overrides the default)."""
    raw = os.environ.get("MMQI_DIM_CAP")
    if raw is None:
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidArgs(f"MMQI_DIM_CAP must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise InvalidArgs("MMQI_DIM_CAP must be positive")
    return cap


class Arm(enum.Enum):
    A = 0
    B = 1


@dataclass(frozen=True)
class ModeId:
    arm: Arm
    index: int
    M: int

    def __post_init__(self):
        if not 0 <= self.index < self.M:
            raise InvalidArgs(f"mode index {self.index} outside [0, {self.M})")

    @property
    def flat(self) -> int:
        return self.arm.value * self.M + self.index


def sector_dim(N: int, M: int) -> int:
    return comb(N + 2 * M - 1, 2 * M - 1)


@lru_cache(maxsize=None)
def _descending_compositions(n: int, k: int) -> np.ndarray:
    # All k-tuples of non-negative ints summing to n, descending lexicographic.
    if k == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for v in range(n, -1, -1):
        rest = _descending_compositions(n - v, k - 1)
        head = np.full((rest.shape[0], 1), v, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Occupation-number basis of the N-boson sector over 2M modes.

    ``occupations`` is a read-only ``(dim, 2M)`` integer array in canonical
    order.
    """

    N: int
    M: int
    occupations: np.ndarray = field(repr=False)
    _binom: np.ndarray = field(repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.occupations.shape[0]

    @property
    def n_modes(self) -> int:
        return 2 * self.M

    def __len__(self) -> int:
        return self.dim

    def rank(self, occ) -> int:
        return rank(self, occ)

    def unrank(self, index: int) -> np.ndarray:
        return unrank(self, index)

    def rank_many(self, occs: np.ndarray) -> np.ndarray:
        """Vectorized :func:`rank` for a ``(n, 2M)`` array of valid occupations."""
        occs = np.asarray(occs, dtype=np.int64)
        K = self.n_modes
        if K == 1:
            return np.zeros(occs.shape[0], dtype=np.int64)
        placed = np.cumsum(occs, axis=1) - occs
        remaining = self.N - placed[:, : K - 1]
        r = np.arange(K - 1, 0, -1)
        t = remaining - occs[:, : K - 1] + r - 1
        return self._binom[t, r].sum(axis=1)


def enumerate_basis(N: int, M: int, cap: int | None = None) -> FockBasis:
    """Build the N-particle sector over 2M modes.

    Raises :class:`DimensionCap` when ``C(N+2M-1, 2M-1)`` exceeds ``cap``
    (default: :func:`dimension_cap`).
    """
    if not isinstance(N, (int, np.integer)) or N < 0:
        raise InvalidArgs(f"N must be a non-negative integer, got {N!r}")
    if not isinstance(M, (int, np.integer)) or M < 1:
        raise InvalidArgs(f"M must be a positive integer, got {M!r}")
    N, M = int(N), int(M)
    cap = dimension_cap() if cap is None else cap
    dim = sector_dim(N, M)
    if dim > cap:
        raise DimensionCap(f"sector dim C({N + 2 * M - 1},{2 * M - 1})={dim} exceeds cap {cap}")
    K = 2 * M
    occs = _descending_compositions(N, K)
    size = N + K
    binom = np.array([[comb(t, r) for r in range(K)] for t in range(size)], dtype=np.int64)
    return FockBasis(N=N, M=M, occupations=occs, _binom=binom)


def _check_occ(basis: FockBasis, occ) -> np.ndarray:
    occ = np.asarray(occ, dtype=np.int64).ravel()
    if occ.size != basis.n_modes:
        raise NotInBasis(f"occupation has {occ.size} modes, basis has {basis.n_modes}")
    if np.any(occ < 0) or int(occ.sum()) != basis.N:
        raise NotInBasis(f"occupation {occ.tolist()} is not in the N={basis.N} sector")
    return occ


def rank(basis: FockBasis, occ) -> int:
    """Index of ``occ`` in ``basis``; O(M) binomial lookups, no search."""
    occ = _check_occ(basis, occ)
    return int(basis.rank_many(occ[None, :])[0])


def unrank(basis: FockBasis, index: int) -> np.ndarray:
    """Occupation vector at position ``index`` of ``basis``."""
    if not 0 <= index < basis.dim:
        raise InvalidArgs(f"index {index} outside [0, {basis.dim})")
    K = basis.n_modes
    occ = np.zeros(K, dtype=np.int64)
    remaining = basis.N
    idx = int(index)
    for i in range(K - 1):
        r = K - 1 - i
        v = remaining
        # block of vectors sharing this prefix value: distributions of the rest over r modes
        while True:
            block = comb(remaining - v + r - 1, r - 1)
            if idx < block:
                break
            idx -= block
            v -= 1
        occ[i] = v
        remaining -= v
    occ[K - 1] = remaining
    return occ


class SparseHermitian:
    """Hermitian operator on a fixed sector, stored as CSR.

    Instances are treated as immutable; arithmetic returns new objects.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix, check: bool = True):
        mat = sp.csr_matrix(matrix, dtype=np.complex128)
        if mat.shape[0] != mat.shape[1]:
            raise DimMismatch(f"operator must be square, got {mat.shape}")
        if check and mat.nnz:
            resid = abs(mat - mat.getH())
            if resid.nnz and resid.max() > HERMITIAN_TOL * max(1.0, abs(mat).max()):
                raise NonHermitianCoeff("matrix is not Hermitian")
        self.matrix = mat

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def entries(self):
        """Upper-triangle-plus-diagonal ``(row, col, value)`` triples."""
        upper = sp.triu(self.matrix).tocoo()
        return list(zip(upper.row.tolist(), upper.col.tolist(), upper.data.tolist()))

    def __matmul__(self, other):
        if isinstance(other, SparseHermitian):
            return self.matrix @ other.matrix
        return self.matrix @ other

    def __add__(self, other: "SparseHermitian") -> "SparseHermitian":
        if not isinstance(other, SparseHermitian):
            return NotImplemented
        if other.dim != self.dim:
            raise DimMismatch(f"dims {self.dim} and {other.dim} differ")
        return SparseHermitian(self.matrix + other.matrix, check=False)

    def __sub__(self, other: "SparseHermitian") -> "SparseHermitian":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "SparseHermitian":
        if np.iscomplexobj(scalar) and np.imag(scalar) != 0:
            raise NonHermitianCoeff("only real scalars preserve Hermiticity")
        return SparseHermitian(self.matrix * float(np.real(scalar)), check=False)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"SparseHermitian(dim={self.dim}, nnz={self.matrix.nnz})"


class StateVector:
    """Normalized pure state on a sector (``basis`` is any object with ``dim``)."""

    __slots__ = ("basis", "amps")

    def __init__(self, basis, amps):
        amps = np.asarray(amps, dtype=np.complex128).ravel()
        if amps.size != basis.dim:
            raise DimMismatch(f"{amps.size} amplitudes for a basis of dim {basis.dim}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise NormalizationError(f"state norm {norm!r} differs from 1")
        amps.setflags(write=False)
        self.basis = basis
        self.amps = amps

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def N(self) -> int:
        return self.basis.N

    def projector(self) -> "DensityOperator":
        return DensityOperator(self.basis, np.outer(self.amps, self.amps.conj()))


class DensityOperator:
    """Mixed state on a sector: Hermitian, unit trace, positive semidefinite."""

    __slots__ = ("basis", "matrix")

    def __init__(self, basis, matrix, check: bool = True):
        mat = np.asarray(matrix, dtype=np.complex128)
        if mat.shape != (basis.dim, basis.dim):
            raise DimMismatch(f"density matrix shape {mat.shape} for basis dim {basis.dim}")
        if check:
            if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
                raise NonPhysicalState("density matrix is not Hermitian")
            tr = np.trace(mat).real
            if abs(tr - 1.0) > NORM_TOL:
                raise NormalizationError(f"trace {tr!r} differs from 1")
            if mat.shape[0] <= DENSE_CAP:
                lo = np.linalg.eigvalsh(mat).min()
                if lo < -EIG_TOL:
                    raise NonPhysicalState(f"negative eigenvalue {lo:.3e}")
        mat.setflags(write=False)
        self.basis = basis
        self.matrix = mat

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.basis.N

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))


State = Union[StateVector, DensityOperator]


def transition_operator(basis: FockBasis, m: int, n: int) -> sp.csr_matrix:
    """CSR matrix of the hopping term ``c_m^dagger c_n`` on ``basis``."""
    key = ("hop", m, n)
    cached = basis._cache.get(key)
    if cached is not None:
        return cached
    K = basis.n_modes
    if not (0 <= m < K and 0 <= n < K):
        raise InvalidArgs(f"flat modes ({m}, {n}) outside [0, {K})")
    occs = basis.occupations
    cols = np.nonzero(occs[:, n] > 0)[0]
    src = occs[cols]
    if m == n:
        rows = cols
        vals = src[:, n].astype(np.float64)
    else:
        dst = src.copy()
        dst[:, n] -= 1
        dst[:, m] += 1
        rows = basis.rank_many(dst)
        vals = np.sqrt((src[:, n] * (src[:, m] + 1)).astype(np.float64))
    mat = sp.csr_matrix((vals.astype(np.complex128), (rows, cols)), shape=(basis.dim, basis.dim))
    basis._cache[key] = mat
    return mat


def _check_coeff(coeff, size: int) -> np.ndarray:
    coeff = np.asarray(coeff, dtype=np.complex128)
    if coeff.shape != (size, size):
        raise DimMismatch(f"coefficient matrix must be {size}x{size}, got {coeff.shape}")
    if np.max(np.abs(coeff - coeff.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise NonHermitianCoeff("one-body coefficient matrix is not Hermitian")
    return coeff


def one_body_operator(basis: FockBasis, coeff) -> SparseHermitian:
    """Second-quantized ``sum_{mn} coeff[m, n] c_m^dagger c_n`` on the sector."""
    coeff = _check_coeff(coeff, basis.n_modes)
    total = sp.csr_matrix((basis.dim, basis.dim), dtype=np.complex128)
    for m, n in zip(*np.nonzero(coeff)):
        total = total + coeff[m, n] * transition_operator(basis, int(m), int(n))
    return SparseHermitian(total, check=False)


def _as_operator(op):
    if isinstance(op, SparseHermitian):
        return op.matrix
    return op


def expectation(op, state: State) -> float:
    """Real expectation value ``<psi|O|psi>`` or ``Tr[rho O]``."""
    mat = _as_operator(op)
    if mat.shape[0] != state.dim:
        raise DimMismatch(f"operator dim {mat.shape[0]} vs state dim {state.dim}")
    if isinstance(state, StateVector):
        val = np.vdot(state.amps, mat @ state.amps)
    else:
        rho = state.matrix
        # Tr[rho O] = sum_ij rho_ij O_ji
        if sp.issparse(mat):
            val = (mat.multiply(rho.T)).sum()
        else:
            val = np.sum(rho * mat.T)
    if abs(val.imag) > IMAG_TOL:
        raise NonRealExpectation(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def second_moment(op, state: State) -> float:
    """``<O^2>`` for a Hermitian ``O``."""
    mat = _as_operator(op)
    if mat.shape[0] != state.dim:
        raise DimMismatch(f"operator dim {mat.shape[0]} vs state dim {state.dim}")
    if isinstance(state, StateVector):
        v = mat @ state.amps
        return float(np.real(np.vdot(v, v)))
    sq = mat @ mat
    return expectation(sq, state)


def variance(op, state: State) -> float:
    mean = expectation(op, state)
    return second_moment(op, state) - mean * mean
