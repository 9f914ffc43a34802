"""Tensor-product backend for N distinguishable particles.

Particle ``j`` lives in tensor slot ``j`` (row-major), each slot spanning the
2M flat modes ``a_0..a_{M-1}, b_0..b_{M-1}``. Species are never transmuted,
so collective operators are sums of single-slot operators.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from mmqi.errors import DimensionCap, InvalidArgs, ModeOutOfRange, NormalizationError
from mmqi.fock import (
    HERMITIAN_TOL,
    DensityOperator,
    SparseHermitian,
    StateVector,
    _check_coeff,
    dimension_cap,
)
from mmqi.operators import pair_coeff
from mmqi.states import ArmAmplitudes, mixture_weights, random_amplitudes

SingleParticleAmps = ArmAmplitudes


@dataclass(frozen=True)
class TensorSpace:
    N: int
    M: int

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise InvalidArgs(f"need N >= 1 and M >= 1, got N={self.N}, M={self.M}")
        cap = dimension_cap()
        if self.dim > cap:
            raise DimensionCap(f"tensor dim (2M)^N = {self.dim} exceeds cap {cap}")

    @property
    def dim(self) -> int:
        return (2 * self.M) ** self.N

    @property
    def local_dim(self) -> int:
        return 2 * self.M

    def one_body_operator(self, coeff) -> SparseHermitian:
        """``sum_j 1 x .. x coeff_(slot j) x .. x 1``."""
        coeff = _check_coeff(coeff, self.local_dim)
        return SparseHermitian(self._slot_sum(sp.csr_matrix(coeff)), check=False)

    def _slot_sum(self, local) -> sp.csr_matrix:
        d = self.local_dim
        total = sp.csr_matrix((self.dim, self.dim), dtype=np.complex128)
        for j in range(self.N):
            left = sp.identity(d**j, dtype=np.complex128, format="csr")
            right = sp.identity(d ** (self.N - j - 1), dtype=np.complex128, format="csr")
            total = total + sp.kron(sp.kron(left, local), right, format="csr")
        return total

    def reduced_sum(self, state) -> np.ndarray:
        """``sum_j rho_j`` of single-slot reduced density matrices, shape (2M, 2M)."""
        d = self.local_dim
        out = np.zeros((d, d), dtype=np.complex128)
        if isinstance(state, StateVector):
            psi = state.amps.reshape((d,) * self.N)
            for j in range(self.N):
                mat = np.moveaxis(psi, j, 0).reshape(d, -1)
                out += mat @ mat.conj().T
        else:
            rho = state.matrix.reshape((d,) * (2 * self.N))
            for j in range(self.N):
                t = np.moveaxis(rho, (j, self.N + j), (0, 1)).reshape(d, d, -1, d ** (self.N - 1))
                out += np.einsum("abkk->ab", t)
        return out


class TensorState(StateVector):
    """Pure state of N distinguishable particles, amplitudes of length (2M)^N."""

    __slots__ = ()

    @property
    def M(self) -> int:
        return self.basis.M


def product_state(particles: Sequence[ArmAmplitudes]) -> TensorState:
    if not particles:
        raise InvalidArgs("need at least one particle")
    M = particles[0].M
    if any(p.M != M for p in particles):
        raise InvalidArgs("all particles must share M")
    space = TensorSpace(len(particles), M)
    vec = reduce(np.kron, [p.flat for p in particles])
    return TensorState(space, vec)


def collective_j_dist(N: int, M: int, axis) -> SparseHermitian:
    return TensorSpace(N, M).one_body_operator(pair_coeff(M, axis))


def noon_distinguishable(N: int, M: int, mode: int = 0) -> TensorState:
    """``(|a_mode ... a_mode> + |b_mode ... b_mode>) / sqrt(2)``."""
    if not 0 <= mode < M:
        raise ModeOutOfRange(f"mode {mode} outside [0, {M})")
    space = TensorSpace(N, M)
    d = space.local_dim
    amps = np.zeros(space.dim, dtype=np.complex128)
    for flat in (mode, M + mode):
        # index of |flat, flat, ..., flat> in row-major order
        idx = sum(flat * d**p for p in range(N))
        amps[idx] = 1.0 / np.sqrt(2.0)
    return TensorState(space, amps)


def qfi_single_particle(amps: ArmAmplitudes) -> float:
    """``1 - (|alpha|^2 - |beta|^2)^2``."""
    norm2 = np.vdot(amps.flat, amps.flat).real
    if abs(norm2 - 1.0) > HERMITIAN_TOL:
        raise NormalizationError(f"single-particle norm {norm2!r}")
    return 1.0 - amps.imbalance**2


def product_mixture(weights, states: Sequence[TensorState]) -> DensityOperator:
    """Weighted mixture of product-state projectors on a common tensor space."""
    weights = np.asarray(weights, dtype=np.float64)
    if len(weights) != len(states) or not states:
        raise InvalidArgs("weights and states must be non-empty and of equal length")
    space = states[0].basis
    A = np.column_stack([np.sqrt(w) * s.amps for w, s in zip(weights, states)])
    return DensityOperator(space, A @ A.conj().T)


def random_product_state(N: int, M: int, rng: np.random.Generator) -> TensorState:
    return product_state([random_amplitudes(M, rng) for _ in range(N)])


def random_product_mixture(
    N: int, M: int, n_components: int, seed: int, weight_law: str = "uniform"
) -> DensityOperator:
    if n_components < 1:
        raise InvalidArgs("n_components must be >= 1")
    rng = np.random.default_rng(seed)
    states = [random_product_state(N, M, rng) for _ in range(n_components)]
    return product_mixture(mixture_weights(n_components, rng, weight_law), states)
