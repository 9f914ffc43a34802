"""Bosonic state constructors: spin-coherent states, separable mixtures,
NOON states, the split-arm three-mode state and fluctuating-N unions."""
from __future__ import annotations

from dataclasses import dataclass
from math import lgamma
from typing import Sequence

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from mmqi.errors import (
    InvalidArgs,
    ModeOutOfRange,
    NormalizationError,
    ProbabilityNormalization,
    RangeError,
)
from mmqi.fock import DensityOperator, FockBasis, StateVector

NORM_TOL = 1e-12


def _complex_vector(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128).ravel()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ArmAmplitudes:
    """Single-particle amplitudes ``(alpha, beta)`` over the A and B arm modes."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        alpha = _complex_vector(self.alpha)
        beta = _complex_vector(self.beta)
        if alpha.size != beta.size or alpha.size == 0:
            raise InvalidArgs(f"alpha/beta lengths {alpha.size}/{beta.size} must match and be >= 1")
        norm2 = np.vdot(alpha, alpha).real + np.vdot(beta, beta).real
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm2!r}, expected 1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def M(self) -> int:
        return self.alpha.size

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta])

    @property
    def imbalance(self) -> float:
        """``|alpha|^2 - |beta|^2``."""
        return float(np.vdot(self.alpha, self.alpha).real - np.vdot(self.beta, self.beta).real)

    @classmethod
    def from_flat(cls, vec) -> "ArmAmplitudes":
        vec = np.asarray(vec, dtype=np.complex128).ravel()
        if vec.size % 2:
            raise InvalidArgs("flat amplitude vector must have even length 2M")
        M = vec.size // 2
        return cls(vec[:M], vec[M:])

    @classmethod
    def two_mode(cls, z: float, phi: float = 0.0, M: int = 1) -> "ArmAmplitudes":
        """``sqrt(z) e^{i phi}`` in ``a_0`` and ``sqrt(1 - z)`` in ``b_0``."""
        if not 0.0 <= z <= 1.0:
            raise RangeError(f"z={z} outside [0, 1]")
        alpha = np.zeros(M, dtype=np.complex128)
        beta = np.zeros(M, dtype=np.complex128)
        alpha[0] = np.sqrt(z) * np.exp(1j * phi)
        beta[0] = np.sqrt(1.0 - z)
        return cls(alpha, beta)


@dataclass(frozen=True)
class MixtureSpec:
    components: tuple

    def __post_init__(self):
        comps = tuple((float(w), a) for w, a in self.components)
        if not comps:
            raise InvalidArgs("mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if np.any(weights < 0):
            raise ProbabilityNormalization("mixture weights must be non-negative")
        if abs(weights.sum() - 1.0) > NORM_TOL:
            raise ProbabilityNormalization(f"mixture weights sum to {weights.sum()!r}")
        object.__setattr__(self, "components", comps)


def random_amplitudes(M: int, rng: np.random.Generator) -> ArmAmplitudes:
    """Unitarily invariant draw: complex standard normal 2M-vector, normalized."""
    vec = rng.standard_normal(2 * M) + 1j * rng.standard_normal(2 * M)
    return ArmAmplitudes.from_flat(vec / np.linalg.norm(vec))


def _check_M(basis: FockBasis, amps: ArmAmplitudes):
    if amps.M != basis.M:
        raise InvalidArgs(f"amplitudes have M={amps.M}, basis has M={basis.M}")


def coherent_amplitudes(basis: FockBasis, amps: ArmAmplitudes) -> np.ndarray:
    """Raw amplitude vector of ``(alpha.a^+ + beta.b^+)^N |0> / sqrt(N!)``."""
    _check_M(basis, amps)
    occ = basis.occupations
    c = amps.flat
    log_multinomial = lgamma(basis.N + 1) - gammaln(occ + 1.0).sum(axis=1)
    return np.exp(0.5 * log_multinomial) * np.prod(c[None, :] ** occ, axis=1)


def coherent_state(basis: FockBasis, amps: ArmAmplitudes) -> StateVector:
    return StateVector(basis, coherent_amplitudes(basis, amps))


def separable_mixture(basis: FockBasis, spec: MixtureSpec) -> DensityOperator:
    """``sum_i w_i |psi_i><psi_i|`` over coherent components."""
    cols = [np.sqrt(w) * coherent_amplitudes(basis, a) for w, a in spec.components]
    A = np.column_stack(cols)
    return DensityOperator(basis, A @ A.conj().T)


def noon_state(basis: FockBasis, mode: int = 0) -> StateVector:
    """``(|N in a_mode> + |N in b_mode>) / sqrt(2)``."""
    if not 0 <= mode < basis.M:
        raise ModeOutOfRange(f"mode {mode} outside [0, {basis.M})")
    amps = np.zeros(basis.dim, dtype=np.complex128)
    if basis.N == 0:
        amps[0] = 1.0
        return StateVector(basis, amps)
    for flat in (mode, basis.M + mode):
        occ = np.zeros(basis.n_modes, dtype=np.int64)
        occ[flat] = basis.N
        amps[basis.rank(occ)] = 1.0 / np.sqrt(2.0)
    return StateVector(basis, amps)


def three_mode_amplitudes(M: int, z: float, zeta: float) -> ArmAmplitudes:
    """Arm A split coherently into ``a_0, a_1`` with weights ``zeta, 1 - zeta``."""
    if not (0.0 <= z <= 1.0 and 0.0 <= zeta <= 1.0):
        raise RangeError(f"z={z}, zeta={zeta} must lie in [0, 1]")
    if M < 2:
        raise RangeError(f"three-mode state needs M >= 2, got {M}")
    alpha = np.zeros(M, dtype=np.complex128)
    beta = np.zeros(M, dtype=np.complex128)
    alpha[0] = np.sqrt(z * zeta)
    alpha[1] = np.sqrt(z * (1.0 - zeta))
    beta[0] = np.sqrt(1.0 - z)
    return ArmAmplitudes(alpha, beta)


def three_mode_example(basis: FockBasis, z: float, zeta: float) -> StateVector:
    return coherent_state(basis, three_mode_amplitudes(basis.M, z, zeta))


def mixture_weights(n: int, rng: np.random.Generator, weight_law: str) -> np.ndarray:
    if weight_law == "uniform":
        return np.full(n, 1.0 / n)
    if weight_law == "dirichlet":
        w = rng.dirichlet(np.ones(n))
        return w / w.sum()
    raise InvalidArgs(f"unknown weight_law {weight_law!r}")


def random_separable(
    basis: FockBasis, n_components: int, seed: int, weight_law: str = "uniform"
) -> DensityOperator:
    """Finite random mixture of spin-coherent states; reproducible per ``seed``."""
    if n_components < 1:
        raise InvalidArgs("n_components must be >= 1")
    rng = np.random.default_rng(seed)
    comps = [random_amplitudes(basis.M, rng) for _ in range(n_components)]
    weights = mixture_weights(n_components, rng, weight_law)
    return separable_mixture(basis, MixtureSpec(tuple(zip(weights, comps))))


@dataclass(frozen=True)
class SectorUnion:
    """Incoherent union ``sum_N P(N) rho_N`` of fixed-N sectors."""

    sectors: tuple

    @property
    def mean_N(self) -> float:
        return float(sum(p * rho.N for p, rho in self.sectors))


def sector_union(specs: Sequence) -> SectorUnion:
    sectors = []
    for p, state in specs:
        if isinstance(state, StateVector):
            state = state.projector()
        if not isinstance(state, DensityOperator):
            raise InvalidArgs(f"sector state must be a StateVector or DensityOperator, got {type(state)}")
        if p < 0:
            raise ProbabilityNormalization("sector probabilities must be non-negative")
        sectors.append((float(p), state))
    if not sectors:
        raise InvalidArgs("sector union needs at least one sector")
    total = sum(p for p, _ in sectors)
    if abs(total - 1.0) > NORM_TOL:
        raise ProbabilityNormalization(f"sector probabilities sum to {total!r}")
    ns = [rho.N for _, rho in sectors]
    if len(set(ns)) != len(ns):
        raise InvalidArgs(f"sector particle numbers must be distinct, got {ns}")
    return SectorUnion(tuple(sectors))


def poisson_weights(mean: float, n_max: int) -> np.ndarray:
    """Poisson probabilities for ``N = 0..n_max``, truncated and renormalized."""
    w = poisson.pmf(np.arange(n_max + 1), mean)
    return w / w.sum()
