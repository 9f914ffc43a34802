"""Quantum Fisher information, Cramer-Rao bounds, squeezing witnesses and the
sensitivity of the mean-imbalance Mach-Zehnder estimator."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from mmqi.errors import (
    DimensionCap,
    DimMismatch,
    NonPhysicalState,
    NonPositiveFisher,
    VanishingSignal,
)
from mmqi.fock import (
    DENSE_CAP,
    EIG_TOL,
    DensityOperator,
    SparseHermitian,
    StateVector,
    expectation,
    variance,
)
from mmqi.operators import GeneratorSet, build_generators, direction_generator
from mmqi.states import ArmAmplitudes, SectorUnion

WITNESS_TOL = 1e-8
SUPPORT_TOL = 1e-12
SIGNAL_TOL = 1e-12


class Witness(str, enum.Enum):
    SEPARABLE_CONSISTENT = "SEPARABLE_CONSISTENT"
    ENTANGLED = "ENTANGLED"


@dataclass(frozen=True)
class QfiReport:
    value: float
    particle_budget: float
    witness: Witness

    @classmethod
    def from_value(cls, value: float, budget: float, tol: float = WITNESS_TOL) -> "QfiReport":
        verdict = Witness.ENTANGLED if value > budget + tol else Witness.SEPARABLE_CONSISTENT
        return cls(float(value), float(budget), verdict)


@dataclass(frozen=True)
class SensitivityReport:
    theta: float
    m: int
    delta2_theta: float
    crlb: float


def _matrix(gen):
    return gen.matrix if isinstance(gen, SparseHermitian) else np.asarray(gen)


def qfi_pure(state: StateVector, gen) -> float:
    """``4 Var(G)`` for a pure state."""
    mat = _matrix(gen)
    if mat.shape[0] != state.dim:
        raise DimMismatch(f"generator dim {mat.shape[0]} vs state dim {state.dim}")
    return max(4.0 * variance(gen, state), 0.0)


def _spectrum(rho: DensityOperator):
    if rho.dim > DENSE_CAP:
        raise DimensionCap(f"dim {rho.dim} exceeds dense cap {DENSE_CAP}")
    p, vecs = np.linalg.eigh(rho.matrix)
    if p.min() < -EIG_TOL:
        raise NonPhysicalState(f"density matrix eigenvalue {p.min():.3e} < 0")
    p = np.clip(p, 0.0, None)
    return p / p.sum(), vecs


def _pair_weights(p: np.ndarray) -> np.ndarray:
    s = p[:, None] + p[None, :]
    d = (p[:, None] - p[None, :]) ** 2
    w = np.zeros_like(s)
    np.divide(d, s, out=w, where=s > SUPPORT_TOL)
    return w


def qfi_mixed(rho: DensityOperator, gen) -> float:
    """``2 sum_ij (p_i - p_j)^2 / (p_i + p_j) |<i|G|j>|^2`` over the support of rho."""
    mat = _matrix(gen)
    if mat.shape[0] != rho.dim:
        raise DimMismatch(f"generator dim {mat.shape[0]} vs state dim {rho.dim}")
    p, vecs = _spectrum(rho)
    g = vecs.conj().T @ (mat @ vecs)
    return float(2.0 * np.sum(_pair_weights(p) * np.abs(g) ** 2))


def qfi_mixed_directions(rho: DensityOperator, gens: GeneratorSet, directions) -> np.ndarray:
    """QFI for many unit directions, reusing one eigendecomposition of ``rho``."""
    p, vecs = _spectrum(rho)
    w = _pair_weights(p)
    comps = [vecs.conj().T @ (g.matrix @ vecs) for g in (gens.jx, gens.jy, gens.jz)]
    out = []
    for n in np.atleast_2d(directions):
        g = n[0] * comps[0] + n[1] * comps[1] + n[2] * comps[2]
        out.append(2.0 * np.sum(w * np.abs(g) ** 2))
    return np.array(out)


def qfi(state, gen) -> float:
    """Dispatch to :func:`qfi_pure` or :func:`qfi_mixed`."""
    if isinstance(state, StateVector):
        return qfi_pure(state, gen)
    return qfi_mixed(state, gen)


def max_qfi_pure(state: StateVector, gens: GeneratorSet) -> tuple[float, np.ndarray]:
    """Largest QFI over all directions: 4 x top eigenvalue of the J covariance matrix."""
    ops = [gens.jx, gens.jy, gens.jz]
    vs = [op.matrix @ state.amps for op in ops]
    means = np.array([np.vdot(state.amps, v).real for v in vs])
    cov = np.array([[np.vdot(vi, vj).real for vj in vs] for vi in vs]) - np.outer(means, means)
    evals, evecs = np.linalg.eigh(cov)
    return float(4.0 * evals[-1]), evecs[:, -1]


def qfi_blockwise(union: SectorUnion, axis="z") -> QfiReport:
    """``sum_N P(N) F_q[rho_N]`` against the budget ``<N>``."""
    total = 0.0
    for p, rho in union.sectors:
        gen = direction_generator(build_generators(rho.basis), axis)
        total += p * qfi_mixed(rho, gen)
    return QfiReport.from_value(total, union.mean_N)


def separable_bound_analytic(amps: ArmAmplitudes, N: int) -> float:
    """``N (1 - (|alpha|^2 - |beta|^2)^2)`` for a spin-coherent state."""
    return N * (1.0 - amps.imbalance**2)


def crlb(fq: float, m: int) -> float:
    """Variance bound ``1 / (m F_q)``."""
    if not fq > 0:
        raise NonPositiveFisher(f"Fisher information must be positive, got {fq!r}")
    if m < 1:
        raise NonPositiveFisher(f"need m >= 1 repetitions, got {m}")
    return 1.0 / (m * fq)


@dataclass(frozen=True)
class ImbalanceMoments:
    """First and second moments of ``Jz`` and ``Jx`` needed to evolve ``Jz(theta)``."""

    mean_z: float
    mean_x: float
    var_z: float
    var_x: float
    cov_zx: float

    @classmethod
    def of(cls, state, gens: GeneratorSet) -> "ImbalanceMoments":
        jz, jx = gens.jz, gens.jx
        mz = expectation(jz, state)
        mx = expectation(jx, state)
        anti = jz.matrix @ jx.matrix + jx.matrix @ jz.matrix
        cov = 0.5 * expectation(anti, state) - mz * mx
        return cls(mz, mx, variance(jz, state), variance(jx, state), cov)

    def mean(self, theta):
        return self.mean_z * np.cos(theta) + self.mean_x * np.sin(theta)

    def slope(self, theta):
        return -self.mean_z * np.sin(theta) + self.mean_x * np.cos(theta)

    def var(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        return c * c * self.var_z + s * s * self.var_x + 2.0 * s * c * self.cov_zx


def estimator_sensitivity(state, theta: float, m: int, gens: GeneratorSet) -> SensitivityReport:
    """Error propagation ``Var(Jz(theta)) / (m (d<Jz(theta)>/dtheta)^2)``."""
    mom = ImbalanceMoments.of(state, gens)
    slope = mom.slope(theta)
    if abs(slope) <= SIGNAL_TOL:
        raise VanishingSignal(
            f"d<Jz(theta)>/dtheta = {slope:.3e} at theta={theta}; choose a working point with signal"
        )
    d2 = mom.var(theta) / (m * slope**2)
    bound = crlb(qfi(state, gens.jy), m)
    return SensitivityReport(float(theta), int(m), float(d2), float(bound))


def xi_squared(state, gens: GeneratorSet) -> float:
    """``N Var(Jz) / <Jx>^2``; values below 1 certify particle entanglement."""
    mx = expectation(gens.jx, state)
    if mx * mx <= SIGNAL_TOL**2:
        raise VanishingSignal("<Jx> vanishes; squeezing parameter undefined")
    return state.N * variance(gens.jz, state) / mx**2


def xi_s_squared(state, gens: GeneratorSet) -> float:
    """``N Var(Jz) / (<Jx>^2 + <Jy>^2)``."""
    mx = expectation(gens.jx, state)
    my = expectation(gens.jy, state)
    denom = mx * mx + my * my
    if denom <= 1e-24:
        raise VanishingSignal("<Jx>^2 + <Jy>^2 vanishes; squeezing parameter undefined")
    return state.N * variance(gens.jz, state) / denom
