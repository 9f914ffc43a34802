"""Collective angular-momentum generators of the two-arm interferometer.

Each generator couples only mode pairs ``(a_n, b_n)``::

    Jx = 1/2  sum_n (a_n^+ b_n + b_n^+ a_n)
    Jy = 1/2i sum_n (a_n^+ b_n - b_n^+ a_n)
    Jz = 1/2  sum_n (a_n^+ a_n - b_n^+ b_n)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmqi.errors import DimensionCap, InvalidArgs, ModeOutOfRange, NonUnitDirection
from mmqi.fock import DENSE_CAP, FockBasis, SparseHermitian, one_body_operator

_AXES = {
    "x": np.array([1.0, 0.0, 0.0]),
    "y": np.array([0.0, 1.0, 0.0]),
    "z": np.array([0.0, 0.0, 1.0]),
}
UNIT_TOL = 1e-12


def as_direction(axis) -> np.ndarray:
    """Unit 3-vector for ``axis`` given as ``'x'|'y'|'z'`` or a 3-vector."""
    if isinstance(axis, str):
        try:
            return _AXES[axis.lower()].copy()
        except KeyError:
            raise InvalidArgs(f"unknown axis {axis!r}") from None
    vec = np.asarray(axis, dtype=np.float64).ravel()
    if vec.size != 3 or not np.all(np.isfinite(vec)):
        raise NonUnitDirection(f"direction must be a finite 3-vector, got {axis!r}")
    if abs(np.linalg.norm(vec) - 1.0) > UNIT_TOL:
        raise NonUnitDirection(f"direction norm {np.linalg.norm(vec)!r} differs from 1")
    return vec


def pair_coeff(M: int, axis, mode: int | None = None) -> np.ndarray:
    """2M x 2M single-particle matrix of a generator along ``axis``.

    With ``mode`` given, only the pair ``(a_mode, b_mode)`` contributes.
    """
    if mode is not None and not 0 <= mode < M:
        raise ModeOutOfRange(f"mode {mode} outside [0, {M})")
    nx, ny, nz = as_direction(axis)
    coeff = np.zeros((2 * M, 2 * M), dtype=np.complex128)
    pairs = range(M) if mode is None else [mode]
    for n in pairs:
        a, b = n, M + n
        coeff[a, b] = 0.5 * nx - 0.5j * ny
        coeff[b, a] = 0.5 * nx + 0.5j * ny
        coeff[a, a] = 0.5 * nz
        coeff[b, b] = -0.5 * nz
    return coeff


def _one_body(space, coeff) -> SparseHermitian:
    if isinstance(space, FockBasis):
        return one_body_operator(space, coeff)
    return space.one_body_operator(coeff)


@dataclass(frozen=True)
class GeneratorSet:
    jx: SparseHermitian
    jy: SparseHermitian
    jz: SparseHermitian
    space: object = None

    @property
    def dim(self) -> int:
        return self.jz.dim

    def __getitem__(self, axis: str) -> SparseHermitian:
        return {"x": self.jx, "y": self.jy, "z": self.jz}[axis]

    def along(self, axis) -> SparseHermitian:
        return direction_generator(self, axis)


def build_generators(space) -> GeneratorSet:
    """Total ``Jx, Jy, Jz`` on a bosonic sector or a distinguishable tensor space."""
    M = space.M
    return GeneratorSet(
        jx=_one_body(space, pair_coeff(M, "x")),
        jy=_one_body(space, pair_coeff(M, "y")),
        jz=_one_body(space, pair_coeff(M, "z")),
        space=space,
    )


def per_mode_generator(space, n: int, axis) -> SparseHermitian:
    """Component of the generator acting only on the pair ``(a_n, b_n)``."""
    return _one_body(space, pair_coeff(space.M, axis, mode=n))


def number_operator(space) -> SparseHermitian:
    return _one_body(space, np.eye(2 * space.M))


def direction_generator(gens: GeneratorSet, axis) -> SparseHermitian:
    nx, ny, nz = as_direction(axis)
    return nx * gens.jx + ny * gens.jy + nz * gens.jz


def dense_matrix(gen) -> np.ndarray:
    if isinstance(gen, SparseHermitian):
        if gen.dim > DENSE_CAP:
            raise DimensionCap(f"dim {gen.dim} exceeds dense cap {DENSE_CAP}")
        return gen.toarray()
    gen = np.asarray(gen, dtype=np.complex128)
    if gen.shape[0] > DENSE_CAP:
        raise DimensionCap(f"dim {gen.shape[0]} exceeds dense cap {DENSE_CAP}")
    return gen


def rotation(gen, theta: float) -> np.ndarray:
    """Dense unitary ``exp(-i theta G)`` via the eigendecomposition of ``G``."""
    evals, vecs = np.linalg.eigh(dense_matrix(gen))
    return (vecs * np.exp(-1j * theta * evals)) @ vecs.conj().T


def heisenberg_jz(gens: GeneratorSet, theta: float) -> np.ndarray:
    """Output-port imbalance observable ``Jz cos(theta) + Jx sin(theta)``.

    This is ``U Jz U^+`` with ``U = rotation(jy, theta)``, i.e. the Heisenberg
    picture of the state evolution ``exp(+i theta Jy)`` used by the MZI
    sampler.
    """
    if gens.dim > DENSE_CAP:
        raise DimensionCap(f"dim {gens.dim} exceeds dense cap {DENSE_CAP}")
    return np.cos(theta) * gens.jz.toarray() + np.sin(theta) * gens.jx.toarray()
