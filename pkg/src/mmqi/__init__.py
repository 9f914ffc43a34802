"""Metrology of two-arm interferometers whose arms hold many modes."""

from mmqi.errors import MmqiError
from mmqi.fock import (
    DensityOperator,
    FockBasis,
    SparseHermitian,
    StateVector,
    enumerate_basis,
    expectation,
    one_body_operator,
    rank,
    unrank,
)
from mmqi.operators import (
    GeneratorSet,
    build_generators,
    direction_generator,
    heisenberg_jz,
    per_mode_generator,
    rotation,
)
from mmqi.states import (
    ArmAmplitudes,
    MixtureSpec,
    coherent_state,
    noon_state,
    random_separable,
    sector_union,
    separable_mixture,
    three_mode_example,
)
from mmqi.metrology import (
    QfiReport,
    crlb,
    estimator_sensitivity,
    qfi_blockwise,
    qfi_mixed,
    qfi_pure,
    separable_bound_analytic,
    xi_s_squared,
    xi_squared,
)

__all__ = [
    "ArmAmplitudes",
    "DensityOperator",
    "FockBasis",
    "GeneratorSet",
    "MixtureSpec",
    "MmqiError",
    "QfiReport",
    "SparseHermitian",
    "StateVector",
    "build_generators",
    "coherent_state",
    "crlb",
    "direction_generator",
    "enumerate_basis",
    "estimator_sensitivity",
    "expectation",
    "heisenberg_jz",
    "noon_state",
    "one_body_operator",
    "per_mode_generator",
    "qfi_blockwise",
    "qfi_mixed",
    "qfi_pure",
    "random_separable",
    "rank",
    "rotation",
    "sector_union",
    "separable_bound_analytic",
    "separable_mixture",
    "three_mode_example",
    "unrank",
    "xi_s_squared",
    "xi_squared",
]
