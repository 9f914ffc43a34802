from types import SimpleNamespace

import numpy as np
import pytest

from mmqi import distinguishable as dist
from mmqi.errors import DimensionCap, NormalizationError
from mmqi.fock import enumerate_basis, expectation
from mmqi.metrology import qfi, qfi_pure
from mmqi.operators import build_generators
from mmqi.states import ArmAmplitudes, coherent_state
from tests.conftest import random_amps

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2


def test_single_particle_state():
    a = ArmAmplitudes([0.6], [0.8j])
    assert np.allclose(dist.product_state([a]).amps, [0.6, 0.8j])


def test_product_state_is_kron(rng):
    parts = [random_amps(2, rng) for _ in range(3)]
    psi = dist.product_state(parts)
    ref = np.kron(np.kron(parts[0].flat, parts[1].flat), parts[2].flat)
    assert np.allclose(psi.amps, ref)


def test_spin_half_and_spectrum():
    assert np.allclose(dist.collective_j_dist(1, 1, "x").toarray(), SX)
    assert np.allclose(dist.collective_j_dist(1, 1, "y").toarray(), SY)
    assert np.allclose(dist.collective_j_dist(1, 1, "z").toarray(), SZ)
    ev = np.linalg.eigvalsh(dist.collective_j_dist(2, 1, "z").toarray())
    assert np.allclose(ev, [-1, 0, 0, 1])


def test_commutator():
    x, y, z = (dist.collective_j_dist(3, 2, a).toarray() for a in "xyz")
    assert np.abs(x @ y - y @ x - 1j * z).max() < 1e-10


def test_product_qfi_examples():
    bal = ArmAmplitudes.two_mode(0.5, 0, 1)
    jz2 = dist.collective_j_dist(2, 1, "z")
    assert qfi_pure(dist.product_state([bal, bal]), jz2) == pytest.approx(2.0)
    up = ArmAmplitudes.two_mode(1.0, 0, 1)
    assert qfi_pure(dist.product_state([up] * 3), dist.collective_j_dist(3, 1, "z")) == pytest.approx(0, abs=1e-14)


def test_noon():
    assert qfi_pure(dist.noon_distinguishable(1, 1), dist.collective_j_dist(1, 1, "z")) == pytest.approx(1.0)
    assert qfi_pure(dist.noon_distinguishable(3, 2, 1), dist.collective_j_dist(3, 2, "z")) == pytest.approx(9.0)
    psi = dist.noon_distinguishable(2, 1)
    assert abs(expectation(dist.collective_j_dist(2, 1, "z"), psi)) < 1e-14


def test_single_particle_qfi():
    assert dist.qfi_single_particle(ArmAmplitudes.two_mode(1.0, 0, 1)) == pytest.approx(0.0)
    assert dist.qfi_single_particle(ArmAmplitudes.two_mode(0.5, 0, 2)) == pytest.approx(1.0)
    a = ArmAmplitudes.two_mode(0.75, 0.3, 1)
    assert dist.qfi_single_particle(a) == pytest.approx(0.75)
    # cross-check against the 2M-dim variance
    assert qfi_pure(dist.product_state([a]), dist.collective_j_dist(1, 1, "z")) == pytest.approx(0.75)
    with pytest.raises(NormalizationError):
        dist.qfi_single_particle(SimpleNamespace(flat=np.array([1.0, 1.0]), imbalance=0.0))


def test_additivity(rng):
    for N, M in [(2, 1), (3, 2), (4, 2)]:
        parts = [random_amps(M, rng) for _ in range(N)]
        lhs = qfi_pure(dist.product_state(parts), dist.collective_j_dist(N, M, "z"))
        assert lhs == pytest.approx(sum(dist.qfi_single_particle(a) for a in parts), abs=1e-9)


def test_bosonic_consistency_single_particle(rng):
    for _ in range(5):
        a = random_amps(2, rng)
        b = enumerate_basis(1, 2)
        bos = qfi_pure(coherent_state(b, a), build_generators(b).jz)
        assert bos == pytest.approx(qfi_pure(dist.product_state([a]), dist.collective_j_dist(1, 2, "z")), abs=1e-12)


def test_product_mixture_bound():
    for seed in range(10):
        rho = dist.random_product_mixture(3, 2, 4, seed)
        assert qfi(rho, dist.collective_j_dist(3, 2, "z")) <= 3 + 1e-8


def test_reduced_sum_trace(rng):
    space = dist.TensorSpace(3, 2)
    psi = dist.random_product_state(3, 2, rng)
    red = space.reduced_sum(psi)
    assert np.trace(red).real == pytest.approx(3.0)
    rho = dist.product_mixture([0.5, 0.5], [psi, dist.noon_distinguishable(3, 2)])
    assert np.trace(space.reduced_sum(rho)).real == pytest.approx(3.0)


def test_cap():
    with pytest.raises(DimensionCap):
        dist.collective_j_dist(12, 4, "z")
