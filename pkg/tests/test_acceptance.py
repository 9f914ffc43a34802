"""Exit criteria of the build, one test per criterion.

Each test prints (and records for the terminal summary) a single line
``[PASS|FAIL] criterion k: ...`` listing every sub-check and its value.
"""
import json
import time

import numpy as np
import pytest

from mmqi import distinguishable as dist
from mmqi import farfield as ff
from mmqi.cli import bound_sweep_rows, run
from mmqi.estimation import empirical_sensitivity, variance_standard_error
from mmqi.fock import DensityOperator, StateVector, enumerate_basis, expectation, rank, unrank, variance
from mmqi.metrology import estimator_sensitivity, qfi, qfi_blockwise, qfi_mixed, xi_squared
from mmqi.operators import build_generators, direction_generator, heisenberg_jz, rotation
from mmqi.states import (
    coherent_state,
    noon_state,
    poisson_weights,
    random_separable,
    sector_union,
    three_mode_example,
    ArmAmplitudes,
)
from tests.conftest import ACCEPTANCE_LINES, random_amps, random_pure

pytestmark = pytest.mark.acceptance

Z, ZETA, K, DK = 0.91, 0.5, 10.0, 0.5


def verdict(number, title, checks):
    """``checks``: list of (label, ok). Records the line and asserts all ok."""
    ok = all(c for _, c in checks)
    detail = "; ".join(f"{label} [{'ok' if c else 'FAILED'}]" for label, c in checks)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_1_pattern_reproduction(tmp_path, capsys):
    out = tmp_path / "pattern.csv"
    t0 = time.perf_counter()
    code = run(["pattern", "--z", str(Z), "--zeta", str(ZETA), "--k", str(K), "--dk", str(DK), "--out", str(out)])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    summary = json.loads(out.with_suffix(".json").read_text())
    x0, p0 = map(float, out.read_text().splitlines()[1].split(","))
    closed = float(ff.pattern_closed_form_threemode(Z, ZETA, K, DK, 0.0))
    nu2 = summary["nu2"]
    verdict(
        1,
        "split-arm pattern",
        [
            ("exit code 0", code == 0),
            (f"nu2={nu2:.6f} in 0.326+-0.005", abs(nu2 - 0.326) <= 0.005),
            (f"|p(0)-closed form|={abs(p0 - closed):.1e} <= 1e-10", x0 == 0.0 and abs(p0 - closed) <= 1e-10),
            (f"runtime {elapsed:.2f}s < 5s", elapsed < 5.0),
        ],
    )


def test_criterion_2_witness_discordance():
    N = 4
    b = enumerate_basis(N, 2)
    g = build_generators(b)
    psi = three_mode_example(b, Z, ZETA)
    ratio = ff.operational_xi(ff.eta_squared(psi), ff.threemode_pattern(Z, ZETA, K, DK).nu2)
    xi2 = xi_squared(psi, g)
    fq = max(qfi(psi, g[a]) for a in "xyz")
    verdict(
        2,
        "witness discordance",
        [
            (f"eta2/nu2={ratio:.6f} in [0.965,1.005]", 0.965 <= ratio <= 1.005),
            (f"xi_squared={xi2:.6f} >= 1", xi2 >= 1.0),
            (f"max_axis QFI={fq:.6f} <= N+1e-8", fq <= N + 1e-8),
        ],
    )


def test_criterion_3_separable_bound_sweep():
    t0 = time.perf_counter()
    rows, _, _ = bound_sweep_rows({"draws": 1000, "seed": 0, "directions": 10})
    bos = max(r[-1] for r in rows)
    combos = {(r[1], r[2]) for r in rows}
    rows_d, _, _ = bound_sweep_rows(
        {"draws": 200, "seed": 0, "directions": 10, "representation": "distinguishable",
         "N_list": [1, 2, 3, 4], "M_list": [1, 2]}
    )
    dis = max(r[-1] for r in rows_d)
    elapsed = time.perf_counter() - t0
    verdict(
        3,
        "separable bound sweep",
        [
            (f"1000 bosonic draws over {len(combos)} (N,M) pairs, max(F_q-N)={bos:.3e} <= 1e-8",
             len(rows) == 1000 and len(combos) == 9 and bos <= 1e-8),
            (f"200 distinguishable draws, max(F_q-N)={dis:.3e} <= 1e-8", len(rows_d) == 200 and dis <= 1e-8),
            (f"runtime {elapsed:.1f}s < 120s", elapsed < 120.0),
        ],
    )


def test_criterion_4_heisenberg_control():
    worst = 0.0
    for N in range(1, 5):
        for M in (1, 2):
            b = enumerate_basis(N, M)
            worst = max(worst, abs(qfi(noon_state(b, M - 1), build_generators(b).jz) - N * N))
            psi = dist.noon_distinguishable(N, M, M - 1)
            worst = max(worst, abs(qfi(psi, dist.collective_j_dist(N, M, "z")) - N * N))
    verdict(4, "NOON Heisenberg scaling", [(f"max |F_q-N^2|={worst:.1e} <= 1e-9 for N<=4", worst <= 1e-9)])


def test_criterion_5_fluctuating_n():
    worst = -np.inf
    cases = 0
    for mean in (0.5, 1.5, 2.5, 4.0):
        for M in (1, 2):
            w = poisson_weights(mean, 6)
            for seed in range(3):
                u = sector_union(
                    [(p, random_separable(enumerate_basis(n, M), 3, seed=100 * seed + n)) for n, p in enumerate(w)]
                )
                for axis in ("x", "y", "z", (0.6, 0.0, 0.8)):
                    rep = qfi_blockwise(u, axis)
                    worst = max(worst, rep.value - rep.particle_budget)
                    cases += 1
    verdict(5, "fluctuating-N bound", [(f"{cases} unions, max(F_q-<N>)={worst:.3e} <= 1e-8", worst <= 1e-8)])


def test_criterion_6_algebraic_suite():
    rng = np.random.default_rng(6)
    residues = {}

    def record(name, value):
        residues[name] = max(residues.get(name, 0.0), float(value))

    for N in range(0, 5):
        for M in (1, 2, 3):
            b = enumerate_basis(N, M)
            g = build_generators(b)
            x, y, z = g.jx.toarray(), g.jy.toarray(), g.jz.toarray()
            record("commutators", np.abs(x @ y - y @ x - 1j * z).max())
            record("commutators", np.abs(y @ z - z @ y - 1j * x).max())
            record("commutators", np.abs(z @ x - x @ z - 1j * y).max())
            theta = rng.uniform(-np.pi, np.pi)
            n = rng.normal(size=3)
            U = rotation(direction_generator(g, n / np.linalg.norm(n)), theta)
            record("unitarity", np.abs(U.conj().T @ U - np.eye(b.dim)).max())
            Uy = rotation(g.jy, theta)
            record("Jz(theta) conjugation", np.abs(heisenberg_jz(g, theta) - Uy @ z @ Uy.conj().T).max())
            record("rank/unrank", max(abs(rank(b, unrank(b, i)) - i) for i in range(b.dim)))
            amps = random_amps(M, rng)
            psi = coherent_state(b, amps)
            d = amps.imbalance
            record("<Jz>", abs(expectation(g.jz, psi) - N / 2 * d))
            record("<Jz^2>", abs(expectation(g.jz @ g.jz, psi) - (N / 4 + N * (N - 1) / 4 * d * d)))
    verdict(6, "algebraic suite", [(f"{k} residue {v:.1e} < 1e-9", v < 1e-9) for k, v in residues.items()])


def test_criterion_7_estimation_pipeline():
    N, theta, m, repeats = 4, 0.05, 1000, 500
    b = enumerate_basis(N, 1)
    g = build_generators(b)
    psi = coherent_state(b, ArmAmplitudes.two_mode(0.5, 0.0, 1))
    t0 = time.perf_counter()
    emp = empirical_sensitivity(psi, theta, m, repeats, g, seed=1)
    elapsed = time.perf_counter() - t0
    se = variance_standard_error(emp, repeats)
    target = 1 / (m * N)
    snl = m * N * estimator_sensitivity(psi, theta, m, g).delta2_theta
    verdict(
        7,
        "estimation pipeline",
        [
            (f"empirical {emp:.4e} vs 1/(mN)={target:.4e}: {abs(emp - target) / se:.2f} SE <= 5",
             abs(emp - target) <= 5 * se),
            (f"m*N*Delta2theta analytic={snl:.12f} = 1+-1e-9", abs(snl - 1) <= 1e-9),
            (f"runtime {elapsed:.2f}s < 60s", elapsed < 60.0),
        ],
    )


def test_criterion_8_qfi_consistency():
    rng = np.random.default_rng(8)
    pure_dev = 0.0
    for i in range(50):
        N, M = (i % 4) + 1, (i % 3) + 1
        b = enumerate_basis(N, M)
        g = build_generators(b)
        psi = StateVector(b, random_pure(b.dim, rng))
        n = rng.normal(size=3)
        gen = direction_generator(g, n / np.linalg.norm(n))
        pure_dev = max(pure_dev, abs(qfi_mixed(psi.projector(), gen) - 4 * variance(gen, psi)))
    convex_gap = -np.inf
    for i in range(50):
        b = enumerate_basis(3, 2)
        g = build_generators(b)
        r1 = random_separable(b, int(rng.integers(1, 5)), seed=2 * i, weight_law="dirichlet")
        v = random_pure(b.dim, rng)
        r2 = DensityOperator(b, 0.7 * np.outer(v, v.conj()) + 0.3 * random_separable(b, 2, seed=2 * i + 1).matrix)
        lam = rng.uniform()
        mix = DensityOperator(b, lam * r1.matrix + (1 - lam) * r2.matrix)
        gen = (g.jx, g.jy, g.jz)[i % 3]
        gap = qfi_mixed(mix, gen) - (lam * qfi_mixed(r1, gen) + (1 - lam) * qfi_mixed(r2, gen))
        convex_gap = max(convex_gap, gap)
    verdict(
        8,
        "QFI internal consistency",
        [
            (f"50 pure states, max |F_mixed - 4Var|={pure_dev:.1e} <= 1e-8", pure_dev <= 1e-8),
            (f"50 mixtures, max convexity excess={convex_gap:.1e} <= 1e-8", convex_gap <= 1e-8),
        ],
    )
