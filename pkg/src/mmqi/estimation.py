"""Monte Carlo of the mean-imbalance Mach-Zehnder phase estimator.

Sign convention: the interferometer maps the input state to
``exp(+i theta Jy) |psi>``, so the measured imbalance has the Heisenberg form
``Jz(theta) = Jz cos(theta) + Jx sin(theta)`` (see
:func:`mmqi.operators.heisenberg_jz`).

Random numbers come from numpy's counter-based ``Philox`` bit generator keyed
by the integer seed; repeat ``r`` of a sensitivity run uses ``seed + r``.
Outcomes are drawn by inverse CDF over the distinct ``Jz`` eigenvalues in
ascending order, one uniform variate per shot.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mmqi.errors import InvalidArgs, NoMaximumInInterval
from mmqi.fock import StateVector
from mmqi.metrology import ImbalanceMoments
from mmqi.operators import GeneratorSet, dense_matrix, rotation

GROUP_TOL = 1e-9
GOLDEN_TOL = 1e-8
DEFAULT_HALF_WIDTH = np.pi / 4
_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MeasurementRecord:
    shots: int
    imbalances: np.ndarray
    theta_true: float
    seed: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.imbalances))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def imbalance_distribution(state, theta: float, gens: GeneratorSet):
    """Exact output distribution of ``(n_a - n_b)/2``: ``(values, probabilities)``."""
    U = rotation(gens.jy, -theta)
    jz = dense_matrix(gens.jz)
    if np.count_nonzero(jz - np.diag(np.diag(jz))) == 0:
        evals, vecs = np.real(np.diag(jz)), None
    else:
        evals, vecs = np.linalg.eigh(jz)
    if isinstance(state, StateVector):
        out = U @ state.amps
        amps = out if vecs is None else vecs.conj().T @ out
        weights = np.abs(amps) ** 2
    else:
        rho = U @ state.matrix @ U.conj().T
        if vecs is not None:
            rho = vecs.conj().T @ rho @ vecs
        weights = np.clip(np.real(np.diag(rho)), 0.0, None)
    order = np.argsort(evals, kind="stable")
    evals, weights = evals[order], weights[order]
    # merge degenerate eigenvalues
    starts = np.concatenate([[0], np.nonzero(np.diff(evals) > GROUP_TOL)[0] + 1])
    values = evals[starts]
    probs = np.add.reduceat(weights, starts)
    return values, probs / probs.sum()


def sample_imbalance(state, theta: float, m: int, gens: GeneratorSet, seed: int) -> MeasurementRecord:
    """Draw ``m`` projective arm-imbalance outcomes at phase ``theta``."""
    if m < 1:
        raise InvalidArgs(f"need m >= 1 shots, got {m}")
    values, probs = imbalance_distribution(state, theta, gens)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    u = make_rng(seed).random(m)
    idx = np.searchsorted(cdf, u, side="right")
    return MeasurementRecord(int(m), values[np.minimum(idx, len(values) - 1)], float(theta), int(seed))


def golden_section_max(f, lo: float, hi: float, tol: float = GOLDEN_TOL) -> float:
    """Argmax of a unimodal scalar function on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _has_stationary_point(mom: ImbalanceMoments, lo: float, hi: float) -> bool:
    # slope = R cos(theta + delta) vanishes at theta = pi/2 - delta + j pi
    amp = np.hypot(mom.mean_z, mom.mean_x)
    if amp <= 1e-12:
        return True
    delta = np.arctan2(mom.mean_z, mom.mean_x)
    first = np.pi / 2 - delta
    j = np.ceil((lo - first) / np.pi)
    return first + j * np.pi < hi


def log_likelihood(mom: ImbalanceMoments, mean_imbalance: float, m: int, theta):
    v = mom.var(theta)
    r = mean_imbalance - mom.mean(theta)
    return np.where(v > 0, -m * r * r / (2.0 * np.where(v > 0, v, 1.0)), -np.inf)


def mle_phase(
    record: MeasurementRecord,
    state,
    gens: GeneratorSet,
    search: tuple[float, float] | None = None,
) -> float:
    """Maximize the Gaussian log-likelihood of the mean imbalance over ``search``.

    The default interval is ``theta_true +/- pi/4``; it must not contain a
    point where ``d<Jz(theta)>/dtheta`` vanishes.
    """
    if search is None:
        search = (record.theta_true - DEFAULT_HALF_WIDTH, record.theta_true + DEFAULT_HALF_WIDTH)
    lo, hi = map(float, search)
    if not lo < hi:
        raise InvalidArgs(f"empty search interval {search}")
    mom = ImbalanceMoments.of(state, gens)
    if _has_stationary_point(mom, lo, hi):
        raise NoMaximumInInterval(f"<Jz(theta)> is stationary inside [{lo}, {hi}]")
    nbar, m = record.mean, record.shots
    theta = golden_section_max(lambda t: float(log_likelihood(mom, nbar, m, t)), lo, hi)
    if min(theta - lo, hi - theta) < 10 * GOLDEN_TOL:
        raise NoMaximumInInterval(f"likelihood maximum sits on the interval edge at {theta}")
    return theta


def phase_estimates(state, theta: float, m: int, repeats: int, gens: GeneratorSet, seed: int) -> np.ndarray:
    """One MLE per repeat, repeat ``r`` seeded with ``seed + r``."""
    search = (theta - DEFAULT_HALF_WIDTH, theta + DEFAULT_HALF_WIDTH)
    out = np.empty(repeats)
    for r in range(repeats):
        record = sample_imbalance(state, theta, m, gens, seed + r)
        out[r] = mle_phase(record, state, gens, search)
    return out


def empirical_sensitivity(
    state, theta: float, m: int, repeats: int, gens: GeneratorSet, seed: int
) -> float:
    """Sample variance of ``repeats`` independent phase estimates."""
    if repeats < 100:
        raise InvalidArgs(f"need repeats >= 100, got {repeats}")
    return float(np.var(phase_estimates(state, theta, m, repeats, gens, seed), ddof=1))


def variance_standard_error(var: float, repeats: int) -> float:
    """Standard error of a sample variance under approximate normality."""
    return var * np.sqrt(2.0 / (repeats - 1))
