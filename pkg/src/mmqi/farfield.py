"""Far-field interference patterns, fringe visibility and the
fluctuations-to-visibility squeezing estimate.

The generic pattern of a state with plane-wave modes ``exp(i k_n x)`` is

    p(x) = (1/N) sum_{mn} exp(i (k_n - k_m) x) <c_m^+ c_n>

For the split-arm three-mode state the module also provides a closed form
of the pattern (``model="closed_form"``), whose oscillating terms carry half
the weight of the one-body density above. Both are exposed; the closed form
is the default for the split-arm commands.

.. warning::
   ``eta^2 / nu^2`` certifies particle entanglement only when the mode
   structure of each arm is known. Coherences between modes inside one arm
   add fringes that raise the visibility without any a/b coherence, so the
   ratio can drop below 1 for separable states.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable

import numpy as np

from mmqi.errors import (
    InvalidArgs,
    NonPhysicalState,
    PhaseFullySmeared,
    RangeError,
    WindowTooSmall,
    ZeroVisibility,
)
from mmqi.fock import (
    FockBasis,
    StateVector,
    enumerate_basis,
    expectation,
    transition_operator,
    variance,
)
from mmqi.operators import build_generators
from mmqi.states import three_mode_example

DEFAULT_GRID = 200_000
MIN_GRID = 10_000
COHERENCE_TOL = 1e-14
DENSITY_TOL = 1e-10
SMEAR_TOL = 1e-12
LONG_WINDOW_PERIODS = 100
MAX_PERIODS = 100_000

WARN_OPERATIONAL_WITNESS = "W_OPERATIONAL_WITNESS_MULTIMODE"
OPERATIONAL_WITNESS_CAVEAT = (
    "eta^2/nu^2 is a valid squeezing witness only when the mode structure of "
    "each arm is known; intra-arm coherences raise the visibility and can "
    "make a separable state look spin-squeezed"
)
WARN_WINDOW_LIMITED = "W_WINDOW_LIMITED"


@dataclass(frozen=True)
class PlaneWaveModes:
    """Far-field wavenumber of every flat mode (A modes first, then B modes)."""

    wavenumbers: tuple

    def __post_init__(self):
        ks = tuple(float(k) for k in self.wavenumbers)
        if not ks or len(ks) % 2 or not all(math.isfinite(k) for k in ks):
            raise InvalidArgs("wavenumbers must be a finite list of length 2M")
        object.__setattr__(self, "wavenumbers", ks)

    @property
    def M(self) -> int:
        return len(self.wavenumbers) // 2

    @classmethod
    def two_mode(cls, k: float, M: int = 1) -> "PlaneWaveModes":
        return cls((k,) * M + (-k,) * M)

    @classmethod
    def three_mode(cls, k: float, dk: float, M: int = 2) -> "PlaneWaveModes":
        """``a_0 -> k + dk``, ``a_1 -> k - dk``, every B mode ``-> -k``."""
        if M < 2:
            raise RangeError("three-mode layout needs M >= 2")
        a = (k + dk, k - dk) + (k,) * (M - 2)
        return cls(a + (-k,) * M)


@dataclass(frozen=True)
class PatternSample:
    xs: np.ndarray = field(repr=False)
    ps: np.ndarray = field(repr=False)
    p_max: float
    p_min: float
    x_max: float
    x_min: float
    nu: float
    alpha: float
    period: float
    window: float
    window_limited: bool = False

    @property
    def nu2(self) -> float:
        return self.nu**2


def one_body_dm(state) -> np.ndarray:
    """Matrix of ``<c_m^+ c_n>`` (Hermitian, trace N)."""
    basis = state.basis
    if isinstance(basis, FockBasis):
        K = basis.n_modes
        dm = np.zeros((K, K), dtype=np.complex128)
        for m in range(K):
            for n in range(K):
                op = transition_operator(basis, m, n)
                if op.nnz == 0:
                    continue
                if isinstance(state, StateVector):
                    dm[m, n] = np.vdot(state.amps, op @ state.amps)
                else:
                    dm[m, n] = np.sum(state.matrix * op.T.toarray())
        return dm
    return basis.reduced_sum(state).T


def common_period(freqs, tol: float = 1e-9) -> tuple[float, bool]:
    """Smallest common period of ``cos(f x)`` terms; ``(period, commensurate)``."""
    freqs = [abs(float(f)) for f in freqs if abs(f) > 0]
    if not freqs:
        return 2.0 * math.pi, True
    fracs = []
    for f in freqs:
        q = Fraction(f).limit_denominator(10**6)
        if abs(float(q) - f) > tol * f:
            return _long_window(freqs), False
        fracs.append(q)
    den = reduce(math.lcm, (q.denominator for q in fracs))
    num = reduce(math.gcd, (q.numerator * (den // q.denominator) for q in fracs))
    period = 2.0 * math.pi * den / num
    # commensurate, but too long to tabulate
    if period > MAX_PERIODS * 2.0 * math.pi / min(freqs):
        return _long_window(freqs), False
    return period, True


def _long_window(freqs) -> float:
    fs = sorted(set(freqs))
    gaps = [b - a for a, b in zip(fs, fs[1:])] + fs
    return LONG_WINDOW_PERIODS * 2.0 * math.pi / min(g for g in gaps if g > 0)


def _refine(fn, xs, ps, i, h, periodic, sign):
    n = len(ps)
    if periodic:
        left, right = ps[(i - 1) % n], ps[(i + 1) % n]
    elif 0 < i < n - 1:
        left, right = ps[i - 1], ps[i + 1]
    else:
        return xs[i], ps[i]
    curv = left - 2.0 * ps[i] + right
    if curv == 0.0:
        return xs[i], ps[i]
    x_star = xs[i] + 0.5 * h * (left - right) / curv
    p_star = float(fn(np.array([x_star]))[0])
    if sign * p_star > sign * ps[i]:
        return x_star, p_star
    return xs[i], ps[i]


def tabulate(
    fn: Callable[[np.ndarray], np.ndarray],
    period: float,
    grid: int = DEFAULT_GRID,
    window: float | None = None,
    commensurate: bool = True,
) -> PatternSample:
    """Sample a normalized density on ``[0, window)`` and extract its visibility."""
    if grid < MIN_GRID:
        raise InvalidArgs(f"grid must be >= {MIN_GRID}, got {grid}")
    if window is None:
        window = period
    elif commensurate and window < period * (1.0 - 1e-12):
        raise WindowTooSmall(f"window {window} shorter than the common period {period}")
    xs = np.linspace(0.0, window, grid, endpoint=False)
    ps = fn(xs)
    if ps.min() < -DENSITY_TOL:
        raise NonPhysicalState(f"pattern density {ps.min():.3e} is negative")
    h = xs[1] - xs[0]
    periodic = commensurate and abs(window / period - round(window / period)) < 1e-12
    x_max, p_max = _refine(fn, xs, ps, int(np.argmax(ps)), h, periodic, +1)
    x_min, p_min = _refine(fn, xs, ps, int(np.argmin(ps)), h, periodic, -1)
    p_min = max(p_min, 0.0)
    nu = (p_max - p_min) / (p_max + p_min)
    spec = np.fft.rfft(ps)
    k = 1 + int(np.argmax(np.abs(spec[1:]))) if spec.size > 1 else 0
    alpha = float(-np.angle(spec[k]) % (2 * np.pi)) if k else 0.0
    return PatternSample(
        xs=xs,
        ps=ps,
        p_max=float(p_max),
        p_min=float(p_min),
        x_max=float(x_max),
        x_min=float(x_min),
        nu=float(nu),
        alpha=alpha,
        period=float(period),
        window=float(window),
        window_limited=not commensurate,
    )


def density_function(state, modes: PlaneWaveModes):
    """Vectorized ``p(x)`` of ``state`` and its oscillation frequencies."""
    dm = one_body_dm(state)
    n_particles = np.trace(dm).real
    if n_particles <= 0:
        raise InvalidArgs("pattern needs at least one particle")
    ks = np.asarray(modes.wavenumbers)
    if ks.size != dm.shape[0]:
        raise InvalidArgs(f"{ks.size} wavenumbers for {dm.shape[0]} modes")

    def fn(x):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        E = np.exp(1j * ks[:, None] * x[None, :])
        return np.real(np.sum(E.conj() * (dm @ E), axis=0)) / n_particles

    iu = np.triu_indices(ks.size, 1)
    coherent = np.abs(dm[iu]) > COHERENCE_TOL
    freqs = np.abs(ks[iu[1]] - ks[iu[0]])[coherent]
    return fn, freqs


def pattern(
    state, modes: PlaneWaveModes, grid: int = DEFAULT_GRID, window: float | None = None
) -> PatternSample:
    """Normalized far-field density of ``state`` tabulated over one common period."""
    fn, freqs = density_function(state, modes)
    period, commensurate = common_period(freqs)
    if not commensurate:
        warnings.warn("incommensurate fringe frequencies; visibility is window-limited")
    return tabulate(fn, period, grid, window, commensurate)


def _check_threemode(z, zeta, k, dk):
    if not (0.0 <= z <= 1.0 and 0.0 <= zeta <= 1.0):
        raise RangeError(f"z={z}, zeta={zeta} must lie in [0, 1]")
    if not (math.isfinite(k) and math.isfinite(dk)):
        raise RangeError("k and dk must be finite")


def pattern_closed_form_threemode(z: float, zeta: float, k: float, dk: float, x):
    """Closed form of the split-arm pattern.

    ``1 + z sqrt(zeta(1-zeta)) cos(2 dk x)
       + sqrt(z(1-z)) (sqrt(zeta) cos((2k+dk)x) + sqrt(1-zeta) cos((2k-dk)x))``
    """
    _check_threemode(z, zeta, k, dk)
    x = np.asarray(x, dtype=np.float64)
    return (
        1.0
        + z * math.sqrt(zeta * (1.0 - zeta)) * np.cos(2.0 * dk * x)
        + math.sqrt(z * (1.0 - z))
        * (math.sqrt(zeta) * np.cos((2.0 * k + dk) * x) + math.sqrt(1.0 - zeta) * np.cos((2.0 * k - dk) * x))
    )


def threemode_frequencies(z, zeta, k, dk) -> list:
    terms = [
        (z * math.sqrt(zeta * (1.0 - zeta)), 2.0 * dk),
        (math.sqrt(z * (1.0 - z) * zeta), 2.0 * k + dk),
        (math.sqrt(z * (1.0 - z) * (1.0 - zeta)), 2.0 * k - dk),
    ]
    return [f for c, f in terms if c > 0 and f != 0]


def threemode_pattern(
    z: float,
    zeta: float,
    k: float,
    dk: float,
    grid: int = DEFAULT_GRID,
    window: float | None = None,
    model: str = "closed_form",
    N: int = 2,
) -> PatternSample:
    """Tabulated split-arm pattern.

    ``model="closed_form"`` uses :func:`pattern_closed_form_threemode`; ``model="density"``
    builds the coherent state and uses the one-body density.
    """
    _check_threemode(z, zeta, k, dk)
    if model == "closed_form":
        period, commensurate = common_period(threemode_frequencies(z, zeta, k, dk))
        fn = lambda x: pattern_closed_form_threemode(z, zeta, k, dk, x)  # noqa: E731
        return tabulate(fn, period, grid, window, commensurate)
    if model == "density":
        state = three_mode_example(enumerate_basis(N, 2), z, zeta)
        return pattern(state, PlaneWaveModes.three_mode(k, dk), grid, window)
    raise InvalidArgs(f"unknown pattern model {model!r}")


def eta_squared(state) -> float:
    """Arm-imbalance fluctuations ``(4/N) Var(Jz)``."""
    gens = build_generators(state.basis)
    return 4.0 / state.N * variance(gens.jz, state)


def operational_xi(eta2: float, nu2: float) -> float:
    """Fluctuations-to-visibility ratio ``eta^2 / nu^2``.

    Only meaningful as a squeezing witness when each arm is known to be a
    single mode; see the module warning.
    """
    if not nu2 > 0:
        raise ZeroVisibility("visibility is zero; ratio undefined")
    return eta2 / nu2


def xi_n_squared(state) -> float:
    """``N Var(Jz) / (n_a n_b)`` with mean arm populations ``n_a, n_b``."""
    gens = build_generators(state.basis)
    mz = expectation(gens.jz, state)
    n_a, n_b = state.N / 2.0 + mz, state.N / 2.0 - mz
    if n_a * n_b <= 0:
        raise ZeroVisibility("one arm is empty; number squeezing undefined")
    return state.N * variance(gens.jz, state) / (n_a * n_b)


def meanfield_xi_s(phase_samples, xi_n2: float) -> float:
    """Mean-field squeezing ``xi_N^2 / (<cos phi>^2 + <sin phi>^2)``."""
    phi = np.asarray(phase_samples, dtype=np.float64).ravel()
    if phi.size == 0:
        raise InvalidArgs("need at least one phase sample")
    denom = np.mean(np.cos(phi)) ** 2 + np.mean(np.sin(phi)) ** 2
    if denom <= SMEAR_TOL:
        raise PhaseFullySmeared(f"phase coherence {denom:.3e} below threshold")
    return float(xi_n2 / denom)
