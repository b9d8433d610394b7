"""Multi-start maximisation of the exact success probability.

A receiver with ``n`` modes has ``3n - 1`` real parameters, packed as

    theta = (n - 1 hyperspherical angles for u, re eps_0, im eps_0, re eps_1, ...)

Each start runs an adaptive Nelder-Mead pass, restarts it once from its own
optimum to undo simplex collapse, then polishes with finite-difference
gradient ascent (see :func:`pskrx.kernels.local_search`).
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .baselines import analytic_receiver_qpsk, kennedy_nulling_qpsk, kennedy_optamp_qpsk
from .core import IDEAL, MAX_MODES, NoiseModel, PskAlphabet, ReceiverParams
from .errors import CapacityError
from .results import SweepResult

log = logging.getLogger(__name__)

# caps the number of mixed nulling warm starts, which grows as m**n
_MAX_NULLING_STARTS = 64


@dataclass(frozen=True)
class OptimizerSettings:
    starts: int = 64
    seed: int = 0
    max_iters: int = 4000
    x_tolerance: float = 1e-9
    f_tolerance: float = 1e-12
    warm_starts: Sequence[ReceiverParams] = field(default_factory=tuple)

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("need at least one start")
        if not (self.x_tolerance > 0 and self.f_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class OptimizationResult:
    params: ReceiverParams
    success: float
    start_index: int
    iterations: int
    converged: bool


# --------------------------------------------------------------------------
# parameter encoding
# --------------------------------------------------------------------------

def sphere_embed(angles) -> np.ndarray:
    """Map ``n - 1`` angles to a point on the unit sphere in ``R^n``.

    ``u_0 = cos a_0``, ``u_1 = sin a_0 cos a_1``, ..., ``u_{n-1} = prod sin a_i``.
    """
    return kernels.sphere_embed_numpy(np.asarray(angles, dtype=float))


def sphere_angles(u) -> np.ndarray:
    """Inverse of :func:`sphere_embed` with every angle in ``[0, pi]``.

    The last coordinate comes back nonnegative; flipping the sign of ``u_j``
    together with ``eps_j`` leaves every detector intensity unchanged, so the
    encoding folds that sign into the displacement.
    """
    u = np.asarray(u, dtype=float)
    angles = np.empty(u.size - 1)
    for i in range(u.size - 1):
        # norm of the tail u[i:], always >= |u[i]|
        tail = math.sqrt(float(u[i:] @ u[i:]))
        angles[i] = 0.0 if tail == 0.0 else math.acos(max(-1.0, min(1.0, u[i] / tail)))
    return angles


def encode(params: ReceiverParams) -> np.ndarray:
    u = params.u.copy()
    eps = params.eps.copy()
    if u[-1] < 0:
        u[-1] = -u[-1]
        eps[-1] = -eps[-1]
    theta = np.empty(3 * params.n - 1)
    theta[:params.n - 1] = sphere_angles(u)
    theta[params.n - 1::2] = eps.real
    theta[params.n::2] = eps.imag
    return theta


def decode(theta, n: int) -> ReceiverParams:
    theta = np.asarray(theta, dtype=float)
    if theta.size != 3 * n - 1:
        raise ValueError(f"{n} modes need {3 * n - 1} parameters, got {theta.size}")
    u = sphere_embed(theta[:n - 1])
    d = theta[n - 1:]
    return ReceiverParams(u / math.sqrt(float(u @ u)), d[0::2] + 1j * d[1::2])


def objective(theta, alphabet: PskAlphabet, noise: NoiseModel = IDEAL) -> float:
    """Success probability of the receiver encoded by ``theta``."""
    theta = np.ascontiguousarray(theta, dtype=float)
    n = (theta.size + 1) // 3
    if 3 * n - 1 != theta.size:
        raise ValueError(f"parameter vector length {theta.size} is not 3n - 1")
    return float(kernels.objective(theta, n, alphabet.states, np.asarray(alphabet.priors, dtype=float),
                                   noise.efficiency, noise.dark_prob, noise.visibility))


def pad_modes(params: ReceiverParams, n: int) -> ReceiverParams:
    """Embed a receiver into ``n`` modes by appending idle (vacuum, undisplaced) modes."""
    if n < params.n:
        raise ValueError("cannot drop modes")
    extra = n - params.n
    return ReceiverParams(np.concatenate([params.u, np.zeros(extra)]),
                          np.concatenate([params.eps, np.zeros(extra, dtype=complex)]))


# --------------------------------------------------------------------------
# warm starts
# --------------------------------------------------------------------------

def default_warm_starts(alphabet: PskAlphabet, n: int) -> List[ReceiverParams]:
    """Structured initial receivers.

    Balanced splitting with (a) the analytic QPSK displacements, (b) Kennedy
    points where every mode nulls one constellation state (equal and mixed
    choices, unscaled and with the displacement overshot by 1.5x), and
    (c) zero displacement.
    """
    m = alphabet.m
    states = alphabet.states
    u = np.full(n, 1.0 / math.sqrt(n))
    starts = []
    if m == 4:
        analytic = analytic_receiver_qpsk()
        if n == 2:
            starts.append(analytic)
            starts.append(kennedy_nulling_qpsk(alphabet.alpha))
            starts.append(kennedy_optamp_qpsk())
        elif n > 2:
            starts.append(pad_modes(analytic, n))
    if alphabet.alpha > 0:
        combos = list(itertools.product(range(m), repeat=n))
        if len(combos) > _MAX_NULLING_STARTS:
            # equal-state combos first, then an even stride through the rest
            same = [c for c in combos if len(set(c)) == 1]
            rest = [c for c in combos if len(set(c)) > 1]
            stride = max(1, len(rest) // (_MAX_NULLING_STARTS - len(same)))
            combos = same + rest[::stride][:_MAX_NULLING_STARTS - len(same)]
        for scale in (1.0, 1.5):
            for ks in combos:
                starts.append(ReceiverParams(u, -scale * u * states[list(ks)]))
    starts.append(ReceiverParams(u, np.zeros(n, dtype=complex)))
    return starts


def random_start(rng: np.random.Generator, n: int, alpha: float) -> np.ndarray:
    span = alpha + 2.0
    return np.concatenate([rng.uniform(0.0, math.pi, n - 1), rng.uniform(-span, span, 2 * n)])


# --------------------------------------------------------------------------
# local search
# --------------------------------------------------------------------------

def _local_search(theta0, alphabet, noise, settings, step=0.1):
    x, f, its, conv = kernels.local_search(
        np.ascontiguousarray(theta0, dtype=float), step, (theta0.size + 1) // 3,
        alphabet.states, np.asarray(alphabet.priors, dtype=float),
        noise.efficiency, noise.dark_prob, noise.visibility,
        settings.max_iters, settings.x_tolerance, settings.f_tolerance)
    return x, float(f), int(its), bool(conv)


def optimize(alphabet: PskAlphabet, n_modes: int, noise: NoiseModel = IDEAL,
             settings: Optional[OptimizerSettings] = None) -> OptimizationResult:
    """Best receiver found over warm starts followed by ``settings.starts`` random starts.

    Start indices count warm starts first. The winner is the highest success,
    ties going to the lowest start index, so the result is a deterministic
    function of the inputs and the seed.
    """
    settings = settings or OptimizerSettings()
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if n_modes > MAX_MODES:
        raise CapacityError(f"{n_modes} modes exceeds the limit of {MAX_MODES}")

    warm = [p for p in settings.warm_starts if p.n <= n_modes]
    warm = [pad_modes(p, n_modes) for p in warm] + default_warm_starts(alphabet, n_modes)
    rng = np.random.default_rng(settings.seed)
    thetas = [encode(p) for p in warm]
    thetas += [random_start(rng, n_modes, alphabet.alpha) for _ in range(settings.starts)]

    best = None
    for idx, theta0 in enumerate(thetas):
        x, f, its, conv = _local_search(theta0, alphabet, noise, settings)
        # a local search never reports worse than its own starting point
        f0 = objective(theta0, alphabet, noise)
        if f0 > f:
            x, f = theta0, f0
        if best is None or f > best[1]:
            best = (x, f, idx, its, conv)
    x, f, idx, its, conv = best
    log.debug("optimize m=%d alpha=%g n=%d: %.12g from start %d", alphabet.m, alphabet.alpha, n_modes, f, idx)
    return OptimizationResult(decode(x, n_modes), float(f), idx, int(its), conv)


def sweep_modes(m: int, alpha_grid: Sequence[float], n_list: Sequence[int], noise: NoiseModel = IDEAL,
                settings: Optional[OptimizerSettings] = None) -> List[SweepResult]:
    """Optimise every (alpha, n) cell; rows come back in grid order.

    Cells are solved sequentially so that each one can be warm-started from
    its neighbours: the optimum at the previous alpha with the same n, and
    the optimum with fewer modes at the same alpha (padded with idle modes).
    """
    settings = settings or OptimizerSettings()
    if not n_list:
        raise ValueError("n_list must not be empty")
    if not len(alpha_grid):
        raise ValueError("alpha grid must not be empty")
    ns = sorted(set(int(n) for n in n_list))
    best_params = {}
    results = {}
    for i, alpha in enumerate(alpha_grid):
        alphabet = PskAlphabet(m, float(alpha))
        for n in ns:
            extra = list(settings.warm_starts)
            if i > 0:
                extra.append(best_params[(i - 1, n)])
            extra += [best_params[(i, k)] for k in ns if k < n]
            cell = OptimizerSettings(settings.starts, settings.seed, settings.max_iters,
                                     settings.x_tolerance, settings.f_tolerance, tuple(extra))
            res = optimize(alphabet, n, noise, cell)
            best_params[(i, n)] = res.params
            results[(i, n)] = res
    rows = []
    for i, alpha in enumerate(alpha_grid):
        for n in n_list:
            res = results[(i, int(n))]
            rows.append(SweepResult(m, float(alpha), int(n), "optimized", res.success))
    return rows
