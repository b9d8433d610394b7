"""Exact model of a linear-optics receiver with on-off detection.

A signal coherent state ``|alpha_x>`` is split over ``n`` modes by the unit
vector ``u`` and each mode is displaced by ``eps_j``; mode ``j`` then holds a
coherent state of amplitude ``gamma_j = u_j alpha_x + eps_j`` and is read out
by a bucket detector. Amplitudes are in shot-noise units, so ``|gamma|**2`` is
a mean photon number.
"""
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from . import kernels
from .errors import CapacityError

MAX_MODES = 24

ClickPattern = Tuple[int, ...]


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PskAlphabet:
    """M coherent states ``alpha * exp(2j*pi*k/m)`` with prior probabilities."""

    m: int
    alpha: float
    priors: np.ndarray = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"alphabet size must be an integer >= 2, got {self.m}")
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.priors is None:
            priors = np.full(self.m, 1.0 / self.m)
        else:
            priors = np.asarray(self.priors, dtype=float)
            if priors.shape != (self.m,):
                raise ValueError(f"need {self.m} priors, got shape {priors.shape}")
            if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
                raise ValueError("priors must be nonnegative and sum to 1")
        object.__setattr__(self, "priors", _frozen(priors))

    @property
    def states(self) -> np.ndarray:
        k = np.arange(self.m)
        return self.alpha * np.exp(2j * np.pi * k / self.m)

    def state(self, x: int) -> complex:
        return complex(self.states[x])


@dataclass(frozen=True)
class ReceiverParams:
    """Splitting vector ``u`` (real, unit norm) and displacements ``eps``."""

    u: np.ndarray
    eps: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u)
        if np.iscomplexobj(u):
            if np.any(u.imag != 0):
                raise ValueError("u must be real")
            u = u.real
        u = np.asarray(u, dtype=float).ravel()
        eps = np.asarray(self.eps, dtype=complex).ravel()
        if u.size < 1:
            raise ValueError("receiver needs at least one mode")
        if eps.shape != u.shape:
            raise ValueError(f"u has {u.size} modes but eps has {eps.size}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(eps))):
            raise ValueError("receiver parameters must be finite")
        if abs(float(u @ u) - 1.0) > 1e-10:
            raise ValueError(f"u must have unit norm, |u|^2 = {float(u @ u)!r}")
        object.__setattr__(self, "u", _frozen(u))
        object.__setattr__(self, "eps", _frozen(eps))

    @property
    def n(self) -> int:
        return self.u.size

    @classmethod
    def from_transmissivity(cls, eta: float, eps: Sequence[complex]) -> "ReceiverParams":
        """Two-mode receiver built from a beam splitter of transmissivity ``eta``."""
        return cls(np.array([np.sqrt(eta), np.sqrt(1.0 - eta)]), eps)


@dataclass(frozen=True)
class NoiseModel:
    efficiency: float = 1.0
    dark_prob: float = 0.0
    visibility: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_prob < 1.0:
            raise ValueError(f"dark_prob must lie in [0, 1), got {self.dark_prob}")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")

    @property
    def is_ideal(self) -> bool:
        return self.efficiency == 1.0 and self.dark_prob == 0.0 and self.visibility == 1.0


IDEAL = NoiseModel()


# --------------------------------------------------------------------------
# click patterns
# --------------------------------------------------------------------------

def pattern_index(y: Sequence[int]) -> int:
    """Integer code of a click pattern; mode 0 is the least significant bit."""
    b = 0
    for j, bit in enumerate(y):
        if bit not in (0, 1):
            raise ValueError(f"click pattern entries must be 0 or 1, got {bit!r}")
        b |= int(bit) << j
    return b


def index_pattern(b: int, n: int) -> ClickPattern:
    return tuple((b >> j) & 1 for j in range(n))


def all_patterns(n: int):
    return [index_pattern(b, n) for b in range(1 << n)]


def _check_capacity(n: int):
    if n > MAX_MODES:
        raise CapacityError(f"{n} modes means 2**{n} click patterns; the limit is {MAX_MODES} modes")


# --------------------------------------------------------------------------
# model
# --------------------------------------------------------------------------

def output_amplitudes(params: ReceiverParams, alpha_x: complex) -> np.ndarray:
    return params.u * complex(alpha_x) + params.eps


def mean_photon_numbers(params: ReceiverParams, alpha_x: complex, noise: NoiseModel = IDEAL) -> np.ndarray:
    """Mean photon number reaching each detector.

    ``n_j = eff * (|a|^2 + |e|^2 + 2 V |a||e| cos(dtheta))`` with
    ``a = u_j alpha_x`` and ``e = eps_j``; the visibility ``V`` scales only
    the interference term.
    """
    a = params.u * complex(alpha_x)
    b = params.eps
    g = a + b
    coherent = g.real ** 2 + g.imag ** 2
    incoherent = a.real ** 2 + a.imag ** 2 + b.real ** 2 + b.imag ** 2
    v = noise.visibility
    return np.maximum(noise.efficiency * (v * coherent + (1.0 - v) * incoherent), 0.0)


def click_probability(n_j: float, dark_prob: float = 0.0) -> float:
    """Probability that a bucket detector fires given ``n_j`` mean photons."""
    if n_j < 0:
        raise ValueError("mean photon number must be >= 0")
    return 1.0 - (1.0 - dark_prob) * np.exp(-n_j)


def _click_matrix(params, states, noise):
    return kernels.click_probs(
        params.u, params.eps, np.asarray(states, dtype=complex),
        noise.efficiency, noise.dark_prob, noise.visibility,
    )


def click_matrix(params: ReceiverParams, alphabet: PskAlphabet, noise: NoiseModel = IDEAL):
    """Per-state, per-mode ``(p_no_click, p_click)`` arrays of shape ``(m, n)``."""
    return _click_matrix(params, alphabet.states, noise)


def likelihoods(params: ReceiverParams, alphabet: PskAlphabet, noise: NoiseModel = IDEAL) -> np.ndarray:
    """``L[x, b] = p(y=b | x)`` over all ``2**n`` patterns."""
    _check_capacity(params.n)
    p0, p1 = click_matrix(params, alphabet, noise)
    return kernels.likelihood_table(p0, p1)


def pattern_probability(params: ReceiverParams, alphabet: PskAlphabet, noise: NoiseModel,
                        x: int, y: Sequence[int]) -> float:
    if not 0 <= x < alphabet.m:
        raise ValueError(f"state index {x} outside 0..{alphabet.m - 1}")
    if len(y) != params.n:
        raise ValueError(f"click pattern has {len(y)} entries, receiver has {params.n} modes")
    b = pattern_index(y)
    p0, p1 = _click_matrix(params, alphabet.states[x:x + 1], noise)
    bits = np.array(index_pattern(b, params.n), dtype=bool)
    return float(np.prod(np.where(bits, p1[0], p0[0])))


def success_probability(params: ReceiverParams, alphabet: PskAlphabet, noise: NoiseModel = IDEAL) -> float:
    """Average probability of a correct maximum-likelihood guess.

    Exact: sums ``max_x p(y|x) p(x)`` over every click pattern.
    """
    _check_capacity(params.n)
    p0, p1 = click_matrix(params, alphabet, noise)
    return float(kernels.success_from_clicks(p0, p1, np.asarray(alphabet.priors, dtype=float)))


def ml_decode(params: ReceiverParams, alphabet: PskAlphabet, noise: NoiseModel, y: Sequence[int]) -> int:
    """Most likely state given pattern ``y``; ties go to the smallest index."""
    if len(y) != params.n:
        raise ValueError(f"click pattern has {len(y)} entries, receiver has {params.n} modes")
    p0, p1 = click_matrix(params, alphabet, noise)
    bits = np.array(y, dtype=bool)
    like = np.prod(np.where(bits[None, :], p1, p0), axis=1) * alphabet.priors
    return int(np.argmax(like))


@dataclass(frozen=True)
class DecodeTable:
    """Maximum-likelihood decision for every click pattern.

    Arrays are indexed by the pattern code of :func:`pattern_index`.
    ``posterior[b]`` is ``max_x p(x|y)``; for a pattern that cannot occur
    (``p(y) = 0``) it falls back to the prior of the decoded state.
    """

    n: int
    decoded: np.ndarray
    posterior: np.ndarray
    pattern_prob: np.ndarray
    _entries: dict = field(default=None, repr=False, compare=False)

    @property
    def entries(self) -> dict:
        if self._entries is None:
            ent = {index_pattern(b, self.n): (int(self.decoded[b]), float(self.posterior[b]))
                   for b in range(self.decoded.size)}
            object.__setattr__(self, "_entries", ent)
        return self._entries

    def __len__(self):
        return self.decoded.size

    def decode(self, y: Sequence[int]) -> int:
        if len(y) != self.n:
            raise ValueError(f"click pattern has {len(y)} entries, table has {self.n} modes")
        return int(self.decoded[pattern_index(y)])

    def decode_indices(self, codes: np.ndarray) -> np.ndarray:
        return self.decoded[codes]


def build_decode_table(params: ReceiverParams, alphabet: PskAlphabet, noise: NoiseModel = IDEAL) -> DecodeTable:
    joint = likelihoods(params, alphabet, noise) * alphabet.priors[:, None]
    decoded = np.argmax(joint, axis=0)
    best = joint[decoded, np.arange(joint.shape[1])]
    p_y = joint.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        posterior = np.where(p_y > 0, best / np.where(p_y > 0, p_y, 1.0), alphabet.priors[decoded])
    posterior = np.clip(posterior, 0.0, 1.0)
    return DecodeTable(params.n, _frozen(decoded), _frozen(posterior), _frozen(p_y))
