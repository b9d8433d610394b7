"""Reference success probabilities: heterodyne, Helstrom and fixed receivers."""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .core import ReceiverParams
from .errors import NumericalError, QuadratureError

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class QuadratureSpec:
    m: int
    alpha: float
    quad_tolerance: float = 1e-9

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.m}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha}")
        if not self.quad_tolerance > 0:
            raise ValueError("quad_tolerance must be positive")


# --------------------------------------------------------------------------
# heterodyne
# --------------------------------------------------------------------------

def heterodyne_qpsk(alpha: float) -> float:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return 0.25 * (1.0 + math.erf(alpha / SQRT2)) ** 2


def heterodyne_mpsk(spec: QuadratureSpec) -> float:
    """Heterodyne success for M-PSK, reduced to a single finite integral.

    ``exp(-a^2)/M + erf(s)/2 + (1/sqrt(pi)) int_0^s exp(-t^2) erf(sqrt(a^2 - t^2)) dt``
    with ``s = a sin(pi/M)``.
    """
    a = float(spec.alpha)
    m = spec.m
    s = a * math.sin(math.pi / m)
    base = math.exp(-a * a) / m + 0.5 * math.erf(s)
    if s == 0.0:
        return base

    def integrand(t):
        return math.exp(-t * t) * math.erf(math.sqrt(max(a * a - t * t, 0.0)))

    value, abserr, info = integrate.quad(
        integrand, 0.0, s, epsabs=spec.quad_tolerance, epsrel=0.0, limit=200, full_output=True)[:3]
    if abserr > spec.quad_tolerance:
        raise QuadratureError("heterodyne integral did not converge", abserr)
    return base + value / math.sqrt(math.pi)


def _gauss_legendre_panels(lo, hi, panels, order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def heterodyne_wedge_oracle(spec: QuadratureSpec, order: int = 24, max_refinements: int = 8) -> float:
    """Heterodyne success by direct 2D integration over the decision wedge.

    Integrates the outcome density of the state on the positive real axis,
    ``P(r, theta) = exp(-(r^2 + x0^2 - 2 r x0 cos theta) / 2) / (2 pi)`` with
    ``x0 = alpha sqrt(2)``, over ``|theta| <= pi/M`` and ``0 <= r <= r_max``.
    Composite Gauss-Legendre panels are doubled until two successive
    estimates agree to ``quad_tolerance``.
    """
    tol = spec.quad_tolerance
    x0 = SQRT2 * spec.alpha
    # radial mass of a unit 2D Gaussian beyond distance t is exp(-t^2/2)
    r_max = x0 + math.sqrt(2.0 * math.log(1.0 / min(tol, 0.5) * 10.0))
    half = math.pi / spec.m

    def estimate(panels):
        r, wr = _gauss_legendre_panels(0.0, r_max, panels, order)
        th, wt = _gauss_legendre_panels(-half, half, max(1, panels // 2), order)
        dens = np.exp(-(r[:, None] ** 2 + x0 * x0 - 2.0 * r[:, None] * x0 * np.cos(th[None, :])) / 2.0)
        return float(wr @ (r[:, None] * dens) @ wt) / (2.0 * math.pi)

    panels = 2
    prev = estimate(panels)
    for _ in range(max_refinements):
        panels *= 2
        cur = estimate(panels)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise QuadratureError("wedge quadrature did not converge", abs(cur - prev))


def heterodyne_with_efficiency(m: int, alpha: float, efficiency: float, quad_tolerance: float = 1e-9) -> float:
    """Heterodyne after a lossy channel of transmission ``efficiency``."""
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    return heterodyne_mpsk(QuadratureSpec(m, math.sqrt(efficiency) * alpha, quad_tolerance))


# --------------------------------------------------------------------------
# Helstrom bound
# --------------------------------------------------------------------------

def gram_eigenvalues(m: int, alpha: float) -> np.ndarray:
    """Eigenvalues of the circulant Gram matrix of the M-PSK states, divided by M.

    ``lambda_k / M = sum_{j = k mod M} Poisson(j; alpha^2)``: the Fourier sum of
    the Gram row expanded termwise, which keeps every eigenvalue a sum of
    nonnegative terms.
    """
    mu = alpha * alpha
    if mu == 0.0:
        out = np.zeros(m)
        out[0] = 1.0
        return out
    jmax = int(mu + 12.0 * math.sqrt(mu) + 60.0)
    j = np.arange(jmax + 1)
    pmf = np.exp(j * math.log(mu) - mu - gammaln(j + 1.0))
    return np.bincount(j % m, weights=pmf, minlength=m)


def gram_eigenvalues_dft(m: int, alpha: float) -> np.ndarray:
    """Same quantity via an explicit DFT of the Gram matrix's first row."""
    k = np.arange(m)
    row = np.exp(-alpha * alpha * (1.0 - np.exp(2j * np.pi * k / m)))
    lam = np.fft.fft(row)
    if np.max(np.abs(lam.imag)) > 1e-9:
        raise NumericalError("Gram eigenvalues are not real")
    lam = lam.real
    if lam.min() < -1e-9:
        raise NumericalError(f"negative Gram eigenvalue {lam.min():.3g}")
    return np.clip(lam, 0.0, None) / m


def helstrom_mpsk(m: int, alpha: float) -> float:
    """Optimal success probability for equiprobable M-PSK coherent states.

    The square-root measurement is optimal for this geometrically uniform
    pure-state ensemble, giving ``(1/M^2) (sum_k sqrt(lambda_k))^2``.
    """
    if m < 2:
        raise ValueError("alphabet size must be >= 2")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    lam = gram_eigenvalues(m, alpha)
    if lam.min() < -1e-9:
        raise NumericalError(f"negative Gram eigenvalue {lam.min():.3g}")
    root = np.sqrt(np.clip(lam, 0.0, None)).sum()
    return float(root * root / m)


# --------------------------------------------------------------------------
# fixed QPSK receivers
# --------------------------------------------------------------------------

_HALF_SPLIT = np.array([1.0, 1.0]) / SQRT2


def analytic_receiver_qpsk() -> ReceiverParams:
    """Balanced splitter with displacements ``(1+i)/2`` and ``(i-1)/2``."""
    return ReceiverParams(_HALF_SPLIT, [(1 + 1j) / 2, (-1 + 1j) / 2])


def analytic_success_qpsk(alpha: float) -> float:
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    return 0.25 * (1.0 + 2.0 * math.exp(-(1.0 + alpha * alpha) / 2.0) * math.sinh(alpha / SQRT2)) ** 2


def kennedy_nulling_qpsk(alpha: float) -> ReceiverParams:
    """Balanced splitter, both modes displaced so that state ``-alpha`` goes to vacuum."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    d = alpha / SQRT2
    return ReceiverParams(_HALF_SPLIT, [d, d])


def kennedy_optamp_qpsk() -> ReceiverParams:
    """Kennedy receiver with the displacement amplitude raised to 1/2 on each mode."""
    return ReceiverParams(_HALF_SPLIT, [0.5, 0.5])
