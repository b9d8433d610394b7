import itertools
import math

import numpy as np
import pytest

from pskrx import NoiseModel, PskAlphabet, ReceiverParams


def brute_likelihood(params, alphabet, noise, x, y):
    """p(y | x) from scalar math, no numpy kernels involved."""
    alpha_x = complex(alphabet.alpha * complex(math.cos(2 * math.pi * x / alphabet.m),
                                               math.sin(2 * math.pi * x / alphabet.m)))
    p = 1.0
    for uj, ej, yj in zip(params.u, params.eps, y):
        a = float(uj) * alpha_x
        e = complex(ej)
        cross = 2 * noise.visibility * (a.real * e.real + a.imag * e.imag)
        nbar = noise.efficiency * (abs(a) ** 2 + abs(e) ** 2 + cross)
        q = (1 - noise.dark_prob) * math.exp(-max(nbar, 0.0))
        p *= (1 - q) if yj else q
    return p


def brute_success(params, alphabet, noise):
    total = 0.0
    for y in itertools.product((0, 1), repeat=params.n):
        total += max(brute_likelihood(params, alphabet, noise, x, y) * alphabet.priors[x]
                     for x in range(alphabet.m))
    return total


def random_receiver(rng, n, scale=1.5):
    u = rng.normal(size=n)
    u /= np.linalg.norm(u)
    eps = rng.uniform(-scale, scale, n) + 1j * rng.uniform(-scale, scale, n)
    return ReceiverParams(u, eps)


def random_noise(rng):
    return NoiseModel(rng.uniform(0.3, 1.0), rng.uniform(0.0, 0.05), rng.uniform(0.5, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qpsk():
    return lambda alpha: PskAlphabet(4, alpha)


_ACCEPTANCE = pytest.StashKey()


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion and return the flag."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, title, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
