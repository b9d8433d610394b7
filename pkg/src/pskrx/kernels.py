"""Hot numeric kernels: click statistics and exact pattern enumeration.

Every kernel exists twice, a numba-compiled loop (``*_jit``) and a
vectorised numpy version (``*_numpy``). The unsuffixed names dispatch to
one of them according to :data:`pskrx._jit.NUMBA_ENABLED`.

Conventions shared by all kernels:

* ``states`` is the complex constellation, shape ``(M,)``.
* ``p0`` / ``p1`` are the per-state, per-mode no-click / click
  probabilities, shape ``(M, N)``.
* Click pattern ``y`` is stored as the integer ``b = sum_j y_j 2**j``, so
  mode 0 is the least significant bit.
"""
import types

import numpy as np

from ._jit import NUMBA_ENABLED, njit

# numpy fallback materialises at most 2**_NUMPY_BLOCK_BITS patterns at once
_NUMPY_BLOCK_BITS = 16


# --------------------------------------------------------------------------
# click probabilities
# --------------------------------------------------------------------------

def click_probs_numpy(u, eps, states, efficiency, dark_prob, visibility):
    a = states[:, None] * u[None, :]
    b = np.broadcast_to(eps[None, :], a.shape)
    g = a + b
    coherent = g.real ** 2 + g.imag ** 2
    incoherent = a.real ** 2 + a.imag ** 2 + b.real ** 2 + b.imag ** 2
    nbar = efficiency * (visibility * coherent + (1.0 - visibility) * incoherent)
    nbar = np.maximum(nbar, 0.0)
    p0 = (1.0 - dark_prob) * np.exp(-nbar)
    return p0, 1.0 - p0


@njit
def click_probs_jit(u, eps, states, efficiency, dark_prob, visibility):
    m = states.shape[0]
    n = u.shape[0]
    p0 = np.empty((m, n))
    p1 = np.empty((m, n))
    for x in range(m):
        for j in range(n):
            ar = u[j] * states[x].real
            ai = u[j] * states[x].imag
            br = eps[j].real
            bi = eps[j].imag
            gr = ar + br
            gi = ai + bi
            coherent = gr * gr + gi * gi
            incoherent = ar * ar + ai * ai + br * br + bi * bi
            nbar = efficiency * (visibility * coherent + (1.0 - visibility) * incoherent)
            if nbar < 0.0:
                nbar = 0.0
            q = (1.0 - dark_prob) * np.exp(-nbar)
            p0[x, j] = q
            p1[x, j] = 1.0 - q
    return p0, p1


# --------------------------------------------------------------------------
# likelihood table  L[x, b] = p(b | x)
# --------------------------------------------------------------------------

def likelihood_table_numpy(p0, p1):
    m, n = p0.shape
    table = np.ones((m, 1))
    for j in range(n):
        table = np.concatenate((table * p0[:, j:j + 1], table * p1[:, j:j + 1]), axis=1)
    return table


@njit
def likelihood_table_jit(p0, p1):
    m, n = p0.shape
    size = 1 << n
    table = np.empty((m, size))
    for x in range(m):
        table[x, 0] = 1.0
        width = 1
        for j in range(n):
            for b in range(width):
                v = table[x, b]
                table[x, b] = v * p0[x, j]
                table[x, b + width] = v * p1[x, j]
            width *= 2
    return table


# --------------------------------------------------------------------------
# success probability  sum_b max_x w[x] p(b | x)
# --------------------------------------------------------------------------

def success_from_clicks_numpy(p0, p1, weights):
    m, n = p0.shape
    low = min(n, _NUMPY_BLOCK_BITS)
    base = likelihood_table_numpy(p0[:, :low], p1[:, :low]) * weights[:, None]
    if low == n:
        return float(base.max(axis=0).sum())
    high = likelihood_table_numpy(p0[:, low:], p1[:, low:])
    total = 0.0
    for h in range(high.shape[1]):
        total += float((base * high[:, h:h + 1]).max(axis=0).sum())
    return total


@njit
def success_from_clicks_jit(p0, p1, weights):
    m, n = p0.shape
    total = 0.0
    for b in range(1 << n):
        best = 0.0
        for x in range(m):
            v = weights[x]
            for j in range(n):
                if (b >> j) & 1:
                    v *= p1[x, j]
                else:
                    v *= p0[x, j]
            if v > best:
                best = v
        total += best
    return total


# --------------------------------------------------------------------------
# fused optimiser objective
#
# theta = (n-1 hyperspherical angles, re(eps_0), im(eps_0), re(eps_1), ...)
# --------------------------------------------------------------------------

def sphere_embed_numpy(angles):
    angles = np.asarray(angles, dtype=float)
    n = angles.shape[0] + 1
    u = np.empty(n)
    s = 1.0
    for i in range(n - 1):
        u[i] = s * np.cos(angles[i])
        s *= np.sin(angles[i])
    u[n - 1] = s
    return u


@njit
def sphere_embed_jit(angles):
    n = angles.shape[0] + 1
    u = np.empty(n)
    s = 1.0
    for i in range(n - 1):
        u[i] = s * np.cos(angles[i])
        s *= np.sin(angles[i])
    u[n - 1] = s
    return u


def objective_numpy(theta, n, states, weights, efficiency, dark_prob, visibility):
    u = sphere_embed_numpy(theta[:n - 1])
    d = theta[n - 1:]
    eps = d[0::2] + 1j * d[1::2]
    p0, p1 = click_probs_numpy(u, eps, states, efficiency, dark_prob, visibility)
    return success_from_clicks_numpy(p0, p1, weights)


@njit
def objective_jit(theta, n, states, weights, efficiency, dark_prob, visibility):
    u = sphere_embed_jit(theta[:n - 1])
    eps = np.empty(n, dtype=np.complex128)
    for j in range(n):
        eps[j] = complex(theta[n - 1 + 2 * j], theta[n + 2 * j])
    p0, p1 = click_probs_jit(u, eps, states, efficiency, dark_prob, visibility)
    return success_from_clicks_jit(p0, p1, weights)


if NUMBA_ENABLED:
    click_probs = click_probs_jit
    likelihood_table = likelihood_table_jit
    success_from_clicks = success_from_clicks_jit
    sphere_embed = sphere_embed_jit
    objective = objective_jit
    BACKEND = "numba"
else:
    click_probs = click_probs_numpy
    likelihood_table = likelihood_table_numpy
    success_from_clicks = success_from_clicks_numpy
    sphere_embed = sphere_embed_numpy
    objective = objective_numpy
    BACKEND = "numpy"


# --------------------------------------------------------------------------
# local search: adaptive Nelder-Mead, then finite-difference gradient ascent
#
# The compiled search calls the objective through the module global ``_f``
# so numba can cache it on disk. The numpy fallback runs plain-Python
# copies of the same functions with ``_f`` rebound to the numpy objective.
# --------------------------------------------------------------------------

_f = objective_jit


@njit
def _nelder_mead(x0, step, args, max_iters, xtol, ftol):
    n, states, weights, eff, dark, vis = args
    d = x0.shape[0]
    rho = 1.0
    chi = 1.0 + 2.0 / d
    psi = 0.75 - 1.0 / (2.0 * d)
    sigma = 1.0 - 1.0 / d
    sim = np.empty((d + 1, d))
    fs = np.empty(d + 1)
    sim[0] = x0
    for i in range(d):
        sim[i + 1] = x0
        sim[i + 1, i] += step
    for i in range(d + 1):
        fs[i] = -_f(sim[i], n, states, weights, eff, dark, vis)
    it = 0
    converged = False
    while it < max_iters:
        order = np.argsort(fs, kind="mergesort")
        sim = sim[order]
        fs = fs[order]
        spread_x = 0.0
        spread_f = 0.0
        for i in range(1, d + 1):
            spread_f = max(spread_f, abs(fs[i] - fs[0]))
            for k in range(d):
                spread_x = max(spread_x, abs(sim[i, k] - sim[0, k]))
        if spread_x <= xtol and spread_f <= ftol:
            converged = True
            break
        it += 1
        centroid = sim[:d].sum(axis=0) / d
        xr = (1.0 + rho) * centroid - rho * sim[d]
        fr = -_f(xr, n, states, weights, eff, dark, vis)
        shrink = False
        if fr < fs[0]:
            xe = (1.0 + rho * chi) * centroid - rho * chi * sim[d]
            fe = -_f(xe, n, states, weights, eff, dark, vis)
            if fe < fr:
                sim[d] = xe
                fs[d] = fe
            else:
                sim[d] = xr
                fs[d] = fr
        elif fr < fs[d - 1]:
            sim[d] = xr
            fs[d] = fr
        elif fr < fs[d]:
            xc = (1.0 + psi * rho) * centroid - psi * rho * sim[d]
            fc = -_f(xc, n, states, weights, eff, dark, vis)
            if fc <= fr:
                sim[d] = xc
                fs[d] = fc
            else:
                shrink = True
        else:
            xcc = (1.0 - psi) * centroid + psi * sim[d]
            fcc = -_f(xcc, n, states, weights, eff, dark, vis)
            if fcc < fs[d]:
                sim[d] = xcc
                fs[d] = fcc
            else:
                shrink = True
        if shrink:
            for i in range(1, d + 1):
                sim[i] = sim[0] + sigma * (sim[i] - sim[0])
                fs[i] = -_f(sim[i], n, states, weights, eff, dark, vis)
    best = np.argmin(fs)
    return sim[best].copy(), -fs[best], it, converged


@njit
def _gradient_polish(x0, args, max_iters, ftol):
    n, states, weights, eff, dark, vis = args
    d = x0.shape[0]
    h = 1e-6
    x = x0.copy()
    fx = _f(x, n, states, weights, eff, dark, vis)
    g = np.empty(d)
    it = 0
    while it < max_iters:
        it += 1
        for k in range(d):
            xp = x.copy()
            xm = x.copy()
            xp[k] += h
            xm[k] -= h
            g[k] = (_f(xp, n, states, weights, eff, dark, vis) - _f(xm, n, states, weights, eff, dark, vis)) / (2.0 * h)
        gg = 0.0
        for k in range(d):
            gg += g[k] * g[k]
        if gg == 0.0:
            break
        t = 1.0
        improved = False
        while t > 1e-12:
            xn = x + t * g
            fn = _f(xn, n, states, weights, eff, dark, vis)
            if fn >= fx + 1e-4 * t * gg:
                improved = True
                break
            t *= 0.5
        if not improved:
            break
        gain = fn - fx
        x = xn
        fx = fn
        if gain <= ftol:
            break
    return x, fx, it


@njit
def _local_search(x0, step, n, states, weights, eff, dark, vis, max_iters, xtol, ftol):
    args = (n, states, weights, eff, dark, vis)
    x1, f1, it1, _ = _nelder_mead(x0, step, args, max_iters, xtol, ftol)
    x2, f2, it2, conv = _nelder_mead(x1, step, args, max_iters, xtol, ftol)
    if f1 > f2:
        x2 = x1
        f2 = f1
    x3, f3, it3 = _gradient_polish(x2, args, 200, ftol)
    if f3 < f2:
        x3 = x2
        f3 = f2
    return x3, f3, it1 + it2 + it3, conv


def _rebind(funcs, **names):
    """Plain-Python copies of ``funcs`` resolving globals in a patched namespace."""
    scope = dict(globals())
    scope.update(names)
    copies = {}
    for fn in funcs:
        py = getattr(fn, "py_func", fn)
        copies[py.__name__] = types.FunctionType(py.__code__, scope, py.__name__, py.__defaults__)
    scope.update(copies)
    return copies


local_search_jit = _local_search
local_search_numpy = _rebind((_nelder_mead, _gradient_polish, _local_search), _f=objective_numpy)["_local_search"]
local_search = local_search_jit if NUMBA_ENABLED else local_search_numpy
