"""Adaptive composite Gauss-Legendre quadrature on segments, the real line and tails.

Every routine evaluates the integrand on whole numpy arrays at once, doubles the
panel count until the estimate stabilises to the requested relative tolerance and
raises QuadratureNotConverged at the node cap.  The real-line rule uses the
substitution t = center + scale*tan(theta) so poles near `center` are resolved and
the tails compress to the endpoints of (-pi/2, pi/2).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureNotConverged

GL_ORDER = 16


@lru_cache(maxsize=8)
def _gl_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _composite_nodes(a: float, b: float, panels: int, order: int = GL_ORDER):
    """Nodes and weights of a composite GL rule with `panels` equal panels on [a, b]."""
    x, w = _gl_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1] - edges[0])
    nodes = (mid + half * x[None, :]).ravel()
    weights = np.broadcast_to(half * w[None, :], (panels, x.size)).ravel()
    return nodes, weights


def integrate_interval(f, a: float, b: float, rel_tol: float = 1e-9,
                       max_nodes: int = 2 ** 20, abs_floor: float = 1e-300):
    """Integrate f over the real interval [a, b] with panel doubling.

    Convergence means two consecutive doublings each change the estimate by
    less than rel_tol relatively (or below abs_floor absolutely).
    """
    if a == b:
        return 0.0
    prev = None
    hits = 0
    panels = 1
    while panels * GL_ORDER <= max_nodes:
        nodes, weights = _composite_nodes(a, b, panels)
        est = np.sum(f(nodes) * weights)
        if prev is not None:
            delta = abs(est - prev)
            if delta <= rel_tol * max(abs(est), abs_floor) or delta <= abs_floor:
                hits += 1
                if hits >= 2:
                    return est
            else:
                hits = 0
        prev = est
        panels *= 2
    raise QuadratureNotConverged(
        f"interval rule did not stabilise within {max_nodes} nodes")


def integrate_adaptive(f, a: float, b: float, rel_tol: float = 1e-11,
                       abs_floor: float = 1e-14, max_depth: int = 48):
    """Locally adaptive GL rule for real intervals with isolated sharp features.

    Bisects until the whole-interval estimate agrees with the sum over halves;
    the tolerance budget halves with each split.  Unlike the panel-doubling
    rules this resolves a narrow spike inside a very long interval.
    """
    if a == b:
        return 0.0

    def once(lo, hi):
        nodes, weights = _composite_nodes(lo, hi, 1)
        return np.sum(f(nodes) * weights)

    def recurse(lo, hi, whole, tol, depth):
        mid = 0.5 * (lo + hi)
        left = once(lo, mid)
        right = once(mid, hi)
        if abs(left + right - whole) <= tol or depth >= max_depth:
            return left + right
        return (recurse(lo, mid, left, tol / 2, depth + 1)
                + recurse(mid, hi, right, tol / 2, depth + 1))

    rough = once(a, b)
    scale = max(abs(rough), abs_floor)
    return recurse(a, b, rough, max(rel_tol * scale, abs_floor), 0)


def integrate_segment(f, z0: complex, z1: complex, rel_tol: float = 1e-6,
                      max_nodes: int = 2 ** 16):
    """Integrate f along the straight segment [z0, z1] against arclength |dz|.

    The segment is parameterised affinely; f receives complex node arrays.
    """
    z0 = complex(z0)
    z1 = complex(z1)
    length = abs(z1 - z0)
    if length == 0.0:
        return 0.0
    direction = (z1 - z0) / length

    def g(s):
        return f(z0 + s * direction)

    return integrate_interval(g, 0.0, length, rel_tol=rel_tol, max_nodes=max_nodes)


def integrate_real_line(f, center: float = 0.0, scale: float = 1.0,
                        rel_tol: float = 1e-9, max_nodes: int = 2 ** 20):
    """Integrate f over the whole real line via t = center + scale*tan(theta)."""
    scale = float(scale)

    def g(theta):
        t = center + scale * np.tan(theta)
        return f(t) * scale / np.cos(theta) ** 2

    return integrate_interval(g, -np.pi / 2, np.pi / 2,
                              rel_tol=rel_tol, max_nodes=max_nodes)


def integrate_tail(f, cut: float, side: int, scale: float = 1.0,
                   rel_tol: float = 1e-9, max_nodes: int = 2 ** 20):
    """Integrate a smooth non-oscillatory f over (cut, +inf) or (-inf, -cut).

    side = +1 maps theta in (0, pi/2) to t = cut + scale*tan(theta); side = -1
    uses t = -(cut + scale*tan(theta)).  Suitable for integrands decaying at
    least like 1/t^2.
    """
    scale = float(scale)

    def g(theta):
        t = side * (cut + scale * np.tan(theta))
        return f(t) * scale / np.cos(theta) ** 2

    return integrate_interval(g, 0.0, np.pi / 2,
                              rel_tol=rel_tol, max_nodes=max_nodes)


def oscillatory_tail(derivs, freq: float, cut: float, side: int) -> complex:
    """Asymptotic tail of int R(t) e^{i*freq*t} dt beyond |t| = cut by parts.

    `derivs` lists R(T), R'(T), ..., evaluated at T = side*cut.  Repeated
    integration by parts gives, for the right tail (side = +1),

        int_T^inf R e^{i f t} dt = -e^{i f T} sum_m (-1)^m R^(m)(T) / (i f)^(m+1),

    and the mirrored sign for the left tail.  The truncation error is
    ||R^(M)||_L1(tail) / |f|^M, negligible for rational R decaying like 1/t^2
    once cut*|freq| is large; callers choose the cut accordingly.
    """
    T = side * cut
    ifr = 1j * freq
    acc = 0.0 + 0.0j
    sign = 1.0
    for m, d in enumerate(derivs):
        acc += sign * d / ifr ** (m + 1)
        sign = -sign
    phase = np.exp(ifr * T)
    return -side * phase * acc
