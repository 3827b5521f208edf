"""Projecting kernel families onto a divisor space: decomposition and transfer.

For b1 = b2 b the kernels decompose orthogonally,

    ||sum a_l k_l^{b1}||^2 = ||sum a_l k_l^{b2}||^2
                             + ||sum a_l conj(b2(l)) k_l^{b}||^2,

which is an exact Gram-algebra identity here (decomposition_residual measures
its numerical defect).  Transfer of tail behaviour between the two families is
governed by R(n) = (1 - |b1(lambda_n)|^2)/(1 - |b2(lambda_n)|^2) >= 1 and the
summability of R - 1; the corresponding conclusions about complete systems are
infinite-dimensional, so reports emit tail bounds of both families side by side
and an l1 defect, never a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import aos, schur
from .errors import DivisorModulusOne
from .kernels import gram_normalized, kernel_eval, kernel_family

_MODULUS_TOL = 1e-12


@dataclass(frozen=True)
class DivisorPair:
    """b1 = b2 * b with all three in the closed unit ball."""

    b2: schur.SchurFunction
    b: schur.SchurFunction

    @property
    def b1(self) -> schur.SchurFunction:
        return schur.Product((self.b2, self.b))


def decomposition_residual(pair: DivisorPair, frequencies, coeffs) -> float:
    """|LHS - RHS| of the orthogonal decomposition for one coefficient vector.

    Both sides are quadratic forms in the unnormalized kernel Grams:
    LHS = sum a_l conj(a_m) k_l^{b1}(mu_m), RHS adds the b2-weighted b-part.
    """
    lams = [complex(l) for l in frequencies]
    a = np.asarray(coeffs, dtype=complex)
    if a.shape != (len(lams),):
        raise ValueError("one coefficient per frequency required")
    b1, b2, b = pair.b1, pair.b2, pair.b
    n = len(lams)
    b2_vals = np.array([b2.eval(l) for l in lams])

    def form(symbol, weights):
        total = 0.0 + 0.0j
        for l in range(n):
            for m in range(n):
                total += (a[l] * np.conj(a[m]) * weights[l] * np.conj(weights[m])
                          * kernel_eval(symbol, lams[l], lams[m]))
        return total

    ones = np.ones(n)
    lhs = form(b1, ones)
    rhs = form(b2, ones) + form(b, np.conj(b2_vals))
    return abs(lhs - rhs)


@dataclass(frozen=True)
class RatioReport:
    values: tuple          # R(n) per index
    l1_defect: float       # sum |R(n) - 1| over the window
    partial_defects: tuple  # running partial sums of |R - 1|


def ratio_R(pair: DivisorPair, frequencies) -> RatioReport:
    """R(n) = (1 - |b1(lambda_n)|^2)/(1 - |b2(lambda_n)|^2), exact values."""
    b1, b2 = pair.b1, pair.b2
    values = []
    for lam in (complex(l) for l in frequencies):
        m2 = abs(b2.eval(lam)) ** 2
        if m2 >= 1.0 - _MODULUS_TOL:
            raise DivisorModulusOne(f"|b2({lam})| = 1")
        values.append((1.0 - abs(b1.eval(lam)) ** 2) / (1.0 - m2))
    defects = np.cumsum([abs(v - 1.0) for v in values])
    return RatioReport(tuple(values),
                       float(defects[-1]) if len(values) else 0.0,
                       tuple(float(d) for d in defects))


@dataclass(frozen=True)
class Cor54Report:
    terms: tuple
    partial_sums: tuple
    kernel_norms: tuple        # ||k_{lambda_n}^b||_b over the window
    norms_bounded_trend: bool  # sup over last half <= sup over first half
    spectrum_flag: bool        # True when infinity may sit in sigma(Theta2)


def cor54_sum(theta2: schur.SchurFunction, b: schur.SchurFunction,
              frequencies) -> Cor54Report:
    """Partial sums of |Theta2(lambda_n)|^2 (1 - |b(lambda_n)|^2)/(1 - |b1(lambda_n)|^2).

    b1 = Theta2 * b.  Also tracks ||k_{lambda_n}^b|| for the boundedness
    hypothesis; a > 0 or declared unbounded spectrum data on Theta2 only sets
    a flag (the sum is still a valid diagnostic).
    """
    flat2 = schur.require_inner(theta2)
    b1 = schur.Product((theta2, b))
    lams = [complex(l) for l in frequencies]
    terms, norms = [], []
    for lam in lams:
        t2 = abs(theta2.eval(lam)) ** 2
        num = 1.0 - abs(b.eval(lam)) ** 2
        den = 1.0 - abs(b1.eval(lam)) ** 2
        terms.append(t2 * num / den if den > 0 else math.inf)
        norms.append(math.sqrt(num / (4.0 * math.pi * lam.imag)) if num > 0 else 0.0)
    half = len(norms) // 2
    trend = (max(norms[half:], default=0.0)
             <= max(norms[:half], default=0.0) * (1 + 1e-12)) if half else True
    return Cor54Report(tuple(terms),
                       tuple(float(s) for s in np.cumsum(terms)),
                       tuple(norms), trend, flat2.a > 0)


@dataclass(frozen=True)
class DivisionReport:
    """Side-by-side tail bounds of the b1 and b2 kernel families.

    `estimated_p` is the heuristic first index at which the b2-family tail
    bounds enter [1 - tau, 1 + tau]; None when they never do on this window.
    """

    rows: tuple        # (n, R, |R-1|, |b2_or_theta2(lam)|^2, term54, partial54)
    tails: tuple       # (N, c_N^{b1}, C_N^{b1}, c_N^{b2}, C_N^{b2})
    l1_defect: float
    tau: float
    estimated_p: int | None


def division_report(pair: DivisorPair, frequencies,
                    tau: float = 0.1) -> DivisionReport:
    lams = [complex(l) for l in frequencies]
    ratio = ratio_R(pair, lams)
    flat2 = schur.flatten(pair.b2)
    if flat2.is_inner:
        c54 = cor54_sum(pair.b2, pair.b, lams)
        terms, partials = c54.terms, c54.partial_sums
    else:
        terms = partials = (math.nan,) * len(lams)
    b2_sq = [abs(pair.b2.eval(l)) ** 2 for l in lams]
    rows = tuple((n + 1, ratio.values[n], abs(ratio.values[n] - 1.0),
                  b2_sq[n], terms[n], partials[n]) for n in range(len(lams)))

    g1 = gram_normalized(kernel_family(pair.b1, lams))
    g2 = gram_normalized(kernel_family(pair.b2, lams))
    tails = []
    estimated_p = None
    for N in range(1, len(lams) + 1):
        c1, cc1 = aos.tail_bounds(g1, N)
        c2, cc2 = aos.tail_bounds(g2, N)
        tails.append((N, c1, cc1, c2, cc2))
        if estimated_p is None and 1 - tau <= c2 and cc2 <= 1 + tau:
            estimated_p = N
    return DivisionReport(rows, tuple(tails), ratio.l1_defect, tau, estimated_p)
