"""Normalized exponential systems chi_lambda^a(t) = N_lambda e^{i lambda t} in L^2(0, a).

The normalization N_lambda = (2 Im lambda / (1 - e^{-2a Im lambda}))^{1/2}
degenerates to a^{-1/2} for real lambda; the Gram has the closed form

    Gamma_{n,m} = N_n N_m (e^{i(lambda_n - conj lambda_m) a} - 1)
                  / (i (lambda_n - conj lambda_m)),

with series fallbacks near the removable singularities so real and
nearly-conjugate frequencies evaluate stably.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryFrequency, DuplicateFrequency, ZeroFrequency
from .kernels import GramMatrix
from . import aos


@dataclass(frozen=True)
class ExponentialFamily:
    a: float
    frequencies: tuple

    def __post_init__(self):
        a = float(self.a)
        if a <= 0:
            raise ValueError("interval length a must be > 0")
        freqs = tuple(complex(l) for l in self.frequencies)
        for lam in freqs:
            if lam.imag < 0:
                raise ValueError(f"frequency {lam} below the real axis")
        if len(set(freqs)) != len(freqs):
            raise DuplicateFrequency("coincident frequencies")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "frequencies", freqs)

    @property
    def size(self):
        return len(self.frequencies)


def chi_eval(family: ExponentialFamily, lam: complex, t):
    """chi_lambda^a(t) on arrays of t in [0, a]."""
    t = np.asarray(t, dtype=float)
    return math.sqrt(_norm_factor_sq(family.a, complex(lam))) \
        * np.exp(1j * complex(lam) * t)


def _norm_factor_sq(a: float, lam: complex) -> float:
    """2 Im lambda / (1 - e^{-2a Im lambda}), with the a^{-1} limit at Im = 0."""
    u = 2.0 * a * lam.imag
    if u < 1e-8:
        return (1.0 + u / 2.0 + u * u / 12.0) / a
    return u / (a * (-math.expm1(-u)))


def _expm1_ratio(w: complex) -> complex:
    """(e^w - 1)/w with a series near w = 0."""
    aw = abs(w)
    if aw < 1e-8:
        return 1.0 + w / 2.0 + w * w / 6.0
    if aw < 1e-4:
        return 1.0 + w / 2.0 + w * w / 6.0 + w ** 3 / 24.0 + w ** 4 / 120.0
    return (cmath.exp(w) - 1.0) / w


def chi_entry(family: ExponentialFamily, lam: complex, mu: complex) -> complex:
    """<chi_lam, chi_mu> = int_0^a chi_lam conj(chi_mu) dt, closed form."""
    a = family.a
    scale = math.sqrt(_norm_factor_sq(a, lam) * _norm_factor_sq(a, mu))
    w = 1j * (lam - mu.conjugate()) * a
    return scale * a * _expm1_ratio(w)


def chi_gram(family: ExponentialFamily) -> GramMatrix:
    """Hermitian unit-diagonal Gram of the normalized exponentials."""
    n = family.size
    gram = np.eye(n, dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            gram[i, j] = chi_entry(family, family.frequencies[i],
                                   family.frequencies[j])
            gram[j, i] = np.conj(gram[i, j])
    return GramMatrix(gram, {
        "model": "exponential",
        "a": family.a,
        "frequencies": [[l.real, l.imag] for l in family.frequencies],
        "normalization": "i-over-2pi",
    })


def thin_product(frequencies, n: int) -> float:
    """prod_{k != n} |(lambda_k - lambda_n)/(lambda_k - conj lambda_n)|.

    `n` is a 0-based index.  Log-space accumulation; a factor below e^-700
    short-circuits to zero.
    """
    freqs = [complex(l) for l in frequencies]
    if not 0 <= n < len(freqs):
        raise ValueError("index out of range")
    for lam in freqs:
        if lam.imag == 0.0:
            raise BoundaryFrequency(f"real frequency {lam} degenerates the product")
    lam_n = freqs[n]
    log_sum = 0.0
    for k, lam in enumerate(freqs):
        if k == n:
            continue
        num = abs(lam - lam_n)
        den = abs(lam - lam_n.conjugate())
        if num == 0.0:
            return 0.0
        term = math.log(num / den)
        if term < -700.0:
            return 0.0
        log_sum += term
    return math.exp(log_sum)


@dataclass(frozen=True)
class Prop41Report:
    """Hypothesis checks and tail diagnostics for a geometric-type family."""

    a: float
    sup_im: float
    im_bounded_trend: bool
    q_lower_bound: float
    ratio_hypothesis: bool
    rows: tuple          # (N, eps_row, c_N, C_N, fitted C/|lambda_N|)
    fit_constant: float
    fit_residual: float

    @property
    def hypotheses_ok(self):
        return self.im_bounded_trend and self.ratio_hypothesis


def prop41_check(frequencies, a: float) -> Prop41Report:
    """Check sup|Im| boundedness (as a trend) and the |lambda_{n+1}/lambda_n| > q > 1
    ratio hypothesis, then feed the Gram into the tail/row-defect diagnostics.

    The row-sum defect is compared against the fitted decay C/|lambda_N|; the
    hidden constant is estimated by least squares and its residual reported.
    """
    freqs = [complex(l) for l in frequencies]
    if any(l == 0 for l in freqs):
        raise ZeroFrequency("ratio test undefined at lambda = 0")
    n = len(freqs)
    ims = [abs(l.imag) for l in freqs]
    half = n // 2
    im_trend = max(ims[half:], default=0.0) <= max(ims[:half], default=0.0) * (1 + 1e-12) \
        if half else True
    ratios = [abs(freqs[k + 1] / freqs[k]) for k in range(n - 1)]
    q_hat = min(ratios) if ratios else math.inf
    # uniform q > 1 is a tail statement: flag margins collapsing toward 1
    ratio_ok = q_hat > 1.0
    if ratio_ok and len(ratios) >= 4:
        mid = len(ratios) // 2
        margin_head = min(ratios[:mid]) - 1.0
        margin_tail = min(ratios[mid:]) - 1.0
        if margin_tail < 0.5 * margin_head:
            ratio_ok = False

    fam = ExponentialFamily(a, tuple(freqs))
    gram = chi_gram(fam)
    eps_rows, c_list, big_c_list = [], [], []
    for N in range(1, n + 1):
        eps_row, _ = aos.row_defects(gram, N)
        c_n, c_up = aos.tail_bounds(gram, N)
        eps_rows.append(eps_row)
        c_list.append(c_n)
        big_c_list.append(c_up)
    inv_mod = np.array([1.0 / abs(freqs[N - 1]) for N in range(1, n + 1)])
    eps_arr = np.array(eps_rows)
    denom = float(inv_mod @ inv_mod)
    c_fit = float(inv_mod @ eps_arr) / denom if denom > 0 else 0.0
    resid = float(np.sqrt(np.sum((eps_arr - c_fit * inv_mod) ** 2)
                          / max(np.sum(eps_arr ** 2), 1e-300)))
    rows = tuple((N, eps_rows[N - 1], c_list[N - 1], big_c_list[N - 1],
                  float(c_fit * inv_mod[N - 1])) for N in range(1, n + 1))
    return Prop41Report(a, max(ims, default=0.0), im_trend, q_hat,
                        ratio_ok, rows, c_fit, resid)
