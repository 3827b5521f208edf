"""Reproducing kernels k_lambda^b on C+, their norms, and Gram matrices.

Kernel convention (tagged "i-over-2pi" in every report):

    k_lambda^b(z) = (i/2pi) (1 - conj(b(lambda)) b(z)) / (z - conj(lambda)),

so the interior norm is ||k_lambda||^2 = (1 - |b(lambda)|^2)/(4 pi Im lambda)
and the boundary norm at an S_2-admissible real x is |b'(x)|/(2 pi), the
y -> 0 limit of the interior formula.

`boundary_inner_product_oracle` integrates k_mu conj(k_lambda) over R without
using the reproducing property: the full integrand is integrated adaptively on
a window and the tails are handled analytically.  On the real line an inner
b = c e^{iat} B(t) gives

    4pi^2 k_mu(t) conj(k_lambda(t)) =
        [(1 + conj(b(mu)) b(lambda)) - conj(b(mu)) e^{iat} cB(t)
         - b(lambda) e^{-iat} conj(c)/B(t)] / ((t - conj mu)(t - lambda)),

three rational pieces; the non-oscillatory tail is integrated by a tangent
substitution and the e^{+-iat} tails by four-term integration by parts with
exact derivatives from logarithmic differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import schur
from .errors import (
    DuplicateFrequency,
    NotAdmissible,
    PoleCollision,
    UnsupportedSymbol,
)
from .quadrature import integrate_adaptive, integrate_tail, oscillatory_tail

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class FrequencyPoint:
    """A frequency in the closed upper half-plane.

    Boundary points (Im == 0) carry their admissibility record once a family
    is formed; interior points need Im > 0.
    """

    value: complex
    admissibility: schur.BoundaryAdmissibility | None = None

    def __post_init__(self):
        v = complex(self.value)
        if v.imag < 0:
            raise ValueError("frequency must lie in the closed upper half-plane")
        object.__setattr__(self, "value", v)

    @property
    def is_boundary(self):
        return self.value.imag == 0.0


def interior(z: complex) -> FrequencyPoint:
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("interior frequency needs Im z > 0")
    return FrequencyPoint(z)


def boundary(x: float) -> FrequencyPoint:
    return FrequencyPoint(complex(float(x), 0.0))


def as_point(lam) -> FrequencyPoint:
    return lam if isinstance(lam, FrequencyPoint) else FrequencyPoint(complex(lam))


def kernel_eval(b: schur.SchurFunction, lam, z):
    """k_lambda^b(z); z may be an array.

    For a boundary lambda, z == lambda returns the norm-squared limit when
    |b(lambda)| = 1 and raises PoleCollision otherwise.
    """
    lam = as_point(lam).value
    b_lam = b.eval(lam)
    z_arr, scalar = np.asarray(z, dtype=complex), np.asarray(z).shape == ()
    denom = z_arr - np.conj(lam)
    hit = denom == 0
    if np.any(hit):
        if lam.imag != 0.0:
            raise ValueError("z = conj(lambda) lies outside the closed half-plane")
        one_minus = 1.0 - abs(b_lam) ** 2
        if one_minus > 1e-13:
            raise PoleCollision(
                f"kernel pole at z = {lam.real} with nonzero numerator")
        limit = boundary_norm_sq(b, lam.real)
        out = np.where(hit, limit, _kernel_formula(b, b_lam, lam, z_arr,
                                                   np.where(hit, 1.0, denom)))
        return complex(out) if scalar else out
    out = _kernel_formula(b, b_lam, lam, z_arr, denom)
    return complex(out) if scalar else out


def _kernel_formula(b, b_lam, lam, z, denom):
    return (1j / TWO_PI) * (1.0 - np.conj(b_lam) * b.eval(z)) / denom


def boundary_norm_sq(b: schur.SchurFunction, x: float) -> float:
    """||k_x^b||^2 = |b'(x)|/(2pi) at an S_2-admissible real point."""
    if not math.isfinite(schur.s_ell(b, x, 2)):
        raise NotAdmissible(f"S_2({x}) = inf: no boundary kernel there")
    return schur.boundary_phase_derivative(b, x) / TWO_PI


def kernel_norm_sq(b: schur.SchurFunction, lam) -> float:
    """||k_lambda^b||^2: interior closed form or the boundary convention."""
    pt = as_point(lam)
    if pt.is_boundary:
        return boundary_norm_sq(b, pt.value.real)
    one_minus = 1.0 - abs(b.eval(pt.value)) ** 2
    if one_minus <= 0.0:
        raise NotAdmissible(f"|b({pt.value})| = 1 at an interior point")
    return one_minus / (FOUR_PI * pt.value.imag)


@dataclass(frozen=True)
class KernelFamily:
    """Finitely many admissible frequencies for one symbol, with their norms."""

    symbol: schur.SchurFunction
    points: tuple
    norms_sq: tuple

    @property
    def size(self):
        return len(self.points)


def kernel_family(b: schur.SchurFunction, frequencies) -> KernelFamily:
    pts = []
    for lam in frequencies:
        pt = as_point(lam)
        if pt.is_boundary and pt.admissibility is None:
            pt = FrequencyPoint(pt.value,
                                schur.boundary_admissibility(b, pt.value.real))
        pts.append(pt)
    values = [p.value for p in pts]
    if len(set(values)) != len(values):
        raise DuplicateFrequency("coincident frequencies make the Gram singular")
    norms = tuple(kernel_norm_sq(b, p) for p in pts)
    return KernelFamily(b, tuple(pts), norms)


@dataclass(frozen=True)
class GramMatrix:
    """Hermitian unit-diagonal matrix of normalized-kernel inner products."""

    entries: np.ndarray
    metadata: dict

    @property
    def size(self):
        return self.entries.shape[0]


def gram_entries(obj) -> np.ndarray:
    """Accept a GramMatrix or a plain array."""
    return np.asarray(getattr(obj, "entries", obj), dtype=complex)


def gram_normalized(family: KernelFamily) -> GramMatrix:
    """Gamma[n, p] = k_{lambda_n}(lambda_p) / (||k_n|| ||k_p||).

    Each off-diagonal entry is computed once and mirrored conjugate, so the
    result is exactly Hermitian; the diagonal is exactly one.
    """
    n = family.size
    gram = np.eye(n, dtype=complex)
    norms = np.sqrt(np.asarray(family.norms_sq))
    for i in range(n):
        for j in range(i + 1, n):
            val = kernel_eval(family.symbol, family.points[i],
                              family.points[j].value)
            gram[i, j] = val / (norms[i] * norms[j])
            gram[j, i] = np.conj(gram[i, j])
    return GramMatrix(gram, {
        "symbol": schur.to_dict(family.symbol),
        "frequencies": [[p.value.real, p.value.imag] for p in family.points],
        "normalization": "i-over-2pi",
    })


# ---------------------------------------------------------------------------
# boundary-integral oracle


class _RationalFactor:
    """c * prod (t - r) / prod (t - p) with derivatives via log-differentiation."""

    def __init__(self, coeff, roots, poles):
        self.coeff = complex(coeff)
        self.roots = [complex(r) for r in roots]
        self.poles = [complex(p) for p in poles]

    def value(self, t):
        out = np.full_like(np.asarray(t, dtype=complex), self.coeff)
        for r in self.roots:
            out = out * (t - r)
        for p in self.poles:
            out = out / (t - p)
        return out

    def derivatives(self, t: float, order: int = 4):
        """[R, R', ..., R^(order)] at a real point t."""
        # logderiv^(j) = sum_roots (-1)^j j!/(t-r)^{j+1} - same over poles
        ell = []
        for j in range(order):
            s = 0.0 + 0.0j
            sign = (-1.0) ** j * math.factorial(j)
            for r in self.roots:
                s += sign / (t - r) ** (j + 1)
            for p in self.poles:
                s -= sign / (t - p) ** (j + 1)
            ell.append(s)
        val = complex(self.value(np.asarray(t, dtype=complex)))
        l1, l2, l3, l4 = (ell + [0.0] * 4)[:4]
        bell = [1.0,
                l1,
                l1 ** 2 + l2,
                l1 ** 3 + 3 * l1 * l2 + l3,
                l1 ** 4 + 6 * l1 ** 2 * l2 + 4 * l1 * l3 + 3 * l2 ** 2 + l4]
        return [val * bell[m] for m in range(order + 1)]


def _oracle_pieces(b, lam: complex, mu: complex):
    """Split 4pi^2 k_mu conj(k_lambda) on R into (P, Q e^{iat}, S e^{-iat})."""
    flat = schur.flatten(b)
    if flat.is_zero:
        const, freq = 0.0 + 0.0j, 0.0
        zeros, phases = (), ()
        b_mu = b_lam = 0.0 + 0.0j
    else:
        if not flat.is_inner:
            raise UnsupportedSymbol("oracle needs an inner symbol (or b == 0)")
        if flat.atoms:
            raise UnsupportedSymbol(
                "singular atoms oscillate essentially; outside the oracle domain")
        const = flat.constant * np.exp(1j * sum(flat.phases))
        freq = flat.a
        zeros, phases = flat.zeros, flat.phases
        b_mu = b.eval(mu)
        b_lam = b.eval(lam)
    scale = 1.0 / (FOUR_PI * math.pi)  # 1/(4 pi^2)
    den_poles = [np.conj(mu), lam]
    p_piece = _RationalFactor(scale * (1.0 + np.conj(b_mu) * b_lam), [], den_poles)
    conj_zeros = [np.conj(z) for z in zeros]
    q_piece = _RationalFactor(-scale * np.conj(b_mu) * const,
                              list(zeros), conj_zeros + den_poles)
    s_piece = _RationalFactor(-scale * b_lam * np.conj(const),
                              conj_zeros, list(zeros) + den_poles)
    return p_piece, q_piece, s_piece, freq


def boundary_inner_product_oracle(b: schur.SchurFunction, lam, mu,
                                  rel_tol: float = 1e-10) -> complex:
    """int_R k_mu^b(t) conj(k_lambda^b(t)) dt by direct quadrature.

    Independent of the reproducing property; must agree with
    kernel_eval(b, mu, lam) for inner b (and for b == 0).  Interior
    frequencies only; the inner part must be a finite Blaschke product
    times e^{iaz} (constants allowed).
    """
    lam = as_point(lam).value
    mu = as_point(mu).value
    if lam.imag <= 0 or mu.imag <= 0:
        raise NotAdmissible("oracle is implemented for interior frequencies")
    p_piece, q_piece, s_piece, freq = _oracle_pieces(b, lam, mu)

    feats = [lam, mu] + list(q_piece.roots) + list(q_piece.poles)
    feat = max(abs(f) + 1.0 for f in feats)
    cut = max(64.0, 8.0 * feat)
    if freq > 0.0:
        # grow the window until the integration-by-parts remainder is negligible
        for _ in range(12):
            rem = sum(abs(piece.derivatives(side * cut, 4)[4]) * cut / 5.0
                      for piece in (q_piece, s_piece) for side in (1.0, -1.0))
            if rem / freq ** 4 < 1e-12:
                break
            cut *= 2.0

    def full_integrand(t):
        t = np.asarray(t, dtype=complex)
        out = p_piece.value(t)
        if freq > 0.0:
            out = out + q_piece.value(t) * np.exp(1j * freq * t.real)
            out = out + s_piece.value(t) * np.exp(-1j * freq * t.real)
        else:
            out = out + q_piece.value(t) + s_piece.value(t)
        return out

    total = integrate_adaptive(full_integrand, -cut, cut, rel_tol=rel_tol)
    for side in (1, -1):
        total += integrate_tail(lambda t: p_piece.value(t + 0j), cut, side,
                                scale=cut, rel_tol=rel_tol)
        if freq > 0.0:
            total += oscillatory_tail(q_piece.derivatives(side * cut, 3),
                                      freq, cut, side)
            total += oscillatory_tail(s_piece.derivatives(side * cut, 3),
                                      -freq, cut, side)
        else:
            total += integrate_tail(lambda t: q_piece.value(t + 0j)
                                    + s_piece.value(t + 0j),
                                    cut, side, scale=cut, rel_tol=rel_tol)
    return complex(total)
