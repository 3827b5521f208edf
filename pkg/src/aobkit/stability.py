"""Perturbation machinery: Bernstein weights w_p, segment defects, predicates.

The weight is

    w_p(z) = min( ||(k_z^b)^2||_q^{-p/(p+1)}, ||rho^{1/q} K_z^b||_q^{-p/(p+1)} ),

with 1 < p < 2, q = p/(p-1), rho(t) = 1 - |b(t)|^2 and
K_z(t) = conj(b(z)) (2 - conj(b(z)) b(t)) / (t - conj z)^2.  A vanishing norm
sends its term to +inf and drops out of the min (inner b loses the second term;
b(z) = 0 likewise).  At a boundary point with S_4 = inf the weight is 0, and
predicates that integrate w_p^-2 across such a point raise
WeightVanishesOnSegment.

L^q integrals run on a window that grows until the rigorous tail bound
(numerator bounded, denominator |t - conj z|^{-2q}) drops below tolerance.
Symbols with singular atoms are outside this quadrature domain (their boundary
values oscillate essentially) and raise UnsupportedSymbol.

The unspecified constants C(p), C_1, C_2 of the underlying estimates are never
asserted; inequality checks use a two-grid calibration protocol (measure on
grid A, verify on disjoint grid B with a 0.9 safety factor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import schur
from .errors import (
    GammaOutOfRange,
    SpectrumOnSegment,
    UnsupportedSymbol,
    WeightVanishesOnSegment,
)
from .kernels import as_point, kernel_norm_sq
from .quadrature import integrate_adaptive, integrate_segment

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WeightParams:
    """Exponent pair and quadrature policy for w_p."""

    p: float
    rel_tol: float = 1e-9
    segment_rel_tol: float = 1e-6
    max_window_doublings: int = 24

    def __post_init__(self):
        p = float(self.p)
        if not 1.0 < p < 2.0:
            raise ValueError("p must lie in (1, 2)")
        object.__setattr__(self, "p", p)

    @property
    def q(self):
        return self.p / (self.p - 1.0)

    @property
    def norm_exponent(self):
        """Exponent applied to the L^q norms inside w_p."""
        return self.p / (self.p + 1.0)

    @property
    def estimate_exponent(self):
        """Exponent of (1 - |b(z)|) in the interior lower bound."""
        return self.p / (self.q * (self.p + 1.0))


def rho(b: schur.SchurFunction, t):
    """rho(t) = 1 - |b(t)|^2 on the real line."""
    vals = b.eval(np.asarray(t, dtype=float) + 0j)
    return np.clip(1.0 - np.abs(vals) ** 2, 0.0, 1.0)


def frak_kernel(b: schur.SchurFunction, z0: complex, t):
    """K_z0(t) = conj(b(z0)) (2 - conj(b(z0)) b(t)) / (t - conj z0)^2."""
    b_z0 = b.eval(z0)
    t = np.asarray(t, dtype=complex)
    return np.conj(b_z0) * (2.0 - np.conj(b_z0) * b.eval(t)) / (t - np.conj(z0)) ** 2


@dataclass(frozen=True)
class BoundaryData:
    """Closures over the boundary trace of b used by the weight."""

    symbol: schur.SchurFunction
    rho: object = field(repr=False)
    frak: object = field(repr=False)


def boundary_data(b: schur.SchurFunction) -> BoundaryData:
    return BoundaryData(b, lambda t: rho(b, t),
                        lambda z0, t: frak_kernel(b, z0, t))


def _check_quadrature_domain(b: schur.SchurFunction) -> schur.FlatSymbol:
    flat = schur.flatten(b)
    if flat.atoms:
        raise UnsupportedSymbol(
            "singular atoms oscillate essentially on R; w_p quadrature "
            "supports Blaschke x e^{iaz} x outer symbols")
    return flat


def _integrate_graded(g, a: float, b: float, rel_tol: float,
                      grade_left: bool, grade_right: bool):
    """Adaptive rule with exponential grading toward marked edges.

    At a jump of the log-modulus profile the boundary phase diverges like
    log|t - knot|, so the integrand oscillates with logarithmic frequency;
    t = edge +- e^u turns that into a bounded-frequency oscillation in u.
    The skipped sliver of width 1e-14(b - a) is negligible for bounded g.
    """
    if grade_left and grade_right:
        mid = 0.5 * (a + b)
        return (_integrate_graded(g, a, mid, rel_tol, True, False)
                + _integrate_graded(g, mid, b, rel_tol, False, True))
    if not (grade_left or grade_right):
        return integrate_adaptive(g, a, b, rel_tol=rel_tol)
    width = b - a
    edge, sign = (a, 1.0) if grade_left else (b, -1.0)

    def h(u):
        t = edge + sign * np.exp(u)
        return g(t) * np.exp(u)

    return integrate_adaptive(h, math.log(width) - 32.0, math.log(width),
                              rel_tol=rel_tol)


def _integrate_piecewise(g, lo: float, hi: float, breakpoints, rel_tol: float,
                         graded=()):
    """Adaptive integration split at known kinks, graded toward known jumps."""
    graded = set(graded)
    edges = [lo] + sorted(b for b in breakpoints if lo < b < hi) + [hi]
    return sum(_integrate_graded(g, a, b, rel_tol,
                                 a in graded, b in graded)
               for a, b in zip(edges, edges[1:]))


def _windowed_lq(g, center: float, halfwidth0: float, bound_const: float,
                 two_q: float, rel_tol: float, doublings: int,
                 breakpoints=(), graded=()):
    """int_R g with g >= 0, |g(t)| <= bound_const |t - center|^{-two_q} far out.

    Grows the window until the analytic tail bound is below tolerance; known
    kinks of g are supplied as breakpoints (jumps additionally as graded edges)
    so the adaptive rule never straddles or samples them.
    """
    T = halfwidth0
    total = _integrate_piecewise(g, center - T, center + T, breakpoints,
                                 rel_tol, graded)
    for _ in range(doublings):
        tail = 2.0 * bound_const * T ** (1.0 - two_q) / (two_q - 1.0)
        if tail <= rel_tol * max(abs(total), 1e-300) or tail < 1e-300:
            return total
        total += _integrate_piecewise(g, center + T, center + 2 * T,
                                      breakpoints, rel_tol, graded)
        total += _integrate_piecewise(g, center - 2 * T, center - T,
                                      breakpoints, rel_tol, graded)
        T *= 2.0
    return total


def _feature_halfwidth(flat: schur.FlatSymbol, z: complex) -> float:
    feats = [abs(z) + 1.0]
    feats.extend(abs(w) + 1.0 for w in flat.zeros)
    for outer in flat.outers:
        feats.append(abs(outer.knots[0]) + 1.0)
        feats.append(abs(outer.knots[-1]) + 1.0)
    return 8.0 * max(feats)


def weight_w_p(b: schur.SchurFunction, z: complex, params: WeightParams) -> float:
    """w_p(z) on the closed half-plane; 0 at boundary points with S_4 = inf."""
    flat = _check_quadrature_domain(b)
    z = as_point(z).value
    q = params.q
    two_q = 2.0 * q
    if z.imag == 0.0 and not math.isfinite(schur.s_ell(b, z.real, 4)):
        return 0.0
    b_z = b.eval(z)
    center = z.real
    halfwidth = _feature_halfwidth(flat, z)
    # |b(t)| jumps at profile jump knots and loses smoothness at every knot;
    # a boundary z adds a mild kink of |k_z| at t = z
    kinks = [k for outer in flat.outers for k in outer.knots]
    if z.imag == 0.0:
        kinks.append(z.real)

    def k_mod(t):
        # |k_z(t)|, vectorized on real t
        tv = np.asarray(t, dtype=float) + 0j
        num = 1.0 - np.conj(b_z) * b.eval(tv)
        den = tv - np.conj(z)
        if z.imag == 0.0:
            den = np.where(den == 0, 1.0, den)
            num = np.where(tv == z, 0.0, num)  # admissible: numerator vanishes too
        return np.abs(num / den) / TWO_PI

    bound1 = ((1.0 + abs(b_z)) / TWO_PI) ** two_q
    integral1 = _windowed_lq(lambda t: k_mod(t) ** two_q, center, halfwidth,
                             bound1, two_q, params.rel_tol,
                             params.max_window_doublings, breakpoints=kinks)
    if z.imag == 0.0 and not integral1 > 0.0:
        return 0.0
    term1 = integral1 ** (-params.norm_exponent / q) if integral1 > 0 else math.inf

    term2 = math.inf
    if abs(b_z) > 0 and (flat.has_outer_part
                         or abs(abs(flat.constant) - 1.0) > 1e-12):

        def g2(t):
            return rho(b, t) * np.abs(frak_kernel(b, z, t)) ** q

        if abs(abs(flat.constant) - 1.0) <= 1e-12:
            # rho is supported on the union of the outer profiles
            lo = min(outer.knots[0] for outer in flat.outers)
            hi = max(outer.knots[-1] for outer in flat.outers)
            integral2 = _integrate_piecewise(g2, lo, hi, kinks, params.rel_tol)
        else:
            bound2 = (abs(b_z) * (2.0 + abs(b_z))) ** q
            integral2 = _windowed_lq(g2, center, halfwidth, bound2, two_q,
                                     params.rel_tol,
                                     params.max_window_doublings,
                                     breakpoints=kinks)
        if integral2 > 0:
            term2 = integral2 ** (-params.norm_exponent / q)
    return min(term1, term2)


def lower_bound_ratio(b: schur.SchurFunction, z: complex,
                      params: WeightParams) -> float:
    """Empirical constant w_p(z) (1 - |b(z)|)^{p/(q(p+1))} / Im z at interior z."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("interior point required")
    w = weight_w_p(b, z, params)
    return w * (1.0 - abs(b.eval(z))) ** params.estimate_exponent / z.imag


def v0(theta: schur.SchurFunction, x: float) -> float:
    """min(d0(x), |Theta'(x)|^{-1}) for inner Theta."""
    d0 = schur.spectrum_distance(theta, x)
    deriv = schur.angular_derivative(theta, x)
    inv = 0.0 if math.isinf(deriv) else (math.inf if deriv == 0.0 else 1.0 / deriv)
    return min(d0, inv)


def epsilon_segment(b: schur.SchurFunction, lam, mu,
                    params: WeightParams) -> float:
    """(1/||k_lam^b||^2) int_[lam, mu] w_p(z)^{-2} |dz|."""
    lam_v = as_point(lam).value
    mu_v = as_point(mu).value
    if lam_v == mu_v:
        return 0.0
    norm_sq = kernel_norm_sq(b, lam)

    def integrand(zs):
        out = np.empty(zs.shape, dtype=float)
        for i, z in enumerate(np.atleast_1d(zs)):
            w = weight_w_p(b, complex(z), params)
            if w == 0.0:
                raise WeightVanishesOnSegment(f"w_p = 0 at {z}")
            out.flat[i] = w ** -2
        return out

    val = integrate_segment(integrand, lam_v, mu_v,
                            rel_tol=params.segment_rel_tol)
    return float(val) / norm_sq


def pseudo_hyperbolic(lam: complex, mu: complex) -> float:
    """|(lam - mu)/(lam - conj mu)| on C+."""
    lam = complex(lam)
    mu = complex(mu)
    if lam == mu:
        return 0.0
    return float(abs((lam - mu) / (lam - mu.conjugate())))


def ratio_bounds(eps: float):
    """Distortion interval ((1-eps)/(1+eps), (1+eps)/(1-eps)) for eps in [0, 1)."""
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    return (1.0 - eps) / (1.0 + eps), (1.0 + eps) / (1.0 - eps)


_PRED_SLACK = 1e-12


@dataclass(frozen=True)
class PerturbationVerdict:
    index: int
    pseudo_hyp: float
    bound: float
    ok: bool
    chain_bound: float
    chain_ok: bool


def cor36_predicate(b: schur.SchurFunction, lambdas, mus, gamma: float,
                    eps) -> list:
    """Per-index pseudo-hyperbolic perturbation test with exponent gamma > 1/3.

    Checks |(lam - mu)/(lam - conj mu)| <= eps_n (1 - |b(lam_n)|)^gamma and
    reports the implied chain bound |lam_n - mu_n| <= same * Im lam_n.
    """
    if not gamma > 1.0 / 3.0:
        raise GammaOutOfRange("gamma must exceed 1/3")
    lambdas = [complex(x) for x in lambdas]
    mus = [complex(x) for x in mus]
    if len(lambdas) != len(mus):
        raise ValueError("lambda and mu sequences must have equal length")
    eps_list = [float(eps)] * len(lambdas) if np.isscalar(eps) else [float(e) for e in eps]
    out = []
    for n, (lam, mu, e) in enumerate(zip(lambdas, mus, eps_list), start=1):
        ph = pseudo_hyperbolic(lam, mu)
        bound = e * (1.0 - abs(b.eval(lam))) ** gamma
        chain_bound = bound * lam.imag
        out.append(PerturbationVerdict(
            n, ph, bound, ph <= bound * (1.0 + _PRED_SLACK),
            chain_bound, abs(lam - mu) <= chain_bound * (1.0 + _PRED_SLACK)))
    return out


def thm310_predicates(theta: schur.SchurFunction, t_n: float, s_n: float,
                      eps_n: float, rel_tol: float = 1e-9):
    """Real-frequency criteria: the segment integral value and the arithmetic test.

    Eq1 value: int over [t_n, s_n] of |Theta'| + |Theta'|^{-1} d0^{-2};
    Eq2 verdict: |s_n - t_n| <= eps_n |Theta'(t_n)| min(d0^2(t_n), |Theta'(t_n)|^{-2}).
    """
    spec = schur.spectrum(theta)
    lo, hi = min(t_n, s_n), max(t_n, s_n)
    for pt in spec.real_points:
        if lo <= pt <= hi:
            raise SpectrumOnSegment(f"sigma(Theta) point {pt} inside [{lo}, {hi}]")
    pts = np.asarray(spec.real_points, dtype=float)

    def integrand(t):
        deriv = schur.angular_derivative_array(theta, t)
        if pts.size:
            d0 = np.min(np.abs(t[:, None] - pts[None, :]), axis=1)
            second = 1.0 / (deriv * d0 ** 2)
        else:
            second = np.zeros_like(deriv)
        return deriv + second

    eq1 = 0.0 if lo == hi else float(
        integrate_adaptive(lambda t: integrand(np.asarray(t, dtype=float)),
                           lo, hi, rel_tol=rel_tol))
    deriv_tn = schur.angular_derivative(theta, t_n)
    d0_tn = schur.spectrum_distance(theta, t_n)
    if math.isinf(deriv_tn):
        eq2_bound = 0.0
    else:
        cap = min(d0_tn ** 2 if math.isfinite(d0_tn) else math.inf,
                  deriv_tn ** -2 if deriv_tn > 0 else math.inf)
        eq2_bound = eps_n * deriv_tn * cap
    eq2 = abs(s_n - t_n) <= eq2_bound * (1.0 + _PRED_SLACK) \
        if math.isfinite(eq2_bound) else True
    return eq1, eq2


@dataclass(frozen=True)
class ArgumentGapVerdict:
    gap: float
    ok: bool
    cls_connected: bool | None


def cor312_predicate(theta: schur.SchurFunction, t: float, s: float, eps: float,
                     cls_delta: float | None = None,
                     cls_grid: schur.GridSpec | None = None) -> ArgumentGapVerdict:
    """Argument-gap criterion |phi(s) - phi(t)| <= eps for meromorphic inner Theta.

    The connected-level-set hypothesis is only checkable heuristically; when a
    delta and grid are supplied the flood-fill verdict is attached.
    """
    gap = abs(schur.argument_phi(theta, t, s))
    cls_flag = None
    if cls_delta is not None and cls_grid is not None:
        cls_flag = schur.sublevel_connected(theta, cls_delta, cls_grid)
    return ArgumentGapVerdict(gap, gap <= eps * (1.0 + _PRED_SLACK), cls_flag)


def gn_membership(kind: str, anchor, candidate, eps_n: float,
                  theta: schur.SchurFunction | None = None) -> bool:
    """Membership of `candidate` in the perturbation set G_n around `anchor`.

    kind "interior": |z - lam_n| < eps_n Im lam_n (strict);
    kind "real":     |t - t_n| <= eps_n v0(t_n) (needs theta).
    """
    if kind == "interior":
        lam = complex(anchor)
        return abs(complex(candidate) - lam) < eps_n * lam.imag
    if kind == "real":
        if theta is None:
            raise ValueError("real kind needs the inner symbol for v0")
        return abs(float(candidate) - float(anchor)) <= eps_n * v0(theta, float(anchor))
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# per-sequence report


@dataclass(frozen=True)
class StabilityReport:
    """Per-index diagnostics plus tail sups of the segment defect."""

    rows: tuple
    eps_tail: tuple  # (N, eps_N) with eps_N = sup_{n >= N} eps_segment


def stability_report(b: schur.SchurFunction, lambdas, mus,
                     params: WeightParams, gamma: float | None = None,
                     eps=None) -> StabilityReport:
    lambdas = [as_point(x) for x in lambdas]
    mus = [as_point(x) for x in mus]
    if len(lambdas) != len(mus):
        raise ValueError("lambda and mu sequences must have equal length")
    n = len(lambdas)
    eps_list = ([float(eps)] * n if eps is not None and np.isscalar(eps)
                else [float(e) for e in eps] if eps is not None else [None] * n)
    flat = schur.flatten(b)
    inner = flat.is_inner
    meromorphic = inner and not flat.atoms

    cor36 = None
    if gamma is not None and eps is not None \
            and all(not p.is_boundary for p in lambdas + mus):
        cor36 = cor36_predicate(b, [p.value for p in lambdas],
                                [p.value for p in mus], gamma, eps)

    rows = []
    for i, (lam, mu) in enumerate(zip(lambdas, mus)):
        both_interior = not lam.is_boundary and not mu.is_boundary
        both_real = lam.is_boundary and mu.is_boundary
        row = {
            "n": i + 1,
            "pseudo_hyp": pseudo_hyperbolic(lam.value, mu.value)
            if both_interior else None,
            "norm_ratio": math.sqrt(kernel_norm_sq(b, mu)
                                    / kernel_norm_sq(b, lam)),
            "eps_segment": epsilon_segment(b, lam, mu, params),
            "cor36": cor36[i].ok if cor36 is not None else None,
            "thm310_eq1": None,
            "thm310_eq2": None,
            "cor312": None,
        }
        if both_real and inner and eps_list[i] is not None:
            eq1, eq2 = thm310_predicates(b, lam.value.real, mu.value.real,
                                         eps_list[i])
            row["thm310_eq1"] = eq1
            row["thm310_eq2"] = eq2
            if meromorphic:
                row["cor312"] = cor312_predicate(
                    b, lam.value.real, mu.value.real, eps_list[i]).ok
        rows.append(row)

    eps_vals = [r["eps_segment"] for r in rows]
    eps_tail = tuple((N, max(eps_vals[N - 1:])) for N in range(1, n + 1))
    return StabilityReport(tuple(rows), eps_tail)


def two_grid_envelope(calibration_values, verification_values,
                      safety: float = 0.9) -> dict:
    """Two-grid protocol: the verification range must stay inside the
    calibration envelope widened by the safety factor."""
    cal = np.asarray(list(calibration_values), dtype=float)
    ver = np.asarray(list(verification_values), dtype=float)
    lo, hi = float(cal.min()), float(cal.max())
    ok = bool(ver.min() >= safety * lo and ver.max() <= hi / safety)
    return {"cal_min": lo, "cal_max": hi,
            "ver_min": float(ver.min()), "ver_max": float(ver.max()),
            "safety": safety, "within_envelope": ok}
