"""Schur-class symbols on the upper half-plane, built from factored data.

A symbol is one of five variants: a finite Blaschke product, a singular inner
factor (point mass at infinity plus finitely many atoms), an outer factor given
by a compactly supported piecewise-linear log-modulus profile, a constant of
modulus <= 1, or a product of such.  Evaluation is exact per factor:

  Blaschke      prod_k e^{i alpha_k} (z - z_k)/(z - conj z_k)
  singular      exp(i a z - i sum_k m_k (1/(z - x_k) + x_k/(x_k^2 + 1)))
  outer         exp((i/pi) int (1/(z - t) + t/(t^2+1)) L(t) dt),  L = log|b| on R

with the outer Herglotz integral in closed form per linear segment.  Atom
masses enter the singular exponent without a 1/pi, so the boundary phase
velocity picks up exactly mass/(x - x_k)^2 per atom and the angular-derivative,
S_ell and boundary kernel-norm formulas stay mutually consistent.

Real-axis evaluation returns the nontangential limit from above; points where a
factor is genuinely singular (atom locations, declared accumulation points of
Blaschke zeros, jump knots of the outer profile) raise
BoundaryEvaluationAtSingularity instead of guessing a limit.

All values are immutable after construction and every operation is pure;
evaluation accepts scalars or numpy arrays.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BoundaryEvaluationAtSingularity,
    NotInner,
    NotMeromorphicInner,
)
from .quadrature import integrate_adaptive

_MODULUS_SLACK = 1e-12


def _as_complex_array(z):
    arr = np.asarray(z, dtype=complex)
    return arr, arr.shape == ()


class SchurFunction:
    """Common base; concrete variants implement _eval_array."""

    def eval(self, z):
        """Evaluate at z (scalar or array); Im z >= 0 required."""
        arr, scalar = _as_complex_array(z)
        if np.any(arr.imag < 0):
            raise ValueError("evaluation requires Im z >= 0")
        out = self._eval_array(arr)
        return complex(out) if scalar else out

    __call__ = eval

    def _eval_array(self, z):
        raise NotImplementedError


@dataclass(frozen=True)
class BlaschkeProduct(SchurFunction):
    """Finite Blaschke product; `accumulation` declares real limit points of the
    (conceptually infinite) zero sequence for spectrum purposes."""

    zeros: tuple = ()
    phases: tuple = ()
    accumulation: tuple = ()

    def __post_init__(self):
        zeros = tuple(complex(z) for z in self.zeros)
        phases = tuple(float(p) for p in self.phases) if self.phases else (0.0,) * len(zeros)
        if len(phases) != len(zeros):
            raise ValueError("phases must match zeros")
        for z in zeros:
            if not z.imag > 0:
                raise ValueError(f"Blaschke zero {z} must have Im > 0")
        for p in phases:
            if not math.isfinite(p):
                raise ValueError("phases must be finite")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "accumulation", tuple(float(x) for x in self.accumulation))

    def _eval_array(self, z):
        for x in self.accumulation:
            if np.any((z.imag == 0) & (z.real == x)):
                raise BoundaryEvaluationAtSingularity(
                    f"declared zero accumulation point at {x}")
        out = np.ones_like(z)
        for z0, alpha in zip(self.zeros, self.phases):
            out = out * np.exp(1j * alpha) * (z - z0) / (z - np.conj(z0))
        return out


@dataclass(frozen=True)
class SingularInner(SchurFunction):
    """exp(iaz) times finitely many atomic singular factors."""

    a: float = 0.0
    atoms: tuple = ()

    def __post_init__(self):
        a = float(self.a)
        if a < 0:
            raise ValueError("mass at infinity must be >= 0")
        atoms = tuple((float(x), float(m)) for x, m in self.atoms)
        for x, m in atoms:
            if m <= 0:
                raise ValueError(f"atom mass at {x} must be > 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "atoms", atoms)

    def _eval_array(self, z):
        expo = 1j * self.a * z
        for x, m in self.atoms:
            if np.any((z.imag == 0) & (z.real == x)):
                raise BoundaryEvaluationAtSingularity(f"singular atom at {x}")
            expo = expo - 1j * m * (1.0 / (z - x) + x / (x * x + 1.0))
        return np.exp(expo)


@dataclass(frozen=True)
class Outer(SchurFunction):
    """Outer factor from a piecewise-linear log-modulus profile.

    L interpolates (knots, values) linearly and vanishes outside
    [knots[0], knots[-1]]; values <= 0 so |O| <= 1.  A nonzero value at an
    outermost knot is a jump of L; evaluating exactly there raises.
    """

    knots: tuple
    values: tuple
    _phase_const: float = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        knots = tuple(float(x) for x in self.knots)
        values = tuple(float(v) for v in self.values)
        if len(knots) != len(values) or len(knots) < 2:
            raise ValueError("profile needs matching knots/values, at least two")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError("knots must be strictly increasing")
        if any(v > 0 for v in values):
            raise ValueError("log-modulus values must be <= 0")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        const = 0.0
        for t0, t1, alpha, beta in self._segments():
            # int_{t0}^{t1} t L(t)/(t^2+1) dt, a z-independent phase
            const += 0.5 * alpha * math.log((t1 * t1 + 1.0) / (t0 * t0 + 1.0))
            const += beta * ((t1 - t0) - (math.atan(t1) - math.atan(t0)))
        object.__setattr__(self, "_phase_const", const)

    def _segments(self):
        """Yield (t0, t1, alpha, beta) with L(t) = alpha + beta*t on [t0, t1]."""
        for (t0, v0), (t1, v1) in zip(zip(self.knots, self.values),
                                      zip(self.knots[1:], self.values[1:])):
            beta = (v1 - v0) / (t1 - t0)
            alpha = v0 - beta * t0
            yield t0, t1, alpha, beta

    def log_modulus(self, t):
        """L(t) on the real line (vectorized)."""
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.knots, self.values, left=0.0, right=0.0)

    def _jump_knots(self):
        """Knots where L is discontinuous (support edge with nonzero value)."""
        out = []
        if self.values[0] != 0.0:
            out.append(self.knots[0])
        if self.values[-1] != 0.0:
            out.append(self.knots[-1])
        return out

    def _herglotz(self, z):
        """(i/pi) int (1/(z-t) + t/(t^2+1)) L(t) dt, closed form per segment."""
        total = np.zeros_like(z)
        # signed +0 imaginary part selects the limit from C+ for real z
        zc = z + 0.0j
        on_axis = zc.imag == 0
        jumps = self._jump_knots()
        for t0, t1, alpha, beta in self._segments():
            coeff = alpha + beta * zc
            for t_end, sign in ((t0, 1.0), (t1, -1.0)):
                d = zc - t_end
                hit = on_axis & (d == 0)
                if np.any(hit):
                    if t_end in jumps:
                        raise BoundaryEvaluationAtSingularity(
                            f"outer profile jumps at knot {t_end}")
                    # continuous knot: the singular log terms of the two
                    # adjacent segments cancel, so each may be dropped
                    d = np.where(hit, 1.0, d)
                total = total + sign * coeff * np.log(d)
            total = total - beta * (t1 - t0)
        return (1j / math.pi) * (total + self._phase_const)

    def _eval_array(self, z):
        return np.exp(self._herglotz(z))


@dataclass(frozen=True)
class Constant(SchurFunction):
    c: complex = 0.0

    def __post_init__(self):
        c = complex(self.c)
        if abs(c) > 1.0 + _MODULUS_SLACK:
            raise ValueError("constant must have |c| <= 1")
        object.__setattr__(self, "c", c)

    def _eval_array(self, z):
        return np.full_like(z, self.c)


@dataclass(frozen=True)
class Product(SchurFunction):
    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        for f in factors:
            if not isinstance(f, SchurFunction):
                raise ValueError("product factors must be SchurFunction instances")
        object.__setattr__(self, "factors", factors)

    def _eval_array(self, z):
        out = np.ones_like(z)
        for f in self.factors:
            out = out * f._eval_array(z)
        return out


# ---------------------------------------------------------------------------
# flattening and classification


@dataclass(frozen=True)
class FlatSymbol:
    """Factored data of a symbol with products expanded."""

    constant: complex
    a: float
    zeros: tuple
    phases: tuple
    accumulation: tuple
    atoms: tuple
    outers: tuple

    @property
    def is_zero(self):
        return self.constant == 0

    @property
    def has_outer_part(self):
        return any(any(v != 0 for v in o.values) for o in self.outers)

    @property
    def is_inner(self):
        return (abs(abs(self.constant) - 1.0) <= _MODULUS_SLACK
                and not self.has_outer_part)


def flatten(b: SchurFunction) -> FlatSymbol:
    constant = 1.0 + 0.0j
    a = 0.0
    zeros, phases, accumulation, atoms, outers = [], [], [], [], []

    def walk(f):
        nonlocal constant, a
        if isinstance(f, Product):
            for g in f.factors:
                walk(g)
        elif isinstance(f, BlaschkeProduct):
            zeros.extend(f.zeros)
            phases.extend(f.phases)
            accumulation.extend(f.accumulation)
        elif isinstance(f, SingularInner):
            a += f.a
            atoms.extend(f.atoms)
        elif isinstance(f, Outer):
            outers.append(f)
        elif isinstance(f, Constant):
            constant *= f.c
        else:
            raise TypeError(f"unknown symbol variant {type(f)!r}")

    walk(b)
    return FlatSymbol(constant, a, tuple(zeros), tuple(phases),
                      tuple(accumulation), tuple(atoms), tuple(outers))


def require_inner(b: SchurFunction) -> FlatSymbol:
    flat = flatten(b)
    if not flat.is_inner:
        raise NotInner("symbol has an outer factor or a non-unimodular constant")
    return flat


def require_meromorphic_inner(b: SchurFunction) -> FlatSymbol:
    flat = require_inner(b)
    if flat.atoms:
        raise NotMeromorphicInner("singular atoms present")
    return flat


# ---------------------------------------------------------------------------
# boundary quantities


def _outer_quadratic_integral(outer: Outer, x0: float, ell: int):
    """int |L(t)| / |x0 - t|^ell dt over the profile support, exactly.

    Returns +inf when the integral diverges at x0 (profile nonzero there, or a
    linear zero-touch with ell >= 2).
    """
    total = 0.0
    for t0, t1, alpha, beta in outer._segments():
        v0 = alpha + beta * t0
        v1 = alpha + beta * t1
        if v0 == 0.0 and v1 == 0.0:
            continue
        if t0 < x0 < t1:
            return math.inf
        if x0 == t0 or x0 == t1:
            if alpha + beta * x0 != 0.0:
                return math.inf
            if ell >= 2:
                return math.inf
        # |L| = -(alpha + beta t); substitute u = t - x0, constant sign per segment
        ap = -(alpha + beta * x0)
        bp = -beta

        def antideriv(u):
            # int |u|^-ell du and int u |u|^-ell du, evaluated at u
            if u == 0.0:
                return 0.0  # reached only for a zero-touch with ell == 1
            au = abs(u)
            if ell == 1:
                i0 = math.log(au) if u > 0 else -math.log(au)
            else:
                i0 = au ** (1 - ell) / ((1 - ell) if u > 0 else (ell - 1))
            i1 = math.log(au) if ell == 2 else au ** (2 - ell) / (2 - ell)
            return ap * i0 + bp * i1

        total += antideriv(t1 - x0) - antideriv(t0 - x0)
    return total


def s_ell(b: SchurFunction, x0: float, ell: int) -> float:
    """Admissibility functional S_ell(x0): Blaschke, atomic and outer terms.

    Exact sums for the zero/atom parts, closed-form segment integrals for the
    outer part; +inf is a value, not an error.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    x0 = float(x0)
    flat = flatten(b)
    if flat.is_zero or abs(flat.constant) < 1.0 - _MODULUS_SLACK:
        return math.inf  # |log|b|| is bounded below away from 0 on all of R
    if any(x == x0 for x, _ in flat.atoms):
        return math.inf
    outer_parts = []
    for outer in flat.outers:
        part = _outer_quadratic_integral(outer, x0, ell)
        if math.isinf(part):
            return math.inf
        outer_parts.append(part)
    # exactly rounded per factor class, then across classes
    return math.fsum((
        math.fsum(z.imag / abs(x0 - z) ** ell for z in flat.zeros),
        math.fsum(m / abs(x0 - x) ** ell for x, m in flat.atoms),
        math.fsum(outer_parts),
    ))


def boundary_phase_derivative(b: SchurFunction, x: float) -> float:
    """Boundary derivative modulus |b'(x)| of a symbol of unimodulus at x.

    a + sum 2 Im z/|x-z|^2 + sum mass/|x-x_k|^2 + (1/pi) int |L(t)|/(x-t)^2 dt;
    +inf at atoms or where the outer integral diverges.
    """
    x = float(x)
    flat = flatten(b)
    if any(x_k == x for x_k, _ in flat.atoms):
        return math.inf
    outer_parts = []
    for outer in flat.outers:
        part = _outer_quadratic_integral(outer, x, 2)
        if math.isinf(part):
            return math.inf
        outer_parts.append(part / math.pi)
    return math.fsum((
        flat.a,
        math.fsum(2.0 * z.imag / abs(x - z) ** 2 for z in flat.zeros),
        math.fsum(m / (x - x_k) ** 2 for x_k, m in flat.atoms),
        math.fsum(outer_parts),
    ))


def angular_derivative(theta: SchurFunction, x: float) -> float:
    """|Theta'(x)| for inner Theta; +inf at atoms."""
    require_inner(theta)
    return boundary_phase_derivative(theta, x)


def angular_derivative_array(theta: SchurFunction, t) -> np.ndarray:
    """Vectorized |Theta'| on a real array, away from atoms."""
    flat = require_inner(theta)
    t = np.asarray(t, dtype=float)
    total = np.full_like(t, flat.a)
    for z in flat.zeros:
        total += 2.0 * z.imag / ((t - z.real) ** 2 + z.imag ** 2)
    for x_k, m in flat.atoms:
        total += m / (t - x_k) ** 2
    return total


@dataclass(frozen=True)
class InnerSpectrum:
    """Real trace of sigma(Theta) plus the point-at-infinity flag."""

    real_points: tuple
    includes_infinity: bool


def spectrum(theta: SchurFunction) -> InnerSpectrum:
    flat = require_inner(theta)
    pts = sorted({x for x, _ in flat.atoms} | set(flat.accumulation))
    return InnerSpectrum(tuple(pts), flat.a > 0)


def spectrum_distance(theta: SchurFunction, x: float) -> float:
    """d0(x) = dist(x, real trace of sigma(Theta)); dist(x, {inf}) = +inf."""
    spec = spectrum(theta)
    if not spec.real_points:
        return math.inf
    return min(abs(float(x) - p) for p in spec.real_points)


@dataclass(frozen=True)
class BoundaryAdmissibility:
    """S_ell values and the E_2/E_4 membership flags at a real point."""

    x0: float
    s_values: dict
    in_e2: bool
    in_e4: bool


def boundary_admissibility(b: SchurFunction, x0: float,
                           ells=(2, 4)) -> BoundaryAdmissibility:
    s_values = {ell: s_ell(b, x0, ell) for ell in ells}
    return BoundaryAdmissibility(
        float(x0), s_values,
        in_e2=math.isfinite(s_values.get(2, math.inf)),
        in_e4=math.isfinite(s_values.get(4, math.inf)),
    )


# ---------------------------------------------------------------------------
# sublevel sets and argument


@dataclass(frozen=True)
class GridSpec:
    """Rectangle (x_min, x_max) x (y_min, y_max) sampled at `step`; y_min > 0."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    step: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min > 0):
            raise ValueError("grid rectangle must sit strictly inside C+")
        if self.step <= 0:
            raise ValueError("step must be positive")


def sublevel_connected(theta: SchurFunction, delta: float, grid: GridSpec) -> bool:
    """Flood-fill verdict on connectivity of {|Theta| < delta} sampled on `grid`.

    Heuristic by construction: the answer depends on grid resolution.  The empty
    sampled set counts as connected.
    """
    require_inner(theta)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    xs = np.arange(grid.x_min, grid.x_max + grid.step / 2, grid.step)
    ys = np.arange(grid.y_min, grid.y_max + grid.step / 2, grid.step)
    zz = xs[None, :] + 1j * ys[:, None]
    mask = np.abs(theta.eval(zz)) < delta
    total = int(mask.sum())
    if total == 0:
        return True
    start = tuple(np.argwhere(mask)[0])
    seen = np.zeros_like(mask)
    seen[start] = True
    queue = deque([start])
    count = 1
    rows, cols = mask.shape
    while queue:
        i, j = queue.popleft()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ni, nj = i + di, j + dj
            if 0 <= ni < rows and 0 <= nj < cols and mask[ni, nj] and not seen[ni, nj]:
                seen[ni, nj] = True
                count += 1
                queue.append((ni, nj))
    return count == total


def argument_phi(theta: SchurFunction, x_ref: float, x: float,
                 rel_tol: float = 1e-11) -> float:
    """phi(x) - phi(x_ref) for meromorphic inner Theta, phi' = |Theta'| on R.

    Adaptive quadrature of the angular derivative; strictly increasing in x.
    """
    require_meromorphic_inner(theta)
    x_ref = float(x_ref)
    x = float(x)
    if x == x_ref:
        return 0.0
    lo, hi = (x_ref, x) if x > x_ref else (x, x_ref)
    val = integrate_adaptive(lambda t: angular_derivative_array(theta, t),
                             lo, hi, rel_tol=rel_tol)
    return float(val) if x > x_ref else -float(val)


# ---------------------------------------------------------------------------
# serialization


def to_dict(b: SchurFunction) -> dict:
    if isinstance(b, BlaschkeProduct):
        d = {"type": "blaschke",
             "zeros": [[z.real, z.imag] for z in b.zeros],
             "phases": list(b.phases)}
        if b.accumulation:
            d["accumulation"] = list(b.accumulation)
        return d
    if isinstance(b, SingularInner):
        return {"type": "singular", "a": b.a,
                "atoms": [[x, m] for x, m in b.atoms]}
    if isinstance(b, Outer):
        return {"type": "outer",
                "profile": {"knots": list(b.knots), "values": list(b.values)}}
    if isinstance(b, Constant):
        return {"type": "constant", "c": [b.c.real, b.c.imag]}
    if isinstance(b, Product):
        return {"type": "product", "factors": [to_dict(f) for f in b.factors]}
    raise TypeError(f"unknown symbol variant {type(b)!r}")


def from_dict(d: dict) -> SchurFunction:
    kind = d.get("type")
    if kind == "blaschke":
        zeros = [complex(re, im) for re, im in d.get("zeros", [])]
        return BlaschkeProduct(zeros=tuple(zeros),
                               phases=tuple(d.get("phases", ())),
                               accumulation=tuple(d.get("accumulation", ())))
    if kind == "singular":
        return SingularInner(a=d.get("a", 0.0),
                             atoms=tuple((x, m) for x, m in d.get("atoms", [])))
    if kind == "outer":
        prof = d["profile"]
        return Outer(knots=tuple(prof["knots"]), values=tuple(prof["values"]))
    if kind == "constant":
        re, im = d["c"]
        return Constant(complex(re, im))
    if kind == "product":
        return Product(tuple(from_dict(f) for f in d["factors"]))
    raise ValueError(f"unknown symbol type {kind!r}")
