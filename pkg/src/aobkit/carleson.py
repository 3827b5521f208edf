"""Carleson constants of finite atom + segment measures in the closed half-plane.

The constant is sup over squares S(x, h) = [x, x+h] x [0, h] (lower side on R)
of nu(S)/h.  Against a finite configuration the ratio is piecewise
alpha + beta/h in h for any fixed edge-alignment rule, hence monotone between
breakpoints, so the supremum is attained on a finite candidate family:

  heights   - every feature ordinate, every pairwise gap of feature abscissas,
              and the crossing heights where a segment's clipping pattern
              changes for some alignment (pairraise of the linear-in-h
              constraint boundaries);
  positions - left or right square edge at a feature abscissa or at the
              segment crossings with y = 0 and y = h.

Atoms sitting on R make the constant infinite (arbitrarily small squares
contain them).  Segment-square intersections are clipped in closed form,
never discretized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CarlesonMeasure:
    """Atoms (point, mass > 0) and unit-density arclength segments in closed C+."""

    atoms: tuple = ()
    segments: tuple = ()

    def __post_init__(self):
        atoms = tuple((complex(p), float(m)) for p, m in self.atoms)
        for p, m in atoms:
            if p.imag < 0:
                raise ValueError(f"atom {p} below the real axis")
            if m <= 0:
                raise ValueError(f"atom mass at {p} must be > 0")
        segs = tuple((complex(a), complex(b)) for a, b in self.segments)
        for a, b in segs:
            if a.imag < 0 or b.imag < 0:
                raise ValueError("segment endpoints must have Im >= 0")
            if a == b:
                raise ValueError("degenerate segment")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "segments", segs)

    @property
    def is_empty(self):
        return not self.atoms and not self.segments

    def total_mass(self):
        return (sum(m for _, m in self.atoms)
                + sum(abs(b - a) for a, b in self.segments))


def measure_to_dict(nu: CarlesonMeasure) -> dict:
    return {"atoms": [[p.real, p.imag, m] for p, m in nu.atoms],
            "segments": [[a.real, a.imag, b.real, b.imag]
                         for a, b in nu.segments]}


def measure_from_dict(d: dict) -> CarlesonMeasure:
    atoms = tuple((complex(re, im), m) for re, im, m in d.get("atoms", []))
    segs = tuple((complex(r1, i1), complex(r2, i2))
                 for r1, i1, r2, i2 in d.get("segments", []))
    return CarlesonMeasure(atoms, segs)


def square_mass(nu: CarlesonMeasure, x, h):
    """nu([x, x+h] x [0, h]) for paired arrays of left edges and sides."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    total = np.zeros(np.broadcast(x, h).shape)
    for p, m in nu.atoms:
        inside = (p.real >= x) & (p.real <= x + h) & (p.imag <= h)
        total = total + m * inside
    for a, b in nu.segments:
        total = total + _clip_length(a, b, x, h)
    return total


def _clip_length(a: complex, b: complex, x, h):
    """Arclength of [a, b] inside [x, x+h] x [0, h], Liang-Barsky style."""
    dx, dy = b.real - a.real, b.imag - a.imag
    length = math.hypot(dx, dy)
    lo = np.zeros(np.broadcast(x, h).shape)
    hi = np.ones_like(lo)

    # x + t dx in [left, right];  y + t dy in [0, h]
    if dx == 0.0:
        bad = (a.real < x) | (a.real > x + h)
        hi = np.where(bad, -1.0, hi)
    else:
        t1 = (x - a.real) / dx
        t2 = (x + h - a.real) / dx
        lo = np.maximum(lo, np.minimum(t1, t2))
        hi = np.minimum(hi, np.maximum(t1, t2))
    if dy == 0.0:
        bad = (a.imag < 0) | (a.imag > h)
        hi = np.where(bad, -1.0, hi)
    else:
        t1 = (0.0 - a.imag) / dy
        t2 = (h - a.imag) / dy
        lo = np.maximum(lo, np.minimum(t1, t2))
        hi = np.minimum(hi, np.maximum(t1, t2))
    return length * np.clip(hi - lo, 0.0, None)


def _segment_breakpoints(a: complex, b: complex, anchor: float, right_edge: bool):
    """Heights where the clip pattern of [a, b] can change for this alignment.

    The t-interval endpoints are linear functions of h; the pattern changes
    where two of them cross.
    """
    dx, dy = b.real - a.real, b.imag - a.imag
    # each boundary as (intercept, slope) of t(h) = intercept + slope*h
    lines = [(0.0, 0.0), (1.0, 0.0)]
    x_off = -1.0 if right_edge else 0.0  # left edge sits at anchor + x_off*h
    if dx != 0.0:
        lines.append(((anchor - a.real) / dx, x_off / dx))         # left edge
        lines.append(((anchor - a.real) / dx, (1.0 + x_off) / dx))  # right edge
    if dy != 0.0:
        lines.append((-a.imag / dy, 0.0))       # bottom
        lines.append((-a.imag / dy, 1.0 / dy))  # top
    out = []
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            (c1, s1), (c2, s2) = lines[i], lines[j]
            if s1 != s2:
                h = (c2 - c1) / (s1 - s2)
                if h > 0.0 and math.isfinite(h):
                    out.append(h)
    return out


def _alignment_abscissas(nu: CarlesonMeasure, h: float):
    """Candidate left/right edge abscissas for squares of side h."""
    xs = [p.real for p, _ in nu.atoms]
    for a, b in nu.segments:
        xs.extend((a.real, b.real))
        dy = b.imag - a.imag
        if dy != 0.0:
            for level in (0.0, h):
                t = (level - a.imag) / dy
                if 0.0 <= t <= 1.0:
                    xs.append(a.real + t * (b.real - a.real))
    return xs


def carleson_constant(nu: CarlesonMeasure) -> float:
    """Best constant in nu(S(x, h)) <= C h over the finite candidate family."""
    if nu.is_empty:
        return 0.0
    if any(p.imag == 0.0 for p, _ in nu.atoms):
        return math.inf

    feature_x = [p.real for p, _ in nu.atoms]
    heights = [p.imag for p, _ in nu.atoms]
    for a, b in nu.segments:
        feature_x.extend((a.real, b.real))
        heights.extend(y for y in (a.imag, b.imag) if y > 0.0)
    feature_x = sorted(set(feature_x))
    for i, xi in enumerate(feature_x):
        for xj in feature_x[i + 1:]:
            heights.append(xj - xi)
    for a, b in nu.segments:
        for anchor in feature_x:
            for right_edge in (False, True):
                heights.extend(_segment_breakpoints(a, b, anchor, right_edge))
    heights = np.unique([h for h in heights if h > 0.0])

    best = 0.0
    for h in heights:
        xs = _alignment_abscissas(nu, float(h))
        edges = np.asarray(sorted({*xs, *(x - h for x in xs)}))
        masses = square_mass(nu, edges, float(h))
        ratio = float(masses.max()) / float(h)
        if ratio > best:
            best = ratio
    return best
