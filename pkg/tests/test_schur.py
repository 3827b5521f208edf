import math

import numpy as np
import pytest

from aobkit import schur
from aobkit.errors import (
    BoundaryEvaluationAtSingularity,
    NotInner,
    NotMeromorphicInner,
)

from conftest import random_blaschke, random_meromorphic_inner, random_schur
from oracles import herglotz_outer_oracle

THETA1 = schur.SingularInner(a=1.0)
BOX_OUTER = schur.Outer(knots=(-1.0, 1.0), values=(-1.0, -1.0))


class TestEval:
    def test_singular_at_i(self):
        assert schur.SingularInner(a=1.0).eval(1j) == pytest.approx(math.exp(-1))

    def test_blaschke_vanishes_at_zero(self):
        b = schur.BlaschkeProduct(zeros=(2 + 3j,))
        assert abs(b.eval(2 + 3j)) == 0.0

    def test_outer_box_at_i(self):
        # closed-form check: log((i+1)/(i-1)) = -i pi/2 makes the value real
        assert BOX_OUTER.eval(1j) == pytest.approx(math.exp(-0.5))

    def test_outer_matches_quadrature_oracle(self, rng):
        for _ in range(6):
            k = int(rng.integers(2, 5))
            knots = np.sort(rng.uniform(-2, 2, size=k))
            while np.any(np.diff(knots) <= 1e-3):
                knots = np.sort(rng.uniform(-2, 2, size=k))
            outer = schur.Outer(knots=tuple(knots),
                                values=tuple(-rng.uniform(0, 2, size=k)))
            z = complex(rng.uniform(-2, 2), rng.uniform(0.2, 2))
            assert outer.eval(z) == pytest.approx(
                complex(herglotz_outer_oracle(outer, z)), abs=1e-10)

    def test_boundary_outer_modulus(self):
        # inside the support the boundary modulus is e^{L(x)}
        assert abs(BOX_OUTER.eval(0.3)) == pytest.approx(math.exp(-1.0), rel=1e-12)
        assert abs(BOX_OUTER.eval(5.0)) == pytest.approx(1.0, rel=1e-12)

    def test_modulus_bounded_on_random_grid(self, rng):
        zs = (rng.uniform(-10, 10, size=(10, 1000))
              + 1j * rng.uniform(1e-3, 10, size=(10, 1000)))
        for row in range(10):
            b = random_schur(rng)
            vals = b.eval(zs[row])
            assert np.abs(vals).max() <= 1 + 1e-12

    def test_inner_unimodular_on_boundary(self, rng):
        for _ in range(10):
            theta = random_meromorphic_inner(rng)
            xs = rng.uniform(-20, 20, size=200)
            assert np.abs(np.abs(theta.eval(xs + 0j)) - 1).max() <= 1e-10

    def test_lower_half_plane_rejected(self):
        with pytest.raises(ValueError):
            THETA1.eval(1 - 1j)

    def test_atom_location_raises(self):
        atom = schur.SingularInner(atoms=((0.5, 1.0),))
        with pytest.raises(BoundaryEvaluationAtSingularity):
            atom.eval(0.5)

    def test_declared_accumulation_raises(self):
        b = schur.BlaschkeProduct(zeros=(1 + 0.1j,), accumulation=(1.0,))
        with pytest.raises(BoundaryEvaluationAtSingularity):
            b.eval(1.0)

    def test_outer_jump_knot_raises(self):
        with pytest.raises(BoundaryEvaluationAtSingularity):
            BOX_OUTER.eval(1.0)

    def test_outer_zero_touch_knot_ok(self):
        tent = schur.Outer(knots=(-1.0, 0.0, 1.0), values=(0.0, -1.0, 0.0))
        val = tent.eval(1.0)
        assert abs(val) == pytest.approx(1.0, rel=1e-12)
        # interior knot with matching values is fine too
        assert abs(tent.eval(0.0)) == pytest.approx(math.exp(-1.0), rel=1e-12)


class TestValidation:
    def test_blaschke_zero_in_lower_half(self):
        with pytest.raises(ValueError):
            schur.BlaschkeProduct(zeros=(1 - 1j,))

    def test_negative_atom_mass(self):
        with pytest.raises(ValueError):
            schur.SingularInner(atoms=((0.0, -1.0),))

    def test_negative_mass_at_infinity(self):
        with pytest.raises(ValueError):
            schur.SingularInner(a=-0.1)

    def test_positive_outer_profile(self):
        with pytest.raises(ValueError):
            schur.Outer(knots=(0.0, 1.0), values=(0.1, -1.0))

    def test_constant_modulus(self):
        with pytest.raises(ValueError):
            schur.Constant(1.5)


class TestSEll:
    def test_single_atom(self):
        atom = schur.SingularInner(atoms=((0.0, 1.0),))
        assert schur.s_ell(atom, 2.0, 2) == pytest.approx(0.25)

    def test_single_zero(self):
        b = schur.BlaschkeProduct(zeros=(1j,))
        assert schur.s_ell(b, 0.0, 2) == pytest.approx(1.0)

    def test_outer_divergence(self):
        assert schur.s_ell(BOX_OUTER, 0.0, 2) == math.inf

    def test_discrete_terms_exact(self, rng):
        zeros = [complex(rng.uniform(-2, 2), rng.uniform(0.1, 2)) for _ in range(5)]
        atoms = [(float(rng.uniform(-2, 2)), float(rng.uniform(0.1, 2)))
                 for _ in range(3)]
        b = schur.Product((schur.BlaschkeProduct(zeros=tuple(zeros)),
                           schur.SingularInner(atoms=tuple(atoms))))
        for ell in (1, 2, 3, 4):
            x0 = 5.3
            by_hand = math.fsum(
                [math.fsum(z.imag / abs(x0 - z) ** ell for z in zeros),
                 math.fsum(m / abs(x0 - x) ** ell for x, m in atoms), 0.0])
            assert schur.s_ell(b, x0, ell) == by_hand

    def test_atom_location_is_infinite(self):
        atom = schur.SingularInner(atoms=((0.0, 1.0),))
        assert schur.s_ell(atom, 0.0, 2) == math.inf

    def test_small_constant_everywhere_infinite(self):
        assert schur.s_ell(schur.Constant(0.5), 1.0, 2) == math.inf

    def test_outer_ell1_converges_off_support(self):
        val = schur.s_ell(BOX_OUTER, 3.0, 1)
        # int_{-1}^{1} 1/(3 - t) dt = log 2
        assert val == pytest.approx(math.log(2.0), rel=1e-12)


class TestAngularDerivative:
    def test_pure_exponential(self):
        assert schur.angular_derivative(schur.SingularInner(a=2.0), 11.7) == 2.0

    def test_single_zero(self):
        assert schur.angular_derivative(
            schur.BlaschkeProduct(zeros=(1j,)), 0.0) == pytest.approx(2.0)

    def test_mixed_sum(self):
        theta = schur.Product((
            schur.BlaschkeProduct(zeros=(1j, 1 + 1j)),
            schur.SingularInner(atoms=((3.0, 0.5),)),
        ))
        expected = 2.0 + 2.0 / 2.0 + 0.5 / 9.0
        assert schur.angular_derivative(theta, 0.0) == pytest.approx(expected)

    def test_atom_is_infinite(self):
        theta = schur.SingularInner(atoms=((1.0, 2.0),))
        assert schur.angular_derivative(theta, 1.0) == math.inf

    def test_not_inner(self):
        with pytest.raises(NotInner):
            schur.angular_derivative(BOX_OUTER, 0.0)
        with pytest.raises(NotInner):
            schur.angular_derivative(schur.Constant(0.5), 0.0)

    def test_matches_finite_difference(self, rng):
        h = 1e-6
        for _ in range(20):
            theta = random_meromorphic_inner(rng)
            x = float(rng.uniform(-3, 3))
            fd = abs(theta.eval(x + h) - theta.eval(x - h)) / (2 * h)
            exact = schur.angular_derivative(theta, x)
            assert fd == pytest.approx(exact, rel=1e-4)


class TestSpectrum:
    def test_pure_exponential_spectrum_at_infinity(self):
        assert schur.spectrum_distance(THETA1, 5.0) == math.inf
        assert schur.spectrum(THETA1).includes_infinity

    def test_atom(self):
        theta = schur.SingularInner(atoms=((0.0, 1.0),))
        assert schur.spectrum_distance(theta, 3.0) == pytest.approx(3.0)

    def test_finite_blaschke_empty_real_trace(self):
        b = schur.BlaschkeProduct(zeros=(1j, 2 + 0.5j))
        spec = schur.spectrum(b)
        assert spec.real_points == ()
        assert not spec.includes_infinity

    def test_declared_accumulation(self):
        zeros = tuple(1 + 1j / n ** 2 for n in range(1, 51))
        b = schur.BlaschkeProduct(zeros=zeros, accumulation=(1.0,))
        assert schur.spectrum_distance(b, 0.0) == pytest.approx(1.0)


class TestSublevel:
    GRID = schur.GridSpec(-10.0, 10.0, 0.05, 5.0, 0.05)

    def test_half_plane_connected(self):
        assert schur.sublevel_connected(THETA1, 0.5, self.GRID)

    def test_two_separated_disks(self):
        theta = schur.BlaschkeProduct(zeros=(0.05j, 20 + 0.05j))
        grid = schur.GridSpec(-1.0, 21.0, 0.005, 0.2, 0.005)
        assert not schur.sublevel_connected(theta, 0.3, grid)

    def test_empty_set_convention(self):
        grid = schur.GridSpec(-1.0, 1.0, 0.5, 1.0, 0.1)
        assert schur.sublevel_connected(THETA1, 1e-6, grid)


class TestArgument:
    def test_linear_phase(self):
        assert schur.argument_phi(schur.SingularInner(a=2.0), 0.0, 3.0) \
            == pytest.approx(6.0, abs=1e-10)

    def test_zero_length(self):
        assert schur.argument_phi(schur.BlaschkeProduct(zeros=(1j,)), 0.0, 0.0) == 0.0

    def test_full_blaschke_winding(self):
        T = 1e6
        got = schur.argument_phi(schur.BlaschkeProduct(zeros=(1j,)), -T, T)
        assert got == pytest.approx(2 * (math.atan(T) - math.atan(-T)), rel=1e-10)
        assert got == pytest.approx(2 * math.pi, rel=1e-5)

    def test_quadrature_matches_arctangent_oracle(self, rng):
        for _ in range(10):
            theta = random_meromorphic_inner(rng)
            flat = schur.flatten(theta)
            x0, x1 = sorted(rng.uniform(-4, 4, size=2))
            closed = flat.a * (x1 - x0) + sum(
                2 * (math.atan((x1 - z.real) / z.imag)
                     - math.atan((x0 - z.real) / z.imag)) for z in flat.zeros)
            assert schur.argument_phi(theta, x0, x1) == pytest.approx(
                closed, rel=1e-9, abs=1e-10)

    def test_monotone_and_additive(self, rng):
        theta = random_meromorphic_inner(rng, max_zeros=3)
        pts = np.sort(rng.uniform(-3, 3, size=4))
        vals = [schur.argument_phi(theta, pts[0], x) for x in pts]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        ab = schur.argument_phi(theta, pts[0], pts[1])
        bc = schur.argument_phi(theta, pts[1], pts[2])
        ac = schur.argument_phi(theta, pts[0], pts[2])
        assert ab + bc == pytest.approx(ac, abs=1e-10)

    def test_atoms_rejected(self):
        theta = schur.SingularInner(atoms=((0.0, 1.0),))
        with pytest.raises(NotMeromorphicInner):
            schur.argument_phi(theta, 1.0, 2.0)


class TestSerialization:
    def test_roundtrip_all_variants(self, rng):
        symbols = [
            schur.BlaschkeProduct(zeros=(1 + 2j, -0.5 + 0.25j), phases=(0.1, 2.2),
                                  accumulation=(4.0,)),
            schur.SingularInner(a=0.7, atoms=((0.0, 1.0), (2.5, 0.3))),
            schur.Outer(knots=(-1.0, 0.5, 2.0), values=(0.0, -1.5, 0.0)),
            schur.Constant(0.3 - 0.4j),
        ]
        symbols.append(schur.Product(tuple(symbols)))
        for b in symbols:
            again = schur.from_dict(schur.to_dict(b))
            z = 0.3 + 1.7j
            assert again.eval(z) == pytest.approx(b.eval(z), rel=1e-14)

    def test_unknown_type(self):
        with pytest.raises(ValueError):
            schur.from_dict({"type": "mystery"})
