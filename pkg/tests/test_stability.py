import math

import numpy as np
import pytest

from aobkit import kernels, schur, stability
from aobkit.errors import (
    GammaOutOfRange,
    SpectrumOnSegment,
    UnsupportedSymbol,
    WeightVanishesOnSegment,
)
from aobkit.quadrature import integrate_interval

from conftest import random_schur

P32 = stability.WeightParams(p=1.5)
THETA1 = schur.SingularInner(a=1.0)
B0 = schur.Constant(0.0)


def w_p_closed_form_b0(params, y=1.0):
    """w_p(iy) for b == 0 via int dt/(t^2+1)^q = sqrt(pi) Gamma(q-1/2)/Gamma(q)."""
    q = params.q
    moment = math.sqrt(math.pi) * math.gamma(q - 0.5) / math.gamma(q)
    norm_q = (4 * math.pi ** 2) ** -1 * moment ** (1.0 / q) * y ** ((1 - 2 * q) / q)
    return norm_q ** (-params.norm_exponent)


class TestWeightParams:
    def test_conjugate_exponent_identity(self):
        for p in (1.1, 1.5, 1.9):
            params = stability.WeightParams(p=p)
            assert abs(1.0 / params.p + 1.0 / params.q - 1.0) <= 1e-14

    def test_p_range(self):
        for bad in (1.0, 2.0, 0.5, 2.5):
            with pytest.raises(ValueError):
                stability.WeightParams(p=bad)


class TestWeight:
    def test_closed_form_b0(self):
        got = stability.weight_w_p(B0, 1j, P32)
        assert got == pytest.approx(w_p_closed_form_b0(P32), rel=1e-6)

    def test_scaling_b0(self):
        base = stability.weight_w_p(B0, 1j, P32)
        expo = (2 * P32.q - 1) * P32.p / (P32.q * (P32.p + 1))
        for y in (2.0, 5.0):
            got = stability.weight_w_p(B0, 1j * y, P32)
            assert got / base == pytest.approx(y ** expo, rel=1e-6)

    def test_inner_symbol_drops_second_term(self):
        # for inner b the weight must equal the first-term value alone
        z = 1j
        got = stability.weight_w_p(THETA1, z, P32)
        q = P32.q

        def first_term_integrand(t):
            k = kernels.kernel_eval(THETA1, z, np.asarray(t) + 0j)
            return np.abs(k) ** (2 * q)

        integral = integrate_interval(first_term_integrand, -60.0, 60.0,
                                      rel_tol=1e-10)
        assert got == pytest.approx(float(integral) ** (-P32.norm_exponent / q),
                                    rel=1e-4)

    def test_boundary_weight_zero_when_s4_infinite(self):
        outer = schur.Outer(knots=(-1.0, 1.0), values=(-1.0, -1.0))
        assert stability.weight_w_p(outer, kernels.boundary(0.0), P32) == 0.0

    def test_boundary_weight_positive_for_inner(self):
        assert stability.weight_w_p(THETA1, kernels.boundary(0.0), P32) > 0.0

    def test_atoms_unsupported(self):
        theta = schur.SingularInner(atoms=((0.0, 1.0),))
        with pytest.raises(UnsupportedSymbol):
            stability.weight_w_p(theta, 1j, P32)

    def test_rho_and_frak_kernel(self):
        outer = schur.Outer(knots=(-1.0, 1.0), values=(-1.0, -1.0))
        data = stability.boundary_data(outer)
        assert data.rho(0.0) == pytest.approx(1 - math.exp(-2.0), rel=1e-12)
        assert stability.rho(THETA1, 0.3) == pytest.approx(0.0, abs=1e-12)
        val = data.frak(1j, 0.0)
        b_i = outer.eval(1j)
        expected = np.conj(b_i) * (2 - np.conj(b_i) * outer.eval(0.0)) / (0.0 + 1j) ** 2
        assert val == pytest.approx(expected, rel=1e-12)


class TestLowerBoundRatio:
    def test_b0_at_i_reduces_to_weight(self):
        assert stability.lower_bound_ratio(B0, 1j, P32) \
            == pytest.approx(stability.weight_w_p(B0, 1j, P32), rel=1e-12)

    def test_two_grid_protocol(self):
        xs = np.linspace(-3.0, 3.0, 5)
        ys = np.linspace(0.1, 3.0, 4)
        cal = [stability.lower_bound_ratio(THETA1, complex(x, y), P32)
               for x in xs for y in ys]
        assert min(cal) > 0.0
        xs_b = np.linspace(-2.7, 2.7, 6)
        ys_b = np.linspace(0.2, 2.8, 5)
        ver = [stability.lower_bound_ratio(THETA1, complex(x, y), P32)
               for x in xs_b for y in ys_b]
        assert min(ver) >= 0.9 * min(cal)


class TestV0:
    def test_pure_exponential(self):
        assert stability.v0(THETA1, 123.0) == 1.0

    def test_single_zero(self):
        assert stability.v0(schur.BlaschkeProduct(zeros=(1j,)), 0.0) == 0.5

    def test_atom(self):
        theta = schur.SingularInner(atoms=((0.0, 1.0),))
        assert stability.v0(theta, 2.0) == pytest.approx(2.0)


class TestEpsilonSegment:
    def test_empty_segment(self):
        assert stability.epsilon_segment(THETA1, 1j, 1j, P32) == 0.0

    def test_b0_closed_form(self):
        d = 0.1
        got = stability.epsilon_segment(B0, 1j, 1j + d, P32)
        w = w_p_closed_form_b0(P32)
        expected = d * w ** -2 / (1 / (4 * math.pi))
        assert got == pytest.approx(expected, rel=1e-6)

    def test_linear_decay_under_halving(self, rng):
        for _ in range(3):
            b = random_schur(rng)
            lam = complex(rng.uniform(-1, 1), rng.uniform(0.5, 1.5))
            direction = complex(rng.uniform(-1, 1), rng.uniform(-0.1, 0.3))
            direction /= abs(direction)
            full = stability.epsilon_segment(b, lam, lam + 0.2 * direction, P32)
            half = stability.epsilon_segment(b, lam, lam + 0.1 * direction, P32)
            assert 0.45 <= half / full <= 0.55

    def test_weight_vanishes_raises(self):
        outer = schur.Outer(knots=(-1.0, 1.0), values=(-1.0, -1.0))
        with pytest.raises(WeightVanishesOnSegment):
            stability.epsilon_segment(outer, kernels.boundary(0.0),
                                      kernels.boundary(0.5), P32)


class TestPseudoHyperbolic:
    def test_coincident(self):
        assert stability.pseudo_hyperbolic(1j, 1j) == 0.0
        assert stability.ratio_bounds(0.0) == (1.0, 1.0)

    def test_spec_pair(self):
        assert stability.pseudo_hyperbolic(1j, 3j) == pytest.approx(0.5)
        lo, hi = stability.ratio_bounds(0.5)
        assert lo == pytest.approx(1.0 / 3.0)
        assert hi == pytest.approx(3.0)

    def test_schwarz_pick_distortion(self, rng):
        count = 0
        while count < 40:
            b = random_schur(rng)
            lam = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.0))
            delta = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
            mu = lam + 0.15 * lam.imag * delta
            if mu.imag <= 0:
                continue
            eps = stability.pseudo_hyperbolic(lam, mu)
            if eps > 0.2:
                continue
            m_lam, m_mu = abs(b.eval(lam)), abs(b.eval(mu))
            if 1 - m_mu < 1e-12:
                continue
            lo, hi = stability.ratio_bounds(eps)
            ratio = (1 - m_lam) / (1 - m_mu)
            assert lo - 1e-12 <= ratio <= hi + 1e-12
            count += 1

    def test_norm_ratio_lemma(self, rng):
        # pairs obeying |lam - mu| <= eps Im lam with eps <= 0.2
        for _ in range(40):
            b = random_schur(rng)
            lam = complex(rng.uniform(-2, 2), rng.uniform(0.3, 2.0))
            eps = float(rng.uniform(0.01, 0.2))
            angle = rng.uniform(0, 2 * math.pi)
            mu = lam + eps * lam.imag * complex(math.cos(angle), math.sin(angle))
            im_ratio = mu.imag / lam.imag
            assert 1 - eps - 1e-12 <= im_ratio <= 1 + eps + 1e-12
            m_lam, m_mu = abs(b.eval(lam)), abs(b.eval(mu))
            if 1 - m_mu < 1e-12:
                continue
            lo, hi = stability.ratio_bounds(eps)
            assert lo - 1e-12 <= (1 - m_lam) / (1 - m_mu) <= hi + 1e-12


class TestCor36:
    def test_identical_sequences(self):
        lams = [1j, 2j, 1 + 1j]
        out = stability.cor36_predicate(THETA1, lams, lams, 0.5, 0.1)
        assert all(v.ok and v.chain_ok for v in out)

    def test_boundary_equality_case(self):
        gamma, eps = 0.5, 0.1
        target = eps * (1 - abs(THETA1.eval(1j))) ** gamma
        y = (1 - target) / (1 + target)  # mu = iy has ph(i, iy) = target
        out = stability.cor36_predicate(THETA1, [1j], [1j * y], gamma, eps)
        assert out[0].pseudo_hyp == pytest.approx(target, rel=1e-12)
        assert out[0].ok

    def test_over_the_bound(self):
        gamma, eps = 0.5, 0.1
        target = 1.01 * eps * (1 - abs(THETA1.eval(1j))) ** gamma
        y = (1 - target) / (1 + target)
        out = stability.cor36_predicate(THETA1, [1j], [1j * y], gamma, eps)
        assert not out[0].ok

    def test_gamma_gate(self):
        with pytest.raises(GammaOutOfRange):
            stability.cor36_predicate(THETA1, [1j], [1j], 1.0 / 3.0, 0.1)


def _midpoint_oracle(f, lo, hi, tol=1e-8):
    n = 64
    prev = None
    for _ in range(18):
        t = np.linspace(lo, hi, n, endpoint=False) + (hi - lo) / (2 * n)
        val = float(np.sum(f(t)) * (hi - lo) / n)
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-12):
            return val
        prev = val
        n *= 2
    return prev


class TestThm310:
    def test_degenerate_segment(self):
        eq1, eq2 = stability.thm310_predicates(THETA1, 0.5, 0.5, 0.1)
        assert eq1 == 0.0 and eq2

    def test_pure_exponential(self):
        theta = schur.SingularInner(a=2.0)
        delta = 0.3
        eq1, eq2 = stability.thm310_predicates(theta, 0.0, delta, 1.0)
        assert eq1 == pytest.approx(2.0 * delta, rel=1e-12)

    def test_blaschke_vs_midpoint_oracle(self):
        theta = schur.BlaschkeProduct(zeros=(1j,))
        eq1, _ = stability.thm310_predicates(theta, 0.0, 0.1, 0.5)
        oracle = _midpoint_oracle(
            lambda t: schur.angular_derivative_array(theta, t), 0.0, 0.1)
        assert eq1 == pytest.approx(oracle, abs=1e-6)

    def test_with_atoms_and_d0(self):
        theta = schur.SingularInner(atoms=((2.0, 1.0),))
        eq1, eq2 = stability.thm310_predicates(theta, 0.0, 0.1, 10.0)
        # |Theta'| = 1/(2-t)^2 and d0 = 2-t, so the second term is exactly 1
        expected = _midpoint_oracle(
            lambda t: 1.0 / (2.0 - t) ** 2 + 1.0, 0.0, 0.1)
        assert eq1 == pytest.approx(expected, abs=1e-6)
        assert eq2

    def test_spectrum_on_segment(self):
        theta = schur.SingularInner(atoms=((0.05, 1.0),))
        with pytest.raises(SpectrumOnSegment):
            stability.thm310_predicates(theta, 0.0, 0.1, 0.1)


class TestCor312:
    def test_clark_shift(self):
        a, alpha = 2.0, 0.0
        theta = schur.SingularInner(a=a)
        t_n = (alpha + 2 * math.pi) / a
        delta = 0.37
        verdict = stability.cor312_predicate(theta, t_n, t_n + delta / a, 0.5)
        assert verdict.gap == pytest.approx(delta, rel=1e-10)
        assert verdict.ok

    def test_degenerate(self):
        verdict = stability.cor312_predicate(THETA1, 1.0, 1.0, 0.1)
        assert verdict.gap == 0.0 and verdict.ok

    def test_blaschke_exponential_gap_closed_form(self):
        theta = schur.Product((schur.BlaschkeProduct(zeros=(0.5 + 1j,)),
                               schur.SingularInner(a=1.0)))
        t, s = -0.3, 0.9
        closed = (s - t) + 2 * (math.atan((s - 0.5) / 1.0)
                                - math.atan((t - 0.5) / 1.0))
        verdict = stability.cor312_predicate(theta, t, s, closed + 1e-6)
        assert verdict.gap == pytest.approx(closed, abs=1e-8)
        assert verdict.ok

    def test_cls_flag_attached(self):
        grid = schur.GridSpec(-5.0, 5.0, 0.05, 3.0, 0.05)
        verdict = stability.cor312_predicate(THETA1, 0.0, 0.1, 1.0,
                                             cls_delta=0.5, cls_grid=grid)
        assert verdict.cls_connected is True


class TestGnMembership:
    def test_interior(self):
        assert stability.gn_membership("interior", 1j, 1j, 0.1)
        assert stability.gn_membership("interior", 1j, 1j + 0.05, 0.1)
        assert not stability.gn_membership("interior", 1j, 1j + 0.2, 0.1)

    def test_real(self):
        assert stability.gn_membership("real", 0.0, 0.005, 0.01, theta=THETA1)
        assert not stability.gn_membership("real", 0.0, 0.02, 0.01, theta=THETA1)


class TestDistortionAndKernelBound:
    def test_derivative_distortion_on_gn(self, rng):
        # atomic singular x e^{iaz}: every sigma point bounds the atom distances
        for _ in range(10):
            n_atoms = int(rng.integers(1, 4))
            atoms = tuple((float(rng.uniform(-3, 3)), float(rng.uniform(0.3, 1.5)))
                          for _ in range(n_atoms))
            theta = schur.Product((schur.SingularInner(a=float(rng.uniform(0, 1.0)),
                                                       atoms=atoms),))
            t_n = float(rng.uniform(4.0, 6.0))
            eps = float(rng.uniform(0.05, 0.2))
            radius = eps * stability.v0(theta, t_n)
            deriv_tn = schur.angular_derivative(theta, t_n)
            for t in np.linspace(t_n - radius, t_n + radius, 7):
                deriv_t = schur.angular_derivative(theta, float(t))
                assert deriv_tn / (1 + eps) ** 2 - 1e-12 <= deriv_t
                assert deriv_t <= deriv_tn / (1 - eps) ** 2 + 1e-12

    def test_kernel_lower_bound_on_gn(self):
        # pointwise |k_t(t_n)| >= |Theta'(t_n)|/(8 pi^2) on meromorphic inners
        cases = [schur.SingularInner(a=a) for a in (0.5, 2.0, 2 * math.pi)]
        cases.append(schur.Product((schur.BlaschkeProduct(zeros=(0.3 + 0.8j,)),
                                    schur.SingularInner(a=1.0))))
        for theta in cases:
            t_n = 1.0
            bound = schur.angular_derivative(theta, t_n) / (8 * math.pi ** 2)
            radius = 0.2 * stability.v0(theta, t_n)
            for t in np.linspace(t_n - radius, t_n + radius, 9):
                if t == t_n:
                    continue
                val = kernels.kernel_eval(theta, kernels.boundary(float(t)), t_n)
                assert abs(val) >= bound


class TestEstimate2Envelope:
    def test_two_grid_envelope_for_inner(self):
        theta = schur.Product((schur.BlaschkeProduct(zeros=(0.2 + 0.9j, -1 + 1.2j)),
                               schur.SingularInner(a=0.8)))
        grid_a = np.linspace(-2.0, 2.0, 7)
        grid_b = np.linspace(-1.9, 1.9, 11)

        def ratios(grid):
            upper, lower = [], []
            for x in grid:
                w = stability.weight_w_p(theta, kernels.boundary(float(x)), P32)
                deriv = schur.angular_derivative(theta, float(x))
                lower.append(w / stability.v0(theta, float(x)))
                upper.append(w * deriv)
            return lower, upper

        lo_a, up_a = ratios(grid_a)
        lo_b, up_b = ratios(grid_b)
        assert stability.two_grid_envelope(lo_a, lo_b)["within_envelope"]
        assert stability.two_grid_envelope(up_a, up_b)["within_envelope"]


class TestReport:
    def test_eps_tail_nonincreasing_and_fields(self, rng):
        lams = [1j, 0.5 + 1j, 1 + 2j]
        mus = [l + 0.05j for l in lams]
        rep = stability.stability_report(THETA1, lams, mus, P32,
                                         gamma=0.5, eps=0.2)
        eps_vals = [e for _, e in rep.eps_tail]
        assert all(b <= a + 1e-15 for a, b in zip(eps_vals, eps_vals[1:]))
        for row in rep.rows:
            assert row["pseudo_hyp"] is not None
            assert row["cor36"] is not None
            assert row["thm310_eq1"] is None

    def test_real_frequency_rows(self):
        a = 2 * math.pi
        theta = schur.SingularInner(a=a)
        lams = [kernels.boundary(float(n)) for n in range(3)]
        mus = [kernels.boundary(n + 0.001) for n in range(3)]
        rep = stability.stability_report(theta, lams, mus, P32, eps=0.5)
        for row in rep.rows:
            assert row["thm310_eq1"] is not None
            assert row["cor312"] is not None
            assert row["pseudo_hyp"] is None
