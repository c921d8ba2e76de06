import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from uhfqft import propagator as prop
from uhfqft.errors import DomainError, SingularityError
from uhfqft.propagator import ComplexFourVector, QuadratureConfig


def scipy_d_minus(m, z0, r, deriv0=False):
    """Radial momentum integral with adaptive scipy quadrature, real and imaginary parts separately."""
    def f(p):
        w = math.hypot(p, m)
        bracket = 2 * p if r == 0 else 2 * math.sin(p * r) / r
        val = (p / w if w else 1.0) * np.exp(-1j * w * z0) * bracket
        return val * (-1j * w) if deriv0 else val
    eps = -z0.imag
    upper = 60.0 / eps
    re = integrate.quad(lambda p: f(p).real, 0, upper, limit=2000, epsabs=1e-14, epsrel=1e-12)[0]
    im = integrate.quad(lambda p: f(p).imag, 0, upper, limit=2000, epsabs=1e-14, epsrel=1e-12)[0]
    return (re + 1j * im) / (8 * math.pi**2)


def mp_g(m, z, x):
    """Auxiliary function in its original momentum form at 30 digits."""
    mpmath.mp.dps = 30
    f = lambda p: (mpmath.exp(-1j * mpmath.sqrt(p * p + m * m) * z - 1j * p * x)
                   * m / (p * p + m * m + p * mpmath.sqrt(p * p + m * m)))
    return complex(mpmath.quad(f, [0, 1, 10, 100, mpmath.inf]))


class TestComplexFourVector:
    def test_rotation_invariance_of_square(self):
        rng = np.random.default_rng(0)
        z = ComplexFourVector(0.3 - 0.2j, 0.4, -0.1, 0.7)
        rot = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        w = ComplexFourVector(z.z0, *(rot @ z.spatial.real))
        assert abs(z.minkowski_sq() - w.minkowski_sq()) < 1e-14

    def test_spatial_norm_requires_real_space(self):
        with pytest.raises(DomainError):
            ComplexFourVector(0, 1j, 0, 0).spatial_norm()

    def test_damped(self):
        z = ComplexFourVector.damped((1, 2, 3, 4), 0.5)
        assert z.z0 == 1 - 0.5j and z.spatial_norm() == math.sqrt(29)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            ComplexFourVector.of((1, 2, 3))


class TestDMinus:
    def test_global_estimate_example(self):
        v = prop.d_minus(1.0, (-0.5j, 1, 0, 0))
        assert abs(v) <= (2 * math.pi * 0.5) ** -2

    def test_rotation_invariance(self):
        a = prop.d_minus(1.0, (-0.3j, 0.4, 0.2, 0.1))
        r = math.sqrt(0.21)
        b = prop.d_minus(1.0, (-0.3j, 0.0, r, 0.0))
        assert abs(a - b) <= 1e-10 * abs(a)

    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    @pytest.mark.parametrize("m,z0,r", [(1.0, -0.5j, 0.0), (1.0, 1 - 0.2j, 0.5), (0.0, 0.3 - 0.7j, 1.2),
                                        (2.0, -1.0 - 0.4j, 2.5), (0.5, 2 - 1j, 0.1)])
    def test_matches_scipy_oracle(self, m, z0, r):
        ours = prop.d_minus(m, (z0, r, 0, 0))
        ref = scipy_d_minus(m, z0, r)
        assert abs(ours - ref) <= 1e-8 * abs(ref)

    def test_massless_closed_form(self):
        # m = 0: D = -1/(4 pi^2 (z0^2 - r^2))
        z0, r = 0.4 - 0.6j, 0.9
        assert abs(prop.d_minus(0.0, (z0, r, 0, 0)) + 1 / (4 * math.pi**2 * (z0**2 - r**2))) < 1e-12

    def test_small_radius_limit(self):
        a = prop.d_minus(1.0, (-0.5j, 0, 0, 0))
        b = prop.d_minus(1.0, (-0.5j, 1e-9, 0, 0))
        assert abs(a - b) < 1e-12

    def test_requires_damping(self):
        with pytest.raises(DomainError):
            prop.d_minus(1.0, (0.3, 1, 0, 0))

    def test_negative_mass(self):
        with pytest.raises(DomainError):
            prop.d_minus(-1.0, (-1j, 0, 0, 0))

    def test_explicit_cutoff_and_nodes(self):
        q = QuadratureConfig(nodes=24, cutoff=200.0)
        a = prop.d_minus(1.0, (0.2 - 0.5j, 0.3, 0, 0), q)
        b = prop.d_minus(1.0, (0.2 - 0.5j, 0.3, 0, 0))
        assert abs(a - b) < 1e-9 * abs(b)

    def test_tail_cutoff_bounds_tail(self):
        eps, tol = 0.3, 1e-10
        c = prop.tail_cutoff(eps, 1, tol)
        tail = integrate.quad(lambda p: p * math.exp(-eps * p), c, np.inf)[0]
        total = integrate.quad(lambda p: p * math.exp(-eps * p), 0, np.inf)[0]
        assert tail <= tol * total * 1.0001


class TestDecomposition:
    @pytest.mark.parametrize("z0,x", [(-0.5j, (0, 0, 0)), (1 - 0.2j, (0.5, 0, 0)), (0.3 - 0.05j, (1.0, 0.4, 0)),
                                      (-2 - 1j, (0.2, 0.2, 0.2))])
    def test_agrees_with_direct(self, z0, x):
        z = (z0, *x)
        a, b = prop.d_minus(1.0, z), prop.d_minus_decomposed(1.0, z)
        assert abs(a - b) <= 1e-6 * abs(a)

    def test_finite_at_spacelike_real_point(self):
        v = prop.d_minus_decomposed(1.0, (0, 1, 0, 0))
        assert math.isfinite(abs(v))
        # approaches the damped values
        near = prop.d_minus(1.0, (-1e-3j, 1, 0, 0))
        assert abs(v - near) < 1e-4

    def test_a_form_bound(self):
        z0, r = -1j, 2.0
        a = prop.light_cone_a(z0, r)
        assert abs(prop.d_minus_decomposed(1.0, (z0, r, 0, 0))) <= prop.bound_estimate("a-form", 1.0, a)

    def test_singularity_floor(self):
        with pytest.raises(SingularityError):
            prop.d_minus_decomposed(1.0, (1.0 - 1e-9j, 1.0, 0, 0))

    def test_upper_half_plane_rejected(self):
        with pytest.raises(DomainError):
            prop.d_minus_decomposed(1.0, (0.1j, 1.0, 0, 0))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-3, 3), st.floats(0.05, 2), st.floats(0, 3), st.sampled_from([0.5, 1.0, 2.0]))
    def test_property_agreement(self, x0, eps, r, m):
        z = (x0 - 1j * eps, r, 0, 0)
        a, b = prop.d_minus(m, z), prop.d_minus_decomposed(m, z)
        assert abs(a - b) <= 1e-6 * abs(a)


class TestGm:
    def test_origin_equals_one(self):
        # exact value of the auxiliary integral at the origin, independently of mass
        for m in (0.5, 1.0, 2.0):
            assert abs(prop.g_m(m, 0j, 0.0) - 1.0) < 1e-10
            assert abs(mp_g(m, 0, 0) - 1.0) < 1e-10

    def test_origin_below_bound(self):
        assert abs(prop.g_m(1.0, 0j, 0.0)) <= prop.G_M_BOUND

    def test_massless_is_zero(self):
        assert prop.g_m(0.0, 0.3 - 0.2j, 1.0) == 0

    @pytest.mark.parametrize("m,z,x", [(1.0, 0.5 - 0.3j, 0.7), (2.0, -1.0 - 0.1j, 0.4), (0.5, 2.0 - 1.0j, -1.5)])
    def test_matches_mpmath(self, m, z, x):
        assert abs(prop.g_m(m, z, x) - mp_g(m, z, x)) < 1e-9

    def test_upper_half_plane_rejected(self):
        with pytest.raises(DomainError):
            prop.g_m(1.0, 0.1j, 0.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(-5, 5), st.floats(0, 3), st.floats(-5, 5), st.sampled_from([0.5, 1.0, 2.0]))
    def test_property_bound(self, zr, zi, x, m):
        assert abs(prop.g_m(m, zr - 1j * zi, x)) <= prop.G_M_BOUND + 1e-6

    def test_partials_match_finite_differences(self):
        m, z, x, h = 1.0, 0.4 - 0.3j, 0.6, 1e-5
        g, gz, gx = prop.g_m_array(1.0, np.array([z]), np.array([x]), partials=True)[:, 0]
        fz = (prop.g_m(m, z + h, x) - prop.g_m(m, z - h, x)) / (2 * h)
        fx = (prop.g_m(m, z, x + h) - prop.g_m(m, z, x - h)) / (2 * h)
        assert abs(gz - fz) < 1e-8 and abs(gx - fx) < 1e-8


class TestGradient:
    def test_spatial_gradient_zero_at_origin(self):
        g = prop.d_minus_grad(1.0, (-0.5j, 0, 0, 0))
        assert np.all(g[1:] == 0)

    def test_time_derivative_finite_difference(self):
        z, h = ComplexFourVector(-0.4j, 0.3, 0, 0), 1e-4
        g0 = prop.d_minus_grad(1.0, z)[0]
        fd = (prop.d_minus(1.0, z + (h, 0, 0, 0)) - prop.d_minus(1.0, z - (h, 0, 0, 0))) / (2 * h)
        assert abs(g0 - fd) < 1e-5 * abs(g0)

    def test_time_derivative_scipy_path(self):
        z0, r = 0.3 - 0.6j, 0.8
        ours = prop.d_minus_grad(1.0, (z0, r, 0, 0))[0]
        assert abs(ours - scipy_d_minus(1.0, z0, r, deriv0=True)) < 1e-6 * abs(ours)

    @pytest.mark.parametrize("seed", range(20))
    def test_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1.5, 1.5, 4)
        z = ComplexFourVector.damped(x, rng.uniform(0.3, 1.0))
        grad = prop.d_minus_grad(1.0, z)
        h = 1e-4
        for mu in range(4):
            e = np.zeros(4)
            e[mu] = h
            fd = (prop.d_minus(1.0, z + e) - prop.d_minus(1.0, z - e)) / (2 * h)
            assert abs(grad[mu] - fd) <= 1e-5 * max(abs(grad).max(), 1e-12)

    @pytest.mark.parametrize("z", [(0.3 - 0.7j, 0.5, 0.2, 0), (1 - 0.2j, 0.5, 0, 0), (0.1 - 0.3j, 0, 2.0, 0.3)])
    def test_decomposed_gradient(self, z):
        a, b = prop.d_minus_grad(1.0, z), prop.d_minus_grad_decomposed(1.0, z)
        assert np.abs(a - b).max() < 1e-9 * np.abs(a).max()

    def test_boundary_gradient_matches_real_axis_difference(self):
        x, h = np.array([0.2, 1.0, 0.3, 0.0]), 1e-5
        g, err = prop.boundary_grad(1.0, x)
        e = np.array([0, h, 0, 0])
        fd = (prop.d_minus_decomposed(1.0, x + e) - prop.d_minus_decomposed(1.0, x - e)) / (2 * h)
        assert abs(g[1] - fd) < 1e-6 and err < 1e-5


class TestRichardson:
    def test_exact_for_quadratics(self):
        h = (1e-2, 1e-3, 1e-4)
        vals = [3 + 2 * t + 5 * t * t for t in h]
        v, _ = prop.richardson_to_zero(vals, h)
        assert abs(v - 3) < 1e-12

    def test_boundary_value_at_spacelike_point(self):
        x = (0.3, 1.0, 0.2, 0.0)
        v, err = prop.boundary_value(1.0, x)
        exact = prop.d_minus_decomposed(1.0, x)
        assert abs(v - exact) < 1e-8 and err < 1e-5


class TestGeometry:
    def test_ell_examples(self):
        assert abs(prop.ell_fundamental(0, 1) - 1 / (math.sqrt(2) * math.pi)) < 1e-15
        assert prop.ell_fundamental(3.0, 0) == 0
        assert abs(prop.ell_fundamental(1, 1) - 0.254966) < 1e-6

    def test_ell_solves_the_inequality(self):
        for m, l in [(1, 1), (0.5, 1.5), (1.9, 1)]:
            a = prop.ell_fundamental(m, l)
            lhs = 2 * l * l * prop.bound_estimate("a-form", m, a)
            assert abs(lhs - 1.0) < 1e-12

    @settings(max_examples=50)
    @given(st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 1))
    def test_ell_monotone(self, m, l, d):
        assert prop.ell_fundamental(m + d, l) >= prop.ell_fundamental(m, l)
        assert prop.ell_fundamental(m, l + d) >= prop.ell_fundamental(m, l)

    def test_distance_examples(self):
        assert prop.dist_to_lightcone((0, 0, 0, 0)) == 0
        assert prop.dist_to_lightcone((2, 1, 0, 0)) == 0
        assert abs(prop.dist_to_lightcone((0, 1, 0, 0)) - 1 / math.sqrt(2)) < 1e-15

    def test_distance_projection_oracle(self):
        rng = np.random.default_rng(42)
        for x in rng.uniform(-3, 3, (1000, 4)):
            r = np.linalg.norm(x[1:])
            n = x[1:] / r

            # nearest cone point (sign*s, s*n) with the spatial direction aligned
            def d2(s, sign):
                return (x[0] - sign * s) ** 2 + np.sum((x[1:] - s * n) ** 2)
            best = min(optimize.minimize_scalar(lambda s: d2(s, sg), bounds=(0, 10), method="bounded",
                                                options={"xatol": 1e-12}).fun for sg in (1, -1))
            ref = 0.0 if abs(x[0]) >= r else math.sqrt(best)
            assert abs(prop.dist_to_lightcone(x) - ref) < 1e-10

    @settings(max_examples=100)
    @given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
    def test_distance_inequality(self, x):
        r = np.linalg.norm(x[1:])
        d = prop.dist_to_lightcone(x)
        assert min(abs(x[0] - r), abs(x[0] + r)) >= math.sqrt(2) * d - 1e-12

    def test_epsilon_branches(self):
        assert prop.epsilon_deform(1.0, (1, 0.5, 0, 0)) == 1.0
        x = (0, 0.9 * math.sqrt(2), 0, 0)
        assert abs(prop.epsilon_deform(1.0, x) - math.sqrt(0.38)) < 1e-12
        assert prop.epsilon_deform(1.0, (0, 2.0, 0, 0)) == 0.0

    @settings(max_examples=100)
    @given(st.floats(0.01, 3), st.floats(0, 5))
    def test_epsilon_range_and_continuity(self, ell, r):
        x = (0.0, r, 0, 0)
        e = prop.epsilon_deform(ell, x)
        assert 0 <= e <= ell
        e2 = prop.epsilon_deform(ell, (0.0, r + 1e-9, 0, 0))
        assert abs(e - e2) < 1e-3
        if prop.dist_to_lightcone(x) >= ell:
            assert e == 0

    def test_bound_examples(self):
        assert abs(prop.bound_estimate("epsilon-form", 1.0, 1 / (2 * math.pi)) - 1) < 1e-15
        assert abs(prop.bound_estimate("epsilon-form", 1.0, 0.5) - 0.101321) < 1e-6
        assert prop.bound_estimate("a-form", 0.0, 0.7) == pytest.approx((2 * math.pi * 0.7) ** -2)

    def test_bound_rejects_bad_input(self):
        with pytest.raises(DomainError):
            prop.bound_estimate("epsilon-form", 1.0, 0.0)
        with pytest.raises(ValueError):
            prop.bound_estimate("other", 1.0, 1.0)
