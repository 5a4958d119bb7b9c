import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compnorm.functionals import (
    ArcSpec,
    angular_ratio,
    bergman_kappa,
    carleson_box,
    carleson_ratio,
    carleson_sup,
    dyadic_arcs,
    kappa,
    omega_mass,
    split_integrals,
    stolz_bound,
)
from compnorm.quadrature import QuadConfig, Region, series_kernel_integral
from compnorm.symbols import Constant, Identity, Polynomial, evaluate, make_blaschke, make_mobius


def identity_kappa(a):
    """Closed form via the kernel series: 2|a| (1-|a|^2) K3(a)."""
    a = abs(a)
    return 2 * a * (1 - a * a) * series_kernel_integral(a, 3)


def identity_box_ratio(length):
    h = length / (2 * math.pi)
    return (1 - h / 2) / (2 * math.pi**2)


class TestKappa:
    @pytest.mark.parametrize("alpha", [0, 0.5, 0.9j, -0.99])
    def test_constant_symbol_vanishes(self, alpha):
        assert kappa(Constant(0.3 - 0.2j), alpha).value == 0.0

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 0.3 - 0.6j, 0.9, 0.99, 0.999j])
    def test_identity_closed_form(self, alpha):
        r = kappa(Identity(), alpha)
        assert r.converged
        assert r.value == pytest.approx(identity_kappa(alpha), rel=1e-7)

    def test_alpha_zero_is_not_special(self):
        # phi_0 o psi = -psi so kappa is the L1 norm of psi''
        assert kappa(Polynomial((0, 0, 1)), 0).value == pytest.approx(2.0, rel=1e-12)

    @pytest.mark.parametrize("b", [0.3, -0.5 + 0.5j, 0.8j])
    @pytest.mark.parametrize("alpha", [0.4, 0.7 - 0.2j, (1 - 1e-3) * np.exp(0.3j)])
    def test_automorphism_invariance(self, b, alpha):
        # phi_alpha o phi_b is a rotated Moebius map vanishing at phi_b(alpha)
        c = complex(evaluate(make_mobius(b), alpha))
        assert kappa(make_mobius(b), alpha).value == pytest.approx(identity_kappa(c), rel=1e-6)

    def test_rejects_boundary_alpha(self):
        with pytest.raises(ValueError):
            kappa(Identity(), 1.0)

    def test_rotation_invariance(self):
        B = make_blaschke([0.5, -0.2j])
        rot = make_blaschke([0.5, -0.2j], np.exp(0.7j))
        a = 0.6 + 0.1j
        # phi_a o (lam B) = lam * phi_{conj(lam) a} o B
        v1 = kappa(rot, a).value
        v2 = kappa(B, np.exp(-0.7j) * a).value
        assert v1 == pytest.approx(v2, rel=1e-7)


class TestSplitIntegrals:
    @pytest.mark.parametrize("alpha", [0.2, 0.7j, 0.95])
    def test_identity(self, alpha):
        s = split_integrals(Identity(), alpha)
        w = 1 - abs(alpha) ** 2
        assert s.i2 == 0.0
        assert s.i3 == pytest.approx(w * series_kernel_integral(alpha, 3), rel=1e-7)
        assert s.i4 == pytest.approx(w * w * series_kernel_integral(alpha, 4), rel=1e-7)
        assert s.converged

    @given(r=st.floats(0.0, 0.95), t=st.floats(0, 2 * math.pi), which=st.integers(0, 2))
    @settings(max_examples=15, deadline=None)
    def test_triangle_inequality(self, r, t, which):
        psi = [make_blaschke([0.3, 0.5j]), Polynomial((0.1, 0.4, 0.4)), make_mobius(-0.6)][which]
        a = r * np.exp(1j * t)
        cfg = QuadConfig(rel_tol=1e-6)
        s = split_integrals(psi, a, cfg)
        k = kappa(psi, a, cfg).value
        assert k <= (s.i2 + 2 * abs(a) * s.i3) * (1 + 1e-5) + 1e-12


class TestBergman:
    def test_alpha_zero(self):
        assert bergman_kappa(make_blaschke([0.4, 0.2j]), 0).value == pytest.approx(1.0, abs=1e-12)

    def test_constant_symbol(self):
        a, c = 0.6 + 0.3j, -0.5j
        exact = (1 - abs(a) ** 2) / abs(1 - a.conjugate() * c) ** 3
        assert bergman_kappa(Constant(c), a).value == pytest.approx(exact, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 0.9, 0.99j])
    def test_identity(self, alpha):
        exact = (1 - abs(alpha) ** 2) * series_kernel_integral(alpha, 3)
        assert bergman_kappa(Identity(), alpha).value == pytest.approx(exact, rel=1e-7)


class TestAngularRatio:
    def test_identity(self):
        assert angular_ratio(Identity(), 0.7j) == pytest.approx(1.0)

    def test_automorphism(self):
        assert angular_ratio(make_mobius(0.4), 0.0) == pytest.approx((1 / (1 - 0.16)) ** 2)

    def test_contraction(self):
        # psi = z/2 at alpha = 1/2
        assert angular_ratio(Polynomial((0, 0.5)), 0.5) == pytest.approx((0.75 / (1 - 1 / 16)) ** 2)


class TestCarleson:
    def test_box_geometry(self):
        r0, r1, t0, t1 = carleson_box(ArcSpec(1.0, math.pi))
        assert (r0, r1) == (0.5, 1.0)
        assert (t0, t1) == pytest.approx((1 - math.pi / 2, 1 + math.pi / 2))

    def test_arc_validation(self):
        with pytest.raises(ValueError):
            ArcSpec(0, 0)
        with pytest.raises(ValueError):
            ArcSpec(0, 7)

    @pytest.mark.parametrize("length", [2 * math.pi, math.pi, 0.5, 0.01])
    def test_identity_closed_form(self, length):
        assert carleson_ratio(Identity(), ArcSpec(0.3, length)) == pytest.approx(identity_box_ratio(length), rel=1e-10)

    def test_full_arc(self):
        for n in (1, 2, 3):
            B = make_blaschke([0] * n)
            assert carleson_ratio(B, ArcSpec(0, 2 * math.pi)) == pytest.approx(n / (4 * math.pi**2), rel=1e-6)

    @pytest.mark.parametrize("n", [2, 3])
    def test_power_is_n_times_identity(self, n):
        arc = ArcSpec(2.0, 0.4)
        assert carleson_ratio(make_blaschke([0] * n), arc) == pytest.approx(n * identity_box_ratio(0.4), rel=1e-6)

    def test_dyadic_family(self):
        arcs = dyadic_arcs(3)
        assert len(arcs) == 15
        assert arcs[0].length == 2 * math.pi and arcs[-1].length == 2 * math.pi / 8

    def test_identity_sup_at_smallest_arcs(self):
        v, arc = carleson_sup(Identity(), dyadic_depth=4)
        assert arc.length == pytest.approx(2 * math.pi / 16)
        assert v == pytest.approx(identity_box_ratio(arc.length), rel=1e-9)


class TestConeRegions:
    @pytest.mark.parametrize("r", [0.05, 0.25, 0.5])
    def test_square_mass_is_twice_area(self, r):
        R = Region.omega_r(r)
        m = omega_mass(Polynomial((0, 0, 1)), R)
        assert m.value == pytest.approx(2 * R.area() / math.pi, rel=1e-10)

    def test_affine_has_no_mass(self):
        assert omega_mass(Polynomial((0.2, 0.7)), Region.omega_r(0.3)).value == 0.0

    def test_monotone_in_radius(self):
        f = make_blaschke([0.5, 0.3j, -0.2])
        vals = [omega_mass(f, Region.omega_r(r)).value for r in (0.1, 0.2, 0.3, 0.4, 0.5)]
        assert all(x < y for x, y in zip(vals, vals[1:]))


class TestStolzBound:
    def test_identity_vanishes(self):
        v, R = stolz_bound(Identity(), 0, 1)
        assert v == pytest.approx(0.0, abs=1e-15)
        assert R.radius == 0.5

    def test_square(self):
        v, _ = stolz_bound(Polynomial((0, 0, 1)), 0.5, 1)
        assert v == pytest.approx(0.25 * (2 - 1 / 0.9375), rel=1e-12)

    def test_requires_far_apex(self):
        with pytest.raises(ValueError):
            stolz_bound(Identity(), 0.5, 0.6)
