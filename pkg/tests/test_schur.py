import math

import numpy as np
import pytest

from equipot import (
    IntervalSet,
    SetSpecError,
    affine_inverse_image,
    audit_bound,
    audit_witness,
    build_witness,
    cantor_set,
    check_interval_condition,
    counterexample_demo,
    h_poly,
    peaking_poly,
    quadratic_inverse_image,
    solve_equilibrium,
)


class TestInverseImages:
    def test_quadratic_values(self):
        imap = quadratic_inverse_image(0.5)
        assert imap(1.0) == pytest.approx(1.0, abs=1e-14)
        assert imap(0.5) == pytest.approx(-1.0, abs=1e-14)
        assert imap(0.75) == pytest.approx(-1.0 / 6.0, abs=1e-14)

    def test_quadratic_derivative(self):
        for alpha in (0.2, 0.5, 0.8):
            imap = quadratic_inverse_image(alpha)
            assert imap.deriv_at(1.0) == pytest.approx(4.0 / (1 - alpha**2), rel=1e-13)

    def test_target_is_inverse_image(self):
        imap = quadratic_inverse_image(0.4)
        for e in imap.target_set.endpoints():
            assert abs(abs(imap(e)) - 1.0) < 1e-12
        for (u, v) in imap.target_set.intervals:
            xs = np.linspace(u, v, 101)
            assert np.max(np.abs(imap(xs))) <= 1.0 + 1e-12
        # strictly outside the target the map leaves [-1, 1]
        assert abs(imap(0.0)) > 1.0

    def test_affine_family(self):
        imap = affine_inverse_image(-2.0, 1.0)
        assert imap(1.0) == 1.0 and imap(-2.0) == -1.0
        assert imap.deriv_at(1.0) == pytest.approx(2.0 / 3.0, rel=1e-14)

    def test_rejects_bad_alpha(self):
        for alpha in (0.0, 1.0, -0.3, 2.0):
            with pytest.raises(SetSpecError):
                quadratic_inverse_image(alpha)


class TestHPoly:
    @pytest.mark.parametrize("m", [0, 1, 5, 50, 200, 500])
    def test_endpoint_identity(self, m):
        assert abs(h_poly(m, 1.0)) == pytest.approx(m + 1, rel=1e-12)
        assert abs(h_poly(m, -1.0)) == pytest.approx(m + 1, rel=1e-12)

    def test_h0_is_one(self):
        assert h_poly(0, 0.3) == 1.0

    def test_interior_bound(self):
        ws = np.cos(np.linspace(0.05, 0.95, 200) * np.pi)
        for m in (3, 10, 41):
            vals = np.abs(h_poly(m, ws))
            assert np.all(vals <= 1.0 / np.sqrt(1 - ws**2) + 1e-9)


class TestPeaking:
    def test_value_at_peak(self):
        U = peaking_poly(IntervalSet(((-1.0, 1.0),)), 1.0, 10)
        assert U(1.0) == pytest.approx(1.0, abs=1e-12)

    def test_center_zero_and_geometric_decay(self):
        U = peaking_poly(IntervalSet(((-1.0, 1.0),)), 1.0, 10)
        assert abs(U(0.0)) < 1e-12
        assert U(0.5) == pytest.approx(0.5**10, rel=1e-10)

    def test_bounded_on_set(self):
        K = IntervalSet(((-1.0, -0.5), (0.5, 1.0)))
        U = peaking_poly(K, 1.0, 13)
        for (u, v) in K.intervals:
            xs = np.linspace(u, v, 200)
            assert np.max(np.abs(U(xs))) <= 1.0 + 1e-10

    def test_rejects(self):
        with pytest.raises(SetSpecError):
            peaking_poly(IntervalSet(((-1.0, 1.0),)), 0.5, 3)
        with pytest.raises(SetSpecError):
            peaking_poly(IntervalSet(((-1.0, 1.0),)), 1.0, 0)


class TestWitness:
    def test_counting(self):
        imap = quadratic_inverse_image(0.5)
        wit = build_witness(imap, 1.0, 400, 0.05)
        assert wit.m == 190  # floor((400 - 20)/2)
        assert wit.degree <= 400

    def test_value_at_a_closed_form(self):
        imap = quadratic_inverse_image(0.5)
        wit = build_witness(imap, 1.0, 400, 0.05)
        want = 191 * math.sqrt(2 * 16 / 3) / 1.05**2
        # T(1) carries a 1-ulp rounding that the steep H_m amplifies to ~3e-12
        assert abs(wit(1.0)) == pytest.approx(want, rel=1e-9)
        assert wit.value_at_a == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("n", [16, 100, 417])
    def test_degree_budget(self, n):
        imap = quadratic_inverse_image(0.3)
        wit = build_witness(imap, 2.0, n, 0.1)
        assert wit.degree <= n

    def test_rejects_bad_parameters(self):
        imap = quadratic_inverse_image(0.5)
        with pytest.raises(SetSpecError):
            build_witness(imap, 1.0, 15, 0.05)
        with pytest.raises(SetSpecError):
            build_witness(imap, 1.0, 100, 0.0)
        with pytest.raises(SetSpecError):
            build_witness(imap, 0.0, 100, 0.05)

    def test_point_ratio_identity(self):
        # |P(a)| / (n 2 pi h(a) Omega) telescopes to (m+1) N / (n (1+eta)^2)
        imap = quadratic_inverse_image(0.5)
        for n, eta in ((400, 0.05), (1024, 0.2)):
            wit = build_witness(imap, 1.0, n, eta)
            rep = audit_witness(wit)
            want = (wit.m + 1) * imap.N / (n * (1 + eta) ** 2)
            assert rep.point_ratio == pytest.approx(want, rel=1e-10)

    def test_audit_of_witness(self):
        imap = quadratic_inverse_image(0.5)
        wit = build_witness(imap, 1.0, 400, 0.05)
        rep = audit_witness(wit)
        assert rep.local_ok
        # headroom: the margin stays below 1/(1+eta) close to a
        assert rep.local_margin <= 1.0 / 1.05 + 1e-3
        assert rep.norm_ratio <= 1.0
        # the shifted-power peak is 1 at the mirror endpoint, so the norm
        # growth is (m+1)-ish and only decays like exp(log(cn)/n)
        assert 1.0 < rep.growth_estimate < 1.02

    def test_affine_witness_on_interval(self):
        imap = affine_inverse_image(-1.0, 1.0)
        wit = build_witness(imap, 1.0, 144, 0.05)
        rep = audit_witness(wit)
        assert rep.local_ok
        assert rep.norm_ratio <= 1.0


class TestAuditBound:
    def test_zero_polynomial(self):
        K = IntervalSet(((-1.0, 1.0),))
        ctx = check_interval_condition(K, 1.0)
        E = solve_equilibrium(K)
        rep = audit_bound(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                          lambda x: 1.0, K, ctx, 10, E)
        assert rep.local_ok
        assert rep.growth_estimate == 0.0
        assert rep.norm_ratio == 0.0 and rep.point_ratio == 0.0

    def test_rejects_nonpositive_h(self):
        K = IntervalSet(((-1.0, 1.0),))
        ctx = check_interval_condition(K, 1.0)
        E = solve_equilibrium(K)
        with pytest.raises(SetSpecError):
            audit_bound(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                        lambda x: -1.0, K, ctx, 10, E)


class TestCounterexample:
    def test_point_value_and_ratio(self):
        for n in (10, 50, 200):
            rep = counterexample_demo(n)
            want = ((n + 1) / n) / math.sqrt(2.0 / 3.0)
            assert rep.point_ratio == pytest.approx(want, rel=1e-9)
            assert rep.point_ratio > 1.0

    def test_local_hypothesis_holds(self):
        rep = counterexample_demo(120)
        assert rep.local_ok
        assert rep.local_margin <= 1.0 + 1e-9

    def test_growth_is_large(self):
        rep = counterexample_demo(200)
        assert rep.growth_estimate == pytest.approx(2 + math.sqrt(3), rel=0.01)
        assert rep.growth_estimate > 1.5  # global hypothesis clearly fails

    def test_threshold_value(self):
        n = 100
        rep = counterexample_demo(n)
        assert rep.bound_threshold == pytest.approx(n * math.sqrt(2.0 / 3.0), rel=1e-10)
