import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screened_transport import (
    Params,
    RadialProfile,
    TestFunctionFamily,
    certify_bilinear,
    certify_pointwise,
    radial_velocity,
    young_split,
)
from screened_transport.inequalities import (
    pointwise_lower_bound,
    shipped_families,
    weighted_profile_integral,
)


P2 = Params(2, 1.0, 1.0)


class TestFamilies:
    @pytest.mark.parametrize("fam", shipped_families(spline_seeds=(0, 7, 42)),
                             ids=lambda f: f"{f.kind}-{f.seed}")
    def test_class_invariants(self, fam):
        fam.validate()

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            TestFunctionFamily("triangle")

    def test_spline_family_is_seeded(self):
        a = TestFunctionFamily("random_monotone_spline", seed=3).sample()
        b = TestFunctionFamily("random_monotone_spline", seed=3).sample()
        r = np.linspace(0, 1.5, 100)
        assert np.array_equal(a.value(r), b.value(r))

    def test_negation_flips_velocity(self):
        # the nonincreasing mirror class is covered by linearity: negating
        # the profile negates the transform (same interpolant representation
        # on both sides)
        f = shipped_families()[0].sample()
        r = np.array([0.3, 0.7, 1.4])
        pos = RadialProfile(f.nodes, f.values.copy())
        neg = RadialProfile(f.nodes, -f.values)
        u_pos = radial_velocity(pos, P2, r)
        u_neg = radial_velocity(neg, P2, r)
        assert np.allclose(u_neg, -u_pos, rtol=1e-12, atol=1e-14)


class TestWeightedProfileIntegral:
    def test_against_dense_trapezoid_oracle(self):
        f = shipped_families()[0].sample()  # bump
        for r in (0.4, 0.9, 1.6):
            got = weighted_profile_integral(f, r, 2)
            rho = np.linspace(0.0, r, 400_001)
            fr = float(np.asarray(f.value(np.asarray([r])))[0])
            oracle = np.trapezoid((fr - f.value(rho)) * rho, rho)
            assert got == pytest.approx(oracle, rel=1e-8, abs=1e-12)

    def test_zero_radius(self):
        f = shipped_families()[0].sample()
        assert weighted_profile_integral(f, 0.0, 2) == 0.0


class TestPointwise:
    def test_constant_profile_degenerates(self):
        prof = RadialProfile(np.linspace(0, 1, 9), np.full(9, -0.2))
        rep = certify_pointwise(prof, P2, [0.3, 0.8])
        assert rep.min_slack == pytest.approx(0.0, abs=1e-12)

    def test_bump_family_certifies(self):
        f = shipped_families()[0].sample()
        radii = np.geomspace(0.05, 2.0, 20)
        rep = certify_pointwise(f, P2, radii)
        assert rep.passed
        assert rep.min_slack >= 0.0
        assert rep.samples == 20

    @pytest.mark.parametrize("n", [2, 3])
    def test_spline_family_certifies(self, n):
        f = TestFunctionFamily("random_monotone_spline", seed=11).sample()
        params = Params(n, 0.5, 1.0)
        rep = certify_pointwise(f, params, np.geomspace(0.05, 3.0, 12))
        assert rep.passed

    def test_lower_bound_positive_inside_support(self):
        f = shipped_families()[0].sample()
        assert pointwise_lower_bound(f, P2, 0.5) > 0.0


class TestBilinear:
    def test_bump_ratio_exceeds_one(self):
        f = shipped_families()[0].sample()
        rep = certify_bilinear(f, P2, 0.25)
        assert rep.passed
        assert rep.min_ratio >= 1.0

    @pytest.mark.parametrize("delta", [-0.5, 0.0, 0.5])
    def test_step_family_across_delta(self, delta):
        f = TestFunctionFamily("smoothed_step").sample()
        rep = certify_bilinear(f, P2, delta)
        assert rep.min_ratio >= 1.0 - 1e-6

    def test_constant_profile_degenerates(self):
        prof = RadialProfile(np.linspace(0, 1, 9), np.full(9, -0.2))
        rep = certify_bilinear(prof, P2, 0.25)
        assert rep.passed

    def test_report_serializes(self, tmp_path):
        import json
        from screened_transport.inequalities import report_to_json
        f = shipped_families()[0].sample()
        rep = certify_bilinear(f, P2, 0.0)
        report_to_json(rep, tmp_path / "r.json")
        data = json.loads((tmp_path / "r.json").read_text())
        assert data["inequality"] == "bilinear_lower_bound"
        assert data["pass"] is True


class TestYoungSplit:
    def test_equal_arguments(self):
        lhs, rhs = young_split(1.3, 1.3, 0.4)
        assert lhs == 0.0
        assert rhs <= 0.0

    def test_second_argument_zero(self):
        lhs, rhs = young_split(2.0, 0.0, 0.7)
        assert lhs == pytest.approx(4.0)
        assert rhs == pytest.approx((1 - 0.7) * 4.0)
        assert lhs >= rhs

    def test_hundred_thousand_random_triples(self):
        rng = np.random.default_rng(97531)
        b1 = rng.normal(0.0, 3.0, 100_000)
        b2 = rng.normal(0.0, 3.0, 100_000)
        alpha = rng.uniform(1e-6, 1.0 - 1e-6, 100_000)
        lhs = (b1 - b2) ** 2
        rhs = (1.0 - alpha) * b1 ** 2 + (1.0 - 1.0 / alpha) * b2 ** 2
        assert int(np.sum(lhs < rhs)) == 0

    def test_rejects_alpha_outside_range(self):
        for alpha in (0.0, 1.0, -0.3, 2.0):
            with pytest.raises(ValueError):
                young_split(1.0, 1.0, alpha)

    @given(b1=st.floats(-1e6, 1e6), b2=st.floats(-1e6, 1e6),
           alpha=st.floats(1e-6, 1.0 - 1e-6))
    @settings(max_examples=300, deadline=None)
    def test_property(self, b1, b2, alpha):
        lhs, rhs = young_split(b1, b2, alpha)
        assert lhs >= rhs - 1e-9 * max(1.0, abs(lhs), abs(rhs))
