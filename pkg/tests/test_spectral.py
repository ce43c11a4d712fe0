import math

import numpy as np
import pytest

from lorentzheat.spectral import (
    NULL_CRITICAL,
    SUBCRITICAL,
    PotentialSpec,
    SpectralError,
    a_exponents,
    check_nonnegativity,
    check_inverse_square_smoothness,
    classify_criticality,
    eigenspace_dimension,
    exponent_table,
    lambda_star,
    omega,
)


class TestOmega:
    def test_k0(self):
        assert omega(0, 3) == 0.0

    def test_k1_n3(self):
        assert omega(1, 3) == 2.0

    def test_k2_n4(self):
        assert omega(2, 4) == 8.0


class TestEigenspaceDimension:
    def test_constants(self):
        for n in (2, 3, 4, 7):
            assert eigenspace_dimension(0, n) == 1

    def test_degree_one_3d(self):
        assert eigenspace_dimension(1, 3) == 3

    def test_degree_two_3d(self):
        assert eigenspace_dimension(2, 3) == 5

    def test_dimension_two(self):
        assert all(eigenspace_dimension(k, 2) == 2 for k in range(1, 8))

    def test_growth_order(self):
        # d_k = O(k^(N-2))
        for n in (3, 4, 5):
            vals = [eigenspace_dimension(k, n) / (k ** (n - 2)) for k in range(2, 40)]
            assert max(vals) < 10.0

    def test_large_k_exact_integer(self):
        d = eigenspace_dimension(60, 6)
        assert isinstance(d, int) and d > 0


class TestAExponents:
    def test_zero_coupling(self):
        ap, am = a_exponents(0.0, 5)
        assert ap == 0.0 and am == -3.0

    def test_floor_double_root(self):
        ap, am = a_exponents(lambda_star(4), 4)
        assert ap == am == -1.0

    def test_n3_lambda2(self):
        ap, am = a_exponents(2.0, 3)
        assert ap == pytest.approx(1.0) and am == pytest.approx(-2.0)

    def test_below_floor_rejected(self):
        with pytest.raises(SpectralError):
            a_exponents(lambda_star(3) - 0.1, 3)

    def test_vieta(self):
        for n in (2, 3, 6):
            for lam in np.linspace(lambda_star(n), lambda_star(n) + 12, 25):
                ap, am = a_exponents(lam, n)
                assert ap + am == pytest.approx(-(n - 2), abs=1e-12)
                assert ap * am == pytest.approx(-lam, abs=1e-9)


class TestExponentTable:
    def test_hardy_subcritical(self):
        spec = PotentialSpec.hardy(3, 2.0)
        tbl = exponent_table(spec, SUBCRITICAL, 6)
        assert np.allclose(tbl.A1, tbl.A2)
        assert tbl.A1[0] == pytest.approx(1.0)
        assert np.all(tbl.B == 0)

    def test_zero_potential_gives_k(self):
        spec = PotentialSpec.zero(4)
        tbl = exponent_table(spec, SUBCRITICAL, 8)
        assert np.allclose(tbl.A1, np.arange(9))
        assert np.allclose(tbl.A2, np.arange(9))

    def test_borderline_log_flag(self):
        # lambda2 at the floor with a subcritical operator carries B_0 = 1
        n = 3
        spec = PotentialSpec(n, "table", 0.0, 1.0, lambda_star(n), 1.0, 1,
                             lambda r: np.zeros_like(np.asarray(r, dtype=float)))
        tbl = exponent_table(spec, SUBCRITICAL, 3)
        assert tbl.B[0] == 1 and np.all(tbl.B[1:] == 0)

    def test_critical_k0_uses_minus_root(self):
        spec = PotentialSpec.hardy(4, lambda_star(4))
        tbl = exponent_table(spec, NULL_CRITICAL, 2)
        assert tbl.A2[0] == pytest.approx(-1.0)
        assert tbl.A2[1] == pytest.approx(a_exponents(lambda_star(4) + omega(1, 4), 4)[0])

    def test_positive_critical_band_rejected(self):
        # critical with A_20 <= -N/2 violates the admissibility clause
        n = 6
        spec = PotentialSpec(n, "table", lambda_star(n), 1.0, lambda_star(n) - 0 + 2.0,
                             1.0, 1, lambda r: np.zeros_like(np.asarray(r, dtype=float)))
        # A^-_{2.0} in N=6: (-4 - sqrt(16+8))/2 = -4.45 < -3
        with pytest.raises(SpectralError, match="positive-critical"):
            exponent_table(spec, NULL_CRITICAL, 2)

    def test_monotone_in_k(self):
        spec = PotentialSpec.hardy(3, 0.5)
        tbl = exponent_table(spec, SUBCRITICAL, 12)
        assert np.all(np.diff(tbl.A1) > 0)
        assert np.all(np.diff(tbl.A2) > 0)
        # A_k - k stays bounded
        assert np.max(np.abs(tbl.A1 - np.arange(13))) < 2.0

    def test_gap_bound(self):
        # 0 < A_1 - A_0 < 1 whenever lambda > 0
        for lam in np.linspace(0.1, 30, 40):
            for n in (3, 5):
                a0 = a_exponents(lam, n)[0]
                a1 = a_exponents(lam + omega(1, n), n)[0]
                assert 0.0 < a1 - a0 < 1.0


class TestClassification:
    def test_hardy_above_floor(self):
        assert classify_criticality(PotentialSpec.hardy(3, lambda_star(3) + 1)) \
            == SUBCRITICAL

    def test_hardy_at_floor(self):
        assert classify_criticality(PotentialSpec.hardy(3, lambda_star(3))) \
            == NULL_CRITICAL

    def test_zero(self):
        assert classify_criticality(PotentialSpec.zero(3)) == SUBCRITICAL

    def test_hardy_sweep_matches_rule(self):
        for lam in np.linspace(lambda_star(3), lambda_star(3) + 10, 15):
            got = classify_criticality(PotentialSpec.hardy(3, lam))
            want = SUBCRITICAL if lam > lambda_star(3) else NULL_CRITICAL
            assert got == want

    def test_positive_critical_detected_for_deep_floor(self):
        # N=6 Hardy at the floor: A^-_{lambda_*} = -(N-2)/2 = -2 > -3 = -N/2,
        # so still null-critical; the positive-critical regime needs A_20 < -N/2
        assert classify_criticality(PotentialSpec.hardy(6, lambda_star(6))) \
            == NULL_CRITICAL

    def test_bounded_potential_numeric(self):
        spec = PotentialSpec.inverse_power(3, 1.0, 4.0)
        assert classify_criticality(spec) == SUBCRITICAL


class TestNonnegativity:
    def test_hardy_floor_true(self):
        ok, ev = check_nonnegativity(PotentialSpec.hardy(3, lambda_star(3)))
        assert ok and ev["method"] == "hardy-inequality"

    def test_hardy_below_floor_unconstructible(self):
        # couplings below the floor violate the asymptotic-data invariant
        with pytest.raises(SpectralError):
            PotentialSpec.hardy(3, lambda_star(3) - 0.05)

    def test_nonnegative_potential(self):
        ok, ev = check_nonnegativity(PotentialSpec.inverse_power(3, 2.0, 4.0))
        assert ok and ev["method"] == "pointwise-sign"

    def test_constant_negative_potential(self):
        n = 3
        spec = PotentialSpec(n, "table", 0.0, 2.0, 0.0, 2.0, 1,
                             lambda r: np.full_like(np.asarray(r, dtype=float), -1.0))
        ok, ev = check_nonnegativity(spec)
        assert not ok
        assert ev["eigenvalue"] == pytest.approx(-1.0, abs=0.05)


class TestSmoothnessCheck:
    def test_inverse_power_bounded(self):
        spec = PotentialSpec.inverse_power(3, 1.0, 4.0)
        sups = check_inverse_square_smoothness(spec, ell_max=3)
        assert all(math.isfinite(v) for v in sups.values())

    def test_hardy_exact(self):
        spec = PotentialSpec.hardy(3, 2.0)
        sups = check_inverse_square_smoothness(spec, ell_max=2)
        assert sups[0] == pytest.approx(2.0)
        assert sups[1] == pytest.approx(4.0)
