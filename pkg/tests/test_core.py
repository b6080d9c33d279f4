import math

import numpy as np
import pytest
import scipy.special as sp

from fraclayer.core import (
    GridFunction,
    Potential,
    SpectralMeasure,
    c_ns,
    phi,
    validate_potential,
)


class TestNormalizationConstant:
    def test_half_laplacian_value(self):
        # independent gamma oracle: Gamma(1) = 1, Gamma(3/2) = sqrt(pi)/2
        expected = math.pi ** -0.5 * 2.0 * 1.0 / (math.sqrt(math.pi) / 2.0) * 0.25
        assert abs(expected - 1.0 / math.pi) < 1e-15
        assert c_ns(1, 0.5) == pytest.approx(1.0 / math.pi, rel=1e-13)

    def test_quarter_value_via_gamma_oracle(self):
        # Gamma(0.75)/Gamma(1.75) = 4/3 exactly by the recurrence
        expected = math.pi ** -0.5 * 2.0 ** 0.5 * (4.0 / 3.0) * 0.25 * 0.75
        assert c_ns(1, 0.25) == pytest.approx(expected, rel=1e-13)
        assert c_ns(1, 0.25) == pytest.approx(0.1994711, rel=1e-6)

    def test_vanishes_at_endpoints(self):
        assert c_ns(1, 1.0 - 1e-9) < 1e-8
        assert c_ns(1, 1e-9) < 1e-8

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_against_scipy_gamma(self, n):
        for s in np.linspace(0.05, 0.95, 19):
            ref = (
                math.pi ** (-n / 2.0)
                * 2.0 ** (2.0 * s)
                * float(sp.gamma((n + 2.0 * s) / 2.0) / sp.gamma(2.0 - s))
                * s
                * (1.0 - s)
            )
            assert c_ns(n, s) == pytest.approx(ref, rel=1e-12)

    def test_ratio_to_s_one_minus_s_bounded(self):
        vals = [c_ns(1, s) / (s * (1.0 - s)) for s in np.linspace(0.05, 0.95, 91)]
        assert max(vals) < 2.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            c_ns(1, 0.0)
        with pytest.raises(ValueError):
            c_ns(1, 1.0)
        with pytest.raises(ValueError):
            c_ns(0, 0.5)


class TestGammaIdentities:
    """math.gamma backs the explicit constants; verify it against the
    classical identities on the range the constants use."""

    def test_reflection(self):
        for x in np.linspace(0.07, 0.93, 25):
            lhs = math.gamma(x) * math.gamma(1.0 - x)
            assert lhs == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-12)

    def test_recurrence(self):
        for x in np.linspace(0.05, 2.0, 40):
            assert math.gamma(x + 1.0) == pytest.approx(x * math.gamma(x), rel=1e-12)

    def test_half_integers(self):
        assert math.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
        assert math.gamma(1.5) == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-14)


class TestGrowthBenchmark:
    def test_log_branch(self):
        assert phi(1, 0.5, 4.0) == pytest.approx(math.log(4.0), rel=1e-13)
        assert phi(2, 0.5, 10.0) == pytest.approx(10.0 * math.log(10.0), rel=1e-13)

    def test_bounded_branch(self):
        # s = 3/4: 2 (1 - R^{-1/2}) -> 2
        assert phi(1, 0.75, 1e8) == pytest.approx(2.0, abs=1e-3)
        assert phi(1, 0.75, 16.0) == pytest.approx(2.0 * (1.0 - 0.25), rel=1e-12)

    def test_continuity_at_half(self):
        # near s = 1/2 the ratio formula is evaluated without cancellation:
        # (R^e - 1)/e = log R (1 + e log R / 2 + e^2 log^2 R / 6 + ...)
        for R in (2.0, 7.0, 100.0):
            for ds in (1e-6, -1e-6):
                e = -2.0 * ds
                L = math.log(R)
                series = L * (1.0 + e * L / 2.0 + e * e * L * L / 6.0)
                assert abs(phi(1, 0.5 + ds, R) - series) < 1e-8 * max(1.0, series)

    @pytest.mark.parametrize("R", [2.0, 4.0, 16.0, 256.0])
    def test_decreasing_in_s(self, R):
        svals = np.linspace(0.05, 1.0, 50)
        pvals = [phi(1, s, R) for s in svals]
        assert all(a > b for a, b in zip(pvals, pvals[1:]))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            phi(1, 0.5, 1.5)


class TestPotential:
    def test_quartic_passes(self):
        report = validate_potential(Potential.quartic())
        assert report.all_passed, str(report)

    def test_peierls_nabarro_passes(self):
        p = Potential.peierls_nabarro()
        report = validate_potential(p)
        assert report.all_passed, str(report)
        # W'(u) = -(1/pi) sin(pi u)
        t = np.linspace(-1, 1, 11)
        np.testing.assert_allclose(p.dw(t), -np.sin(np.pi * t) / np.pi, atol=1e-14)

    def test_square_fails_well_height(self):
        report = validate_potential(Potential.polynomial([0.0, 0.0, 1.0]))
        assert not report.all_passed
        failed = [c for c in report.checks if not c.passed]
        assert any("wells" in c.name for c in failed)

    def test_second_derivative(self):
        p = Potential.quartic()
        t = np.linspace(-1.2, 1.2, 25)
        h = 1e-5
        fd = (p.dw(t + h) - p.dw(t - h)) / (2 * h)
        np.testing.assert_allclose(fd, p.d2w(t), atol=1e-8)


class TestSpectralMeasure:
    def test_mass_validation(self):
        with pytest.raises(ValueError):
            SpectralMeasure(atoms=((0.5, 0.5),))
        SpectralMeasure(atoms=((0.5, 0.5),), lap_mass=0.5)

    def test_atom_at_one_rejected(self):
        with pytest.raises(ValueError):
            SpectralMeasure(atoms=((1.0, 1.0),))

    def test_support_floor(self):
        with pytest.raises(ValueError):
            SpectralMeasure(atoms=((0.01, 1.0),))

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            SpectralMeasure(atoms=((0.5, 0.5), (0.5, 0.5)))

    def test_sorted_and_s_star(self):
        m = SpectralMeasure(atoms=((0.7, 0.5), (0.3, 0.5)))
        assert m.atoms[0][0] == 0.3
        assert m.s_star == 0.3
        mc = SpectralMeasure(atoms=(), lap_mass=1.0)
        assert mc.s_star == 1.0

    def test_from_config_roundtrip(self):
        m = SpectralMeasure.from_config([[0.3, 0.4], [0.7, 0.4]], lap_mass=0.2)
        assert m.lap_mass == 0.2
        assert sum(w for _, w in m.atoms) == pytest.approx(0.8, abs=1e-15)


class TestGridFunction:
    def test_spacing(self):
        u = GridFunction.constant(0.0, 10.0, 101, tail="zero")
        assert u.h == pytest.approx(0.2)
        assert u.x[0] == -10.0 and u.x[-1] == 10.0

    def test_periodic_spacing(self):
        u = GridFunction.from_callable(np.cos, np.pi, 64, tail="periodic")
        assert u.h == pytest.approx(2 * np.pi / 64)
        assert u.x[-1] == pytest.approx(np.pi - u.h)

    def test_tail_values(self):
        u = GridFunction(1, 5.0, 11, np.linspace(-0.9, 0.9, 11), "layer")
        assert u.tail_values() == (-1.0, 1.0)
        z = GridFunction(1, 5.0, 11, np.linspace(-0.9, 0.9, 11), "zero")
        assert z.tail_values() == (0.0, 0.0)
        c = GridFunction(1, 5.0, 11, np.linspace(-0.9, 0.9, 11), "constant")
        assert c.tail_values() == (-0.9, 0.9)

    def test_rejects_nan(self):
        vals = np.zeros(11)
        vals[3] = np.nan
        with pytest.raises(ValueError):
            GridFunction(1, 5.0, 11, vals, "zero")

    def test_values_read_only(self):
        u = GridFunction.constant(0.0, 10.0, 11)
        with pytest.raises(ValueError):
            u.values[0] = 1.0
