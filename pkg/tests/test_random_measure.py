import cmath
import json

import numpy as np
import pytest

from stochrec.errors import CoverageError
from stochrec.path_space import PathWindow
from stochrec.random_measure import (
    CylinderSet,
    ParticleMeasure,
    StatReport,
    cylinder_prob,
    distributions_equal,
    integrate,
    ks_critical,
    ks_two_sample_threshold,
    measures_allclose,
    shift_measure,
)


def two_particle_measure(u0_values=(0.2, 0.8), offset=0, length=1):
    rows = [[v] * length for v in u0_values]
    return ParticleMeasure.from_matrix(offset, np.asarray(rows), None)


def point_mass(path: PathWindow) -> ParticleMeasure:
    return ParticleMeasure([path], [1.0])


class TestParticleMeasure:
    def test_requires_particles(self):
        with pytest.raises(ValueError):
            ParticleMeasure([], [])

    def test_weight_normalization_enforced(self):
        p = PathWindow(offset=0, values=(1.0,))
        with pytest.raises(ValueError):
            ParticleMeasure([p, p], [0.5, 0.6])
        with pytest.raises(ValueError):
            ParticleMeasure([p, p], [1.5, -0.5])

    def test_mismatched_windows_rejected(self):
        a = PathWindow(offset=0, values=(1.0, 2.0))
        b = PathWindow(offset=1, values=(1.0, 2.0))
        with pytest.raises(ValueError):
            ParticleMeasure([a, b], [0.5, 0.5])

    def test_particles_round_trip(self):
        a = PathWindow(offset=2, values=(1.0, 2.0))
        b = PathWindow(offset=2, values=(3.0, 4.0))
        mu = ParticleMeasure([a, b], [0.25, 0.75])
        assert mu.particles == (a, b)
        assert mu.offset == 2 and mu.window_length == 2

    def test_immutable(self):
        mu = two_particle_measure()
        with pytest.raises(AttributeError):
            mu.offset = 5
        with pytest.raises(ValueError):
            mu.values[0, 0] = 9.0

    def test_caller_arrays_not_captured(self):
        w = np.array([0.5, 0.5])
        v = np.array([[0.1], [0.9]])
        mu = ParticleMeasure.from_matrix(0, v, w)
        w[0] = 0.9
        v[0, 0] = 5.0
        assert mu.weights[0] == 0.5 and mu.values[0, 0] == 0.1


class TestIntegrate:
    def test_normalization(self):
        mu = two_particle_measure((0.1, 0.4, 0.9))
        assert integrate(mu, lambda p: 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_point_mass(self):
        path = PathWindow(offset=0, values=(0.3, 0.6))
        mu = point_mass(path)
        assert integrate(mu, lambda p: p.coordinate(1) ** 2) == pytest.approx(0.36)

    def test_indicator_average(self):
        mu = two_particle_measure((0.2, 0.8))
        value = integrate(mu, lambda p: 1.0 if p.coordinate(0) < 0.5 else 0.0)
        assert value == pytest.approx(0.5)

    def test_bounded_by_sup(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = rng.integers(1, 20)
            w = rng.random(n) + 1e-3
            w = w / w.sum()
            vals = rng.normal(size=(n, 3))
            mu = ParticleMeasure.from_matrix(0, vals, w)
            phase = rng.normal(size=3)
            f = lambda p: cmath.exp(1j * sum(c * v for c, v in zip(phase, p.values)))
            assert abs(integrate(mu, f)) <= 1.0 + 1e-12


class TestCylinderProb:
    def test_interval_validation(self):
        with pytest.raises(ValueError):
            CylinderSet(start=0, intervals=())
        with pytest.raises(ValueError):
            CylinderSet(start=0, intervals=((1.0, 1.0),))

    def test_full_range(self):
        mu = two_particle_measure((0.2, 0.8))
        assert cylinder_prob(mu, CylinderSet(0, ((0.0, 1.0),))) == 1.0

    def test_empty_overlap(self):
        mu = two_particle_measure((0.2, 0.8))
        assert cylinder_prob(mu, CylinderSet(0, ((2.0, 3.0),))) == 0.0

    def test_half_split(self):
        mu = two_particle_measure((0.2, 0.8))
        assert cylinder_prob(mu, CylinderSet(0, ((0.0, 0.5),))) == pytest.approx(0.5)

    def test_out_of_window(self):
        mu = two_particle_measure((0.2, 0.8))
        with pytest.raises(CoverageError):
            cylinder_prob(mu, CylinderSet(1, ((0.0, 1.0),)))

    def test_additive_over_tilings(self):
        rng = np.random.default_rng(11)
        vals = rng.random((64, 3))
        mu = ParticleMeasure.from_matrix(0, vals, None)
        for _ in range(100):
            a, b = sorted(rng.random(2))
            c = rng.uniform(a, b)
            base = ((0.0, 1.0), (0.25, 0.9))
            whole = cylinder_prob(mu, CylinderSet(0, base + ((a, b),)))
            left = cylinder_prob(mu, CylinderSet(0, base + ((a, c),)))
            right = cylinder_prob(mu, CylinderSet(0, base + ((c, b),)))
            assert whole == pytest.approx(left + right, abs=1e-12)

    def test_half_open_boundary(self):
        mu = two_particle_measure((0.5, 0.8))
        assert cylinder_prob(mu, CylinderSet(0, ((0.0, 0.5),))) == 0.0
        assert cylinder_prob(mu, CylinderSet(0, ((0.5, 1.0),))) == 1.0

    def test_monotone_in_each_interval(self):
        rng = np.random.default_rng(13)
        mu = ParticleMeasure.from_matrix(0, rng.random((64, 2)), None)
        for _ in range(50):
            a, b = sorted(rng.random(2))
            small = cylinder_prob(mu, CylinderSet(0, ((a, b), (0.2, 0.8))))
            grown = cylinder_prob(mu, CylinderSet(0, ((a - 0.1, b + 0.1), (0.2, 0.8))))
            assert grown >= small


class TestShiftMeasure:
    def test_identity(self):
        mu = two_particle_measure((0.2, 0.8), length=3)
        assert measures_allclose(shift_measure(mu, 0), mu)

    def test_composition(self):
        mu = two_particle_measure((0.2, 0.8), length=3)
        once = shift_measure(shift_measure(mu, 2), -5)
        assert measures_allclose(once, shift_measure(mu, -3))

    def test_pushforward_bookkeeping(self):
        # particles hold u_1 in {0.2, 0.8}; after shifting by 1 the same
        # values are read at index 0
        rows = np.asarray([[0.9, 0.2], [0.1, 0.8]])
        mu = ParticleMeasure.from_matrix(0, rows, None)
        shifted = shift_measure(mu, 1)
        delta0 = CylinderSet(0, ((0.0, 0.5),))
        delta1 = CylinderSet(1, ((0.0, 0.5),))
        assert cylinder_prob(shifted, delta0) == pytest.approx(0.5)
        assert cylinder_prob(shifted, delta0) == cylinder_prob(mu, delta1)

    def test_weights_and_integrals_preserved(self):
        rng = np.random.default_rng(3)
        w = rng.random(10)
        w /= w.sum()
        mu = ParticleMeasure.from_matrix(0, rng.random((10, 4)), w)
        shifted = shift_measure(mu, 2)
        assert np.array_equal(shifted.weights, mu.weights)
        f = lambda p: p.coordinate(-2) * 2.0 + 1.0
        from stochrec.path_space import shift_path

        assert integrate(shifted, f) == integrate(mu, lambda p: f(shift_path(p, 2)))


class TestStatReport:
    def test_invariant(self):
        with pytest.raises(ValueError):
            StatReport(
                test_name="x", statistic=2.0, threshold=1.0, passed=True, sample_size=1, seed=0
            )

    def test_serialization_fields(self):
        report = StatReport.from_statistic("demo", 0.5, 1.0, 100, 7)
        data = json.loads(report.to_json())
        assert sorted(data) == [
            "passed",
            "sample_size",
            "seed",
            "statistic",
            "test_name",
            "threshold",
        ]
        assert data["passed"] is True


class TestDistributionsEqual:
    @staticmethod
    def constant_sampler(level: float):
        mu = ParticleMeasure.from_matrix(0, np.full((4, 2), level), None)
        return lambda r: mu

    def test_identical_seeds_trivially_pass(self):
        rng_rows = np.random.default_rng(5).random((8, 2))

        def sampler(r):
            return ParticleMeasure.from_matrix(0, rng_rows + (r % 7) * 0.01, None)

        deltas = [CylinderSet(0, ((0.0, 0.5),)), CylinderSet(1, ((0.2, 0.7),))]
        report = distributions_equal(sampler, sampler, deltas, 120, 0.01)
        assert report.statistic == 0.0
        assert report.passed

    def test_separated_point_masses_fail(self):
        deltas = [CylinderSet(0, ((0.0, 0.5),))]
        report = distributions_equal(
            self.constant_sampler(0.0), self.constant_sampler(1.0), deltas, 150, 0.01
        )
        assert report.statistic == 1.0
        assert not report.passed

    def test_parameter_validation(self):
        deltas = [CylinderSet(0, ((0.0, 0.5),))]
        s = self.constant_sampler(0.0)
        with pytest.raises(ValueError):
            distributions_equal(s, s, deltas, 99, 0.01)
        with pytest.raises(ValueError):
            distributions_equal(s, s, [], 150, 0.01)
        with pytest.raises(ValueError):
            distributions_equal(s, s, deltas, 150, 1.5)

    def test_thread_count_does_not_change_result(self):
        rows = np.random.default_rng(9).random((16, 2))

        def sampler_a(r):
            return ParticleMeasure.from_matrix(0, np.roll(rows, r, axis=0), None)

        def sampler_b(r):
            return ParticleMeasure.from_matrix(0, np.roll(rows, r + 3, axis=0), None)

        deltas = [CylinderSet(0, ((0.0, 0.5),)), CylinderSet(1, ((0.1, 0.6),))]
        one = distributions_equal(sampler_a, sampler_b, deltas, 128, 0.05, threads=1)
        four = distributions_equal(sampler_a, sampler_b, deltas, 128, 0.05, threads=4)
        assert one == four


class TestKsThresholds:
    def test_critical_constant(self):
        # the asymptotic two-sided quantile at the one percent level
        assert ks_critical(0.01) == pytest.approx(1.628, abs=1e-3)

    def test_two_sample_equal_sizes(self):
        n = 400
        assert ks_two_sample_threshold(0.01, n, n) == pytest.approx(
            ks_critical(0.01) * np.sqrt(2.0 / n)
        )
