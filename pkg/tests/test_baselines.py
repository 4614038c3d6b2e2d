"""Moran's I and Geary's C: hand values, oracles, invariance, nulls, scaling."""

import time

import numpy as np
import pytest

from oracles import naive_geary, naive_moran
from sastat import (
    CoincidentPointsError,
    DataError,
    FeatureVector,
    PointSet,
    ZeroVarianceError,
    gen_iid,
    geary_c,
    moran_i,
    permutation_null,
    single_linkage,
)
from sastat.baselines import WeightScheme

THREE_POINTS = PointSet([[0, 0], [1, 0], [2, 0]])
THREE_Z = FeatureVector("z", [1.0, 2.0, 3.0])


class TestHandValues:
    def test_moran(self):
        r = moran_i(THREE_POINTS, THREE_Z)
        assert r.value == pytest.approx(-0.3, abs=1e-12)
        assert r.weight_total == pytest.approx(5.0, abs=1e-12)
        assert r.n == 3

    def test_geary(self):
        r = geary_c(THREE_POINTS, THREE_Z)
        assert r.value == pytest.approx(0.8, abs=1e-12)

    def test_geary_similar_neighbors_score_low(self):
        # tight pairs share identical values; the two far-apart pairs differ
        pts = PointSet([[0, 0], [0, 0.01], [50, 0], [50, 0.01]])
        z = FeatureVector("z", [1.0, 1.0, 9.0, 9.0])
        r = geary_c(pts, z)
        assert r.value < 0.2


class TestErrors:
    def test_constant_feature(self):
        with pytest.raises(ZeroVarianceError):
            moran_i(THREE_POINTS, FeatureVector("z", [2.0, 2.0, 2.0]))
        with pytest.raises(ZeroVarianceError):
            geary_c(THREE_POINTS, FeatureVector("z", [2.0, 2.0, 2.0]))

    def test_coincident_points(self):
        pts = PointSet([[0, 0], [0, 0], [1, 1]])
        with pytest.raises(CoincidentPointsError, match="coincide"):
            moran_i(pts, FeatureVector("z", [1.0, 2.0, 3.0]))

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            moran_i(THREE_POINTS, FeatureVector("z", [1.0, 2.0]))

    def test_weight_scheme_fixed(self):
        with pytest.raises(DataError, match="unsupported weight scheme"):
            WeightScheme("queen")


class TestOracleEquivalence:
    @pytest.mark.parametrize("n", [5, 47, 150, 300])
    def test_matches_naive_double_loop(self, rng, n):
        pts = rng.random((n, 2)) * 4
        z = rng.standard_normal(n)
        ps, fv = PointSet(pts), FeatureVector("z", z)
        assert moran_i(ps, fv).value == pytest.approx(naive_moran(pts, z), rel=1e-9)
        assert geary_c(ps, fv).value == pytest.approx(naive_geary(pts, z), rel=1e-9)


class TestInvariance:
    def test_affine(self, rng):
        for _ in range(5):
            n = int(rng.integers(10, 80))
            ps = PointSet(rng.random((n, 2)))
            z = rng.standard_normal(n)
            base_m = moran_i(ps, FeatureVector("z", z)).value
            base_g = geary_c(ps, FeatureVector("z", z)).value
            for c in (-3.0, 0.5, 10.0):
                assert moran_i(ps, FeatureVector("z", z + c)).value == pytest.approx(base_m, abs=1e-9)
                assert moran_i(ps, FeatureVector("z", c * z)).value == pytest.approx(base_m, abs=1e-9)
                assert geary_c(ps, FeatureVector("z", z + c)).value == pytest.approx(base_g, abs=1e-9)
                assert geary_c(ps, FeatureVector("z", c * z)).value == pytest.approx(base_g, abs=1e-9)


class TestPermutationNull:
    def test_seed_determinism(self):
        data = gen_iid(40, 8)
        fv = data.features["value"]
        a = permutation_null("moran", points=data.points, z=fv, reps=50, seed=3)
        b = permutation_null("moran", points=data.points, z=fv, reps=50, seed=3)
        assert a == b
        c = permutation_null("moran", points=data.points, z=fv, reps=50, seed=4)
        assert c.mean != a.mean

    def test_sa_null_mean(self):
        data = gen_iid(50, 12)
        order = single_linkage(data.points)
        summary = permutation_null("sa", order=order, z=data.features["value"], reps=500, seed=7)
        se = summary.std / np.sqrt(summary.reps)
        assert abs(summary.mean - (-1.0 / 49.0)) <= 3 * se

    def test_moran_null_mean(self):
        data = gen_iid(50, 13)
        summary = permutation_null(
            "moran", points=data.points, z=data.features["value"], reps=500, seed=7
        )
        se = summary.std / np.sqrt(summary.reps)
        assert abs(summary.mean - (-1.0 / 49.0)) <= 3 * se

    def test_bad_args(self):
        data = gen_iid(10, 1)
        with pytest.raises(DataError):
            permutation_null("sa", z=data.features["value"], reps=5, seed=0)
        with pytest.raises(DataError):
            permutation_null("moran", z=data.features["value"], reps=5, seed=0)
        with pytest.raises(DataError, match="unknown statistic"):
            permutation_null("gamma", points=data.points, z=data.features["value"], reps=5, seed=0)
        with pytest.raises(DataError):
            permutation_null("moran", points=data.points, z=data.features["value"], reps=0, seed=0)


class TestScaling:
    def test_quadratic_runtime_exponent(self):
        sizes = [1000, 2000, 4000, 8000]
        times_m, times_g = [], []
        for i, n in enumerate(sizes):
            data = gen_iid(n, 100 + i)
            fv = data.features["value"]
            best_m = min(
                _timed(lambda: moran_i(data.points, fv)) for _ in range(3)
            )
            best_g = min(
                _timed(lambda: geary_c(data.points, fv)) for _ in range(3)
            )
            times_m.append(best_m)
            times_g.append(best_g)
        for times in (times_m, times_g):
            slope = np.polyfit(np.log(sizes), np.log(times), 1)[0]
            assert 1.7 <= slope <= 2.3, f"slope {slope} outside 2.0 +/- 0.3"


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0
