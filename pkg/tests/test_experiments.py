"""Experiment harness: reproducibility, schemas, capped-size notices."""

import numpy as np
import pytest

from sastat import DataError, gen_iid
from sastat.experiments import (
    BenchRecord,
    half_range_crossing,
    log_spaced_radii,
    rescale_to_range,
    run_disk,
    run_grid,
    run_subsample,
    run_timing,
    scaling_slope,
    validate_csv,
    write_bench_csv,
    write_grid_csv,
    write_sweep_csv,
)


class TestTiming:
    def test_records_and_notices(self, tmp_path):
        records, notices = run_timing([100, 300], seed=0, reps=3, quad_cap=200, matrix_cap=200)
        stats_at = {(r.statistic, r.n) for r in records}
        assert ("single-order", 100) in stats_at
        assert ("sa-given-order", 300) in stats_at
        assert ("moran", 100) in stats_at
        assert ("moran", 300) not in stats_at  # above quad cap
        assert ("median-order", 300) not in stats_at  # above matrix cap
        assert any("moran skipped at n=300" in n for n in notices)
        assert any("median-order skipped at n=300" in n for n in notices)
        out = tmp_path / "bench.csv"
        write_bench_csv(records, out, notices)
        count = validate_csv(out, ["statistic", "n", "seconds", "reps"])
        assert count == len(records)
        text = out.read_text()
        assert text.startswith("# platform:")

    def test_bench_record_invariants(self):
        with pytest.raises(DataError):
            BenchRecord("x", 10, 0.5, reps=2)
        with pytest.raises(DataError):
            BenchRecord("x", 10, 0.0, reps=3)

    def test_scaling_slope_requires_two_sizes(self):
        with pytest.raises(DataError):
            scaling_slope([BenchRecord("x", 10, 0.5, 3)], "x")


class TestDisk:
    def test_log_spaced_radii(self):
        radii = log_spaced_radii(1e-3, 1.0, 13)
        assert len(radii) == 13
        assert radii[0] == pytest.approx(1e-3)
        assert radii[-1] == pytest.approx(1.0)
        ratios = radii[1:] / radii[:-1]
        assert np.allclose(ratios, ratios[0])

    def test_reproducible_and_schema(self, tmp_path):
        radii = log_spaced_radii(0.01, 0.5, 5)
        a = run_disk(60, radii, reps=3, seed=5)
        b = run_disk(60, radii, reps=3, seed=5)
        assert a.rows == b.rows
        assert a.half_range_radius == b.half_range_radius
        out = tmp_path / "disk.csv"
        write_sweep_csv(a.rows, out, "radius")
        count = validate_csv(out, ["radius", "statistic", "mean", "std", "reps_used", "dropped"])
        assert count == len(a.rows)

    def test_null_level_at_tiny_radius(self):
        radii = [1e-6, 0.05, 0.3]
        result = run_disk(80, radii, reps=4, seed=2)
        row = result.row(1e-6, "sa-single")
        # radius below the minimum spacing leaves the feature i.i.d.
        assert abs(row.mean - (-1.0 / 79.0)) < 0.15

    def test_all_dropped_radius_is_an_error(self):
        # a radius beyond every diameter averages everything away
        with pytest.raises(DataError, match="all replicates dropped"):
            run_disk(20, [1e-6, 5.0], reps=3, seed=1)

    def test_partial_drops_are_counted(self):
        # with n=2 on the unit square, r=0.5 exceeds some replicate
        # diameters (drop) but not others (identity)
        result = run_disk(2, [1e-6, 0.5], reps=20, seed=3)
        row = result.row(0.5, "sa-single")
        assert 0 < row.dropped < 20
        assert row.reps_used == 20 - row.dropped
        # every surviving pair scores exactly -1, so the sweep is flat
        assert result.half_range_radius["sa-single"] is None

    def test_half_range_crossing_interpolates(self):
        radii = np.array([0.01, 0.1, 1.0])
        means = np.array([0.0, 0.2, 1.0])
        # crossing 0.5 between 0.1 and 1.0; log-interpolated
        r = half_range_crossing(radii, means)
        assert 0.1 < r < 1.0
        frac = (0.5 - 0.2) / 0.8
        assert r == pytest.approx(10 ** (-1 + frac))

    def test_half_range_flat_curve_rejected(self):
        with pytest.raises(DataError):
            half_range_crossing(np.array([0.1, 1.0]), np.array([0.5, 0.5]))

    def test_rescale_to_range(self):
        v = np.array([2.0, 4.0, 6.0])
        t = np.array([-1.0, 0.0, 1.0])
        out = rescale_to_range(v, t)
        assert out.tolist() == [-1.0, 0.0, 1.0]


class TestGrid:
    def test_rows_fits_and_schema(self, tmp_path):
        ns = [50, 120, 300, 700, 1600]
        result = run_grid([3], ns, reps=3, seed=9, quad_cap=400)
        assert 3 in result.fits
        ks = {k for k, *_ in result.rows}
        assert ks == {3}
        moran_ns = {n for _, n, stat, *_ in result.rows if stat == "moran"}
        assert moran_ns == {50, 120, 300}  # capped
        out = tmp_path / "grid.csv"
        write_grid_csv(result, out)
        count = validate_csv(out, ["k", "n", "statistic", "mean", "std", "reps_used"])
        assert count == len(result.rows)

    def test_reproducible(self):
        ns = [49, 116, 271, 632, 1473, 3433, 8000]
        a = run_grid([3], ns, reps=4, seed=1, quad_cap=0)
        b = run_grid([3], ns, reps=4, seed=1, quad_cap=0)
        assert a.rows == b.rows
        assert a.fits == b.fits

    def test_fine_grid_baselines_near_their_null_levels(self):
        # many tiny cells decorrelate the field: Moran ends near 0 and
        # Geary near 1 even at the largest quadratic-budget sizes
        from sastat import geary_c, grid_sample, moran_i

        moran_vals, geary_vals = [], []
        for r in range(3):
            data = grid_sample(100, 2000, 50 + r)
            moran_vals.append(moran_i(data.points, data.features["value"]).value)
            geary_vals.append(geary_c(data.points, data.features["value"]).value)
        assert abs(np.mean(moran_vals)) < 0.05
        assert abs(np.mean(geary_vals) - 1.0) < 0.05


class TestSubsample:
    def test_rows_and_determinism(self, tmp_path):
        data = gen_iid(200, 3)
        rows_a = run_subsample(data, "value", [2, 50, 100], reps=3, seed=6)
        rows_b = run_subsample(data, "value", [2, 50, 100], reps=3, seed=6)
        assert rows_a == rows_b
        out = tmp_path / "sub.csv"
        write_sweep_csv(rows_a, out, "m")
        validate_csv(out, ["m", "statistic", "mean", "std", "reps_used", "dropped"])

    def test_m_two_reports_minus_one(self):
        data = gen_iid(100, 5)
        rows = run_subsample(data, "value", [2], reps=4, seed=0)
        sa_row = next(r for r in rows if r.statistic == "sa-single")
        assert sa_row.mean == -1.0
        assert sa_row.std == 0.0

    def test_median_sa_robust_to_sampling_pattern(self):
        # same smooth field, same n, uniform versus strongly density-skewed
        # coordinates: the median-linkage statistic barely moves while the
        # weight-based baselines shift
        def field(coords):
            x, y = coords[:, 0], coords[:, 1]
            return np.sin(3 * x) * np.cos(2 * y) + 0.5 * np.sin(7 * x + 1.0) * np.sin(5 * y)

        from sastat import FeatureVector, PointSet, compute_sa, geary_c, median_linkage, moran_i

        def stats_at(coords):
            ps = PointSet(coords)
            fv = FeatureVector("z", field(coords))
            return {
                "sa-median": compute_sa(median_linkage(ps), fv).value,
                "moran": moran_i(ps, fv).value,
                "geary": geary_c(ps, fv).value,
            }

        n = 2500
        rng = np.random.default_rng(4242)
        uniform = rng.random((n, 2))
        skewed = rng.random((n * 6, 2))
        keep = rng.random(n * 6) < np.exp(-3.0 * skewed[:, 0])
        skewed = skewed[keep][:n]
        su, si = stats_at(uniform), stats_at(skewed)
        shift = {k: abs(su[k] - si[k]) / abs(su[k]) for k in su}
        assert shift["sa-median"] < 0.05
        assert shift["sa-median"] < shift["moran"]
        assert shift["sa-median"] < shift["geary"]


class TestValidateCsv:
    def test_rejects_wrong_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(DataError, match="header"):
            validate_csv(p, ["a", "c"])

    def test_rejects_ragged_rows(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n3\n")
        with pytest.raises(DataError, match="fields"):
            validate_csv(p, ["a", "b"])
