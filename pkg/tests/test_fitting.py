"""Log-sigmoid saturation fits."""

import numpy as np
import pytest

from sastat import FitError, fit_log_sigmoid


def sigmoid_samples(s_max, a, b, ns, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    x = np.log(np.asarray(ns, dtype=float))
    v = s_max / (1.0 + np.exp(-a * (x - b))) + noise * rng.standard_normal(len(x))
    return list(zip(ns, v))


LOG_SPACED_NS = [int(v) for v in np.logspace(2, 6, 12)]


class TestRecovery:
    def test_exact_parameters_recovered(self):
        fit = fit_log_sigmoid(sigmoid_samples(0.9, 0.5, 7.0, LOG_SPACED_NS))
        assert fit.s_max == pytest.approx(0.9, abs=1e-6)
        assert fit.a == pytest.approx(0.5, abs=1e-6)
        assert fit.b == pytest.approx(7.0, abs=1e-6)
        assert fit.rss < 1e-12

    def test_noisy_parameters_roughly_recovered(self):
        fit = fit_log_sigmoid(sigmoid_samples(0.9, 0.5, 7.0, LOG_SPACED_NS, noise=0.01, seed=3))
        assert fit.s_max == pytest.approx(0.9, abs=0.05)
        assert fit.ci_s_max[0] < 0.9 < fit.ci_s_max[1]

    def test_reorder_invariant(self):
        samples = sigmoid_samples(0.8, 0.4, 6.0, LOG_SPACED_NS, noise=0.02, seed=1)
        a = fit_log_sigmoid(samples)
        b = fit_log_sigmoid(list(reversed(samples)))
        assert a == b

    def test_ci_from_saturating_curve_excludes_one(self):
        # same shape as the elevation-style saturation curve
        ns = [int(v) for v in np.logspace(1.5, 7, 16)]
        fit = fit_log_sigmoid(sigmoid_samples(0.942, 0.361, 3.035, ns, noise=0.005, seed=5))
        assert fit.ci_s_max[1] < 1.0

    def test_gradient_vanishes_at_optimum(self):
        samples = sigmoid_samples(0.85, 0.6, 6.5, LOG_SPACED_NS, noise=0.02, seed=9)
        fit = fit_log_sigmoid(samples)
        params = np.array([fit.s_max, fit.a, fit.b])
        x = np.log([float(n) for n, _ in samples])
        v = np.array([val for _, val in samples])

        def rss_at(p):
            m = p[0] / (1.0 + np.exp(-p[1] * (x - p[2])))
            return float(((v - m) ** 2).sum())

        grad = np.empty(3)
        for i in range(3):
            h = 1e-6 * max(abs(params[i]), 1e-12)
            up = params.copy(); up[i] += h
            dn = params.copy(); dn[i] -= h
            grad[i] = (rss_at(up) - rss_at(dn)) / (2 * h)
        assert np.linalg.norm(grad) < 1e-4 * fit.rss


class TestErrors:
    def test_flat_values_unidentifiable(self):
        with pytest.raises(FitError, match="unidentifiable"):
            fit_log_sigmoid([(10, 0.5), (100, 0.5), (1000, 0.5), (10000, 0.5)])

    def test_too_few_distinct_sizes(self):
        with pytest.raises(FitError, match="4 distinct"):
            fit_log_sigmoid([(10, 0.1), (10, 0.2), (100, 0.3), (1000, 0.4)])

    def test_non_finite_values(self):
        with pytest.raises(FitError, match="finite"):
            fit_log_sigmoid([(10, 0.1), (100, np.nan), (1000, 0.3), (10000, 0.4)])

    def test_tiny_sizes_rejected(self):
        with pytest.raises(FitError, match=">= 2"):
            fit_log_sigmoid([(1, 0.1), (10, 0.2), (100, 0.3), (1000, 0.4)])

    def test_decreasing_data_fails_cleanly(self):
        samples = [(10, 0.9), (100, 0.6), (1000, 0.3), (10000, 0.05)]
        with pytest.raises(FitError):
            fit_log_sigmoid(samples)

    def test_never_saturating_data_rejected(self):
        # pure exponential rise: the asymptote is unidentifiable and the
        # fitted s_max escapes (0, 1]
        ns = [int(v) for v in np.logspace(2, 4, 8)]
        samples = [(n, 0.02 * np.exp(0.5 * (np.log(n) - 4.0))) for n in ns]
        with pytest.raises(FitError, match="outside"):
            fit_log_sigmoid(samples)


class TestPredict:
    def test_predict_matches_model(self):
        fit = fit_log_sigmoid(sigmoid_samples(0.9, 0.5, 7.0, LOG_SPACED_NS))
        n = 5000
        expected = 0.9 / (1.0 + np.exp(-0.5 * (np.log(n) - 7.0)))
        assert fit.predict(n) == pytest.approx(expected, rel=1e-5)
