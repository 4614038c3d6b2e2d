"""Log-sigmoid saturation fits for statistic-versus-sample-size curves.

Model: value(n) = s_max / (1 + exp(-a (log n - b))) with natural log.
The asymptote s_max is the quantity of interest; its 95% interval comes
from the linearized covariance at the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError

MAX_ITERATIONS = 500
REL_TOL = 1e-8


@dataclass(frozen=True)
class SigmoidFit:
    """Fitted saturation curve: asymptote, slope, log-midpoint, residuals, CI."""

    s_max: float
    a: float
    b: float
    rss: float
    ci_s_max: tuple[float, float]

    def predict(self, n) -> np.ndarray:
        x = np.log(np.asarray(n, dtype=np.float64))
        return self.s_max / (1.0 + np.exp(-self.a * (x - self.b)))


def _model(params: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Model values and Jacobian at log-sizes x."""
    s, a, b = params
    with np.errstate(over="ignore"):  # exp overflow saturates sig to 0, its true limit
        sig = 1.0 / (1.0 + np.exp(-a * (x - b)))
    m = s * sig
    dsig = sig * (1.0 - sig)
    J = np.column_stack([sig, s * dsig * (x - b), -s * dsig * a])
    return m, J


def _initial_params(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Seed: s_max at the observed max, b at the interpolated half-rise, a = 1."""
    s0 = float(v.max())
    half = s0 / 2.0
    b0 = float(x[0])
    above = v >= half
    if above[0]:
        b0 = float(x[0])
    elif above.any():
        j = int(np.argmax(above))
        v0, v1 = v[j - 1], v[j]
        frac = (half - v0) / (v1 - v0) if v1 != v0 else 0.5
        b0 = float(x[j - 1] + frac * (x[j] - x[j - 1]))
    else:
        b0 = float(x[-1])
    return np.array([s0, 1.0, b0])


def fit_log_sigmoid(samples) -> SigmoidFit:
    """Least-squares sigmoid parameters for (n, value) samples.

    Damped (Levenberg) iterative refinement from the deterministic seed;
    iteration stops when the relative parameter change drops below 1e-8 or
    after 500 iterations. Input order does not matter. Data that never
    saturates drives the asymptote out of (0, 1] and is rejected.
    """
    pts = [(int(n), float(v)) for n, v in samples]
    if any(n < 2 for n, _ in pts):
        raise FitError("sample sizes must be >= 2")
    if len({n for n, _ in pts}) < 4:
        raise FitError(f"need >= 4 distinct sample sizes, got {len({n for n, _ in pts})}")
    pts.sort()
    x = np.log(np.array([n for n, _ in pts], dtype=np.float64))
    v = np.array([val for _, val in pts])
    if not np.isfinite(v).all():
        raise FitError("values must be finite")
    if v.max() - v.min() < 1e-6:
        raise FitError("sigmoid unidentifiable: values are flat")

    params = _initial_params(x, v)
    m, J = _model(params, x)
    resid = v - m
    rss = float(resid @ resid)
    lam = 1e-3
    for _ in range(MAX_ITERATIONS):
        g = J.T @ resid
        JtJ = J.T @ J
        step = None
        while lam < 1e12:
            damped = JtJ + lam * np.diag(np.diag(JtJ).clip(min=1e-12))
            try:
                step = np.linalg.solve(damped, g)
            except np.linalg.LinAlgError:
                lam *= 3.0
                continue
            trial = params + step
            m_t, J_t = _model(trial, x)
            r_t = v - m_t
            rss_t = float(r_t @ r_t)
            if rss_t <= rss:
                break
            lam *= 3.0
            step = None
        if step is None:
            raise FitError("fit did not converge: no downhill step found")
        rel = np.abs(step) / np.maximum(np.abs(params), 1e-12)
        params, m, J, resid, rss = trial, m_t, J_t, r_t, rss_t
        lam = max(lam / 3.0, 1e-12)
        if rel.max() < REL_TOL:
            break

    s, a, b = (float(p) for p in params)
    if not 0.0 < s <= 1.0:
        raise FitError(f"fitted asymptote {s:.6g} outside (0, 1]")
    if a <= 0.0:
        raise FitError(f"fitted slope {a:.6g} is not positive")
    dof = len(pts) - 3
    try:
        cov = np.linalg.inv(J.T @ J) * (rss / dof if dof > 0 else rss)
    except np.linalg.LinAlgError:
        raise FitError("fit covariance is singular") from None
    se = float(np.sqrt(max(cov[0, 0], 0.0)))
    ci = (s - 1.96 * se, s + 1.96 * se)
    return SigmoidFit(s, a, b, rss, ci)
