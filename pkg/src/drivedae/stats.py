"""Two-sample comparison used by the evaluation reports."""

from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats


class StatsError(Exception):
    pass


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float

    def __str__(self):
        return f"t({self.df:.1f}) = {self.t:.3f}, p = {self.p:.4g}"


def welch_t_test(sample_a, sample_b) -> WelchResult:
    """Welch's unequal-variance t-test, two-sided.

    t = (mean_a - mean_b) / sqrt(var_a/n_a + var_b/n_b) with sample
    variances, Welch-Satterthwaite degrees of freedom, and the p-value
    from the t distribution.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.ndim != 1 or b.ndim != 1:
        raise StatsError("samples must be one-dimensional")
    n_a, n_b = len(a), len(b)
    if n_a < 2 or n_b < 2:
        raise StatsError("each sample needs at least 2 values")
    va = float(np.var(a, ddof=1))
    vb = float(np.var(b, ddof=1))
    if va == 0.0 and vb == 0.0:
        raise StatsError("both samples have zero variance")
    sa, sb = va / n_a, vb / n_b
    t = (float(np.mean(a)) - float(np.mean(b))) / np.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa ** 2 / (n_a - 1) + sb ** 2 / (n_b - 1))
    p = 2.0 * float(_scipy_stats.t.sf(abs(t), df))
    return WelchResult(t=float(t), df=float(df), p=p)


def samples_with_moments(mean: float, sd: float, n: int, seed: int = 0) -> np.ndarray:
    """A sample of size n whose sample mean and sample SD (n-1) match the
    given moments exactly; shape is otherwise arbitrary but deterministic."""
    if n < 2:
        raise StatsError("need n >= 2")
    if sd < 0:
        raise StatsError("sd must be >= 0")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    z = z - z.mean()
    s = z.std(ddof=1)
    if s == 0.0:
        z = np.linspace(-1.0, 1.0, n)
        z = z - z.mean()
        s = z.std(ddof=1)
    return mean + sd * z / s
