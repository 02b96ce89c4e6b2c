"""Shared test helpers: seeded streams and goodness-of-fit machinery."""

import numpy as np
from scipy import stats


def rng(seed=0):
    return np.random.default_rng(seed)


def complex_gauss(generator, shape, sigma2=1.0):
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (generator.standard_normal(shape)
                    + 1j * generator.standard_normal(shape))


def chi2_gof_pvalue(samples, pdf, lo, hi, bins=50, grid_points=200_001):
    """Chi-square goodness of fit with equal-expected-mass bins.

    Bin edges are quantiles of the analytic CDF (fine-grid trapezoid), so
    every expected count is n/bins; the pdf parameters are fixed, not
    fitted, hence df = bins - 1.
    """
    samples = np.asarray(samples)
    grid = np.linspace(lo, hi, grid_points)
    dens = pdf(grid)
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(grid))])
    cdf /= cdf[-1]
    qs = np.linspace(0.0, 1.0, bins + 1)[1:-1]
    edges = np.interp(qs, cdf, grid)
    obs = np.histogram(samples, bins=np.concatenate([[-np.inf], edges, [np.inf]]))[0]
    expected = np.full(bins, samples.size / bins)
    return stats.chisquare(obs, expected).pvalue
