"""
Interleaved Rician fading SISO channel, y = diag(h) x + v.

The fading is normalized so that E[h^2] = 1 for every K, so K -> infinity is the
AWGN channel with h = 1 and the VNR needs no fading power term.

Samples are drawn as h = |m + s G1, s G2| with m = sqrt(K/(1+K)), s = sqrt(1/(2(1+K))).
The density rho(h) = 2h(1+K) exp(-K - h^2(1+K)) I0(2h sqrt(K^2+K)) is evaluated
with the exponentially scaled Bessel function, which folds e^x into the
exponent:  -K - h^2(1+K) + 2h sqrt(K(1+K)) = -(h sqrt(1+K) - sqrt(K))^2 <= 0.
"""

import dataclasses
import logging
import math
import typing

import numpy as np
import numpy.typing as npt
from scipy import integrate, special, stats

from rician_lattice_analyzer.core import (LengthMismatch, NegativeInput, NegativeK, NonpositiveVariance,
                                          NonpositiveVolume, NumericalFailure)

logger = logging.getLogger(__name__)

# Positive real fade vector, i.i.d. components
FadeRealization = npt.NDArray[np.float64]

QUAD_TOL = 1e-13


@dataclasses.dataclass(frozen=True)
class ChannelParams:
    K: float
    sigma2: float
    n: int

    def __post_init__(self):
        if self.K < 0:
            raise NegativeK(f"Rician factor must be nonnegative, got K = {self.K}")
        if not self.sigma2 > 0:
            raise NonpositiveVariance(f"Noise variance must be positive, got {self.sigma2}")

    @classmethod
    def from_vnr(cls, K, vnr_db, lattice):
        return cls(K=K, sigma2=vnr_to_sigma2(vnr_db, lattice.volume, lattice.n), n=lattice.n)


def _check_k(K):
    if K < 0:
        raise NegativeK(f"Rician factor must be nonnegative, got K = {K}")


def _rice_parameters(K):
    return math.sqrt(K / (1.0 + K)), math.sqrt(1.0 / (2.0 * (1.0 + K)))


def rician_sample(K, count, rng):
    """i.i.d. Rician fades; count may be an int or a shape tuple"""
    _check_k(K)
    shape = (count,) if isinstance(count, (int, np.integer)) else tuple(count)
    m, s = _rice_parameters(K)
    g = rng.standard_normal((2,) + shape)
    return np.hypot(m + s * g[0], s * g[1])


def rician_pdf(h, K):
    _check_k(K)
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr < 0):
        raise NegativeInput(f"Fade amplitude must be nonnegative, got {h}")
    x = 2.0 * h_arr * math.sqrt(K * K + K)
    exponent = -(h_arr * math.sqrt(1.0 + K) - math.sqrt(K)) ** 2
    density = 2.0 * h_arr * (1.0 + K) * np.exp(exponent) * special.i0e(x)
    if density.ndim == 0:
        return float(density)
    return density


def support(K):
    """Interval outside of which rho(h) < exp(-70)"""
    m, s = _rice_parameters(K)
    return max(0.0, m - 12.0 * s), m + 12.0 * s + 0.5


def _quad(f, a, b, K):
    m, _ = _rice_parameters(K)
    points = [m] if a < m < b else None
    value, abserr = integrate.quad(f, a, b, points=points, limit=400, epsabs=QUAD_TOL, epsrel=QUAD_TOL)
    if not math.isfinite(value) or abserr > 1e-8:
        raise NumericalFailure(f"Quadrature on [{a}, {b}] at K = {K} did not converge (error {abserr:.2e})")
    return value


def rician_cdf(h, K):
    _check_k(K)
    if h < 0:
        raise NegativeInput(f"Fade amplitude must be nonnegative, got {h}")
    lo, hi = support(K)
    if h <= lo:
        return 0.0
    return min(1.0, _quad(lambda t: rician_pdf(t, K), lo, min(h, hi), K))


def rician_cdf_table(K, size=2049):
    """CDF on a grid over the support, integrated piecewise"""
    _check_k(K)
    lo, hi = support(K)
    grid = np.linspace(lo, hi, size)
    pieces = [integrate.quad(lambda t: rician_pdf(t, K), a, b, epsabs=QUAD_TOL, epsrel=QUAD_TOL)[0]
              for a, b in zip(grid[:-1], grid[1:])]
    cdf = np.concatenate([[0.0], np.cumsum(pieces)])
    return grid, np.clip(cdf, 0.0, 1.0)


def normalization_check(K):
    """Returns (int rho, int h^2 rho, int h^4 rho - 1) by adaptive quadrature"""
    _check_k(K)
    lo, hi = support(K)
    mass = _quad(lambda t: rician_pdf(t, K), lo, hi, K)
    second = _quad(lambda t: t ** 2 * rician_pdf(t, K), lo, hi, K)
    fourth = _quad(lambda t: t ** 4 * rician_pdf(t, K), lo, hi, K)
    logger.debug(f"K={K}: mass={mass!r} E[h^2]={second!r} E[h^4]={fourth!r}")
    return mass, second, fourth - second ** 2


def moments_h2(K):
    """(E[h^2], Var(h^2)) of the normalized Rice distribution"""
    _check_k(K)
    return 1.0, (1.0 + 2.0 * K) / (1.0 + K) ** 2


def ks_against_density(samples, K):
    """Kolmogorov-Smirnov test of samples against the quadrature CDF of rho"""
    grid, cdf = rician_cdf_table(K)
    return stats.kstest(np.asarray(samples, dtype=float), lambda x: np.interp(x, grid, cdf, left=0.0, right=1.0))


def gaussian_noise(sigma2, count, rng):
    if not sigma2 > 0:
        raise NonpositiveVariance(f"Noise variance must be positive, got {sigma2}")
    shape = (count,) if isinstance(count, (int, np.integer)) else tuple(count)
    return math.sqrt(sigma2) * rng.standard_normal(shape)


def apply_channel(x, h: FadeRealization, v):
    x, h, v = np.asarray(x, dtype=float), np.asarray(h, dtype=float), np.asarray(v, dtype=float)
    if not x.shape == h.shape == v.shape:
        raise LengthMismatch(f"x, h and v must have equal lengths, got {x.shape}, {h.shape}, {v.shape}")
    return h * x + v


def vnr_to_sigma2(vnr_db, volume, n):
    """VNR = Vol^(2/n) / (8 sigma^2), in dB"""
    if not volume > 0:
        raise NonpositiveVolume(f"Lattice volume must be positive, got {volume}")
    return volume ** (2.0 / n) / (8.0 * 10.0 ** (vnr_db / 10.0))


def sigma2_to_vnr(sigma2, volume, n):
    return 10.0 * math.log10(volume ** (2.0 / n) / (8.0 * sigma2))


def empirical_moments(samples) -> typing.Tuple[float, float, float, float]:
    """Sample mean and variance of h^2 with their Monte Carlo standard errors"""
    h2 = np.asarray(samples, dtype=float) ** 2
    count = h2.size
    mean = float(h2.mean())
    var = float(h2.var(ddof=1))
    centered = (h2 - mean) ** 2
    var_stderr = float(centered.std(ddof=1) / math.sqrt(count))
    return mean, math.sqrt(var / count), var, var_stderr
