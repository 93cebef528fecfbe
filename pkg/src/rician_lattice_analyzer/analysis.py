"""
Figures of merit for lattice codes over the Rician channel.

PEP bound
    P <= 1/2 sum_{t != 0} E exp(-|diag(h) t|^2 / (8 sigma^2)), truncated to |t|^2 <= R^2.
    Vectors are stored up to sign, so the 1/2 cancels against the +-pairs.
    The Monte Carlo estimate shares one fade per trial across all vectors.
    The small-variance approximation keeps the first two terms of the expansion of
    e^{-eps} around Var(h^2) = 0:
        1/2 sum e^{-E[h^2]|t|^2/(8 sigma^2)} (1 + Var(h^2) |t|_4^4 / (2 (8 sigma^2)^2)).

Well-roundedness after fading
    For a Hadamard matrix W, some minimal vector of diag(h) W Z^n has coordinates
    omega with |omega|^2 < n or omega a row of W. The natural generators diag(h) W e_i
    (all of squared norm sum h_k^2) are minimal iff every such omega satisfies
    |diag(h) W omega|^2 >= sum h_k^2, a linear condition on h_1^2..h_n^2.
    In two dimensions the conditions reduce to the cone h_2^2 <= 3 h_1^2, h_1^2 <= 3 h_2^2.
"""

import dataclasses
import logging
import math
import typing

import numpy as np
from scipy import integrate, stats

from rician_lattice_analyzer import channel
from rician_lattice_analyzer.core import (EPS_MIN, MAX_ENUMERATION_DIM, DimensionTooLarge, EmptyTruncation,
                                          LengthMismatch, NonpositiveVariance, NumericalFailure, UnsupportedOrder,
                                          UsageError, ViolationFound, ZeroVector)
from rician_lattice_analyzer.lattice import Lattice, enumerate_short_vectors, minimal_vectors, norms
from rician_lattice_analyzer.lattice_helpers import NONWR_STREAM, PEP_STREAM, run_blocks, split_blocks, substream

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


@dataclasses.dataclass(frozen=True)
class PepEstimate:
    value: float
    stderr: float
    truncation_bound: float
    terms: int
    # contribution of the outermost shell of the truncated series
    last_shell: float


@dataclasses.dataclass(frozen=True, eq=False)
class CandidateSet:
    omegas: np.ndarray
    short_count: int

    def __len__(self):
        return self.omegas.shape[0]

    def __contains__(self, omega):
        return sign_representative(omega) in {tuple(int(x) for x in row) for row in self.omegas}


@dataclasses.dataclass(frozen=True)
class LocalDiversityReport:
    min_product: float
    witness: typing.Tuple[float, ...]
    witness_coords: typing.Tuple[int, ...]
    vectors_checked: int


def _check_inputs(K, sigma2):
    channel._check_k(K)
    if not sigma2 > 0:
        raise NonpositiveVariance(f"Noise variance must be positive, got {sigma2}")


def default_truncation_bound(lattice, factor=4.0):
    return factor * minimal_vectors(lattice).min_norm_sq


def _truncated_series(lattice, bound):
    report = enumerate_short_vectors(lattice, bound)
    if not report.vectors:
        raise EmptyTruncation(f"No nonzero lattice vector has |t|^2 <= {bound}; "
                              f"the minimal squared norm is {minimal_vectors(lattice).min_norm_sq:.6g}")
    points = report.points()
    norms_sq = np.array([v.norm_sq for v in report.vectors])
    last_shell = norms_sq >= norms_sq.max() * (1 - EPS_MIN)
    return report, points, norms_sq, last_shell


def pep_gaussian_sum(lattice, sigma2, bound):
    """The truncated PEP bound of the unfaded (h = 1) channel"""
    _, _, norms_sq, _ = _truncated_series(lattice, bound)
    return float(np.exp(-norms_sq / (8.0 * sigma2)).sum())


def pep_bound_mc(lattice, K, sigma2, bound, trials, seed, threads=1, block_size=4096):
    _check_inputs(K, sigma2)
    if trials < 2:
        raise UsageError(f"trials must be >= 2 for a standard error, got {trials}")
    report, points, _, last_shell = _truncated_series(lattice, bound)
    t2 = points ** 2
    scale = 8.0 * sigma2

    def block_terms(block):
        index, _, count = block
        rng = substream(seed, PEP_STREAM, index)
        h2 = channel.rician_sample(K, (count, lattice.n), rng) ** 2
        terms = np.exp(-(h2 @ t2.T) / scale)
        return terms.sum(axis=1), terms[:, last_shell].sum(axis=1)

    results = run_blocks(block_terms, split_blocks(trials, block_size), threads)
    per_trial = np.concatenate([r[0] for r in results])
    per_trial_shell = np.concatenate([r[1] for r in results])
    value = float(per_trial.mean())
    stderr = float(per_trial.std(ddof=1) / math.sqrt(trials))
    logger.debug(f"PEP MC for {lattice.name}: {value:.6g} +- {stderr:.2g} over {len(report)} terms")
    return PepEstimate(value=value, stderr=stderr, truncation_bound=bound, terms=len(report),
                       last_shell=float(per_trial_shell.mean()))


def pep_bound_approx(lattice, K, sigma2, bound):
    _check_inputs(K, sigma2)
    report, points, norms_sq, last_shell = _truncated_series(lattice, bound)
    mean_h2, var_h2 = channel.moments_h2(K)
    scale = 8.0 * sigma2
    l4_4 = (points ** 4).sum(axis=1)
    terms = np.exp(-mean_h2 * norms_sq / scale) * (1.0 + var_h2 * l4_4 / (2.0 * scale ** 2))
    return PepEstimate(value=float(terms.sum()), stderr=0.0, truncation_bound=bound, terms=len(report),
                       last_shell=float(terms[last_shell].sum()))


def fade_variance_ratio(t, K):
    """Var(|diag(h) t|^2 / E|diag(h) t|^2) = Var(h^2)/E[h^2]^2 * |t|_4^4 / |t|_2^4"""
    _, l2, l4 = norms(t)
    if l2 == 0:
        raise ZeroVector("fade_variance_ratio needs a nonzero vector")
    mean_h2, var_h2 = channel.moments_h2(K)
    return var_h2 / mean_h2 ** 2 * l4 ** 4 / l2 ** 4


###############################################################################
# Well-roundedness after fading
###############################################################################
def sign_representative(omega):
    """The member of {omega, -omega} whose first nonzero coordinate is positive"""
    omega = tuple(int(x) for x in omega)
    for x in omega:
        if x != 0:
            return omega if x > 0 else tuple(-y for y in omega)
    return omega


def candidate_set(w):
    n = w.n
    if n > MAX_ENUMERATION_DIM:
        raise DimensionTooLarge(f"Candidate enumeration is limited to n <= {MAX_ENUMERATION_DIM}, got n = {n}")
    short = []
    if n > 1:
        integer_lattice = Lattice(np.eye(n), name=f"Z{n}")
        short = [v.coords for v in enumerate_short_vectors(integer_lattice, n - 1).vectors]
    omegas = list(dict.fromkeys(short + [sign_representative(row) for row in w.entries]))
    return CandidateSet(omegas=np.array(omegas, dtype=np.int64).reshape(-1, n), short_count=len(short))


def _generator_norm_table(w, candidates):
    # Column j holds (W omega_j)^2 so that |diag(h) W omega_j|^2 = h^2 @ table[:, j]
    return (w.entries.astype(float) @ candidates.omegas.T.astype(float)) ** 2


def _natural_generators_minimal(h2, table):
    reference = h2.sum(axis=-1, keepdims=True) * (1.0 - 1e-12)
    return np.all(h2 @ table >= reference, axis=-1)


def is_faded_wr(w, h, candidates=None):
    h = np.asarray(h, dtype=float)
    if h.shape != (w.n,):
        raise LengthMismatch(f"Fade must have length {w.n}, got {h.shape}")
    if candidates is None:
        candidates = candidate_set(w)
    return bool(_natural_generators_minimal(h ** 2, _generator_norm_table(w, candidates)))


def faded_lattice(w, h):
    return Lattice(np.diag(np.asarray(h, dtype=float)) @ w.entries.astype(float), name=f"faded-hadamard-{w.n}")


def is_faded_wr_direct(w, h):
    """Brute-force check: do the natural generators attain the minimum of diag(h) W Z^n?"""
    report = minimal_vectors(faded_lattice(w, h))
    return float(np.sum(np.asarray(h, dtype=float) ** 2)) <= report.min_norm_sq * (1 + EPS_MIN)


def faded_minimal_vectors_in_candidates(w, h, candidates=None):
    if candidates is None:
        candidates = candidate_set(w)
    report = minimal_vectors(faded_lattice(w, h))
    return all(v.coords in candidates for v in report.minimal_vectors)


def nonwr_probability_mc(w, K, trials, seed, threads=1, block_size=65536):
    """Monte Carlo estimate of 1 - P{C} with its standard error"""
    channel._check_k(K)
    if trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")
    table = _generator_norm_table(w, candidate_set(w))

    def count_non_wr(block):
        index, _, count = block
        rng = substream(seed, NONWR_STREAM, index)
        h2 = channel.rician_sample(K, (count, w.n), rng) ** 2
        return int(np.count_nonzero(~_natural_generators_minimal(h2, table)))

    failures = sum(run_blocks(count_non_wr, split_blocks(trials, block_size), threads))
    estimate = failures / trials
    stderr = math.sqrt(estimate * (1.0 - estimate) / trials)
    logger.debug(f"n={w.n} K={K}: {failures}/{trials} fades are not well-rounded")
    return estimate, stderr


def nonwr_probability_quad(w, K, tol=1e-6):
    """
    1 - P{h_1^2/3 <= h_2^2 <= 3 h_1^2} by nested adaptive quadrature:
    P{C} = int rho(h1) (F(sqrt(3) h1) - F(h1 / sqrt(3))) dh1.
    """
    if w.n != 2:
        raise UnsupportedOrder(f"Quadrature is implemented for order 2 only, got order {w.n}")
    channel._check_k(K)
    lo, hi = channel.support(K)

    def integrand(h1):
        inside = channel.rician_cdf(SQRT3 * h1, K) - channel.rician_cdf(h1 / SQRT3, K)
        return channel.rician_pdf(h1, K) * inside

    m = math.sqrt(K / (1.0 + K))
    points = [m] if lo < m < hi else None
    p_wr, abserr = integrate.quad(integrand, lo, hi, points=points, limit=200, epsabs=tol * 1e-3, epsrel=1e-10)
    if abserr > tol:
        raise NumericalFailure(f"Cone quadrature at K = {K} did not reach {tol} (error {abserr:.2e})")
    return 1.0 - p_wr


def log_linear_fit(xs, ys):
    """Least-squares fit of log(y) = a x + b; returns (slope, intercept, r_squared)"""
    ys = np.asarray(ys, dtype=float)
    if np.any(ys <= 0):
        raise UsageError("log-linear fit needs positive values")
    fit = stats.linregress(np.asarray(xs, dtype=float), np.log(ys))
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)


###############################################################################
# Local diversity
###############################################################################
def local_diversity_audit(u, bound, threshold=None):
    """
    Checks diversity(t) * |t|^2 >= n over every nonzero t of U Z^n with |t|^2 <= bound.
    Raises ViolationFound with the smallest offending vector.
    """
    lattice = u.lattice() if hasattr(u, 'lattice') else u
    threshold = lattice.n if threshold is None else threshold
    report = enumerate_short_vectors(lattice, bound)
    if not report.vectors:
        raise EmptyTruncation(f"No nonzero lattice vector has |t|^2 <= {bound}")
    worst = min(report.vectors, key=lambda v: v.diversity * v.norm_sq)
    product = worst.diversity * worst.norm_sq
    if product < threshold - 1e-6:
        raise ViolationFound(witness=tuple(float(x) for x in worst.point), product=product, threshold=threshold)
    return LocalDiversityReport(min_product=float(product), witness=tuple(float(x) for x in worst.point),
                                witness_coords=worst.coords, vectors_checked=len(report))
