"""
Constellation carving and exhaustive maximum-likelihood decoding.

The constellation is S = M S' with S' = S'' - (q-1)/2 and S'' = {0..q-1}^n,
labels in row-major order over S''. Decoding minimizes |y - diag(h) t|^2 over all
q^n points; ties go to the lowest index.
"""

import dataclasses
import itertools
import logging
import math

import numpy as np

from rician_lattice_analyzer import channel
from rician_lattice_analyzer.core import MAX_CONSTELLATION_POINTS, InvalidQ, LengthMismatch, TooManyPoints, UsageError
from rician_lattice_analyzer.lattice_helpers import SIMULATION_STREAM, run_blocks, split_blocks, substream

logger = logging.getLogger(__name__)

# Upper bound on trials x points x n floats held at once by the batch decoder
BATCH_FLOATS = 2 ** 22


@dataclasses.dataclass(frozen=True, eq=False)
class Constellation:
    lattice: object
    q: int
    labels: np.ndarray
    points: np.ndarray

    def __len__(self):
        return self.points.shape[0]

    @property
    def n(self):
        return self.lattice.n


@dataclasses.dataclass(frozen=True)
class DecodeResult:
    index: int
    distance_sq: float


@dataclasses.dataclass(frozen=True)
class TrialResult:
    errors: int
    trials: int

    @property
    def error_rate(self):
        return self.errors / self.trials

    @property
    def stderr(self):
        p = self.error_rate
        return math.sqrt(p * (1.0 - p) / self.trials)


def build_constellation(lattice, q):
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 2:
        raise InvalidQ(f"q must be an integer >= 2, got {q!r}")
    n = lattice.n
    if q ** n > MAX_CONSTELLATION_POINTS:
        raise TooManyPoints(f"q^n = {q}^{n} exceeds {MAX_CONSTELLATION_POINTS} points")
    labels = np.array(list(itertools.product(range(q), repeat=n)), dtype=float) - (q - 1) / 2.0
    points = labels @ lattice.generator.T
    labels.setflags(write=False)
    points.setflags(write=False)
    logger.debug(f"Carved {len(points)} points from {lattice.name} with q={q}")
    return Constellation(lattice=lattice, q=int(q), labels=labels, points=points)


def ml_decode(y, h, c):
    y, h = np.asarray(y, dtype=float), np.asarray(h, dtype=float)
    if y.shape != (c.n,) or h.shape != (c.n,):
        raise LengthMismatch(f"Expected vectors of length {c.n}, got y{y.shape} and h{h.shape}")
    residual = y - c.points * h
    distances = np.einsum('ij,ij->i', residual, residual)
    index = int(np.argmin(distances))
    return DecodeResult(index=index, distance_sq=float(distances[index]))


def ml_decode_batch(ys, hs, c):
    """Row-wise ml_decode; returns the array of decoded indices"""
    ys, hs = np.asarray(ys, dtype=float), np.asarray(hs, dtype=float)
    if ys.ndim != 2 or ys.shape != hs.shape or ys.shape[1] != c.n:
        raise LengthMismatch(f"Expected (trials, {c.n}) arrays, got y{ys.shape} and h{hs.shape}")
    chunk = max(1, BATCH_FLOATS // (len(c) * c.n))
    indices = np.empty(ys.shape[0], dtype=np.int64)
    for start in range(0, ys.shape[0], chunk):
        y = ys[start:start + chunk, None, :]
        h = hs[start:start + chunk, None, :]
        residual = y - c.points[None, :, :] * h
        distances = np.einsum('tij,tij->ti', residual, residual)
        indices[start:start + chunk] = np.argmin(distances, axis=1)
    return indices


def _draw_trial(c, params, rng):
    # Draw order (x, h, v) is part of the reproducibility contract
    index = int(rng.integers(len(c)))
    h = channel.rician_sample(params.K, c.n, rng)
    v = channel.gaussian_noise(params.sigma2, c.n, rng)
    return index, h, v


def run_trial(c, params, rng):
    """One transmission; True if the decoded point is the transmitted one"""
    index, h, v = _draw_trial(c, params, rng)
    y = channel.apply_channel(c.points[index], h, v)
    return ml_decode(y, h, c).index == index


def run_trials(c, params, seed, stream_id, start, count):
    """Number of decoding errors over trials start..start+count-1, each on its own substream"""
    sent = np.empty(count, dtype=np.int64)
    hs = np.empty((count, c.n))
    vs = np.empty((count, c.n))
    for i in range(count):
        sent[i], hs[i], vs[i] = _draw_trial(c, params, substream(seed, stream_id, start + i))
    ys = hs * c.points[sent] + vs
    return int(np.count_nonzero(ml_decode_batch(ys, hs, c) != sent))


def simulate_error_rate(c, params, trials, seed, first_trial=0, stream_id=SIMULATION_STREAM,
                        threads=1, block_size=1024):
    """
    Vector error rate over trials with global counters first_trial .. first_trial+trials-1.
    Blocks only group the work; each trial keeps its own substream.
    """
    if trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")
    blocks = split_blocks(trials, block_size)

    def count_errors(block):
        _, start, count = block
        return run_trials(c, params, seed, stream_id, first_trial + start, count)

    errors = sum(run_blocks(count_errors, blocks, threads))
    result = TrialResult(errors=errors, trials=trials)
    logger.debug(f"K={params.K} sigma2={params.sigma2:.6g}: {errors}/{trials} errors")
    return result
