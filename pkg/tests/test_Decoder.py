#!/usr/bin/env python
import math
import unittest

import numpy as np
from scipy import stats

from rician_lattice_analyzer.channel import ChannelParams, rician_sample
from rician_lattice_analyzer.core import InvalidQ, LengthMismatch, TooManyPoints, UsageError
from rician_lattice_analyzer.decoder import (build_constellation, ml_decode, ml_decode_batch, run_trial,
                                             simulate_error_rate)
from rician_lattice_analyzer.lattice import Lattice
from rician_lattice_analyzer.rotations import builtin_lattice


class TestDecoder(unittest.TestCase):
    def test_constellation_labels(self):
        c = build_constellation(Lattice(np.eye(2)), 2)
        self.assertEqual(len(c), 4)
        self.assertEqual(c.labels.tolist(), [[-0.5, -0.5], [-0.5, 0.5], [0.5, -0.5], [0.5, 0.5]])
        self.assertTrue(np.allclose(c.labels.mean(axis=0), 0.0))

    def test_constellation_points(self):
        lattice = builtin_lattice('hadamard', 4)
        c = build_constellation(lattice, 4)
        self.assertEqual(len(c), 256)
        self.assertTrue(np.allclose(c.points, c.labels @ lattice.generator.T))

    def test_one_dimensional_labels(self):
        c = build_constellation(Lattice([[1.0]]), 4)
        self.assertEqual(c.points.ravel().tolist(), [-1.5, -0.5, 0.5, 1.5])

    def test_invalid_q(self):
        lattice = Lattice(np.eye(2))
        for q in (1, 0, 2.5, True):
            with self.assertRaises(InvalidQ):
                build_constellation(lattice, q)
        with self.assertRaises(TooManyPoints):
            build_constellation(Lattice(np.eye(11)), 4)

    def test_noiseless_decoding_is_exact(self):
        c = build_constellation(builtin_lattice('hadamard', 2), 4)
        h = np.array([0.7, 1.3])
        for index in range(len(c)):
            result = ml_decode(h * c.points[index], h, c)
            self.assertEqual(result.index, index)
            self.assertAlmostEqual(result.distance_sq, 0.0)

    def test_ties_go_to_lowest_index(self):
        c = build_constellation(Lattice([[1.0]]), 2)
        self.assertEqual(ml_decode([0.0], [1.0], c).index, 0)
        # with h = 0 every point is at the same distance
        c3 = build_constellation(Lattice(np.eye(2)), 3)
        self.assertEqual(ml_decode([0.3, -0.2], [0.0, 0.0], c3).index, 0)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(12)
        for lattice, q in ((builtin_lattice('hadamard', 2), 8), (builtin_lattice('hadamard', 4), 4)):
            c = build_constellation(lattice, q)
            for _ in range(1000):
                h = rician_sample(5, lattice.n, rng)
                y = h * c.points[rng.integers(len(c))] + 0.3 * rng.standard_normal(lattice.n)
                best, best_distance = 0, math.inf
                for index, point in enumerate(c.points):
                    distance = float(np.sum((y - h * point) ** 2))
                    if distance < best_distance:
                        best, best_distance = index, distance
                self.assertEqual(ml_decode(y, h, c).index, best)

    def test_negation_symmetry(self):
        c = build_constellation(builtin_lattice('hadamard', 2), 4)
        rng = np.random.default_rng(31)
        h = np.ones(2)
        for _ in range(200):
            y = c.points[rng.integers(len(c))] + 0.4 * rng.standard_normal(2)
            decoded = c.points[ml_decode(y, h, c).index]
            negated = c.points[ml_decode(-y, h, c).index]
            self.assertTrue(np.allclose(negated, -decoded))

    def test_batch_matches_single(self):
        c = build_constellation(builtin_lattice('hadamard', 4), 2)
        rng = np.random.default_rng(1)
        ys = rng.standard_normal((30, 4))
        hs = rng.uniform(0.2, 1.5, (30, 4))
        batch = ml_decode_batch(ys, hs, c)
        self.assertEqual(batch.tolist(), [ml_decode(y, h, c).index for y, h in zip(ys, hs)])

    def test_length_mismatch(self):
        c = build_constellation(Lattice(np.eye(2)), 2)
        with self.assertRaises(LengthMismatch):
            ml_decode([0.0, 0.0, 0.0], [1.0, 1.0], c)
        with self.assertRaises(LengthMismatch):
            ml_decode_batch(np.zeros((3, 2)), np.ones((3, 3)), c)

    def test_run_trial(self):
        c = build_constellation(Lattice(np.eye(2)), 2)
        params = ChannelParams(K=1e6, sigma2=1e-6, n=2)
        self.assertTrue(run_trial(c, params, np.random.default_rng(0)))

    def test_awgn_limit(self):
        # Z, q=2: points +-1/2, error iff the noise crosses 0, P = Q(1/(2 sigma)) = Q(2)
        c = build_constellation(Lattice([[1.0]]), 2)
        params = ChannelParams(K=1e9, sigma2=0.0625, n=1)
        result = simulate_error_rate(c, params, 40000, seed=3)
        expected = stats.norm.sf(2.0)
        self.assertLess(abs(result.error_rate - expected), 4 * math.sqrt(expected * (1 - expected) / 40000))

    def test_error_rate_falls_with_vnr(self):
        lattice = builtin_lattice('hadamard', 2)
        c = build_constellation(lattice, 4)
        counts = [simulate_error_rate(c, ChannelParams.from_vnr(5, vnr_db, lattice), 2000, seed=13).errors
                  for vnr_db in (0, 4, 8, 12)]
        self.assertEqual(counts, sorted(counts, reverse=True))
        self.assertGreater(counts[0], counts[-1])

    def test_deterministic_across_threads(self):
        c = build_constellation(builtin_lattice('hadamard', 4), 2)
        params = ChannelParams(K=2, sigma2=0.05, n=4)
        one = simulate_error_rate(c, params, 3000, seed=11, threads=1, block_size=500)
        many = simulate_error_rate(c, params, 3000, seed=11, threads=4, block_size=256)
        self.assertEqual(one, many)

    def test_trial_result(self):
        params = ChannelParams(K=0, sigma2=0.1, n=1)
        c = build_constellation(Lattice([[1.0]]), 2)
        result = simulate_error_rate(c, params, 100, seed=1)
        self.assertEqual(result.trials, 100)
        self.assertAlmostEqual(result.stderr,
                               math.sqrt(result.error_rate * (1 - result.error_rate) / 100))
        with self.assertRaises(UsageError):
            simulate_error_rate(c, params, 0, seed=1)


if __name__ == "__main__":
    unittest.main()
