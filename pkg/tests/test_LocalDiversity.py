#!/usr/bin/env python
import unittest

import numpy as np

from rician_lattice_analyzer.analysis import local_diversity_audit
from rician_lattice_analyzer.core import EmptyTruncation, ViolationFound
from rician_lattice_analyzer.lattice import Lattice, diversity
from rician_lattice_analyzer.rotations import sylvester, to_rotation


class TestLocalDiversity(unittest.TestCase):
    def test_hadamard_rotations_pass(self):
        for k in (1, 2, 3):
            u = to_rotation(sylvester(k))
            report = local_diversity_audit(u, 4)
            self.assertAlmostEqual(report.min_product, u.n)
            # equality is attained by the basis columns
            for column in u.entries.T:
                self.assertAlmostEqual(diversity(column) * float(column @ column), u.n)
            self.assertGreater(report.vectors_checked, u.n)

    def test_identity_violates(self):
        with self.assertRaises(ViolationFound) as raised:
            local_diversity_audit(Lattice(np.eye(4)), 4)
        violation = raised.exception
        self.assertEqual(violation.witness, (1.0, 0.0, 0.0, 0.0))
        self.assertAlmostEqual(violation.product, 1.0)
        self.assertEqual(violation.threshold, 4)

    def test_custom_threshold(self):
        report = local_diversity_audit(Lattice(np.eye(4)), 4, threshold=1)
        self.assertAlmostEqual(report.min_product, 1.0)
        self.assertEqual(report.witness_coords, (1, 0, 0, 0))

    def test_empty_radius(self):
        with self.assertRaises(EmptyTruncation):
            local_diversity_audit(to_rotation(sylvester(2)), 0.5)


if __name__ == "__main__":
    unittest.main()
