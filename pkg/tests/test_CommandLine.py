#!/usr/bin/env python
import contextlib
import csv
import io
import json
import os
import tempfile
import unittest

from rician_lattice_analyzer.core import ConfigurationSettings
from rician_lattice_analyzer.rotations import load_rotation
from rician_lattice_analyzer.scripts import lattice_details
from rician_lattice_analyzer.scripts.lattice_analyzer import main, vnr_grid


class TestCommandLine(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def path(self, name):
        return os.path.join(self.tmpdir.name, name)

    @staticmethod
    def run_main(*args):
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            code = main(list(args) + ['--quiet'])
        return code, stdout.getvalue(), stderr.getvalue()

    def rows(self, text):
        return list(csv.reader(io.StringIO(text)))

    def test_hadamard_file(self):
        out = self.path('hadamard_2.txt')
        code, _, _ = self.run_main('hadamard', '--order', '2', '--out', out)
        self.assertEqual(code, 0)
        with open(out) as fh:
            body = [line.split() for line in fh if not line.startswith('#')]
        self.assertEqual(body, [['2'], ['0.707106781187', '0.707106781187'], ['0.707106781187', '-0.707106781187']])
        self.assertEqual(load_rotation(out).n, 2)

    def test_hadamard_invalid_order(self):
        for order in ('3', '0', '8192'):
            code, _, stderr = self.run_main('hadamard', '--order', order, '--out', self.path('bad.txt'))
            self.assertEqual(code, 2, order)
            self.assertIn('error', stderr)
            self.assertFalse(os.path.exists(self.path('bad.txt')))

    def test_audit_hadamard(self):
        code, report, _ = self.run_main('audit', '--lattice', 'hadamard', '--dim', '4')
        self.assertEqual(code, 0)
        self.assertIn('n = 4', report)
        self.assertIn('min |t|^2 = 1 ', report)
        self.assertIn('WR = true', report)
        self.assertIn('min |t|_1 = 2 ', report)
        self.assertIn('diversity histogram of minimal vectors {4: 4}', report)
        self.assertIn('local diversity min k|t|^2 = 4 ', report)

    def test_audit_identity_and_bcc(self):
        _, report, _ = self.run_main('audit', '--lattice', 'identity', '--dim', '4')
        self.assertIn('min |t|_1 = 1 ', report)
        self.assertIn('diversity histogram of minimal vectors {1: 4}', report)
        _, report, _ = self.run_main('audit', '--lattice', 'bcc')
        self.assertIn('min |t|^2 = 3 ', report)
        self.assertIn('WR = true', report)

    def test_audit_json(self):
        out = self.path('audit.json')
        code, _, _ = self.run_main('audit', '--lattice', 'hadamard', '--dim', '2', '--output-format', 'json',
                                   '--out', out)
        self.assertEqual(code, 0)
        with open(out) as fh:
            data = json.load(fh)
        self.assertEqual(data['n'], 2)
        names = [entry['audit_name'] for entry in data['entries']]
        self.assertIn('DiamondPacking', names)

    def test_audit_bad_spec(self):
        code, _, stderr = self.run_main('audit', '--lattice', 'no_such_lattice.txt')
        self.assertEqual(code, 2)
        self.assertIn('no_such_lattice.txt', stderr)
        code, _, _ = self.run_main('audit', '--lattice', 'identity')
        self.assertEqual(code, 2)

    def test_sweep_vnr_is_deterministic(self):
        args = ['sweep-vnr', '--rotation', 'identity', '--rotation', 'hadamard', '--dim', '2', '--q', '2',
                '--K', '20', '--vnr-start', '4', '--vnr-stop', '6', '--vnr-step', '1', '--trials', '300',
                '--seed', '7']
        outputs = []
        for threads in ('1', '1', '3'):
            out = self.path(f'sweep_{len(outputs)}.csv')
            code, _, _ = self.run_main(*args, '--threads', threads, '--out', out)
            self.assertEqual(code, 0)
            with open(out, 'rb') as fh:
                outputs.append(fh.read())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(outputs[0], outputs[2])

        rows = self.rows(outputs[0].decode('utf-8'))
        self.assertEqual(rows[0], list(lattice_details.SWEEP_VNR_HEADER))
        self.assertEqual(len(rows), 1 + 2 * 3)
        for row in rows[1:]:
            errors, trials = int(row[6]), int(row[5])
            self.assertEqual(trials, 300)
            self.assertAlmostEqual(float(row[7]), errors / trials)

    def test_sweep_against_generator_file(self):
        cross = self.path('cross.txt')
        with open(cross, 'w') as fh:
            fh.write("# cross packing, not a rotation\n2\n2 1\n0 2\n")
        code, stdout, stderr = self.run_main('sweep-vnr', '--rotation', 'hadamard', '--rotation', cross, '--dim', '2',
                                             '--q', '2', '--K', '20', '--vnr-start', '4', '--vnr-stop', '5',
                                             '--trials', '200', '--seed', '3', '--unit-volume')
        self.assertEqual(code, 0, stderr)
        rows = self.rows(stdout)
        self.assertEqual(len(rows), 1 + 2 * 2)
        self.assertEqual([row[0] for row in rows[1:]], ['hadamard', 'hadamard', cross, cross])

        code, _, _ = self.run_main('sweep-k', '--rotation', cross, '--dim', '3', '--vnr', '8', '--K-list', '5',
                                   '--trials', '100')
        self.assertEqual(code, 2)

    def test_unwritable_output(self):
        missing = os.path.join(self.path('missing'), 'report.txt')
        code, _, stderr = self.run_main('audit', '--lattice', 'hadamard', '--dim', '4', '--out', missing)
        self.assertEqual(code, 2)
        self.assertIn('report.txt', stderr)
        code, _, _ = self.run_main('hadamard', '--order', '2', '--out', missing)
        self.assertEqual(code, 2)
        self.assertFalse(os.path.exists(self.path('missing')))

        target = self.path('a_directory')
        os.mkdir(target)
        code, _, _ = self.run_main('audit', '--lattice', 'hadamard', '--dim', '4', '--out', target)
        self.assertEqual(code, 2)
        self.assertFalse(os.path.exists(f"{target}.tmp"))

    def test_sweep_vnr_bad_step(self):
        for step in ('0', '-1'):
            out = self.path('never.csv')
            code, stdout, _ = self.run_main('sweep-vnr', '--rotation', 'identity', '--dim', '2', '--K', '20',
                                            '--vnr-start', '4', '--vnr-stop', '6', '--vnr-step', step, '--out', out)
            self.assertEqual(code, 2)
            self.assertEqual(stdout, '')
            self.assertFalse(os.path.exists(out))

    def test_sweep_k(self):
        code, stdout, _ = self.run_main('sweep-k', '--rotation', 'hadamard', '--dim', '2', '--q', '2', '--vnr', '8',
                                        '--K-list', '5', '--trials', '100', '--seed', '1')
        self.assertEqual(code, 0)
        rows = self.rows(stdout)
        self.assertEqual(rows[0], list(lattice_details.SWEEP_K_HEADER))
        self.assertEqual(len(rows), 2)
        code, stdout, _ = self.run_main('sweep-k', '--rotation', 'hadamard', '--dim', '2', '--vnr', '8',
                                        '--K-list', '0,-1', '--trials', '100')
        self.assertEqual(code, 2)
        self.assertEqual(stdout, '')

    def test_nonwr(self):
        code, stdout, _ = self.run_main('nonwr', '--dim', '2', '--K-list', '0', '--method', 'quad')
        self.assertEqual(code, 0)
        rows = self.rows(stdout)
        self.assertEqual(rows[0], list(lattice_details.NONWR_HEADER))
        self.assertAlmostEqual(float(rows[1][4]), 0.5, delta=1e-6)
        code, _, _ = self.run_main('nonwr', '--dim', '4', '--K-list', '5', '--method', 'quad')
        self.assertEqual(code, 2)
        code, stdout, _ = self.run_main('nonwr', '--dim', '4', '--K-list', '5,10', '--trials', '2000')
        self.assertEqual(code, 0)
        self.assertEqual(len(self.rows(stdout)), 3)

    def test_pep(self):
        code, stdout, _ = self.run_main('pep', '--rotation', 'hadamard', '--dim', '4', '--K', '20', '--vnr', '8',
                                        '--mode', 'approx')
        self.assertEqual(code, 0)
        rows = self.rows(stdout)
        self.assertEqual(rows[0], list(lattice_details.PEP_HEADER))
        self.assertEqual(rows[1][4], 'approx')
        self.assertAlmostEqual(float(rows[1][5]), 4.0)
        code, _, _ = self.run_main('pep', '--rotation', 'hadamard', '--dim', '4', '--K', '20', '--vnr', '8',
                                   '--bound', '0.5', '--mode', 'approx')
        self.assertEqual(code, 2)

    def test_config_file(self):
        config_path = self.path('WORKBENCH.cfg')
        code, _, _ = self.run_main('write-config', '--out', config_path)
        self.assertEqual(code, 0)
        settings = ConfigurationSettings(config_path)
        settings.get_config()['trials'] = '50'
        settings.write_config(config_path)
        code, stdout, _ = self.run_main('sweep-k', '--rotation', 'identity', '--dim', '2', '--q', '2', '--vnr', '8',
                                        '--K-list', '5', '--config', config_path)
        self.assertEqual(code, 0)
        self.assertEqual(self.rows(stdout)[1][5], '50')
        code, _, _ = self.run_main('sweep-k', '--rotation', 'identity', '--dim', '2', '--vnr', '8',
                                   '--K-list', '5', '--config', self.path('missing.cfg'))
        self.assertEqual(code, 2)

    def test_argparse_errors(self):
        code, _, _ = self.run_main('sweep-vnr', '--rotation', 'identity')
        self.assertEqual(code, 2)
        code, _, _ = self.run_main('pep', '--rotation', 'identity', '--dim', '2', '--K', '1', '--vnr', '8',
                                   '--mode', 'exact')
        self.assertEqual(code, 2)

    def test_vnr_grid(self):
        self.assertEqual(vnr_grid(4, 10, 2), [4, 6, 8, 10])
        self.assertEqual(vnr_grid(0, 1, 0.1)[-1], 1.0)
        self.assertEqual(len(vnr_grid(0, 1, 0.1)), 11)

    def test_number_format(self):
        self.assertEqual(lattice_details.format_number(0.5), '0.500000')
        self.assertEqual(lattice_details.format_number(0.1234567), '0.1234567')
        self.assertEqual(lattice_details.format_number(3), '3')
        self.assertEqual(lattice_details.format_number(20.0), '20.0000')
        self.assertEqual(float(lattice_details.format_number(1 / 3)), 1 / 3)


if __name__ == "__main__":
    unittest.main()
