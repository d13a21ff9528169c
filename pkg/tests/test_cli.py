#!/usr/bin/env python3
'''
Tests for the drivenkerr command line.
'''

import contextlib
import io
import json
import os
import shutil
import sys
import tempfile
import unittest
from unittest.mock import patch

import numpy as np
import pandas as pd

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from drivenkerr.cli import main
from drivenkerr.cli.commands import SweepSpec, decay_exponents, run_parallel, worker_count
from drivenkerr.errors import ConfigError

DEVICE = {'delta_a': 9.64, 'g_a_re': 0.617, 'delta_d': 2.0}


class CliTestCase(unittest.TestCase):
    '''Runs main() against configs written to a scratch directory.'''

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.out = os.path.join(self.tmp, 'results')

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def write_config(self, config, name='run.json'):
        path = os.path.join(self.tmp, name)
        with open(path, 'w', encoding='utf-8') as fh:
            if isinstance(config, str):
                fh.write(config)
            else:
                json.dump(config, fh)
        return path

    def run_cli(self, subcommand, config):
        args = [subcommand, '--config', self.write_config(config), '--out-dir', self.out,
                '--threads', '1', '--log-dir', '']
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            return main(args)

    def load_json(self, name):
        with open(os.path.join(self.out, name), encoding='utf-8') as fh:
            return json.load(fh)


class TestConfigErrors(CliTestCase):
    '''Bad configurations map to exit code 2.'''

    def test_empty_methods(self):
        config = {'system': DEVICE, 'sweep': {'axis': 'drive_power', 'grid': [0.0]}, 'methods': []}
        self.assertEqual(self.run_cli('dispersion', config), 2)

    def test_unknown_system_key(self):
        self.assertEqual(self.run_cli('regimes', {'system': {'delta_x': 1.0}}), 2)

    def test_invalid_json(self):
        self.assertEqual(self.run_cli('regimes', '{"system": '), 2)

    def test_missing_file(self):
        with contextlib.redirect_stderr(io.StringIO()):
            code = main(['scan', '--config', os.path.join(self.tmp, 'nope.json'),
                         '--log-dir', ''])
        self.assertEqual(code, 2)

    def test_unknown_subcommand(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                main(['plot', '--config', 'run.json'])


class TestSweepSpec(unittest.TestCase):
    '''Sweep grids from the configuration.'''

    def test_range_grid(self):
        spec = SweepSpec.from_config({'system': DEVICE,
                                      'sweep': {'axis': 'delta_a',
                                                'grid': {'min': 5, 'max': 10, 'n': 6}}})
        self.assertEqual(spec.grid, [5.0, 6.0, 7.0, 8.0, 9.0, 10.0])
        self.assertEqual(spec.point(7.0).delta_a, 7.0)

    def test_log_grid_and_power_point(self):
        spec = SweepSpec.from_config({'system': DEVICE,
                                      'sweep': {'grid': {'min': 0.01, 'max': 1.0, 'n': 3,
                                                         'scale': 'log'}}})
        self.assertAlmostEqual(spec.grid[1], 0.1)
        self.assertAlmostEqual(spec.point(0.25).drive_power, 0.25)

    def test_bad_grids(self):
        for grid in ([], [0.1, 0.3, 0.2], {'min': 1, 'max': 2}, ['a']):
            with self.assertRaises(ConfigError):
                SweepSpec.from_config({'system': DEVICE, 'sweep': {'grid': grid}})
        with self.assertRaises(ConfigError):
            SweepSpec.from_config({'system': DEVICE, 'sweep': {'axis': 'alpha'}})

    def test_worker_count(self):
        self.assertEqual(worker_count(3), 3)
        with patch('drivenkerr.cli.commands.psutil.cpu_count', return_value=None):
            self.assertEqual(worker_count(None), 1)

    def test_serial_run_keeps_order(self):
        self.assertEqual(run_parallel(abs, [-3, 2, -1], 1), [3, 2, 1])

    def test_decay_exponents(self):
        x = np.array([1.0, 2.0, 4.0, 8.0])
        table = pd.DataFrame({'drive_power': x, 'kerr': -x ** -2.0, 'beta': x ** -3.0,
                              'sigma': 0.0 * x})
        slopes = decay_exponents(table, 'drive_power', 3)
        self.assertAlmostEqual(slopes['kerr'], -2.0)
        self.assertAlmostEqual(slopes['beta'], -3.0)
        self.assertNotIn('sigma', slopes)


class TestCommands(CliTestCase):
    '''End-to-end runs of the cheaper subcommands.'''

    def test_scan(self):
        config = {'system': {'delta_d': 3.0, 'n_transmon': 8, 'omega_d_re': 0.03},
                  'scan': {'ranges': [-6.0, 8.0], 'k_max': 4}}
        self.assertEqual(self.run_cli('scan', config), 0)
        hits = self.load_json('scan.json')['resonances']
        self.assertTrue(any(abs(h['location'] - 1.5) < 0.05 for h in hits))

    def test_regimes(self):
        config = {'system': dict(DEVICE, n_transmon=8)}
        self.assertEqual(self.run_cli('regimes', config), 0)
        summary = self.load_json('regimes.json')
        K_A0 = summary['zero_drive_kerr']['K_A0']
        self.assertLess(K_A0, 0.0)
        self.assertAlmostEqual(summary['weak_coupling']['K_self_a']['0'] / K_A0, 1.0,
                               delta=1e-4)
        self.assertIn('max_value', summary['tls_maximum'])

    def test_spectrum(self):
        config = {'system': {'delta_d': 3.0, 'n_transmon': 6},
                  'sweep': {'axis': 'delta_a', 'grid': {'min': 5, 'max': 10, 'n': 6}},
                  'drive_powers': [0.0, 0.01]}
        self.assertEqual(self.run_cli('spectrum', config), 0)
        table = pd.read_csv(os.path.join(self.out, 'spectrum.csv'))
        self.assertEqual(len(table), 12)
        undriven = table[table['drive_power'] == 0.0]
        delta = undriven['delta_a_over_alpha'].to_numpy()
        # K alpha^3 / g^4 of the bare transmon, alpha = 1
        np.testing.assert_allclose(undriven['ktilde'].to_numpy(),
                                   -2.0 / (delta ** 3 * (2.0 * delta + 1.0)), rtol=1e-5)

    def test_dispersion_methods_agree(self):
        system = {'delta_a': -20.0, 'g_a_re': 0.2, 'delta_d': 3.0, 'n_transmon': 8, 'n_a': 6}
        config = {'system': system,
                  'sweep': {'axis': 'drive_power', 'grid': [0.0, 0.1]},
                  'methods': ['weak_coupling', 'full_diag']}
        self.assertEqual(self.run_cli('dispersion', config), 0)
        table = pd.read_csv(os.path.join(self.out, 'dispersion.csv'))
        self.assertEqual(len(table), 4)
        pivot = table.pivot(index='drive_power', columns='method', values='K_A')
        ratio = pivot['full_diag'] / pivot['weak_coupling']
        self.assertTrue(((ratio - 1.0).abs() < 0.05).all())

    def test_fulldiag(self):
        system = {'delta_a': -20.0, 'g_a_re': 0.2, 'delta_d': 3.0, 'n_transmon': 8, 'n_a': 6}
        config = {'system': system, 'sweep': {'grid': [0.0]}, 'max_order': 2}
        self.assertEqual(self.run_cli('fulldiag', config), 0)
        table = pd.read_csv(os.path.join(self.out, 'fulldiag.csv'))
        self.assertEqual(len(table), 1)
        # K_A0 = -2 g^4 / (delta^3 (2 delta + 1))
        expected = -2.0 * 0.2 ** 4 / ((-20.0) ** 3 * (-40.0 + 1.0))
        self.assertAlmostEqual(table['kerr'].iloc[0] / expected, 1.0, delta=0.05)
        self.assertEqual(self.load_json('fulldiag.json')['levels']['0']['rows'], 1)

    def test_rates(self):
        config = {'system': dict(DEVICE, n_transmon=6, n_a=4), 'gamma': 1.0}
        self.assertEqual(self.run_cli('rates', config), 0)
        row = self.load_json('rates.json')['rows'][0]
        self.assertAlmostEqual(row['kappa_gamma'] / 0.064 ** 2, 1.0, delta=0.02)
        self.assertAlmostEqual(row['purcell_share'], 1.0)
        self.assertEqual(row['escape_1_perturbative'], 0.0)

    def test_cat(self):
        config = {'system': dict(DEVICE, n_transmon=4, n_a=9),
                  'cat': {'times_us': [0.0, 10.0], 'wigner_times_us': [0.0],
                          'wigner_radius': 1.0, 'wigner_step': 0.5}}
        self.assertEqual(self.run_cli('cat', config), 0)
        table = pd.read_csv(os.path.join(self.out, 'cat.csv'))
        self.assertAlmostEqual(table['F'].iloc[0], 1.0)
        wigner = pd.read_csv(os.path.join(self.out, 'cat_wigner.csv'))
        self.assertEqual(len(wigner), 25)
        self.assertIn('tau_ph_us', self.load_json('cat.json')['runs'][0])


if __name__ == '__main__':
    unittest.main()
