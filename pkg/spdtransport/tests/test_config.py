import json
import os
import shutil
import tempfile
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from spdtransport.config import (
    OUTPUT_DIR_VARIABLE,
    RunConfig,
    default_output_dir,
    resolve_config,
)
from spdtransport.exceptions import ArtifactIOError, InvalidInput
from spdtransport.pipeline import HUB_IDENTITY, METHODS


class RunConfigTest(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def config_file(self, data):
        path = os.path.join(self.tmp, 'config.json')
        with open(path, 'w') as f:
            json.dump(data, f)
        return path

    def test_defaults(self):
        cfg = resolve_config()
        self.assertEqual(cfg.seed, 0)
        self.assertEqual(cfg.methods, list(METHODS))
        self.assertEqual(cfg.mean_config().epsilon, 1e-9)
        self.assertEqual(cfg.mean_config().max_iterations, 100)
        self.assertEqual(cfg.toy.n_series, 100)
        self.assertEqual(cfg.multidomain.dim, 22)

    @override_settings(SPDTRANSPORT={'seed': 7, 'workers': 2})
    def test_layers(self):
        self.assertEqual(resolve_config().seed, 7)
        path = self.config_file({'seed': 8, 'toy': {'n_series': 12}})
        cfg = resolve_config(path)
        self.assertEqual((cfg.seed, cfg.workers, cfg.toy.n_series), (8, 2, 12))
        cfg = resolve_config(path, {'seed': 9, 'toy.n_series': None,
                                    'multidomain.dim': 5})
        self.assertEqual((cfg.seed, cfg.toy.n_series, cfg.multidomain.dim),
                         (9, 12, 5))

    def test_unknown_keys(self):
        with self.assertRaisesRegex(InvalidInput, 'colour'):
            resolve_config(self.config_file({'colour': 'red'}))
        with self.assertRaisesRegex(InvalidInput, 'toy.colour'):
            resolve_config(self.config_file({'toy': {'colour': 'red'}}))
        with self.assertRaises(InvalidInput):
            resolve_config(self.config_file(['seed', 1]))

    def test_invalid_values(self):
        for data in ({'seed': -1}, {'methods': ['nearest']},
                     {'hub': 'median'}, {'workers': 0}, {'epsilon': 0},
                     {'multidomain': {'noise_level': -0.1}},
                     {'toy': {'f0': 1000}}):
            with self.assertRaises(InvalidInput, msg=data):
                RunConfig.from_dict(data)

    def test_missing_file(self):
        with self.assertRaises(ArtifactIOError):
            resolve_config(os.path.join(self.tmp, 'absent.json'))

    def test_matrix_hub(self):
        cfg = RunConfig.from_dict({'hub': [[2.0, 0.0], [0.0, 1.0]]})
        np.testing.assert_array_equal(cfg.hub_value(), np.diag([2.0, 1.0]))
        self.assertEqual(RunConfig.from_dict({'hub': HUB_IDENTITY}).hub_value(),
                         HUB_IDENTITY)

    def test_digest(self):
        a = RunConfig.from_dict({'output_dir': '/tmp/a'})
        b = RunConfig.from_dict({'output_dir': '/tmp/b'})
        c = RunConfig.from_dict({'seed': 1})
        self.assertEqual(a.digest(), b.digest())
        self.assertNotEqual(a.digest(), c.digest())
        self.assertNotIn('output_dir', a.to_dict())
        self.assertEqual(len(a.digest()), 64)


class OutputDirTest(SimpleTestCase):

    @override_settings(SPDTRANSPORT_OUTPUT_DIR='/srv/runs')
    def test_environment_first(self):
        with mock.patch.dict(os.environ, {OUTPUT_DIR_VARIABLE: '/data/runs'}):
            self.assertEqual(default_output_dir(), '/data/runs')
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(default_output_dir(), '/srv/runs')

    @override_settings(SPDTRANSPORT_OUTPUT_DIR=None, BASE_DIR='/srv/project')
    def test_base_dir(self):
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(default_output_dir(),
                             os.path.join('/srv/project', 'data'))
