import os
import unittest

from parameterized import parameterized

from config.exceptions import InvalidConfigException
from geometry import perturbations
from model import experiment_config
from tests import test_utils


class TestDefaults(unittest.TestCase):
    def test_empty_config(self):
        config = experiment_config.from_dict({})
        self.assertEqual(1.0, config.mass)
        self.assertEqual(15, config.resolution)
        self.assertEqual('minimal', config.variant)
        self.assertEqual(perturbations.FAMILY_NONE, config.perturbation.family)
        self.assertEqual(0.1, config.continuation.step)
        self.assertEqual(8.0, config.continuation.s_max)
        self.assertEqual(50, config.checks.probe_points)
        self.assertFalse(config.checks.richardson)
        self.assertEqual('output', config.output_folder)

    def test_match_window(self):
        window = experiment_config.from_dict({}).checks.match_window()
        self.assertEqual(5, len(window))
        for actual, expected in zip(window, [3.8, 3.9, 4.0, 4.1, 4.2]):
            self.assertAlmostEqual(expected, actual, places=12)

    def test_describe(self):
        description = experiment_config.from_dict(test_utils.experiment_dict()).describe()
        self.assertEqual(6, description['resolution'])
        self.assertEqual(0.2, description['continuation']['step'])
        self.assertEqual('none', description['perturbation']['family'])
        self.assertEqual(5, len(description['checks']['match_window']))


class TestParsing(unittest.TestCase):
    def test_full_perturbation(self):
        config = experiment_config.from_dict({
            'mass': 2.0,
            'perturbation': {
                'family': 'sphere_block',
                'amplitude': 1e-3,
                'a_harmonics': [[0, 0, 0.5]],
                'b_harmonics': [[2, 0, 1.0], [3, -1, 0.25]],
                'c_harmonics': [[1, 1, 2]],
                'profile': {'kind': 'saturated', 'rate': 5}
            }
        })

        spec = config.perturbation
        self.assertEqual(2.0, config.mass)
        self.assertEqual('sphere_block', spec.family)
        self.assertEqual(1e-3, spec.amplitude)
        self.assertEqual(((0, 0, 0.5),), spec.a_harmonics)
        self.assertEqual(((2, 0, 1.0), (3, -1, 0.25)), spec.b_harmonics)
        self.assertEqual(((1, 1, 2.0),), spec.c_harmonics)
        self.assertEqual('saturated', spec.profile_kind)
        self.assertEqual(5.0, spec.profile_rate)

    def test_continuation_settings(self):
        config = experiment_config.from_dict({
            'continuation': {'step': 0.05, 's_max': 3, 'tolerance': 1e-11, 'max_iterations': 20,
                             'homotopy_stages': 8}
        })
        self.assertEqual(0.05, config.continuation.step)
        self.assertEqual(3.0, config.continuation.s_max)
        self.assertEqual(1e-11, config.continuation.settings.tolerance)
        self.assertEqual(20, config.continuation.settings.max_iterations)
        self.assertEqual(8, config.continuation.settings.homotopy_stages)

    def test_grid(self):
        config = experiment_config.from_dict({'resolution': 4, 'grid': {'theta_nodes': 9, 'phi_nodes': 12}})
        self.assertEqual(9, config.grid.theta_nodes)
        self.assertEqual(12, config.grid.phi_nodes)

    def test_checks(self):
        config = experiment_config.from_dict({'checks': {'richardson': True, 'match_center': 3.0,
                                                         'match_points': 1}})
        self.assertTrue(config.checks.richardson)
        self.assertEqual([3.0], config.checks.match_window())

    def test_blank_output_folder(self):
        config = experiment_config.from_dict({'output': {'folder': ' '}})
        self.assertEqual('output', config.output_folder)


class TestOverrides(unittest.TestCase):
    def test_resolution(self):
        config = experiment_config.from_dict({'resolution': 10}, resolution=20)
        self.assertEqual(20, config.resolution)

    def test_variant(self):
        config = experiment_config.from_dict({'variant': 'minimal'}, variant='h2')
        self.assertEqual('h2', config.variant)

    def test_output_folder(self):
        config = experiment_config.from_dict({'output': {'folder': 'a'}}, output_folder='b')
        self.assertEqual('b', config.output_folder)


class TestValidation(unittest.TestCase):
    @parameterized.expand([
        ({'mass': 0},),
        ({'mass': -1.0},),
        ({'mass': 'heavy'},),
        ({'resolution': 1},),
        ({'resolution': 2.5},),
        ({'variant': 'h3'},),
        ({'masss': 1.0},),
        ({'perturbation': {'family': 'conformal'}},),
        ({'perturbation': {'family': 'gauge', 'amplitud': 1e-3}},),
        ({'perturbation': {'b_harmonics': [[2, 3, 1.0]]}},),
        ({'perturbation': {'b_harmonics': [[2, 0]]}},),
        ({'perturbation': {'b_harmonics': [[2.0, 0, 1.0]]}},),
        ({'perturbation': {'profile': {'kind': 'gaussian'}}},),
        ({'perturbation': {'profile': {'power': -1}}},),
        ({'perturbation': {'profile': {'rate': 0}}},),
        ({'continuation': {'step': 0.5}},),
        ({'continuation': {'s_max': 0.1}},),
        ({'continuation': {'tolerance': 0}},),
        ({'continuation': {'max_iterations': 0}},),
        ({'checks': {'probe_points': 0}},),
        ({'checks': {'match_points': 100}},),
        ({'grid': {'theta_nodes': 3}},),
        ({'grid': [1, 2]},),
        ({'output': {'path': 'x'}},),
    ])
    def test_invalid(self, json_object):
        self.assertRaises(InvalidConfigException, experiment_config.from_dict, json_object)

    def test_not_an_object(self):
        self.assertRaises(InvalidConfigException, experiment_config.from_dict, [1, 2])

    def test_mass_message(self):
        self.assertRaisesRegex(InvalidConfigException, 'm>0', experiment_config.from_dict, {'mass': 0})


class TestFromJson(unittest.TestCase):
    def setUp(self) -> None:
        test_utils.setup()

    def tearDown(self) -> None:
        test_utils.cleanup()

    def test_commented_file(self):
        path = test_utils.create_file('experiment.json', text='// sample\n{\n  // family\n  "mass": 2.0\n}\n')
        self.assertEqual(2.0, experiment_config.from_json(path).mass)

    def test_missing_file(self):
        path = os.path.join(test_utils.temp_folder, 'missing.json')
        self.assertRaisesRegex(InvalidConfigException, 'not found', experiment_config.from_json, path)

    def test_broken_file(self):
        path = test_utils.create_file('experiment.json', text='{"mass": ')
        self.assertRaisesRegex(InvalidConfigException, 'Cannot parse', experiment_config.from_json, path)

    def test_no_file(self):
        self.assertEqual(1.0, experiment_config.from_json(None).mass)

    def test_overrides(self):
        path = test_utils.write_experiment_config(test_utils.experiment_dict())
        config = experiment_config.from_json(path, resolution=4)
        self.assertEqual(4, config.resolution)
        self.assertEqual(os.path.join(test_utils.temp_folder, 'output'), config.output_folder)
