import functools
import json
import os
import shutil
import stat

import numpy as np

import utils.file_utils as file_utils
from config.exceptions import UnsupportedFamilyException
from geometry.background import BackgroundModel
from geometry.metric_field import MetricField, PerturbedMetric, PerturbationSpec
from geometry.sphere_spectral import SphereGrid

temp_folder = 'tests_temp'

COARSE_DEGREE = 8


def create_file(filepath, *, overwrite=False, text='test text'):
    if not os.path.exists(temp_folder):
        os.makedirs(temp_folder)

    filename = os.path.basename(filepath)
    folder = os.path.join(temp_folder, os.path.dirname(filepath))
    if not os.path.exists(folder):
        os.makedirs(folder)

    file_path = os.path.join(folder, filename)
    if os.path.exists(file_path) and not overwrite:
        raise Exception('File ' + file_path + ' already exists')

    file_utils.write_file(file_path, text)

    return file_path


def write_experiment_config(config_object, filename='experiment.json'):
    return create_file(filename, text=json.dumps(config_object), overwrite=True)


def setup():
    if os.path.exists(temp_folder):
        _rmtree(temp_folder)

    os.makedirs(temp_folder)


def cleanup():
    if os.path.exists(temp_folder):
        _rmtree(temp_folder)


def _rmtree(folder):
    exception = None

    def on_rm_error(func, path, exc_info):
        try:
            os.chmod(path, stat.S_IWRITE | stat.S_IEXEC | stat.S_IREAD)
            os.remove(path)
        except Exception as e:
            print('Failed to remove path ' + path + ': ' + str(e))
            nonlocal exception
            if exception is None:
                exception = e

    shutil.rmtree(folder, onerror=on_rm_error)
    if exception:
        raise exception


@functools.lru_cache(maxsize=None)
def background(m=1.0):
    return BackgroundModel(m)


@functools.lru_cache(maxsize=None)
def coarse_grid(degree=COARSE_DEGREE):
    return SphereGrid(degree)


@functools.lru_cache(maxsize=None)
def background_metric(m=1.0):
    return PerturbedMetric(background(m))


def perturbed_metric(family, amplitude, m=1.0, **spec_args):
    return PerturbedMetric(background(m), PerturbationSpec(family=family, amplitude=amplitude, **spec_args))


def experiment_dict(**overrides):
    """Small, fast experiment: coarse grid and a short continuation"""
    config = {
        'mass': 1.0,
        'resolution': 6,
        'perturbation': {'family': 'none'},
        'continuation': {'step': 0.2, 's_max': 1.0},
        'checks': {'probe_points': 10, 'decay_s_max': 2.0},
        'output': {'folder': os.path.join(temp_folder, 'output')}
    }
    config.update(overrides)
    return config


class CallableMetric(MetricField):
    """Metric given by a function (s, theta, phi) -> (g, dg, d2g); no third derivatives"""

    def __init__(self, model, function, *, check=True) -> None:
        super().__init__(model)
        self.function = function
        if check:
            self._check_probe()

    def metric_jets(self, s, theta, phi, order=2):
        if order > 2:
            raise UnsupportedFamilyException('Callable metrics provide derivatives up to second order only')
        s, theta, phi = np.broadcast_arrays(np.asarray(s, dtype=float),
                                            np.asarray(theta, dtype=float),
                                            np.asarray(phi, dtype=float))
        return [np.asarray(jet, dtype=float) for jet in self.function(s, theta, phi)][:order + 1]


def callable_background(m=1.0):
    metric = background_metric(m)
    return CallableMetric(metric.model, lambda s, theta, phi: metric.metric_jets(s, theta, phi))
