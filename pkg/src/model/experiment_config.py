import logging
import os

import utils.custom_json as custom_json
import utils.file_utils as file_utils
from config.exceptions import InvalidConfigException, DomainException, UnsupportedFamilyException
from foliation.foliation_engine import VARIANTS, VARIANT_MINIMAL
from geometry import perturbations
from geometry.metric_field import PerturbationSpec
from model.model_helper import read_int_from_config, read_float_from_config, read_str_from_config, read_dict, \
    read_list, read_bool_from_config, check_known_keys, InvalidValueException, InvalidValueTypeException
from solver.cmc_solver import SolveSettings

LOGGER = logging.getLogger('cmc_foliation.experiment_config')

TOP_LEVEL_KEYS = ['mass', 'resolution', 'seed', 'variant', 'grid', 'perturbation', 'continuation', 'checks', 'output']


def _positive(key, value):
    if not value > 0:
        raise InvalidValueException(key, '"%s" should be > 0, but was %r' % (key, value))
    return value


def _in_range(key, value, lower, upper):
    if value < lower or value > upper:
        raise InvalidValueException(key, '"%s" should be in [%r, %r], but was %r' % (key, lower, upper, value))
    return value


class GridConfig:
    KEYS = ['theta_nodes', 'phi_nodes']

    def __init__(self) -> None:
        self.theta_nodes = None
        self.phi_nodes = None

    @classmethod
    def from_json(cls, json_config, resolution):
        config = GridConfig()
        check_known_keys(json_config, cls.KEYS, 'grid')

        config.theta_nodes = read_int_from_config('theta_nodes', json_config)
        config.phi_nodes = read_int_from_config('phi_nodes', json_config)
        if config.theta_nodes is not None and config.theta_nodes < resolution + 1:
            raise InvalidValueException('theta_nodes', 'theta_nodes should be at least resolution + 1')
        if config.phi_nodes is not None and config.phi_nodes < 2 * resolution + 1:
            raise InvalidValueException('phi_nodes', 'phi_nodes should be at least 2 * resolution + 1')

        return config


class PerturbationConfig:
    KEYS = ['family', 'amplitude', 'a_harmonics', 'b_harmonics', 'c_harmonics', 'profile']
    PROFILE_KEYS = ['kind', 'power', 'rate']

    @classmethod
    def from_json(cls, json_config):
        check_known_keys(json_config, cls.KEYS, 'perturbation')

        family = read_str_from_config(json_config, 'family', default=perturbations.FAMILY_NONE,
                                      allowed_values=perturbations.FAMILIES)
        amplitude = read_float_from_config('amplitude', json_config, default=0.0)

        profile = read_dict(json_config, 'profile')
        check_known_keys(profile, cls.PROFILE_KEYS, 'perturbation.profile')
        kind = read_str_from_config(profile, 'kind', default=perturbations.PROFILE_POWER_EXP,
                                    allowed_values=perturbations.PROFILES)
        power = read_float_from_config('power', profile, default=2.0)
        rate = read_float_from_config('rate', profile, default=4.0)
        if power < 0:
            raise InvalidValueException('power', 'profile power should be >= 0, but was %r' % power)
        _positive('rate', rate)

        default_b = [list(h) for h in PerturbationSpec().b_harmonics]
        return PerturbationSpec(
            family=family,
            amplitude=amplitude,
            a_harmonics=_read_harmonics(json_config, 'a_harmonics', []),
            b_harmonics=_read_harmonics(json_config, 'b_harmonics', default_b),
            c_harmonics=_read_harmonics(json_config, 'c_harmonics', []),
            profile_kind=kind,
            profile_power=power,
            profile_rate=rate)


def _read_harmonics(json_config, key, default):
    harmonics = read_list(json_config, key, default=default)
    result = []
    for entry in harmonics:
        if not isinstance(entry, list) or len(entry) != 3:
            raise InvalidValueException(key, '%s entries should be [l, k, weight], but was %r' % (key, entry))
        l, k, weight = entry
        if not isinstance(l, int) or not isinstance(k, int) or isinstance(l, bool) or isinstance(k, bool):
            raise InvalidValueException(key, '%s degrees should be integers, but was %r' % (key, entry))
        if l < 0 or abs(k) > l:
            raise InvalidValueException(key, '%s: invalid degree l=%r, k=%r' % (key, l, k))
        result.append((l, k, read_float_from_config('weight', {'weight': weight})))
    return result


class ContinuationConfig:
    KEYS = ['step', 's_max', 'tolerance', 'max_iterations', 'fd_step', 'max_halvings', 'homotopy_stages']

    def __init__(self) -> None:
        self.step = 0.1
        self.s_max = 8.0
        self.settings = SolveSettings()

    @classmethod
    def from_json(cls, json_config):
        config = ContinuationConfig()
        check_known_keys(json_config, cls.KEYS, 'continuation')

        config.step = _in_range('step', read_float_from_config('step', json_config, default=config.step), 1e-3, 0.2)
        config.s_max = _in_range('s_max', read_float_from_config('s_max', json_config, default=config.s_max),
                                 0.5, 40.0)

        defaults = config.settings
        tolerance = _positive('tolerance', read_float_from_config('tolerance', json_config,
                                                                  default=defaults.tolerance))
        max_iterations = _in_range('max_iterations', read_int_from_config('max_iterations', json_config,
                                                                          default=defaults.max_iterations), 1, 100)
        fd_step = _positive('fd_step', read_float_from_config('fd_step', json_config, default=defaults.fd_step))
        max_halvings = _in_range('max_halvings', read_int_from_config('max_halvings', json_config,
                                                                      default=defaults.max_halvings), 0, 30)
        homotopy_stages = _in_range('homotopy_stages', read_int_from_config('homotopy_stages', json_config,
                                                                            default=defaults.homotopy_stages), 1, 50)

        config.settings = SolveSettings(tolerance, max_iterations, fd_step, max_halvings, homotopy_stages)
        return config


class ChecksConfig:
    KEYS = ['probe_points', 'decay_s_max', 'richardson', 'match_center', 'match_points', 'match_spacing']

    def __init__(self) -> None:
        self.probe_points = 50
        self.decay_s_max = 8.0
        self.richardson = False
        self.match_center = 4.0
        self.match_points = 5
        self.match_spacing = 0.1

    @classmethod
    def from_json(cls, json_config):
        config = ChecksConfig()
        check_known_keys(json_config, cls.KEYS, 'checks')

        config.probe_points = _in_range('probe_points', read_int_from_config(
            'probe_points', json_config, default=config.probe_points), 1, 100000)
        config.decay_s_max = _in_range('decay_s_max', read_float_from_config(
            'decay_s_max', json_config, default=config.decay_s_max), 0.5, 30.0)
        config.richardson = read_bool_from_config('richardson', json_config, default=config.richardson)
        config.match_center = _positive('match_center', read_float_from_config(
            'match_center', json_config, default=config.match_center))
        config.match_points = _in_range('match_points', read_int_from_config(
            'match_points', json_config, default=config.match_points), 1, 50)
        config.match_spacing = _positive('match_spacing', read_float_from_config(
            'match_spacing', json_config, default=config.match_spacing))
        return config

    def match_window(self):
        offset = (self.match_points - 1) / 2.0
        return [self.match_center + (i - offset) * self.match_spacing for i in range(self.match_points)]


class ExperimentConfig:
    def __init__(self) -> None:
        self.mass = 1.0
        self.resolution = 15
        self.seed = 0
        self.variant = VARIANT_MINIMAL
        self.grid = GridConfig()
        self.perturbation = PerturbationSpec()
        self.continuation = ContinuationConfig()
        self.checks = ChecksConfig()
        self.output_folder = 'output'

    def describe(self):
        return {
            'mass': self.mass,
            'resolution': self.resolution,
            'seed': self.seed,
            'variant': self.variant,
            'grid': {'theta_nodes': self.grid.theta_nodes, 'phi_nodes': self.grid.phi_nodes},
            'perturbation': self.perturbation.describe(),
            'continuation': {
                'step': self.continuation.step,
                's_max': self.continuation.s_max,
                'tolerance': self.continuation.settings.tolerance,
                'max_iterations': self.continuation.settings.max_iterations,
                'fd_step': self.continuation.settings.fd_step,
                'max_halvings': self.continuation.settings.max_halvings,
                'homotopy_stages': self.continuation.settings.homotopy_stages
            },
            'checks': {
                'probe_points': self.checks.probe_points,
                'decay_s_max': self.checks.decay_s_max,
                'richardson': self.checks.richardson,
                'match_window': self.checks.match_window()
            },
            'output': {'folder': self.output_folder}
        }


def from_dict(json_object, *, resolution=None, variant=None, output_folder=None):
    """Builds a validated ExperimentConfig; CLI overrides win over file values"""
    try:
        return _parse(json_object, resolution, variant, output_folder)
    except InvalidValueException as e:
        raise InvalidConfigException(e.get_user_message()) from e
    except (InvalidValueTypeException, DomainException, UnsupportedFamilyException, ValueError) as e:
        raise InvalidConfigException(str(e)) from e


def _parse(json_object, resolution, variant, output_folder):
    if not isinstance(json_object, dict):
        raise InvalidValueTypeException('Experiment config should be a JSON object')
    check_known_keys(json_object, TOP_LEVEL_KEYS)

    config = ExperimentConfig()

    config.mass = read_float_from_config('mass', json_object, default=config.mass)
    if not config.mass > 0:
        raise InvalidValueException('mass', 'mass should be > 0 (m>0 required), but was %r' % config.mass)

    if resolution is None:
        resolution = read_int_from_config('resolution', json_object, default=config.resolution)
    config.resolution = _in_range('resolution', resolution, 2, 40)
    config.seed = read_int_from_config('seed', json_object, default=config.seed)

    if variant is None:
        variant = read_str_from_config(json_object, 'variant', default=config.variant)
    if variant not in VARIANTS:
        raise InvalidValueException('variant', 'variant should be one of %s, but was %r' % (VARIANTS, variant))
    config.variant = variant

    config.grid = GridConfig.from_json(read_dict(json_object, 'grid'), config.resolution)
    config.perturbation = PerturbationConfig.from_json(read_dict(json_object, 'perturbation'))
    config.continuation = ContinuationConfig.from_json(read_dict(json_object, 'continuation'))
    config.checks = ChecksConfig.from_json(read_dict(json_object, 'checks'))

    output = read_dict(json_object, 'output')
    check_known_keys(output, ['folder'], 'output')
    config.output_folder = read_str_from_config(output, 'folder', default=config.output_folder, blank_to_none=True)
    if output_folder is not None:
        config.output_folder = output_folder

    return config


def from_json(conf_path, **overrides):
    if conf_path is None:
        json_object = {}
    elif not os.path.exists(conf_path):
        raise InvalidConfigException('Config file not found: ' + conf_path)
    else:
        try:
            json_object = custom_json.loads(file_utils.read_file(conf_path))
        except ValueError as e:
            raise InvalidConfigException('Cannot parse %s: %s' % (conf_path, e)) from e

    LOGGER.debug('Loaded experiment config from %s', conf_path)
    return from_dict(json_object, **overrides)
