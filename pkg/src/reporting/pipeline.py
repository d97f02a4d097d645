"""Command bodies behind the CLI: each builds the geometry from an ExperimentConfig, runs its checks and
writes report.json, leaves.csv and checks.txt into the output folder."""
import logging

from config.constants import EXIT_OK, EXIT_ASSERTION_FAILURE, EXIT_DIVERGENCE, COMMAND_VERIFY_BACKGROUND, \
    COMMAND_FOLIATE, COMMAND_PENROSE, COMMAND_MATCH_CHECK
from config.exceptions import FoliationException, EstimateUnavailableException, MatchingException, \
    ResonanceException, ContinuationException
from foliation import diagnostics, foliation_engine
from geometry import metric_field
from geometry.background import BackgroundModel
from geometry.metric_field import PerturbedMetric
from geometry.sphere_spectral import SphereGrid
from reporting import artifacts
from reporting.background_suite import run_background_suite
from reporting.checks import CheckList

LOGGER = logging.getLogger('cmc_foliation.pipeline')

MATCHING_TOLERANCE = 1e-8
RICHARDSON_RANGE = (3.0, 5.0)
LEMMA_RATIO_BOUND = 10.0


class CommandResult:
    def __init__(self, exit_code, report, checks, leaves=None) -> None:
        self.exit_code = exit_code
        self.report = report
        self.checks = checks
        self.leaves = leaves


class Experiment:
    """Background, grid and metric built once from a config"""

    def __init__(self, config) -> None:
        self.config = config
        self.model = BackgroundModel(config.mass)
        self.grid = SphereGrid(config.resolution, config.grid.theta_nodes, config.grid.phi_nodes)
        self.metric = PerturbedMetric(self.model, config.perturbation)

    @property
    def settings(self):
        return self.config.continuation.settings

    def probe(self):
        s_max = max(self.config.continuation.s_max, self.model.s_collar)
        return metric_field.probe_points(self.config.seed, self.config.checks.probe_points, (0.0, s_max))

    def hypotheses(self):
        return foliation_engine.evaluate_hypotheses(self.metric, self.grid, self.probe(),
                                                    self.config.checks.decay_s_max)

    def foliate(self, hypotheses, step=None):
        continuation = self.config.continuation
        return foliation_engine.foliate(self.metric, self.grid, continuation.s_max,
                                        continuation.step if step is None else step,
                                        self.settings, self.config.variant, hypotheses)


def _base_report(command, config):
    return {'command': command, 'config': config.describe()}


def _failure_report(report, e, leaf_index=None):
    report['error'] = {
        'type': type(e).__name__,
        'message': str(e),
        'leaf_index': getattr(e, 'leaf_index', leaf_index)
    }
    if getattr(e, 's', None) is not None:
        report['error']['s'] = e.s
    history = getattr(e, 'residual_history', None)
    if history:
        report['error']['residual_history'] = history
    return report


def _finish(config, command, report, checks, leaves=None, exit_code=None):
    if exit_code is None:
        exit_code = EXIT_OK if checks.passed else EXIT_ASSERTION_FAILURE
    report['passed'] = exit_code == EXIT_OK
    report['exit_code'] = exit_code
    report['checks'] = checks.to_list()
    artifacts.write_artifacts(config.output_folder, report, checks, leaves)
    LOGGER.info('%s finished with exit code %d', command, exit_code)
    return CommandResult(exit_code, report, checks, leaves)


def verify_background(config):
    model = BackgroundModel(config.mass)
    grid = SphereGrid(config.resolution, config.grid.theta_nodes, config.grid.phi_nodes)
    checks, suite = run_background_suite(model, grid, config.seed, config.checks.probe_points,
                                         config.continuation.settings)

    report = _base_report(COMMAND_VERIFY_BACKGROUND, config)
    report['background'] = suite
    return _finish(config, COMMAND_VERIFY_BACKGROUND, report, checks)


def _hypothesis_checks(checks, hypotheses, report=None):
    if report is not None and report.leaves:
        # the admissible class is checked on the probe and along every leaf
        leaves_floor = min(leaf.min_r_plus_6 for leaf in report.leaves)
        hypotheses.min_r_plus_6 = min(hypotheses.min_r_plus_6, leaves_floor)

    checks.info('min(R + 6)', hypotheses.min_r_plus_6)
    checks.info('decay distance', hypotheses.decay_distance)
    checks.info('boundary sup|H|', hypotheses.boundary_mean_curvature)
    checks.info('hypotheses satisfied', hypotheses.satisfied)


def _run_foliation(experiment, command):
    """Hypotheses and foliation; returns ((report, checks, foliation), None) or (None, failure result)"""
    config = experiment.config
    report = _base_report(command, config)
    checks = CheckList()

    hypotheses = experiment.hypotheses()
    report['hypotheses'] = hypotheses.to_dict()

    try:
        foliation = experiment.foliate(hypotheses)
    except FoliationException as e:
        checks.check('foliation', str(e), False)
        _hypothesis_checks(checks, hypotheses)
        return None, _finish(config, command, _failure_report(report, e), checks, exit_code=EXIT_ASSERTION_FAILURE)
    except ContinuationException as e:
        checks.check('foliation', str(e), False)
        _hypothesis_checks(checks, hypotheses)
        leaves = e.report.leaves if e.report is not None else None
        if leaves:
            report['leaf_count'] = len(leaves)
            report['leaves'] = [leaf.to_dict() for leaf in leaves]
        return None, _finish(config, command, _failure_report(report, e), checks, leaves, exit_code=EXIT_DIVERGENCE)

    _hypothesis_checks(checks, hypotheses, foliation)
    report['hypotheses'] = hypotheses.to_dict()
    report['leaf_count'] = len(foliation.leaves)
    report['leaves'] = [leaf.to_dict() for leaf in foliation.leaves]
    return (report, checks, foliation), None


def _mass_limit(checks, foliation):
    try:
        limit = diagnostics.mass_limit_estimate(foliation)
    except EstimateUnavailableException as e:
        checks.info('mass limit', 'unavailable', str(e))
        return None
    checks.check('mass limit equals m', limit['limit'], limit['passed'], 'deviation %.3e' % limit['deviation'])
    return limit


def _decay(checks, foliation):
    try:
        decay = diagnostics.decay_diagnostics(foliation)
    except EstimateUnavailableException as e:
        checks.info('decay rates', 'unavailable', str(e))
        return None

    for name in ['sup_w', 'int_ds_tan_sq', 'int_ring_A_sq']:
        entry = decay[name]
        if not entry['resolved']:
            checks.info('decay slope of ' + name, 'below round-off',
                        '%d resolved leaves' % entry['resolved_leaves'])
        else:
            checks.check('decay slope of ' + name, entry['slope'], entry['passed'], '<= %g' % entry['bound'])

    ratio = decay['lemma_scaled']['ratio']
    if ratio is None:
        checks.info('scaled expansion residual growth', 'below round-off')
    else:
        checks.bound('scaled expansion residual growth', ratio, LEMMA_RATIO_BOUND)
    return decay


def _richardson(checks, experiment, hypotheses, foliation):
    fine = experiment.foliate(hypotheses, step=foliation.step / 2.0)
    ratio = diagnostics.richardson_ratio(foliation, fine)
    if ratio is None:
        checks.info('first-variation Richardson ratio', 'at round-off')
    else:
        lower, upper = RICHARDSON_RANGE
        checks.check('first-variation Richardson ratio', ratio, lower <= ratio <= upper,
                     'in [%g, %g]' % RICHARDSON_RANGE)
    return ratio


def _foliation_checks(checks, experiment, foliation):
    result = {}

    monotonicity = diagnostics.monotonicity_report(foliation)
    result['monotonicity'] = monotonicity
    if monotonicity['verdict'] == diagnostics.VERDICT_HYPOTHESES_NOT_MET:
        checks.info('Hawking mass monotone', monotonicity['min_increment'], monotonicity['verdict'])
    else:
        checks.check('Hawking mass monotone', monotonicity['min_increment'], monotonicity['monotone'],
                     monotonicity.get('note'))
    checks.info('first-variation max residual', monotonicity['first_variation']['max_residual'])

    outermost = diagnostics.outermost_check(foliation)
    result['outermost'] = outermost
    checks.check('interior leaves have H > %g' % outermost['threshold'], outermost['min_interior_H'],
                 outermost['passed'])

    result['mass_limit'] = _mass_limit(checks, foliation)
    result['decay'] = _decay(checks, foliation)
    result['rigidity'] = diagnostics.rigidity_diagnostics(foliation)
    checks.info('near rigid', result['rigidity']['near_rigid'])
    result['leaf_parametrisation'] = diagnostics.leaf_parametrisation(foliation)

    if experiment.config.checks.richardson:
        result['richardson_ratio'] = _richardson(checks, experiment, foliation.hypotheses, foliation)
    return result


def _penrose(checks, foliation, mass_limit):
    limit = mass_limit['limit'] if mass_limit else None
    penrose = diagnostics.penrose_report(foliation, limit)
    if penrose['verdict'] == diagnostics.VERDICT_HYPOTHESES_NOT_MET:
        checks.info('Penrose inequality', penrose['lhs'], penrose['verdict'])
    else:
        checks.check('Penrose inequality', penrose['lhs'], penrose['verdict'] == diagnostics.VERDICT_PASS,
                     'gap %.6g' % penrose['gap'])
    return penrose


def foliate(config):
    experiment = Experiment(config)
    prepared, failure = _run_foliation(experiment, COMMAND_FOLIATE)
    if failure:
        return failure
    report, checks, foliation = prepared

    try:
        report['diagnostics'] = _foliation_checks(checks, experiment, foliation)
    except ContinuationException as e:
        # only the half-step Richardson foliation gets here
        checks.check('half-step foliation', str(e), False)
        return _finish(config, COMMAND_FOLIATE, _failure_report(report, e), checks, foliation.leaves,
                       exit_code=EXIT_DIVERGENCE)
    report['penrose'] = _penrose(checks, foliation, report['diagnostics']['mass_limit'])
    return _finish(config, COMMAND_FOLIATE, report, checks, foliation.leaves)


def penrose(config):
    experiment = Experiment(config)
    prepared, failure = _run_foliation(experiment, COMMAND_PENROSE)
    if failure:
        return failure
    report, checks, foliation = prepared

    mass_limit = _mass_limit(checks, foliation)
    report['mass_limit'] = mass_limit
    report['penrose'] = _penrose(checks, foliation, mass_limit)
    return _finish(config, COMMAND_PENROSE, report, checks, foliation.leaves)


def penrose_summary(result):
    """One-page verdict text for the penrose command"""
    report = result.report
    lines = ['Penrose inequality (%s boundary)' % report['config']['variant']]

    hypotheses = report.get('hypotheses')
    if hypotheses:
        lines.append('  min(R + 6):              %.6g' % hypotheses['min_r_plus_6'])
        lines.append('  decay distance:          %s' % hypotheses['decay_distance'])
        lines.append('  boundary sup|H|:         %.6g' % hypotheses['boundary_mean_curvature'])
        lines.append('  hypotheses satisfied:    %s' % hypotheses['satisfied'])

    penrose_result = report.get('penrose')
    if penrose_result is None:
        error = report.get('error', {})
        lines.append('  no verdict: %s (leaf %s)' % (error.get('message'), error.get('leaf_index')))
        return '\n'.join(lines) + '\n'

    lines.append('  boundary area:           %.12g' % penrose_result['boundary_area'])
    lines.append('  LHS:                     %.12g' % penrose_result['lhs'])
    lines.append('  m:                       %.12g' % penrose_result['mass'])
    if penrose_result['mass_limit'] is not None:
        lines.append('  mass limit:              %.12g' % penrose_result['mass_limit'])
    if penrose_result['equality']:
        lines.append('  gap = 0 (equality case)')
    else:
        lines.append('  gap = %.6g' % penrose_result['gap'])
    lines.append('  verdict:                 %s' % penrose_result['verdict'])
    return '\n'.join(lines) + '\n'


def match_check(config):
    experiment = Experiment(config)
    prepared, failure = _run_foliation(experiment, COMMAND_MATCH_CHECK)
    if failure:
        return failure
    report, checks, foliation = prepared

    window = config.checks.match_window()
    try:
        points = foliation_engine.matching_check(experiment.metric, foliation, window, experiment.settings)
    except (MatchingException, ResonanceException) as e:
        checks.check('matching', str(e), False)
        return _finish(config, COMMAND_MATCH_CHECK, _failure_report(report, e), checks, foliation.leaves)
    except foliation_engine.SOLVE_FAILURES as e:
        checks.check('matching', str(e), False)
        return _finish(config, COMMAND_MATCH_CHECK, _failure_report(report, e), checks, foliation.leaves,
                       exit_code=EXIT_DIVERGENCE)

    report['matching'] = [point.to_dict() for point in points]
    for point in points:
        checks.bound('free and prescribed leaves agree at s=%.4f' % point.s, point.distance, MATCHING_TOLERANCE)
    return _finish(config, COMMAND_MATCH_CHECK, report, checks, foliation.leaves)


COMMANDS = {
    COMMAND_VERIFY_BACKGROUND: verify_background,
    COMMAND_FOLIATE: foliate,
    COMMAND_PENROSE: penrose,
    COMMAND_MATCH_CHECK: match_check,
}
