import argparse
import json
import logging
import logging.config
import os
import sys

from config.constants import EXIT_CONFIG_ERROR, EXIT_DIVERGENCE, EXIT_ASSERTION_FAILURE, LOG_FILE, \
    COMMAND_VERIFY_BACKGROUND, COMMAND_FOLIATE, COMMAND_PENROSE, COMMAND_MATCH_CHECK
from config.exceptions import InvalidConfigException, DomainException, UnsupportedFamilyException, \
    DivergenceException, LinearSolveException, FoliationException, MatchingException, ResonanceException, \
    DegenerateMetricException, GeometryException, ContinuationException
from foliation.foliation_engine import VARIANTS
from model import experiment_config
from reporting import pipeline
from utils import file_utils

LOGGER = logging.getLogger('cmc_foliation.main')


def _create_parser():
    parser = argparse.ArgumentParser(
        prog='cmc-foliation',
        description='CMC sphere foliations of perturbed Schwarzschild-AdS metrics and the Penrose inequality.')
    parser.add_argument('-d', '--config-dir', default='conf', help='folder with logging.json')
    parser.add_argument('-l', '--log-folder', default='logs')

    subparsers = parser.add_subparsers(dest='command', required=True)
    for command, help_text in [
        (COMMAND_VERIFY_BACKGROUND, 'check the Schwarzschild-AdS background invariants'),
        (COMMAND_FOLIATE, 'build the CMC foliation and run all foliation checks'),
        (COMMAND_PENROSE, 'foliate and print the Penrose verdict'),
        (COMMAND_MATCH_CHECK, 'foliate and compare free and prescribed-H leaves around the matching window')]:
        subparser = subparsers.add_parser(command, help=help_text)
        subparser.add_argument('-c', '--config', default=None, help='experiment JSON file')
        subparser.add_argument('-o', '--out', default=None, help='output folder, overrides output.folder')
        subparser.add_argument('-r', '--resolution', type=int, default=None, help='harmonic degree L')
        subparser.add_argument('--variant', choices=VARIANTS, default=None)

    return parser


def configure_logging(config_dir, log_folder):
    logging_conf_file = os.path.join(config_dir, 'logging.json')
    if not os.path.exists(logging_conf_file):
        logging.basicConfig(level=logging.INFO, format='%(asctime)s [%(name)s.%(levelname)s] %(message)s')
        return

    with open(logging_conf_file, 'rt') as f:
        log_config = json.load(f)
        handlers = log_config.get('handlers')
        if handlers:
            file_handler = handlers.get('file')
            if file_handler:
                file_handler['filename'] = os.path.join(log_folder, LOG_FILE)

        file_utils.prepare_folder(log_folder)

        logging.config.dictConfig(log_config)


def run_command(command, config):
    """Runs one subcommand and maps failures that escaped the pipeline to exit codes"""
    try:
        result = pipeline.COMMANDS[command](config)
    except (DomainException, UnsupportedFamilyException, DegenerateMetricException) as e:
        LOGGER.error('Invalid experiment: %s', e)
        return EXIT_CONFIG_ERROR, None
    except (DivergenceException, LinearSolveException, GeometryException, ContinuationException) as e:
        LOGGER.error('Solver diverged: %s', e)
        return EXIT_DIVERGENCE, None
    except (FoliationException, MatchingException, ResonanceException) as e:
        LOGGER.error('%s failed: %s', command, e)
        return EXIT_ASSERTION_FAILURE, None

    return result.exit_code, result


def main(argv=None):
    args = _create_parser().parse_args(argv)
    configure_logging(args.config_dir, args.log_folder)

    try:
        config = experiment_config.from_json(args.config,
                                             resolution=args.resolution,
                                             variant=args.variant,
                                             output_folder=args.out)
    except InvalidConfigException as e:
        print('Invalid config: ' + str(e), file=sys.stderr)
        return EXIT_CONFIG_ERROR

    LOGGER.info('Starting %s (m=%r, L=%d, variant %s)', args.command, config.mass, config.resolution,
                config.variant)

    exit_code, result = run_command(args.command, config)

    if result is not None:
        if args.command == COMMAND_PENROSE:
            print(pipeline.penrose_summary(result), end='')
        else:
            print(result.checks.text(), end='')

    return exit_code


if __name__ == '__main__':
    os.chdir(os.path.dirname(os.path.dirname(os.path.realpath(__file__))))
    sys.exit(main())
